"""Prediction-quality metrics: error rate, NLL, and calibration error.

Expected calibration error bins records by confidence (the maximum
predicted probability) into equal-width right-closed bins over (0, 1],
then averages |accuracy - confidence| over bins weighted by occupancy.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .ioutil import write_text

NLL_FLOOR = 1e-12


@dataclass(frozen=True)
class PredictionRecord:
    """A predicted probability vector with its true class and a tag."""

    probs: np.ndarray
    true_class: int
    tag: str = ""

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.shape[0] < 2:
            raise DataError(f"probs must be a vector of >= 2 classes, got {probs.shape}")
        if np.any(probs < 0) or np.any(probs > 1) or not np.all(np.isfinite(probs)):
            raise DataError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > 1e-6:
            raise DataError(f"probabilities must sum to 1 within 1e-6, got {probs.sum()!r}")
        if not 0 <= self.true_class < probs.shape[0]:
            raise DataError(f"true class {self.true_class} out of range")
        object.__setattr__(self, "probs", probs)


def _require_records(records: Sequence[PredictionRecord]) -> None:
    if len(records) == 0:
        raise DataError("metric computed over an empty record set")


def error_rate(records: Sequence[PredictionRecord]) -> float:
    """Fraction of records whose argmax prediction misses the true class."""
    _require_records(records)
    wrong = sum(1 for r in records if int(np.argmax(r.probs)) != r.true_class)
    return wrong / len(records)


def avg_nll(records: Sequence[PredictionRecord]) -> float:
    """Mean negative log probability of the true class (floored at 1e-12)."""
    _require_records(records)
    total = 0.0
    for r in records:
        total -= math.log(max(float(r.probs[r.true_class]), NLL_FLOOR))
    return total / len(records)


def ece(records: Sequence[PredictionRecord], num_bins: int = 15) -> float:
    """Expected calibration error over equal-width confidence bins.

    Bin b covers ((b-1)/num_bins, b/num_bins]; a confidence of exactly 0
    falls into the first bin.  Empty bins contribute nothing.
    """
    _require_records(records)
    if num_bins < 1:
        raise ValueError(f"num_bins must be >= 1, got {num_bins}")
    edges = np.arange(1, num_bins + 1) / num_bins
    conf = np.array([float(np.max(r.probs)) for r in records])
    correct = np.array(
        [1.0 if int(np.argmax(r.probs)) == r.true_class else 0.0 for r in records]
    )
    bins = np.searchsorted(edges, conf, side="left")
    bins = np.minimum(bins, num_bins - 1)
    total = 0.0
    n = len(records)
    for b in range(num_bins):
        members = bins == b
        count = int(members.sum())
        if count == 0:
            continue
        acc = float(correct[members].mean())
        avg_conf = float(conf[members].mean())
        total += (count / n) * abs(acc - avg_conf)
    return total


@dataclass
class EvalReport:
    """Error/NLL/ECE over a record set, with a per-tag breakdown."""

    error: float
    nll: float
    ece: float
    count: int
    per_tag: dict[str, "EvalReport"] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"error": self.error, "nll": self.nll, "ece": self.ece, "count": self.count}
        if self.per_tag:
            out["per_tag"] = {tag: rep.to_dict() for tag, rep in self.per_tag.items()}
        return out


def evaluate(records: Sequence[PredictionRecord], num_bins: int = 15) -> EvalReport:
    """Overall report plus one sub-report per distinct tag."""
    _require_records(records)
    report = EvalReport(
        error=error_rate(records),
        nll=avg_nll(records),
        ece=ece(records, num_bins),
        count=len(records),
    )
    tags = sorted({r.tag for r in records})
    if len(tags) > 1 or (tags and tags[0] != ""):
        for tag in tags:
            group = [r for r in records if r.tag == tag]
            report.per_tag[tag] = EvalReport(
                error=error_rate(group),
                nll=avg_nll(group),
                ece=ece(group, num_bins),
                count=len(group),
            )
    return report


def format_report_table(report: EvalReport, title: str = "overall") -> str:
    """Aligned text table: one row overall, one per tag."""
    rows = [(title, report)] + sorted(report.per_tag.items())
    name_w = max(len(name) for name, _ in rows)
    lines = [f"{'tag'.ljust(name_w)}  count   error     nll      ece"]
    for name, rep in rows:
        lines.append(
            f"{name.ljust(name_w)}  {rep.count:5d}  {rep.error:7.4f}  {rep.nll:7.4f}  {rep.ece:7.4f}"
        )
    return "\n".join(lines) + "\n"


def write_records_csv(records: Sequence[PredictionRecord], path: str | Path) -> None:
    """CSV with header index,tag,true_class,p0,...,p{C-1}."""
    _require_records(records)
    num_classes = records[0].probs.shape[0]
    rows = [["index", "tag", "true_class"] + [f"p{i}" for i in range(num_classes)]]
    for i, r in enumerate(records):
        if r.probs.shape[0] != num_classes:
            raise DataError("records have inconsistent class counts")
        rows.append([str(i), r.tag, str(r.true_class)] + [repr(float(p)) for p in r.probs])
    import io

    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    write_text(path, buf.getvalue())


def read_records_csv(path: str | Path) -> list[PredictionRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:3] != ["index", "tag", "true_class"]:
            raise DataError(f"{path} is not a prediction-record CSV")
        records = []
        for row in reader:
            probs = np.array([float(v) for v in row[3:]])
            records.append(PredictionRecord(probs, int(row[2]), row[1]))
    if not records:
        raise DataError(f"{path} contains no records")
    return records


def write_report_json(report: EvalReport, path: str | Path, extra: dict | None = None) -> None:
    payload = dict(extra or {})
    payload.update(report.to_dict())
    write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
