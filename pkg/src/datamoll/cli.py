"""Command-line interface wiring the library into reproducible runs.

Subcommands: ``ingest`` (8-bit images or CSV pixel grids -> MOL1 container),
``schedule-dump`` (all schedule curves as CSV), ``mollify`` (export a
mollified copy of a dataset), ``train``, ``eval`` (clean and, optionally,
the 4-corruption x 5-severity grid), ``infocurve`` (PNG compression ratios
over blur temperatures), and ``spectra`` (per-corruption DCT change grids).

Every command takes an explicit seed, echoes the effective configuration
and its hash into the output directory (``run.json``), and writes outputs
atomically.  Exit codes: 0 success, 2 usage error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CORRUPTION_KINDS,
    annulus_means,
    corrupt,
    corruption_grid,
    info_curve,
    spectral_delta,
)
from .errors import DataError, TrainingDivergedError
from .ioutil import write_text
from .metrics import evaluate, format_report_table, write_records_csv
from .mol1 import Mol1Dataset, load_mol1, save_mol1
from .mollifier import mollify_batch
from .schedules import (
    ScheduleConfig,
    alpha_sigma,
    blur_sigma,
    dissipation_time,
    gamma_blur,
    gamma_noise,
    snr,
)
from .streams import stream
from .tensors import compute_channel_stats
from .trainer import (
    TrainConfig,
    load_params,
    predict_batch,
    predict_records,
    save_params,
    train,
)

# sigma_max for commands that have no dataset to take a width from.
DEFAULT_SIGMA_MAX = 32.0
_SPECTRA_SEVERITY = 3

_DEFAULTS: dict = {
    "seed": 0,
    "dataset": None,
    "schedule": {
        "sigma_min": 0.3,
        "sigma_max": None,  # resolved to the dataset width when available
        "k_noise": 1.0,
        "k_blur": 1.0,
        "beta_alpha": 1.0,
        "beta_beta": 2.0,
        "mode_probs": [1 / 3, 1 / 3, 1 / 3],
    },
    "train": {
        "epochs": 100,
        "batch_size": 128,
        "lr": 0.01,
        "hidden_units": 128,
        "loss": "smoothed",
        "mollify": True,
        "momentum": 0.0,
        "weight_decay": 0.0,
        "samples_per_image": 1,
    },
    "bins": 15,
    "corruptions": False,
    "t_steps": 11,
}


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "1", "yes", "on"):
        return True
    if value in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _parse_mode_probs(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated probabilities")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(parser: argparse.ArgumentParser, *, dataset: bool = True) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON run configuration")
    parser.add_argument("--seed", type=int, metavar="U64", help="run seed")
    parser.add_argument("--out", metavar="DIR", required=True, help="output directory")
    if dataset:
        parser.add_argument("--dataset", metavar="PATH", help="MOL1 dataset path")


def _add_schedule_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k-noise", type=float, metavar="F")
    parser.add_argument("--k-blur", type=float, metavar="F")
    parser.add_argument("--beta-alpha", type=float, metavar="F")
    parser.add_argument("--beta-beta", type=float, metavar="F")
    parser.add_argument("--mode-probs", type=_parse_mode_probs, metavar="F,F,F")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="datamoll", description="Data mollification training and analysis toolkit"
    )
    parser.add_argument("--version", action="version", version=f"datamoll {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a MOL1 container from images on disk")
    p.add_argument("src", help="directory of .csv/.raw images, or a MOL1 file to re-ingest")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int, metavar="U64")
    p.add_argument("--out", metavar="PATH", required=True, help="MOL1 output path")

    p = sub.add_parser("schedule-dump", help="write all schedule curves as CSV")
    _add_common(p, dataset=False)
    _add_schedule_flags(p)
    p.add_argument("--t-steps", type=int, metavar="N")

    p = sub.add_parser("mollify", help="export a mollified copy of a dataset")
    _add_common(p)
    _add_schedule_flags(p)

    p = sub.add_parser("train", help="train the desk-scale classifier")
    _add_common(p)
    _add_schedule_flags(p)
    p.add_argument("--mollify", type=_parse_bool, metavar="BOOL")
    p.add_argument("--loss", choices=("smoothed", "tempered", "normalized"))
    p.add_argument("--epochs", type=int, metavar="N")
    p.add_argument("--batch-size", type=int, metavar="N")
    p.add_argument("--lr", type=float, metavar="F")

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("params", help="parameter file written by train")
    _add_common(p)
    p.add_argument("--bins", type=int, metavar="N")
    p.add_argument("--corruptions", type=_parse_bool, metavar="BOOL")

    p = sub.add_parser("infocurve", help="PNG compression ratios over blur temperatures")
    _add_common(p)
    _add_schedule_flags(p)
    p.add_argument("--t-steps", type=int, metavar="N")

    p = sub.add_parser("spectra", help="mean DCT change per corruption kind")
    _add_common(p)

    return parser


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


_FLAG_MAP = {
    "seed": ("seed",),
    "dataset": ("dataset",),
    "k_noise": ("schedule", "k_noise"),
    "k_blur": ("schedule", "k_blur"),
    "beta_alpha": ("schedule", "beta_alpha"),
    "beta_beta": ("schedule", "beta_beta"),
    "mode_probs": ("schedule", "mode_probs"),
    "mollify": ("train", "mollify"),
    "loss": ("train", "loss"),
    "epochs": ("train", "epochs"),
    "batch_size": ("train", "batch_size"),
    "lr": ("train", "lr"),
    "bins": ("bins",),
    "corruptions": ("corruptions",),
    "t_steps": ("t_steps",),
}


def effective_config(ns: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    cfg = json.loads(json.dumps(_DEFAULTS))  # deep copy
    if getattr(ns, "config", None):
        path = Path(ns.config)
        if not path.exists():
            raise DataError(f"config file {path} does not exist")
        loaded = json.loads(path.read_text())
        if not isinstance(loaded, dict):
            raise DataError(f"config file {path} must contain a JSON object")
        cfg = _merge(cfg, loaded)
    for flag, keys in _FLAG_MAP.items():
        value = getattr(ns, flag, None)
        if value is None:
            continue
        node = cfg
        for key in keys[:-1]:
            node = node[key]
        node[keys[-1]] = value
    return cfg


def config_hash(cfg: dict, command: str) -> str:
    payload = {"command": command, **{k: v for k, v in cfg.items() if k != "out"}}
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _schedule_from(cfg: dict, width: int | None) -> ScheduleConfig:
    s = cfg["schedule"]
    sigma_max = s["sigma_max"]
    if sigma_max is None:
        sigma_max = float(width) if width is not None else DEFAULT_SIGMA_MAX
        s["sigma_max"] = sigma_max  # record the resolved value
    return ScheduleConfig(
        sigma_max=float(sigma_max),
        sigma_min=float(s["sigma_min"]),
        k_noise=float(s["k_noise"]),
        k_blur=float(s["k_blur"]),
        beta_alpha=float(s["beta_alpha"]),
        beta_beta=float(s["beta_beta"]),
        mode_probs=tuple(float(p) for p in s["mode_probs"]),
    )


def _write_run_metadata(out_dir: Path, command: str, cfg: dict) -> str:
    digest = config_hash(cfg, command)
    payload = {
        "command": command,
        "config_hash": digest,
        "seed": cfg["seed"],
        "versions": {
            "datamoll": __version__,
            "numpy": np.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "config": cfg,
    }
    write_text(out_dir / "run.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return digest


def _require_dataset(cfg: dict) -> Mol1Dataset:
    if not cfg.get("dataset"):
        raise DataError("this command needs --dataset (or a dataset entry in the config)")
    return load_mol1(cfg["dataset"])


def _float_cell(value: float) -> str:
    return repr(float(value))


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    write_text(path, buf.getvalue())


# ---------------------------------------------------------------- ingest


def _load_8bit_dir(src: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read 8-bit images (.csv pixel grids or .raw blobs) plus labels.csv."""
    labels_file = src / "labels.csv"
    if not labels_file.exists():
        raise DataError(f"missing {labels_file}")
    labels_by_name: dict[str, int] = {}
    with open(labels_file, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "filename":
                continue
            if len(row) < 2:
                raise DataError(f"malformed labels row {row!r} in {labels_file}")
            labels_by_name[row[0].strip()] = int(row[1])
    shape_file = src / "shape.json"
    shape = json.loads(shape_file.read_text()) if shape_file.exists() else None

    names = sorted(
        p.name for p in src.iterdir() if p.suffix in (".csv", ".raw") and p.name != "labels.csv"
    )
    if not names:
        raise DataError(f"no .csv or .raw image files in {src}")
    missing = [n for n in names if n not in labels_by_name]
    if missing:
        raise DataError(f"images without labels: {', '.join(missing)}")
    orphans = [n for n in labels_by_name if n not in names]
    if orphans:
        raise DataError(f"labels without images: {', '.join(sorted(orphans))}")

    images, labels, bad = [], [], []
    for name in names:
        path = src / name
        if path.suffix == ".csv":
            grid = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
            channels = int(shape["channels"]) if shape else 1
            if grid.shape[1] % channels:
                bad.append(name)
                continue
            arr = grid.reshape(grid.shape[0], grid.shape[1] // channels, channels)
        else:
            if shape is None:
                raise DataError(f"{name} is raw 8-bit data but {src}/shape.json is missing")
            arr = np.frombuffer(path.read_bytes(), dtype=np.uint8)
            h, w, c = int(shape["height"]), int(shape["width"]), int(shape["channels"])
            if arr.size != h * w * c:
                bad.append(name)
                continue
            arr = arr.reshape(h, w, c).astype(np.int64)
        if np.any(arr < 0) or np.any(arr > 255):
            bad.append(name)
            continue
        images.append(arr)
        labels.append(labels_by_name[name])
    if bad:
        raise DataError(f"malformed image files: {', '.join(bad)}")
    shapes = {img.shape for img in images}
    if len(shapes) != 1:
        raise DataError(f"inconsistent image shapes: {sorted(shapes)}")
    return np.stack(images), np.asarray(labels, dtype=np.int64)


def cmd_ingest(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    digest = config_hash(cfg, "ingest")
    src = Path(ns.src)
    out = Path(ns.out)
    if src.is_file():
        ds = load_mol1(src)
        raw = np.clip(
            ds.images * ds.stats.std + ds.stats.mean, 0.0, 1.0
        )
        pixels = np.round(raw * 255.0).astype(np.int64)
        labels = ds.labels
        num_classes = ds.num_classes
    elif src.is_dir():
        pixels, labels = _load_8bit_dir(src)
        num_classes = int(labels.max()) + 1
        if num_classes < 2:
            num_classes = 2
    else:
        raise DataError(f"{src} is neither a directory nor a MOL1 file")
    raw = pixels.astype(np.float64) / 255.0
    stats = compute_channel_stats(list(raw))
    images = (raw - stats.mean) / stats.std
    dataset = Mol1Dataset(
        images=images,
        labels=labels,
        num_classes=num_classes,
        stats=stats,
        provenance=f"ingest:{src.name}",
    )
    save_mol1(dataset, out)
    print(
        f"wrote {out}: N={dataset.count} H={dataset.height} W={dataset.width} "
        f"C={dataset.channels} classes={dataset.num_classes}"
    )
    return 0


# ---------------------------------------------------------- schedule-dump


def cmd_schedule_dump(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    t_steps = int(cfg["t_steps"])
    if t_steps < 2:
        raise DataError(f"t_steps must be >= 2, got {t_steps}")
    schedule = _schedule_from(cfg, width=None)
    out_dir = Path(ns.out)
    rows = []
    for t in np.linspace(0.0, 1.0, t_steps):
        t = float(t)
        alpha, sigma = alpha_sigma(t)
        sig_b = blur_sigma(t, schedule)
        rows.append(
            [
                _float_cell(t),
                _float_cell(alpha),
                _float_cell(sigma),
                _float_cell(snr(t)),
                _float_cell(gamma_noise(t, schedule.k_noise)),
                _float_cell(sig_b),
                _float_cell(dissipation_time(sig_b)),
                _float_cell(gamma_blur(t, schedule.k_blur)),
            ]
        )
    _write_csv(
        out_dir / "schedules.csv",
        ["t", "alpha", "sigma", "snr", "gamma_noise", "sigma_b", "tau", "gamma_blur"],
        rows,
    )
    _write_run_metadata(out_dir, "schedule-dump", cfg)
    return 0


# ----------------------------------------------------------------- mollify


def cmd_mollify(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    dataset = _require_dataset(cfg)
    schedule = _schedule_from(cfg, dataset.width)
    out_dir = Path(ns.out)
    examples = mollify_batch(list(dataset.images), schedule, int(cfg["seed"]))
    digest = _write_run_metadata(out_dir, "mollify", cfg)
    mollified = Mol1Dataset(
        images=np.stack([ex.image for ex in examples]),
        labels=dataset.labels,
        num_classes=dataset.num_classes,
        stats=dataset.stats,
        provenance=f"mollify:{digest}",
    )
    save_mol1(mollified, out_dir / "mollified.mol1")
    rows = [
        [str(i), ex.params.mode.value, _float_cell(ex.params.t), _float_cell(ex.gamma)]
        for i, ex in enumerate(examples)
    ]
    _write_csv(out_dir / "mollify.csv", ["index", "mode", "t", "gamma"], rows)
    return 0


# ------------------------------------------------------------------- train


def cmd_train(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    dataset = _require_dataset(cfg)
    schedule = _schedule_from(cfg, dataset.width)
    t = cfg["train"]
    train_cfg = TrainConfig(
        schedule=schedule,
        epochs=int(t["epochs"]),
        batch_size=int(t["batch_size"]),
        lr0=float(t["lr"]),
        hidden_units=int(t["hidden_units"]),
        seed=int(cfg["seed"]),
        loss=str(t["loss"]),
        mollify=bool(t["mollify"]),
        momentum=float(t["momentum"]),
        weight_decay=float(t["weight_decay"]),
        samples_per_image=int(t["samples_per_image"]),
    )
    out_dir = Path(ns.out)
    digest = _write_run_metadata(out_dir, "train", cfg)
    params, report = train(dataset, train_cfg)
    params_path = out_dir / "params.bin"
    save_params(params, params_path, train_cfg.seed, digest)
    report.checkpoint = str(params_path)
    write_text(out_dir / "train_report.csv", report.to_csv())
    print(f"trained {train_cfg.epochs} epochs; final loss {report.epochs[-1].mean_loss:.6f}")
    return 0


# -------------------------------------------------------------------- eval


def cmd_eval(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    dataset = _require_dataset(cfg)
    params, _header = load_params(ns.params)
    out_dir = Path(ns.out)
    digest = _write_run_metadata(out_dir, "eval", cfg)
    bins = int(cfg["bins"])
    records = predict_batch(params, dataset, tag="clean")
    clean_report = evaluate(records, num_bins=bins)
    corrupted_report = None
    if cfg["corruptions"]:
        corrupted_records = []
        for tag, batch in corruption_grid(list(dataset.images), int(cfg["seed"])):
            corrupted_records.extend(predict_records(params, batch, dataset.labels, tag=tag))
        records.extend(corrupted_records)
        corrupted_report = evaluate(corrupted_records, num_bins=bins)
    write_records_csv(records, out_dir / "records.csv")
    payload = {"config_hash": digest, "seed": cfg["seed"], "clean": clean_report.to_dict()}
    if corrupted_report is not None:
        payload["corrupted"] = corrupted_report.to_dict()
    write_text(out_dir / "eval.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    text = format_report_table(clean_report, title="clean")
    if corrupted_report is not None:
        text += "\n" + format_report_table(corrupted_report, title="corrupted(all)")
    write_text(out_dir / "eval.txt", text)
    print(text, end="")
    return 0


# --------------------------------------------------------------- infocurve


def cmd_infocurve(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    dataset = _require_dataset(cfg)
    schedule = _schedule_from(cfg, dataset.width)
    t_steps = int(cfg["t_steps"])
    if t_steps < 2:
        raise DataError(f"t_steps must be >= 2, got {t_steps}")
    out_dir = Path(ns.out)
    grid = [float(t) for t in np.linspace(0.0, 1.0, t_steps)]
    points = info_curve(list(dataset.images), dataset.stats, schedule, grid)
    rows = [
        [_float_cell(p.t), _float_cell(p.sigma_b), _float_cell(p.mean_ratio)] for p in points
    ]
    _write_csv(out_dir / "infocurve.csv", ["t", "sigma_b", "mean_ratio"], rows)
    _write_run_metadata(out_dir, "infocurve", cfg)
    return 0


# ----------------------------------------------------------------- spectra


def cmd_spectra(ns: argparse.Namespace) -> int:
    cfg = effective_config(ns)
    dataset = _require_dataset(cfg)
    out_dir = Path(ns.out)
    clean = list(dataset.images)
    annuli_rows = []
    for kind_idx, kind in enumerate(CORRUPTION_KINDS):
        rng = stream(int(cfg["seed"]), kind_idx, _SPECTRA_SEVERITY)
        corrupted = [corrupt(img, kind, _SPECTRA_SEVERITY, rng) for img in clean]
        delta = spectral_delta(clean, corrupted, tag=kind)
        grid_rows = [[_float_cell(v) for v in row] for row in delta.grid]
        _write_csv(
            out_dir / f"spectral_{kind}.csv",
            [f"w{j}" for j in range(delta.grid.shape[1])],
            grid_rows,
        )
        centers, means = annulus_means(delta.grid)
        for b, (center, mean) in enumerate(zip(centers, means)):
            annuli_rows.append([kind, str(b), _float_cell(center), _float_cell(mean)])
    _write_csv(
        out_dir / "spectra_annuli.csv",
        ["kind", "band", "center", "mean_delta"],
        annuli_rows,
    )
    _write_run_metadata(out_dir, "spectra", cfg)
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "schedule-dump": cmd_schedule_dump,
    "mollify": cmd_mollify,
    "train": cmd_train,
    "eval": cmd_eval,
    "infocurve": cmd_infocurve,
    "spectra": cmd_spectra,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[ns.command](ns)
    except (TrainingDivergedError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def console_main() -> None:
    sys.exit(main())
