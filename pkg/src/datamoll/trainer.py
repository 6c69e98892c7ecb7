"""A deterministic desk-scale MLP classifier with manual gradients.

One hidden ReLU layer, log-softmax output, plain SGD under a cosine
annealing learning-rate schedule.  With mollification enabled, every
mini-batch is independently noised/blurred per image and the labels are
degraded with the matching schedule weight before the gradient step.
Training is bit-reproducible for a fixed seed: shuffling, initialization,
and per-batch mollification all derive from disjoint Philox streams.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, TrainingDivergedError
from .ioutil import write_bytes
from .likelihood import log_normalizer_Z, log_normalizer_grad
from .metrics import PredictionRecord
from .mol1 import Mol1Dataset
from .mollifier import mollify_batch
from .schedules import ScheduleConfig
from .streams import derive_seed, stream
from .tensors import ensure_image

LOSS_KINDS = ("smoothed", "tempered", "normalized")

# Stream tags, disjoint per purpose.
_TAG_INIT = 0
_TAG_SHUFFLE = 1
_TAG_MOLLIFY = 2


@dataclass(frozen=True)
class TrainConfig:
    """Trainer hyperparameters plus the mollification schedule."""

    schedule: ScheduleConfig
    epochs: int = 100
    batch_size: int = 128
    lr0: float = 0.01
    hidden_units: int = 128
    seed: int = 0
    loss: str = "smoothed"
    mollify: bool = True
    momentum: float = 0.0
    weight_decay: float = 0.0
    samples_per_image: int = 1

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_units < 1:
            raise ValueError("epochs, batch_size, and hidden_units must be >= 1")
        if self.lr0 <= 0:
            raise ValueError(f"initial learning rate must be positive, got {self.lr0}")
        if self.loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}, got {self.loss!r}")
        if self.samples_per_image < 1:
            raise ValueError("samples_per_image must be >= 1")
        if not 0.0 <= self.momentum < 1.0 or self.weight_decay < 0.0:
            raise ValueError("momentum must lie in [0, 1) and weight_decay be >= 0")


@dataclass
class MlpParams:
    """Weights of the 2-layer network; all arrays float64."""

    w1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (classes, hidden)
    b2: np.ndarray  # (classes,)

    def blocks(self) -> list[tuple[str, np.ndarray]]:
        return [("w1", self.w1), ("b1", self.b1), ("w2", self.w2), ("b2", self.b2)]

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(arr)) for _, arr in self.blocks())


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_loss: float
    lr: float
    seconds: float


@dataclass
class TrainReport:
    """Per-epoch training statistics and the final checkpoint reference."""

    epochs: list[EpochStats] = field(default_factory=list)
    checkpoint: str | None = None

    def to_csv(self) -> str:
        lines = ["epoch,loss,lr,seconds"]
        for row in self.epochs:
            lines.append(f"{row.epoch},{row.mean_loss!r},{row.lr!r},{row.seconds!r}")
        return "\n".join(lines) + "\n"


def init_params(input_dim: int, hidden: int, classes: int, seed: int) -> MlpParams:
    """He fan-in initialization for the weights, zeros for the biases."""
    rng = stream(seed, _TAG_INIT)
    return MlpParams(
        w1=rng.standard_normal((hidden, input_dim)) * math.sqrt(2.0 / input_dim),
        b1=np.zeros(hidden),
        w2=rng.standard_normal((classes, hidden)) * math.sqrt(2.0 / hidden),
        b2=np.zeros(classes),
    )


def _flatten(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3:
        arr = ensure_image(arr).reshape(-1)
    if arr.ndim != 1:
        raise DataError(f"expected an image or flat vector, got shape {arr.shape}")
    return arr


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _batch_forward(params: MlpParams, x: np.ndarray):
    pre = x @ params.w1.T + params.b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ params.w2.T + params.b2
    return _log_softmax(logits), hidden, pre


def forward(params: MlpParams, img: np.ndarray) -> np.ndarray:
    """Log-probability vector for a single image (or flat input)."""
    x = _flatten(img)
    if x.shape[0] != params.w1.shape[1]:
        raise DataError(
            f"input dimension {x.shape[0]} does not match weights ({params.w1.shape[1]})"
        )
    logp, _, _ = _batch_forward(params, x[None, :])
    return logp[0]


def _batch_loss_grad(
    params: MlpParams,
    x: np.ndarray,
    y: np.ndarray,
    include_normalizer: bool,
):
    """Mean loss over the batch and its exact gradient.

    The loss per row is -sum_c y_c logp_c, plus log Z when the normalized
    likelihood is requested.  d(loss)/d(logits) is softmax * sum(y) - y,
    which reduces to the familiar softmax-minus-target for unit-sum labels.
    """
    batch = x.shape[0]
    logp, hidden, pre = _batch_forward(params, x)
    f = np.exp(logp)
    loss = float(-(y * logp).sum() / batch)
    dlogits = f * y.sum(axis=1, keepdims=True) - y
    if include_normalizer:
        loss += float(np.mean(log_normalizer_Z(logp)))
        dlogits = dlogits + log_normalizer_grad(logp)
    dlogits /= batch
    grads = {
        "w2": dlogits.T @ hidden,
        "b2": dlogits.sum(axis=0),
    }
    dhidden = dlogits @ params.w2
    dpre = dhidden * (pre > 0.0)
    grads["w1"] = dpre.T @ x
    grads["b1"] = dpre.sum(axis=0)
    return loss, grads


def grad(
    params: MlpParams,
    img: np.ndarray,
    y,
    include_normalizer: bool = False,
) -> dict[str, np.ndarray]:
    """Exact gradient of the soft-label loss for one example."""
    x = _flatten(img)
    weights = np.asarray(getattr(y, "probs", y), dtype=np.float64)
    if weights.shape[0] != params.w2.shape[0]:
        raise DataError(
            f"label has {weights.shape[0]} classes, model has {params.w2.shape[0]}"
        )
    _, grads = _batch_loss_grad(params, x[None, :], weights[None, :], include_normalizer)
    return grads


def loss_value(
    params: MlpParams,
    img: np.ndarray,
    y,
    include_normalizer: bool = False,
) -> float:
    """Loss for one example; the quantity :func:`grad` differentiates."""
    x = _flatten(img)
    weights = np.asarray(getattr(y, "probs", y), dtype=np.float64)
    loss, _ = _batch_loss_grad(params, x[None, :], weights[None, :], include_normalizer)
    return loss


def cosine_lr(epoch: int, cfg: TrainConfig) -> float:
    """lr0 * (1 + cos(pi * epoch / epochs)) / 2."""
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} out of range for {cfg.epochs} epochs")
    return cfg.lr0 * (1.0 + math.cos(math.pi * epoch / cfg.epochs)) / 2.0


def _soft_labels(labels: np.ndarray, gammas: np.ndarray, num_classes: int, kind: str) -> np.ndarray:
    y = np.zeros((labels.shape[0], num_classes))
    y[np.arange(labels.shape[0]), labels] = 1.0
    y *= (1.0 - gammas)[:, None]
    if kind in ("smoothed", "normalized"):
        y += (gammas / num_classes)[:, None]
    return y


def train(dataset: Mol1Dataset, cfg: TrainConfig) -> tuple[MlpParams, TrainReport]:
    """Train on a standardized MOL1 dataset; deterministic for a fixed seed."""
    n = dataset.count
    input_dim = dataset.height * dataset.width * dataset.channels
    params = init_params(input_dim, cfg.hidden_units, dataset.num_classes, cfg.seed)
    velocity = {name: np.zeros_like(arr) for name, arr in params.blocks()}
    flat = dataset.images.reshape(n, input_dim)
    report = TrainReport()
    include_normalizer = cfg.loss == "normalized"

    for epoch in range(cfg.epochs):
        started = time.perf_counter()
        order = stream(cfg.seed, _TAG_SHUFFLE, epoch).permutation(n)
        lr = cosine_lr(epoch, cfg)
        losses = []
        for batch_no, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            if cfg.mollify:
                images = [dataset.images[i] for i in idx]
                rows, gammas = [], []
                for rep in range(cfg.samples_per_image):
                    seed = derive_seed(cfg.seed, _TAG_MOLLIFY, epoch, batch_no, rep)
                    for ex in mollify_batch(images, cfg.schedule, seed):
                        rows.append(ex.image.reshape(-1))
                        gammas.append(ex.gamma)
                x = np.stack(rows)
                gammas = np.asarray(gammas)
                labels = np.tile(dataset.labels[idx], cfg.samples_per_image)
            else:
                x = flat[idx]
                gammas = np.zeros(idx.shape[0])
                labels = dataset.labels[idx]
            y = _soft_labels(labels, gammas, dataset.num_classes, cfg.loss)
            loss, grads = _batch_loss_grad(params, x, y, include_normalizer)
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {batch_no}"
                )
            for name, arr in params.blocks():
                g = grads[name]
                if cfg.weight_decay:
                    g = g + cfg.weight_decay * arr
                if cfg.momentum:
                    velocity[name] = cfg.momentum * velocity[name] + g
                    g = velocity[name]
                arr -= lr * g
            if not params.all_finite():
                raise TrainingDivergedError(
                    f"non-finite parameters at epoch {epoch}, batch {batch_no}"
                )
            losses.append(loss)
        report.epochs.append(
            EpochStats(
                epoch=epoch,
                mean_loss=float(np.mean(losses)),
                lr=lr,
                seconds=time.perf_counter() - started,
            )
        )
    return params, report


def predict_batch(params: MlpParams, dataset: Mol1Dataset, tag: str = "") -> list[PredictionRecord]:
    """One record per example with its full probability vector."""
    n = dataset.count
    input_dim = dataset.height * dataset.width * dataset.channels
    if input_dim != params.w1.shape[1]:
        raise DataError(
            f"dataset dimension {input_dim} does not match weights ({params.w1.shape[1]})"
        )
    logp, _, _ = _batch_forward(params, dataset.images.reshape(n, input_dim))
    probs = np.minimum(np.exp(logp), 1.0)
    return [
        PredictionRecord(probs[i], int(dataset.labels[i]), tag) for i in range(n)
    ]


def predict_records(
    params: MlpParams, images: np.ndarray, labels: np.ndarray, tag: str = ""
) -> list[PredictionRecord]:
    """Records for raw (N, H, W, C) images with integer labels."""
    n = images.shape[0]
    logp, _, _ = _batch_forward(params, images.reshape(n, -1))
    probs = np.minimum(np.exp(logp), 1.0)
    return [PredictionRecord(probs[i], int(labels[i]), tag) for i in range(n)]


_PARAMS_MAGIC = b"MLP1"


def save_params(
    params: MlpParams, path: str | Path, seed: int, config_hash: str
) -> None:
    """Flat little-endian float32 blob behind a length-prefixed JSON header."""
    import json

    header = {
        "shapes": {name: list(arr.shape) for name, arr in params.blocks()},
        "seed": int(seed),
        "config_hash": config_hash,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = b"".join(
        np.ascontiguousarray(arr, dtype="<f4").tobytes() for _, arr in params.blocks()
    )
    payload = _PARAMS_MAGIC + len(head).to_bytes(4, "little") + head + blob
    write_bytes(path, payload)


def load_params(path: str | Path) -> tuple[MlpParams, dict]:
    import json

    raw = Path(path).read_bytes()
    if raw[:4] != _PARAMS_MAGIC:
        raise DataError(f"{path} is not a parameter file")
    head_len = int.from_bytes(raw[4:8], "little")
    header = json.loads(raw[8 : 8 + head_len].decode("utf-8"))
    offset = 8 + head_len
    arrays = {}
    for name in ("w1", "b1", "w2", "b2"):
        shape = tuple(header["shapes"][name])
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=offset)
        arrays[name] = arr.astype(np.float64).reshape(shape)
        offset += 4 * count
    if offset != len(raw):
        raise DataError(f"{path} has trailing bytes")
    return MlpParams(**arrays), header
