"""Sliding-window face detector over an image pyramid.

A linear model scores the HOG descriptor of every window position at every
pyramid level; survivors of the score threshold are mapped back to
original-image coordinates and deduplicated with greedy NMS.

Scanning computes gradients once per level and shares cell histograms and
normalized blocks between windows with the same grid phase, so a window's
border pixels see their true image neighbors rather than the replicated
edges a standalone crop would have.  Descriptors differ from
hog_descriptor(crop) only in that one-pixel rim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from yoklama.backend import kernels
from yoklama.hog import DEFAULT_CONFIG, HogConfig, HogDescriptor, hog_descriptor
from yoklama.image_io import GrayImage, build_pyramid


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


@dataclass(frozen=True)
class DetectParams:
    score_threshold: float = 0.0
    window_stride: int = 8
    scale_step: float = 1.25
    nms_iou: float = 0.3

    def __post_init__(self):
        if self.window_stride < 1:
            raise ValueError("window_stride must be >= 1")
        if self.scale_step <= 1.0:
            raise ValueError("scale_step must be > 1")
        if not 0.0 < self.nms_iou < 1.0:
            raise ValueError("nms_iou must be in (0, 1)")


@dataclass(frozen=True)
class Detection:
    """Square box in original-image pixels plus its model score."""

    x: int
    y: int
    side: int
    score: float


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    config: HogConfig

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if w.ndim != 1 or w.size != self.config.descriptor_length:
            raise ValueError(
                f"weights length {w.size} does not match descriptor length "
                f"{self.config.descriptor_length}"
            )
        if not (np.all(np.isfinite(w)) and np.isfinite(self.bias)):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", float(self.bias))


def score_window(model: LinearModel, descriptor: HogDescriptor) -> float:
    """dot(weights, values) + bias, summed left to right."""
    if descriptor.config != model.config:
        raise ValueError("descriptor config does not match model config")
    return float(kernels().dot_score(model.weights, descriptor.values)) + model.bias


def _box(b) -> tuple[float, float, float]:
    if isinstance(b, Detection):
        return float(b.x), float(b.y), float(b.side)
    x, y, side = b
    return float(x), float(y), float(side)


def iou(box_a, box_b) -> float:
    """Intersection over union of two (x, y, side) boxes; 0 when disjoint."""
    ax, ay, aside = _box(box_a)
    bx, by, bside = _box(box_b)
    iw = min(ax + aside, bx + bside) - max(ax, bx)
    ih = min(ay + aside, by + bside) - max(ay, by)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (aside * aside + bside * bside - inter)


def nms(detections, nms_iou: float) -> list[Detection]:
    """Greedy suppression: keep by descending score, drop overlaps.

    Score ties break by ascending (x, y, side) so the result never depends
    on input order.
    """
    ranked = sorted(detections, key=lambda d: (-d.score, d.x, d.y, d.side))
    kept: list[Detection] = []
    for det in ranked:
        if all(iou(det, k) <= nms_iou for k in kept):
            kept.append(det)
    return kept


def level_windows(level_width: int, level_height: int, window: int, stride: int) -> int:
    if level_width < window or level_height < window:
        return 0
    return ((level_width - window) // stride + 1) * ((level_height - window) // stride + 1)


def count_windows(width: int, height: int, window: int, params: DetectParams) -> int:
    """Total window evaluations detect() performs on a width x height frame."""
    total = 0
    k = 0
    while True:
        scale = params.scale_step**k
        w = int(width / scale)
        h = int(height / scale)
        if w < window or h < window:
            break
        total += level_windows(w, h, window, params.window_stride)
        k += 1
    return total


def detect(image: GrayImage, model: LinearModel, params: DetectParams = DetectParams()) -> list[Detection]:
    """All face boxes scoring above the threshold, NMS-deduplicated and
    sorted by descending score."""
    cfg = model.config
    if image.width < cfg.window or image.height < cfg.window:
        raise ValueError("image smaller than the detection window")
    pyramid = build_pyramid(image, params.scale_step, cfg.window)
    nbw = cfg.blocks_per_side
    wblocks = model.weights.reshape(nbw, nbw, cfg.block_length)
    k = kernels()
    raw: list[Detection] = []
    for level in pyramid.levels:
        scores = k.scan_scores(
            level.image.pixels,
            cfg.window,
            params.window_stride,
            cfg.cell_size,
            cfg.bins,
            cfg.block_size,
            cfg.block_stride,
            wblocks,
            model.bias,
            cfg.clip,
            cfg.epsilon,
        )
        for wy, wx in zip(*np.nonzero(scores > params.score_threshold)):
            side = round(cfg.window * level.scale)
            x = round(int(wx) * params.window_stride * level.scale)
            y = round(int(wy) * params.window_stride * level.scale)
            x = min(max(x, 0), image.width - side)
            y = min(max(y, 0), image.height - side)
            raw.append(Detection(x, y, side, float(scores[wy, wx])))
    return nms(raw, params.nms_iou)


def train_linear(
    positives,
    negatives,
    epochs: int = 30,
    learning_rate: float = 0.01,
    l2_lambda: float = 1e-4,
    seed: int = 0,
) -> LinearModel:
    """Fit a linear classifier by SGD on L2-regularized hinge loss.

    positives/negatives are HogDescriptor lists sharing one config.  The
    seed drives the per-epoch shuffle; identical inputs and seed give
    bit-identical weights.
    """
    if not positives or not negatives:
        raise ValueError("need at least one example of each class")
    config = positives[0].config
    for d in list(positives) + list(negatives):
        if d.config != config:
            raise ValueError("all descriptors must share one config")
    x = np.stack([d.values for d in positives] + [d.values for d in negatives])
    y = np.concatenate([np.ones(len(positives)), -np.ones(len(negatives))])
    rng = np.random.default_rng(seed)
    w = np.zeros(x.shape[1], dtype=np.float64)
    b = 0.0
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            margin = y[i] * (float(x[i] @ w) + b)
            if margin < 1.0:
                w += learning_rate * (y[i] * x[i] - 2.0 * l2_lambda * w)
                b += learning_rate * y[i]
            else:
                w -= learning_rate * 2.0 * l2_lambda * w
    return LinearModel(weights=w, bias=b, config=config)


def hinge_loss(model: LinearModel, descriptors, labels) -> float:
    """mean(max(0, 1 - y * f(x))), without the regularization term."""
    x = np.stack([d.values for d in descriptors])
    y = np.asarray(labels, dtype=np.float64)
    margins = y * (x @ model.weights + model.bias)
    return float(np.mean(np.maximum(0.0, 1.0 - margins)))


def accuracy(model: LinearModel, descriptors, labels) -> float:
    x = np.stack([d.values for d in descriptors])
    y = np.asarray(labels, dtype=np.float64)
    predicted = np.where(x @ model.weights + model.bias > 0.0, 1.0, -1.0)
    return float(np.mean(predicted == y))


MODEL_MAGIC = "linear-hog v1"


def format_model(model: LinearModel) -> str:
    """Four-line text form; weights at 9 significant digits re-read stably."""
    cfg = model.config
    line2 = (
        f"{cfg.cell_size} {cfg.bins} {cfg.block_size} {cfg.block_stride} "
        f"{cfg.clip!r} {cfg.epsilon!r} {cfg.window}"
    )
    weights = " ".join(f"{v:.9g}" for v in model.weights.tolist())
    return f"{MODEL_MAGIC}\n{line2}\n{model.bias:.9g}\n{weights}\n"


def parse_model(text: str) -> LinearModel:
    lines = text.splitlines()
    if len(lines) < 4:
        raise ModelFormatError("model file must have four lines")
    if lines[0] != MODEL_MAGIC:
        raise ModelFormatError(f"bad model magic: {lines[0]!r}")
    fields = lines[1].split()
    if len(fields) != 7:
        raise ModelFormatError("config line must have seven fields")
    try:
        config = HogConfig(
            cell_size=int(fields[0]),
            bins=int(fields[1]),
            block_size=int(fields[2]),
            block_stride=int(fields[3]),
            clip=float(fields[4]),
            epsilon=float(fields[5]),
            window=int(fields[6]),
        )
        bias = float(lines[2])
        weights = np.array([float(t) for t in lines[3].split()], dtype=np.float64)
    except ValueError as exc:
        raise ModelFormatError(f"bad model field: {exc}") from None
    if weights.size != config.descriptor_length:
        raise ModelFormatError(
            f"{weights.size} weights but config implies {config.descriptor_length}"
        )
    return LinearModel(weights=weights, bias=bias, config=config)


def save_model(model: LinearModel, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_model(model))


def load_model(path) -> LinearModel:
    with open(path, "r", encoding="ascii") as fh:
        return parse_model(fh.read())
