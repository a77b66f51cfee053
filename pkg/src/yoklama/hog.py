"""Histogram-of-oriented-gradients descriptor.

The pipeline over a square detection window is:

1. centered [-1, 0, 1] gradients with replicated borders; magnitude
   sqrt(gx^2 + gy^2) and unsigned orientation atan2(gy, gx) folded into
   [0, 180) (zero-magnitude pixels get orientation 0 and vote nothing);
2. per-cell orientation histograms: each pixel splits its magnitude
   linearly between the two bin centers (at k * 180/bins degrees) that
   bracket its orientation, wrapping 180 -> 0;
3. L2-Hys block normalization: for each block of cells, v' = v /
   sqrt(|v|^2 + eps^2), clip at ``clip``, renormalize the same way.

The descriptor concatenates blocks in row-major block order, row-major
cell order within a block, ascending bin order.  No Gaussian weighting and
no spatial interpolation across cells: every vote lands entirely in its
own cell, which keeps the brute-force test oracle simple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from yoklama.backend import kernels
from yoklama.image_io import GrayImage


@dataclass(frozen=True)
class HogConfig:
    """Descriptor geometry and normalization constants.

    Defaults follow the canonical formulation: 8-px cells, 9 unsigned bins
    over [0, 180), 2x2-cell blocks at 1-cell stride, L2-Hys clipped at 0.2,
    on a 64-px square detection window.
    """

    cell_size: int = 8
    bins: int = 9
    block_size: int = 2
    block_stride: int = 1
    clip: float = 0.2
    epsilon: float = 1e-5
    window: int = 64

    def __post_init__(self):
        if self.cell_size < 1:
            raise ValueError("cell_size must be >= 1")
        if self.window < 1 or self.window % self.cell_size != 0:
            raise ValueError("window must be a positive multiple of cell_size")
        if self.block_size < 1 or self.block_size > self.cells_per_side:
            raise ValueError("block_size must be in [1, window/cell_size]")
        if self.block_stride < 1:
            raise ValueError("block_stride must be >= 1")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if not 0.0 < self.clip <= 1.0:
            raise ValueError("clip must be in (0, 1]")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    @property
    def cells_per_side(self) -> int:
        return self.window // self.cell_size

    @property
    def blocks_per_side(self) -> int:
        return (self.cells_per_side - self.block_size) // self.block_stride + 1

    @property
    def block_length(self) -> int:
        return self.block_size * self.block_size * self.bins

    @property
    def descriptor_length(self) -> int:
        return self.blocks_per_side**2 * self.block_length


DEFAULT_CONFIG = HogConfig()


@dataclass(frozen=True)
class GradientField:
    """Per-pixel gradients of a gray image.

    magnitude[p] = hypot(gx[p], gy[p]); orientation[p] in [0, 180).
    """

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    orientation: np.ndarray

    @property
    def width(self) -> int:
        return self.gx.shape[1]

    @property
    def height(self) -> int:
        return self.gx.shape[0]


@dataclass(frozen=True)
class HogDescriptor:
    """Flat feature vector plus the config that produced it.

    Constructed by :func:`block_normalize`; the length invariant
    (config.descriptor_length) holds for window-shaped inputs.
    """

    values: np.ndarray
    config: HogConfig


def compute_gradients(image: GrayImage) -> GradientField:
    if image.width < 3 or image.height < 3:
        raise ValueError("image must be at least 3x3")
    k = kernels()
    gx, gy = k.gradients(image.pixels)
    mag, ori = k.mag_ori(gx, gy)
    return GradientField(gx=gx, gy=gy, magnitude=mag, orientation=ori)


def cell_histograms(gradient_field: GradientField, config: HogConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Grid of per-cell bin vectors, shape (cells_y, cells_x, bins)."""
    if (
        gradient_field.width % config.cell_size != 0
        or gradient_field.height % config.cell_size != 0
    ):
        raise ValueError("field dimensions must be divisible by cell_size")
    return kernels().cell_histograms(
        gradient_field.magnitude, gradient_field.orientation, config.cell_size, config.bins
    )


def block_normalize(cells: np.ndarray, config: HogConfig = DEFAULT_CONFIG) -> HogDescriptor:
    if cells.shape[0] < config.block_size or cells.shape[1] < config.block_size:
        raise ValueError("cell grid smaller than one block")
    blocks = kernels().normalize_blocks(
        cells, config.block_size, config.block_stride, config.clip, config.epsilon
    )
    return HogDescriptor(values=blocks.reshape(-1), config=config)


def hog_descriptor(window: GrayImage, config: HogConfig = DEFAULT_CONFIG) -> HogDescriptor:
    """Descriptor of one detection window (dims config.window squared)."""
    if window.width != config.window or window.height != config.window:
        raise ValueError(
            f"window must be {config.window}x{config.window}, got {window.width}x{window.height}"
        )
    return block_normalize(cell_histograms(compute_gradients(window), config), config)


def format_descriptor(descriptor: HogDescriptor) -> str:
    """Two-line text form: geometry header plus 9-significant-digit values."""
    cfg = descriptor.config
    header = f"hog {cfg.window} {cfg.cell_size} {cfg.block_size} {cfg.block_stride} {cfg.bins}"
    body = " ".join(f"{v:.9g}" for v in descriptor.values.tolist())
    return f"{header}\n{body}\n"


def parse_descriptor(text: str) -> HogDescriptor:
    """Inverse of format_descriptor; clip/epsilon take their defaults."""
    lines = text.splitlines()
    if len(lines) < 2:
        raise ValueError("descriptor text must have a header line and a value line")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "hog":
        raise ValueError(f"bad descriptor header: {lines[0]!r}")
    window, cell, block, stride, bins = (int(t) for t in head[1:])
    config = HogConfig(
        cell_size=cell, bins=bins, block_size=block, block_stride=stride, window=window
    )
    values = np.array([float(t) for t in lines[1].split()], dtype=np.float64)
    if values.size != config.descriptor_length:
        raise ValueError(
            f"descriptor has {values.size} values, geometry implies {config.descriptor_length}"
        )
    return HogDescriptor(values=values, config=config)
