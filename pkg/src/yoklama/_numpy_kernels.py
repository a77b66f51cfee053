"""Pure-numpy kernel fallback.

Signature-compatible twin of ``_numba_kernels``; see backend.py for how the
two are selected.  Accumulation order differs from the jitted loops only by
floating-point reassociation.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered [-1, 0, 1] differences with replicated borders."""
    gx = np.empty_like(img)
    gx[:, 1:-1] = img[:, 2:] - img[:, :-2]
    gx[:, 0] = img[:, 1] - img[:, 0]
    gx[:, -1] = img[:, -1] - img[:, -2]
    gy = np.empty_like(img)
    gy[1:-1, :] = img[2:, :] - img[:-2, :]
    gy[0, :] = img[1, :] - img[0, :]
    gy[-1, :] = img[-1, :] - img[-2, :]
    return gx, gy


def mag_ori(gx: np.ndarray, gy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient magnitude and unsigned orientation in [0, 180)."""
    mag = np.hypot(gx, gy)
    ori = np.degrees(np.arctan2(gy, gx)) % 180.0
    # Folding can round up to exactly 180.0; that angle is the same as 0.
    ori[ori >= 180.0] = 0.0
    return mag, ori


def _votes(mag, ori, bins):
    """Split each pixel's magnitude between its two bracketing bin centers."""
    u = ori * (bins / 180.0)
    lo = u.astype(np.int64)
    frac = u - lo
    # An angle just under 180 can round u up to exactly `bins`; that is the
    # wrapped bin 0 with all the weight.
    over = lo >= bins
    lo[over] = 0
    frac[over] = 0.0
    hi = lo + 1
    hi[hi == bins] = 0
    return lo, hi, mag * (1.0 - frac), mag * frac


def _accumulate(lo, hi, vlo, vhi, cell_size, bins):
    height, width = lo.shape
    cy = height // cell_size
    cx = width // cell_size
    cell_of = (
        (np.arange(height) // cell_size)[:, None] * cx
        + (np.arange(width) // cell_size)[None, :]
    )
    hist = np.bincount(
        (cell_of * bins + lo).ravel(), weights=vlo.ravel(), minlength=cy * cx * bins
    )
    hist += np.bincount(
        (cell_of * bins + hi).ravel(), weights=vhi.ravel(), minlength=cy * cx * bins
    )
    return hist.reshape(cy, cx, bins)


def cell_histograms(mag: np.ndarray, ori: np.ndarray, cell_size: int, bins: int) -> np.ndarray:
    """Per-cell orientation histograms; dims must divide by cell_size."""
    lo, hi, vlo, vhi = _votes(mag, ori, bins)
    return _accumulate(lo, hi, vlo, vhi, cell_size, bins)


def normalize_blocks(
    cells: np.ndarray, block_size: int, block_stride: int, clip: float, eps: float
) -> np.ndarray:
    """L2-Hys over overlapping blocks; returns (by, bx, block_len)."""
    bins = cells.shape[2]
    view = sliding_window_view(cells, (block_size, block_size), axis=(0, 1))
    # view axes: (cy', cx', bins, wy, wx) -> (cy', cx', wy, wx, bins)
    blocks = view.transpose(0, 1, 3, 4, 2)[::block_stride, ::block_stride]
    by, bx = blocks.shape[:2]
    v = blocks.reshape(by, bx, block_size * block_size * bins).copy()
    n1 = np.sqrt(np.sum(v * v, axis=2, keepdims=True) + eps * eps)
    v = np.minimum(v / n1, clip)
    n2 = np.sqrt(np.sum(v * v, axis=2, keepdims=True) + eps * eps)
    return v / n2


def dot_score(weights: np.ndarray, values: np.ndarray) -> float:
    """Left-to-right summation, matching the jitted twin's order."""
    total = 0.0
    for w, v in zip(weights.tolist(), values.tolist()):
        total += w * v
    return total


def scan_scores(
    img: np.ndarray,
    window: int,
    stride: int,
    cell_size: int,
    bins: int,
    block_size: int,
    block_stride: int,
    wblocks: np.ndarray,
    bias: float,
    clip: float,
    eps: float,
) -> np.ndarray:
    """Score every window position of one pyramid level.

    Gradients are computed once over the level; windows sharing a grid
    phase (offset modulo cell_size) share cell histograms and normalized
    blocks.  scores[wy, wx] is the window at (x, y) = (wx, wy) * stride.
    """
    height, width = img.shape
    nwy = (height - window) // stride + 1
    nwx = (width - window) // stride + 1
    gx, gy = gradients(img)
    mag, ori = mag_ori(gx, gy)
    lo, hi, vlo, vhi = _votes(mag, ori, bins)
    ncw = window // cell_size
    nbw = (ncw - block_size) // block_stride + 1
    wmat = wblocks.reshape(nbw * nbw, -1).T  # (block_len, nbw*nbw)
    scores = np.empty((nwy, nwx), dtype=np.float64)
    oys = np.arange(nwy) * stride
    oxs = np.arange(nwx) * stride
    for py in np.unique(oys % cell_size):
        sel_y = oys[oys % cell_size == py]
        for px in np.unique(oxs % cell_size):
            sel_x = oxs[oxs % cell_size == px]
            ncy = (height - py) // cell_size
            ncx = (width - px) // cell_size
            region = np.s_[py : py + ncy * cell_size, px : px + ncx * cell_size]
            cells = _accumulate(
                lo[region], hi[region], vlo[region], vhi[region], cell_size, bins
            )
            blocks = normalize_blocks(cells, block_size, block_stride, clip, eps)
            nby, nbx = blocks.shape[:2]
            dots = blocks @ wmat  # (nby, nbx, nbw*nbw)
            limy = nby - (nbw - 1) * block_stride
            limx = nbx - (nbw - 1) * block_stride
            grid = np.zeros((limy, limx), dtype=np.float64)
            for u in range(nbw):
                for v in range(nbw):
                    grid += dots[
                        u * block_stride : u * block_stride + limy,
                        v * block_stride : v * block_stride + limx,
                        u * nbw + v,
                    ]
            ci = (sel_y - py) // cell_size
            cj = (sel_x - px) // cell_size
            scores[np.ix_(sel_y // stride, sel_x // stride)] = grid[np.ix_(ci, cj)] + bias
    return scores
