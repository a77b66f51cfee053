"""Numba-jitted kernels; signature twin of ``_numpy_kernels``.

Loops are written in strict IEEE order (no fastmath) so each backend is
deterministic on its own.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def gradients(img):
    height, width = img.shape
    gx = np.empty((height, width), np.float64)
    gy = np.empty((height, width), np.float64)
    for y in range(height):
        y0 = y - 1 if y > 0 else 0
        y1 = y + 1 if y < height - 1 else height - 1
        for x in range(width):
            x0 = x - 1 if x > 0 else 0
            x1 = x + 1 if x < width - 1 else width - 1
            gx[y, x] = img[y, x1] - img[y, x0]
            gy[y, x] = img[y1, x] - img[y0, x]
    return gx, gy


@njit(cache=True)
def mag_ori(gx, gy):
    height, width = gx.shape
    mag = np.empty((height, width), np.float64)
    ori = np.empty((height, width), np.float64)
    for y in range(height):
        for x in range(width):
            mag[y, x] = np.hypot(gx[y, x], gy[y, x])
            ang = np.degrees(np.arctan2(gy[y, x], gx[y, x])) % 180.0
            if ang >= 180.0:
                ang = 0.0
            ori[y, x] = ang
    return mag, ori


@njit(cache=True)
def _accumulate(mag, ori, cell_size, bins):
    height, width = mag.shape
    cy = height // cell_size
    cx = width // cell_size
    cells = np.zeros((cy, cx, bins), np.float64)
    scale = bins / 180.0
    for y in range(cy * cell_size):
        ci = y // cell_size
        for x in range(cx * cell_size):
            cj = x // cell_size
            u = ori[y, x] * scale
            lo = int(u)
            frac = u - lo
            if lo >= bins:
                lo = 0
                frac = 0.0
            hi = lo + 1
            if hi == bins:
                hi = 0
            m = mag[y, x]
            cells[ci, cj, lo] += m * (1.0 - frac)
            cells[ci, cj, hi] += m * frac
    return cells


@njit(cache=True)
def cell_histograms(mag, ori, cell_size, bins):
    return _accumulate(mag, ori, cell_size, bins)


@njit(cache=True)
def normalize_blocks(cells, block_size, block_stride, clip, eps):
    cy, cx, bins = cells.shape
    by = (cy - block_size) // block_stride + 1
    bx = (cx - block_size) // block_stride + 1
    block_len = block_size * block_size * bins
    out = np.empty((by, bx, block_len), np.float64)
    for bi in range(by):
        for bj in range(bx):
            ssum = 0.0
            for ci in range(block_size):
                for cj in range(block_size):
                    for b in range(bins):
                        v = cells[bi * block_stride + ci, bj * block_stride + cj, b]
                        ssum += v * v
            n1 = np.sqrt(ssum + eps * eps)
            ssum = 0.0
            idx = 0
            for ci in range(block_size):
                for cj in range(block_size):
                    for b in range(bins):
                        v = cells[bi * block_stride + ci, bj * block_stride + cj, b] / n1
                        if v > clip:
                            v = clip
                        out[bi, bj, idx] = v
                        ssum += v * v
                        idx += 1
            n2 = np.sqrt(ssum + eps * eps)
            for idx in range(block_len):
                out[bi, bj, idx] /= n2
    return out


@njit(cache=True)
def dot_score(weights, values):
    total = 0.0
    for i in range(weights.shape[0]):
        total += weights[i] * values[i]
    return total


@njit(cache=True)
def scan_scores(
    img, window, stride, cell_size, bins, block_size, block_stride, wblocks, bias, clip, eps
):
    height, width = img.shape
    nwy = (height - window) // stride + 1
    nwx = (width - window) // stride + 1
    gx, gy = gradients(img)
    mag, ori = mag_ori(gx, gy)
    ncw = window // cell_size
    nbw = (ncw - block_size) // block_stride + 1
    block_len = block_size * block_size * bins
    scores = np.empty((nwy, nwx), np.float64)
    for py in range(cell_size):
        hit = False
        for wy in range(nwy):
            if (wy * stride) % cell_size == py:
                hit = True
                break
        if not hit:
            continue
        for px in range(cell_size):
            hit = False
            for wx in range(nwx):
                if (wx * stride) % cell_size == px:
                    hit = True
                    break
            if not hit:
                continue
            ncy = (height - py) // cell_size
            ncx = (width - px) // cell_size
            cells = _accumulate(
                mag[py : py + ncy * cell_size, px : px + ncx * cell_size],
                ori[py : py + ncy * cell_size, px : px + ncx * cell_size],
                cell_size,
                bins,
            )
            blocks = normalize_blocks(cells, block_size, block_stride, clip, eps)
            for wy in range(nwy):
                oy = wy * stride
                if oy % cell_size != py:
                    continue
                ci = oy // cell_size
                for wx in range(nwx):
                    ox = wx * stride
                    if ox % cell_size != px:
                        continue
                    cj = ox // cell_size
                    s = bias
                    for u in range(nbw):
                        for v in range(nbw):
                            row = ci + u * block_stride
                            col = cj + v * block_stride
                            for t in range(block_len):
                                s += wblocks[u, v, t] * blocks[row, col, t]
                    scores[wy, wx] = s
    return scores
