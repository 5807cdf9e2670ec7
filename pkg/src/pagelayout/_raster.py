"""Rasterization helpers: strokes, disks, polygon fills and polyline sampling.

All masks are computed against pixel centers on the integer grid, which
keeps rendering equivariant under the 90-degree rotations used elsewhere.
"""

from __future__ import annotations

import numpy as np


def _segment_distance_grid(p, q, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Distance from every (col, row) grid center to segment p-q."""
    px, py = p
    qx, qy = q
    dx, dy = qx - px, qy - py
    cc, rr = np.meshgrid(cols, rows)
    seg_len2 = dx * dx + dy * dy
    if seg_len2 <= 1e-18:
        return np.hypot(cc - px, rr - py)
    t = np.clip(((cc - px) * dx + (rr - py) * dy) / seg_len2, 0.0, 1.0)
    return np.hypot(cc - (px + t * dx), rr - (py + t * dy))


def stroke_mask(points: np.ndarray, shape: tuple[int, int], thickness: float) -> np.ndarray:
    """Pixels whose center lies within thickness/2 of the polyline."""
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    half = thickness / 2.0
    pts = np.asarray(points, dtype=np.float64)
    for p, q in zip(pts[:-1], pts[1:]):
        x0 = max(0, int(np.floor(min(p[0], q[0]) - half - 1)))
        x1 = min(w - 1, int(np.ceil(max(p[0], q[0]) + half + 1)))
        y0 = max(0, int(np.floor(min(p[1], q[1]) - half - 1)))
        y1 = min(h - 1, int(np.ceil(max(p[1], q[1]) + half + 1)))
        if x1 < x0 or y1 < y0:
            continue
        cols = np.arange(x0, x1 + 1)
        rows = np.arange(y0, y1 + 1)
        d = _segment_distance_grid(p, q, cols, rows)
        mask[y0 : y1 + 1, x0 : x1 + 1] |= d <= half
    return mask


def disk_mask(center, radius: float, shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    cx, cy = float(center[0]), float(center[1])
    mask = np.zeros((h, w), dtype=bool)
    x0 = max(0, int(np.floor(cx - radius - 1)))
    x1 = min(w - 1, int(np.ceil(cx + radius + 1)))
    y0 = max(0, int(np.floor(cy - radius - 1)))
    y1 = min(h - 1, int(np.ceil(cy + radius + 1)))
    if x1 < x0 or y1 < y0:
        return mask
    cc, rr = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    mask[y0 : y1 + 1, x0 : x1 + 1] = np.hypot(cc - cx, rr - cy) <= radius
    return mask


def polygon_mask(ring: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Even-odd scanline fill of a simple polygon over pixel centers."""
    h, w = shape
    mask = np.zeros((h, w), dtype=bool)
    ring = np.asarray(ring, dtype=np.float64)
    ys = ring[:, 1]
    r0 = max(0, int(np.ceil(ys.min())))
    r1 = min(h - 1, int(np.floor(ys.max())))
    if r1 < r0:
        return mask
    nxt = np.roll(ring, -1, axis=0)
    x1s, y1s = ring[:, 0], ring[:, 1]
    x2s, y2s = nxt[:, 0], nxt[:, 1]
    for r in range(r0, r1 + 1):
        y = float(r)
        straddle = ((y1s <= y) & (y < y2s)) | ((y2s <= y) & (y < y1s))
        if not straddle.any():
            continue
        t = (y - y1s[straddle]) / (y2s[straddle] - y1s[straddle])
        xs = np.sort(x1s[straddle] + t * (x2s[straddle] - x1s[straddle]))
        for i in range(0, len(xs) - 1, 2):
            c0 = max(0, int(np.ceil(xs[i] - 1e-9)))
            c1 = min(w - 1, int(np.floor(xs[i + 1] + 1e-9)))
            if c1 >= c0:
                mask[r, c0 : c1 + 1] = True
    return mask


def cumulative_lengths(points: np.ndarray) -> np.ndarray:
    d = np.hypot(*np.diff(points, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(d)])


def sample_polyline(points: np.ndarray, step: float = 1.0) -> np.ndarray:
    """Points along the polyline at arc-length intervals, endpoints included."""
    pts = np.asarray(points, dtype=np.float64)
    cum = cumulative_lengths(pts)
    total = cum[-1]
    ds = np.arange(0.0, total, step)
    if total - (ds[-1] if len(ds) else 0.0) > 1e-9:
        ds = np.concatenate([ds, [total]])
    x = np.interp(ds, cum, pts[:, 0])
    y = np.interp(ds, cum, pts[:, 1])
    return np.stack([x, y], axis=1)


def polyline_pixels(points: np.ndarray, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Integer (rows, cols) of in-bounds pixels traversed by the polyline."""
    h, w = shape
    samples = sample_polyline(points, step=0.5)
    cols = np.rint(samples[:, 0]).astype(np.int64)
    rows = np.rint(samples[:, 1]).astype(np.int64)
    ok = (cols >= 0) & (cols < w) & (rows >= 0) & (rows < h)
    keys = np.unique(rows[ok] * w + cols[ok])
    return keys // w, keys % w
