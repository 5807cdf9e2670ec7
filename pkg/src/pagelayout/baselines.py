"""Baseline detection from the base/end channels.

Pipeline: box smoothing, vertical non-maxima suppression, endpoint channel
subtraction, thresholding, anisotropic connected components, a minimum
horizontal-extent filter, and per-component linear-spline fitting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .channels import ChannelMaps
from .geometry import Polyline

logger = logging.getLogger("pagelayout.baselines")


@dataclass(frozen=True)
class ExtractParams:
    smooth_size: int = 3
    nms_size: int = 7
    threshold: float = 0.3
    cc_width: int = 5
    cc_height: int = 9
    min_length: float = 5.0
    max_control_points: int = 10

    def __post_init__(self):
        if self.smooth_size < 1 or self.smooth_size % 2 == 0:
            raise ValueError("smooth_size must be odd and positive")
        if self.nms_size < 1 or self.nms_size % 2 == 0:
            raise ValueError("nms_size must be odd and positive")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must be in [0, 1]")
        if min(self.cc_width, self.cc_height, self.max_control_points) < 1 or self.min_length <= 0:
            raise ValueError("all sizes must be positive")


def smooth(arr: np.ndarray, size: int) -> np.ndarray:
    """size x size box mean with edge replication."""
    if size == 1:
        return np.asarray(arr, dtype=np.float64).copy()
    return ndimage.uniform_filter(np.asarray(arr, dtype=np.float64), size=size, mode="nearest")


def vertical_nms(arr: np.ndarray, size: int) -> np.ndarray:
    """Keep pixels that tie the maximum of the size-tall window centered on them.

    Suppressed pixels become 0; ties with the window maximum survive, so
    exact-value plateaus are kept and left to the later component stage.
    """
    a = np.asarray(arr, dtype=np.float64)
    win_max = ndimage.maximum_filter(a, size=(size, 1), mode="nearest")
    return np.where(a >= win_max, a, 0.0)


def connected_components(
    fg: np.ndarray, cc_width: int = 5, cc_height: int = 9
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Components of a boolean map under a centered rectangular neighborhood.

    Two foreground pixels are adjacent iff |dx| <= (cc_width-1)//2 and
    |dy| <= (cc_height-1)//2; components are the transitive closure.  The
    implementation unions maximal horizontal runs instead of single pixels,
    which is exact and fast on thin post-NMS ridges.

    Returns a list of (rows, cols) index arrays, one per component, ordered
    by (topmost row, leftmost column).
    """
    fg = np.asarray(fg, dtype=bool)
    dx = (cc_width - 1) // 2
    dy = (cc_height - 1) // 2
    runs: list[tuple[int, int, int]] = []  # (row, col_start, col_end) inclusive
    run_gap = 1 if dx >= 1 else 0  # dx=0: consecutive pixels are not adjacent
    for r in np.nonzero(fg.any(axis=1))[0]:
        cols = np.nonzero(fg[r])[0]
        breaks = np.nonzero(np.diff(cols) > run_gap)[0]
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [len(cols) - 1]])
        for s, e in zip(starts, ends):
            runs.append((int(r), int(cols[s]), int(cols[e])))

    parent = list(range(len(runs)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    by_row: dict[int, list[int]] = {}
    for idx, (r, _, _) in enumerate(runs):
        by_row.setdefault(r, []).append(idx)

    for idx, (r, s, e) in enumerate(runs):
        for rr in range(r - dy, r + 1):
            for jdx in by_row.get(rr, ()):
                if jdx >= idx:
                    continue
                _, s2, e2 = runs[jdx]
                if s - dx <= e2 and s2 - dx <= e:
                    union(idx, jdx)

    groups: dict[int, list[int]] = {}
    for idx in range(len(runs)):
        groups.setdefault(find(idx), []).append(idx)

    components = []
    for members in groups.values():
        rows = np.concatenate([np.full(runs[i][2] - runs[i][1] + 1, runs[i][0]) for i in members])
        cols = np.concatenate([np.arange(runs[i][1], runs[i][2] + 1) for i in members])
        components.append((rows, cols))
    components.sort(key=lambda rc: (int(rc[0].min()), int(rc[1].min())))
    return components


def _fit_spline(rows: np.ndarray, cols: np.ndarray, max_points: int) -> Polyline:
    """Fit uniformly spaced control points; y is the mean row per x-bin."""
    minc, maxc = int(cols.min()), int(cols.max())
    width = maxc - minc + 1
    n = max(2, min(max_points, width))
    xs = np.linspace(minc, maxc, n)
    step = (maxc - minc) / (n - 1)
    bins = np.clip(np.rint((cols - minc) / step).astype(np.int64), 0, n - 1)
    counts = np.bincount(bins, minlength=n)
    sums = np.bincount(bins, weights=rows, minlength=n)
    ys = np.full(n, np.nan)
    nz = counts > 0
    ys[nz] = sums[nz] / counts[nz]
    if not nz.all():
        idx = np.nonzero(nz)[0]
        ys = np.interp(np.arange(n), idx, ys[idx])
    return Polyline(np.stack([xs, ys], axis=1))


def detect_baselines(maps: ChannelMaps, params: ExtractParams | None = None) -> list[Polyline]:
    """Extract baseline splines from the base and end channels."""
    params = params or ExtractParams()
    response = vertical_nms(smooth(maps.base, params.smooth_size), params.nms_size)
    response = np.maximum(response - maps.end.astype(np.float64), 0.0)
    fg = response >= params.threshold

    baselines = []
    for rows, cols in connected_components(fg, params.cc_width, params.cc_height):
        width = int(cols.max()) - int(cols.min()) + 1
        if width < max(params.min_length, 2):
            continue
        height = int(rows.max()) - int(rows.min()) + 1
        if height > params.cc_height:
            logger.debug("component taller than the connectivity window (%d px); fitting anyway", height)
        baselines.append(_fit_spline(rows.astype(np.float64), cols.astype(np.float64), params.max_control_points))
    return baselines
