"""Seeded generator of plausible page layouts plus a map corruptor.

``generate`` builds pages whose ground truth is recoverable by the
extraction pipeline by construction: within a block, consecutive baselines
sit closer than the taller line's text height (so the neighbour rule keeps
them together) while line polygons never overlap; blocks are separated
vertically by well over one line height and horizontally by clear gutters.
Squaring those two in-block constraints requires ascenders that shrink
slightly down the block (or descenders that grow); the generator drifts
ascenders down ~1 px per line and bumps a descender when a pair would
otherwise have no feasible spacing.  Line extents are ragged with
alternating insets so block outlines stay clear of the penalty strips.

All randomness comes from the splitmix64 stream documented in
``pagelayout._rng``, so identical configs reproduce identical layouts on
any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._rng import Rng
from .blocks import block_polygon, polygon_from_baseline
from .channels import ChannelMaps
from .geometry import Polyline
from .layout import PageLayout, TextBlock, TextLine

_MARGIN = 16
_COL_GAP = 24
_MIN_COL_W = 96
_MAX_BLOCKS_PER_COL = 3


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    page_size: tuple[int, int] = (576, 768)
    columns: tuple[int, int] = (1, 3)
    lines_per_block: tuple[int, int] = (3, 6)
    ascender_range: tuple[float, float] = (8.0, 24.0)
    descender_ratio: tuple[float, float] = (0.2, 0.5)
    vertical_line_prob: float = 0.0
    baseline_jitter: float = 0.0

    def __post_init__(self):
        if self.columns[0] < 1 or self.columns[1] < self.columns[0]:
            raise ValueError("invalid columns range")
        if self.lines_per_block[0] < 1 or self.lines_per_block[1] < self.lines_per_block[0]:
            raise ValueError("invalid lines_per_block range")
        if self.ascender_range[0] < 3.0 or self.ascender_range[1] < self.ascender_range[0]:
            raise ValueError("invalid ascender_range")
        if not (0.0 <= self.vertical_line_prob <= 1.0):
            raise ValueError("vertical_line_prob must be in [0, 1]")
        if self.baseline_jitter < 0:
            raise ValueError("baseline_jitter must be >= 0")


def _block_lines(rng: Rng, n: int, width: float, cfg: SynthConfig):
    """Baselines and heights of one block in local coordinates.

    Returns (entries, extent) where each entry is (points, ascender,
    descender) and ``extent`` is the local height of the block footprint.
    Baseline rows are integers so rendered strokes quantize crisply.
    """
    jit = cfg.baseline_jitter
    m = 0.3 + 2.0 * jit
    entries = []
    asc = rng.uniform(*cfg.ascender_range)
    prev_y = prev_asc = prev_des = None
    y = int(math.ceil(asc + 2.0))
    for i in range(n):
        if i > 0:
            asc = max(3.0, asc - rng.uniform(0.9, 1.6))
        des = asc * rng.uniform(*cfg.descender_ratio)
        if i > 0:
            pitch = int(math.ceil(asc + prev_des + m))
            y = prev_y + pitch
            if max(prev_asc + prev_des, asc + des) <= pitch + m:
                des = (pitch + m + 0.05 + rng.uniform(0.0, 0.4)) - asc
        if i % 2 == 0:
            inset_l, inset_r = rng.uniform(2.0, 5.0), rng.uniform(2.0, 5.0)
        else:
            inset_l, inset_r = rng.uniform(9.0, 12.0), rng.uniform(9.0, 12.0)
        x0, x1 = inset_l, width - inset_r
        if jit > 0:
            xs = np.linspace(x0, x1, 5)
            ys = np.array([y + rng.uniform(-jit, jit) for _ in range(5)])
            pts = np.stack([xs, ys], axis=1)
        else:
            pts = np.array([[x0, float(y)], [x1, float(y)]])
        entries.append((pts, asc, des))
        prev_y, prev_asc, prev_des = y, asc, des
    extent = int(math.ceil(prev_y + prev_des + jit + 2.0))
    return entries, extent


def _make_block(block_id: str, entries, line_start: int) -> TextBlock:
    lines = []
    for k, (pts, asc, des) in enumerate(entries):
        lines.append(
            TextLine(f"l{line_start + k}", Polyline(pts), asc, des, polygon_from_baseline(pts, asc, des))
        )
    return TextBlock(block_id, lines, block_polygon(lines))


def generate(cfg: SynthConfig) -> PageLayout:
    """Deterministic synthetic page layout for the given config."""
    rng = Rng(cfg.seed)
    height, width = cfg.page_size
    usable_w = width - 2 * _MARGIN
    usable_h = height - 2 * _MARGIN
    if usable_w < _MIN_COL_W or usable_h < 4 * cfg.ascender_range[0]:
        raise ValueError("infeasible config: page too small")

    want_vertical = rng.uniform() < cfg.vertical_line_prob
    vertical_entries = None
    v_extent = 0
    if want_vertical:
        n_v = rng.randint(*cfg.lines_per_block)
        v_len = rng.uniform(0.40, 0.65) * usable_h
        vertical_entries, v_extent = _block_lines(rng, n_v, v_len, cfg)
        if usable_w - (v_extent + _COL_GAP) < _MIN_COL_W:
            vertical_entries = None
            v_extent = 0

    col_area = usable_w - (v_extent + _COL_GAP if vertical_entries else 0)
    n_cols = rng.randint(*cfg.columns)
    while n_cols > 1 and (col_area - (n_cols - 1) * _COL_GAP) / n_cols < _MIN_COL_W:
        n_cols -= 1
    col_w = (col_area - (n_cols - 1) * _COL_GAP) / n_cols

    blocks: list[TextBlock] = []
    line_counter = 0

    for col in range(n_cols):
        col_x = _MARGIN + col * (col_w + _COL_GAP)
        placed = 0
        last_baseline_y = last_height = last_bottom = None
        while placed < _MAX_BLOCKS_PER_COL:
            n = rng.randint(*cfg.lines_per_block)
            entries, extent = _block_lines(rng, n, col_w, cfg)
            first_pts, first_asc, first_des = entries[0]
            first_y = float(np.mean(first_pts[:, 1]))
            if placed == 0:
                y_off = _MARGIN + rng.randint(0, 8)
            else:
                need = 1.35 * max(last_height, first_asc + first_des) + 2.0
                y_off = int(math.ceil(max(last_bottom + 4.0, last_baseline_y + need - first_y)))
            if y_off + extent > height - _MARGIN:
                break
            shifted = [(pts + np.array([col_x, y_off]), a, d) for pts, a, d in entries]
            blocks.append(_make_block(f"b{len(blocks)}", shifted, line_counter))
            line_counter += n
            placed += 1
            last_pts, last_asc, last_des = shifted[-1]
            last_baseline_y = float(np.mean(last_pts[:, 1]))
            last_height = last_asc + last_des
            last_bottom = y_off + extent

    if vertical_entries:
        # Rotate the locally horizontal block so its lines read top to bottom.
        tmp = [(np.stack([(v_extent - 1) - pts[:, 1], pts[:, 0]], axis=1), a, d) for pts, a, d in vertical_entries]
        max_x = max(float(p[:, 0].max()) + a for p, a, _ in tmp)
        min_x = min(float(p[:, 0].min()) - d for p, _, d in tmp)
        min_y = min(float(p[:, 1].min()) for p, _, _ in tmp)
        dx = round((width - _MARGIN - 2.0) - max_x)
        dy = round(_MARGIN + 2.0 + rng.randint(0, 8) - min_y)
        if min_x + dx > _MARGIN:
            shifted = [(pts + np.array([dx, dy]), a, d) for pts, a, d in tmp]
            blocks.append(_make_block(f"b{len(blocks)}", shifted, line_counter))
            line_counter += len(shifted)

    if not blocks:
        raise ValueError("infeasible config: no block fits the page")
    return PageLayout(f"synth-{cfg.seed}", height, width, blocks)


def corrupt(
    maps: ChannelMaps,
    noise_sigma: float = 0.0,
    blur_size: int = 1,
    dropout_prob: float = 0.0,
    rng_seed: int = 0,
) -> ChannelMaps:
    """Degrade clean maps into plausible imperfect predictions.

    Applies, in order: box blur of every channel, column-run dropout of
    base-channel foreground (each column starts a 2-6 px wide dropout run
    with probability ``dropout_prob``), then clamped Gaussian noise on every
    channel.  Deterministic per ``rng_seed``.
    """
    rng = Rng(rng_seed)
    chans = {name: arr.astype(np.float64) for name, arr in maps.channels().items()}
    if blur_size > 1:
        chans = {name: ndimage.uniform_filter(arr, size=blur_size, mode="nearest") for name, arr in chans.items()}
    h, w = maps.shape
    if dropout_prob > 0:
        # Tears are drawn independently per foreground stroke so different
        # lines do not break at the same columns.  ``dropout_prob`` is the
        # expected fraction of stroke columns torn; runs are 2-6 px wide, so
        # the per-column start probability follows the renewal identity
        # q * E[W] / (q * E[W] + 1 - q) = dropout_prob with E[W] = 4.
        mean_w = 4.0
        q = min(1.0, dropout_prob / (mean_w - (mean_w - 1.0) * dropout_prob))
        fg = chans["base"] > 0.5
        labels, n_labels = ndimage.label(fg, structure=np.ones((3, 3), dtype=bool))
        for lab in range(1, n_labels + 1):
            comp = labels == lab
            cols = np.nonzero(comp.any(axis=0))[0]
            c = int(cols.min())
            c_hi = int(cols.max())
            while c <= c_hi:
                if rng.uniform() < q:
                    run = rng.randint(2, 6)
                    sel = comp[:, c : c + run]
                    chans["base"][:, c : c + run][sel] = 0.0
                    c += run
                else:
                    c += 1
    if noise_sigma > 0:
        for name in ("base", "end", "asc", "des", "block"):
            chans[name] = chans[name] + noise_sigma * rng.normal_array(h * w).reshape(h, w)
        for name in ("base", "end", "block"):
            chans[name] = np.clip(chans[name], 0.0, 1.0)
        for name in ("asc", "des"):
            chans[name] = np.maximum(chans[name], 0.0)
    return ChannelMaps(**{name: arr.astype(np.float32) for name, arr in chans.items()})
