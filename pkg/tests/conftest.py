import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pagelayout.blocks import block_polygon, polygon_from_baseline
from pagelayout.geometry import Polyline
from pagelayout.layout import PageLayout, TextBlock, TextLine


def make_line(line_id, x0, x1, y, ascender, descender):
    """Straight horizontal text line fixture."""
    pts = np.array([[float(x0), float(y)], [float(x1), float(y)]])
    return TextLine(line_id, Polyline(pts), ascender, descender, polygon_from_baseline(pts, ascender, descender))


def make_block(block_id, lines):
    return TextBlock(block_id, lines, block_polygon(lines))


def make_page(blocks, height=128, width=128, page_id="fixture"):
    return PageLayout(page_id, height, width, blocks)


@pytest.fixture
def simple_page():
    """One block, two stacked neighbour lines on a 64x96 page."""
    l0 = make_line("l0", 8, 80, 20, 10.0, 3.0)
    l1 = make_line("l1", 12, 84, 32, 8.5, 4.5)
    return make_page([make_block("b0", [l0, l1])], height=64, width=96)
