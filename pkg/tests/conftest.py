import numpy as np
import pytest

from spectile import BoxUnion, Lattice, MultiTileConfig


@pytest.fixture
def line_lattice():
    return Lattice([[1.0]])


def make_line_config(boxes, level, lattice=None):
    """1-d candidate tiling over Z (or the given lattice)."""
    lattice = lattice or Lattice([[1.0]])
    region = BoxUnion([(np.atleast_1d(lo), np.atleast_1d(hi)) for lo, hi in boxes])
    return MultiTileConfig(region, lattice, level)


def brute_force_cover_shifts(boxes, omega, span=50):
    """Oracle: integer shifts z with omega + z inside the 1-d box union."""
    hits = []
    for z in range(-span, span + 1):
        x = omega + z
        if any(lo <= x < hi for lo, hi in boxes):
            hits.append(z)
    return hits
