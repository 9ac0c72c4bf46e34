"""Pure-NumPy implementations of the grid sweep kernels.

These are the fallback path selected by ``SPECTILE_BACKEND=numpy``; the numba
twins in ``_numba.py`` implement the same contracts with identical integer
outputs. Work is blocked over grid points to bound temporary memory.
"""

import numpy as np

_BLOCK = 8192


def _membership(points, window, lows, highs):
    """(g, W) bool mask: point + window shift lies in the half-open box union."""
    g, d = points.shape
    w = window.shape[0]
    if lows.shape[0] == 0 or w == 0:
        return np.zeros((g, w), dtype=bool)
    shifted = points[:, None, None, :] + window[None, :, None, :]
    inside = (shifted >= lows[None, None, :, :]) & (shifted < highs[None, None, :, :])
    return inside.all(axis=3).any(axis=2)


def cover_counts(points, window, lows, highs):
    """Per grid point, the number of window shifts landing inside the box union."""
    n = points.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        out[lo:hi] = _membership(points[lo:hi], window, lows, highs).sum(axis=1)
    return out


def lambda_hits(points, window, lows, highs, k):
    """Covering counts plus the first-k hit window indices per grid point.

    Window rows are expected in lexicographic order, so the returned index
    rows are lexicographically sorted too. Missing slots are -1.
    """
    n = points.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    idx = np.full((n, k), -1, dtype=np.int64)
    take = min(k, window.shape[0])
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        mask = _membership(points[lo:hi], window, lows, highs)
        counts[lo:hi] = mask.sum(axis=1)
        if take == 0:
            continue
        order = np.argsort(~mask, axis=1, kind="stable")[:, :take]
        valid = np.take_along_axis(mask, order, axis=1)
        idx[lo:hi, :take] = np.where(valid, order, -1)
    return counts, idx


def boundary_hits(points, window, face_axes, face_coords, tol):
    """Count grid+window coordinates within ``tol`` of an axis-aligned face.

    Returns (total hit count, first (grid, window, face) index triple or -1s).
    """
    total = 0
    first = np.full(3, -1, dtype=np.int64)
    n = points.shape[0]
    if window.shape[0] == 0 or face_axes.shape[0] == 0:
        return 0, first
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        shifted = points[lo:hi, None, :] + window[None, :, :]
        for f in range(face_axes.shape[0]):
            hits = np.abs(shifted[:, :, face_axes[f]] - face_coords[f]) < tol
            c = int(hits.sum())
            if c and first[0] < 0:
                g, w = np.argwhere(hits)[0]
                first[:] = (lo + int(g), int(w), f)
            total += c
    return total, first


def fiber_phases(points, window, lows, highs, freq):
    """Fibers of the modulated indicator: exp(2πi a·(ω+λ)) on the set, 0 off it.

    Phase arguments are reduced to [-1/2, 1/2) before exponentiation so large
    lattice shifts do not cost precision.
    """
    n, w = points.shape[0], window.shape[0]
    out = np.zeros((n, w), dtype=np.complex128)
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        mask = _membership(points[lo:hi], window, lows, highs)
        shifted = points[lo:hi, None, :] + window[None, :, :]
        x = shifted @ freq
        x = x - np.floor(x + 0.5)
        out[lo:hi] = np.where(mask, np.exp(2j * np.pi * x), 0.0)
    return out


def phase_matrices(freqs, lam_stack):
    """Unit-modulus matrices exp(2πi λ_j·a_l) for a stack of λ-tuples.

    ``lam_stack`` has shape (s, k, d), ``freqs`` (k, d); output is (s, k, k)
    with rows indexed by the λ entries and columns by the frequencies.
    """
    x = np.einsum("skd,ld->skl", lam_stack, freqs)
    x = x - np.floor(x + 0.5)
    return np.exp(2j * np.pi * x)
