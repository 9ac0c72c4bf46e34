"""Numba-compiled grid sweep kernels.

Same contracts as ``_numpy.py``; explicit loops, JIT-compiled with on-disk
caching and the GIL released so chunked sweeps can run on worker threads.
Phase reduction uses floor(x + 1/2) in both backends so results agree.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def _inside(x, lows, highs):
    for b in range(lows.shape[0]):
        ok = True
        for i in range(x.shape[0]):
            if not (lows[b, i] <= x[i] < highs[b, i]):
                ok = False
                break
        if ok:
            return True
    return False


@njit(**_JIT)
def cover_counts(points, window, lows, highs):
    n, d = points.shape
    out = np.zeros(n, dtype=np.int64)
    x = np.empty(d)
    for g in range(n):
        c = 0
        for w in range(window.shape[0]):
            for i in range(d):
                x[i] = points[g, i] + window[w, i]
            if _inside(x, lows, highs):
                c += 1
        out[g] = c
    return out


@njit(**_JIT)
def lambda_hits(points, window, lows, highs, k):
    n, d = points.shape
    counts = np.zeros(n, dtype=np.int64)
    idx = np.full((n, k), -1, dtype=np.int64)
    x = np.empty(d)
    for g in range(n):
        c = 0
        for w in range(window.shape[0]):
            for i in range(d):
                x[i] = points[g, i] + window[w, i]
            if _inside(x, lows, highs):
                if c < k:
                    idx[g, c] = w
                c += 1
        counts[g] = c
    return counts, idx


@njit(**_JIT)
def boundary_hits(points, window, face_axes, face_coords, tol):
    total = 0
    first = np.full(3, -1, dtype=np.int64)
    for g in range(points.shape[0]):
        for w in range(window.shape[0]):
            for f in range(face_axes.shape[0]):
                a = face_axes[f]
                if abs(points[g, a] + window[w, a] - face_coords[f]) < tol:
                    if first[0] < 0:
                        first[0] = g
                        first[1] = w
                        first[2] = f
                    total += 1
    return total, first


@njit(**_JIT)
def fiber_phases(points, window, lows, highs, freq):
    n, d = points.shape
    w_count = window.shape[0]
    out = np.zeros((n, w_count), dtype=np.complex128)
    x = np.empty(d)
    for g in range(n):
        for w in range(w_count):
            for i in range(d):
                x[i] = points[g, i] + window[w, i]
            if _inside(x, lows, highs):
                t = 0.0
                for i in range(d):
                    t += x[i] * freq[i]
                t -= np.floor(t + 0.5)
                out[g, w] = np.exp(2j * np.pi * t)
    return out


@njit(**_JIT)
def phase_matrices(freqs, lam_stack):
    s, k, d = lam_stack.shape
    out = np.empty((s, k, k), dtype=np.complex128)
    for m in range(s):
        for j in range(k):
            for l in range(k):
                t = 0.0
                for i in range(d):
                    t += lam_stack[m, j, i] * freqs[l, i]
                t -= np.floor(t + 0.5)
                out[m, j, l] = np.exp(2j * np.pi * t)
    return out
