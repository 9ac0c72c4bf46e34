"""Discrete fiber model: per-sample subspaces of a truncated coordinate window.

The fiber of a function at a cell point ω is the sequence of its transform
values over ω + Λ. Truncating to a finite lexicographically ordered window of
lattice points turns fibers into vectors and per-point spans of generators
into a field of subspaces, each carried as an orthonormal column basis. The
subspace calculus (complement, intersection, orthogonal direct sum) and the
derived quantities (length, spectrum, dimension strata) all act per sample.

Nothing is claimed between samples: measurability is vacuous on a grid and
continuity is neither assumed nor produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import WindowTooSmallError
from .lattice import Lattice, _frozen_array
from .multitile import FiberSampleGrid, MultiTileConfig

RANK_TOL = 1e-9
INTERSECT_COS_TOL = 1e-9
ORTHO_TOL = 1e-9
PHASE_FLOOR = 1e-10


@dataclass(frozen=True, eq=False)
class LatticeWindow:
    """Retained coordinates of the fiber space: lattice points, lex ordered."""

    lattice: Lattice
    points: np.ndarray
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(self.points))
        object.__setattr__(self, "coords", _frozen_array(self.coords, dtype=np.int64))

    @classmethod
    def from_radius(cls, lattice: Lattice, radius: float) -> "LatticeWindow":
        center = np.zeros(lattice.dim)
        return cls(lattice, lattice.points_in_radius(center, radius),
                   lattice.coords_in_radius(center, radius))

    @classmethod
    def for_config(cls, cfg: MultiTileConfig,
                   radius: float | None = None) -> "LatticeWindow":
        """Window sized to contain every covering shift of the configuration."""
        return cls.from_radius(cfg.lattice, cfg.window_radius if radius is None else radius)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def index_of(self, int_coords) -> int:
        key = tuple(int(v) for v in int_coords)
        table = {tuple(row): i for i, row in enumerate(self.coords.tolist())}
        return table[key]


@dataclass(frozen=True, eq=False)
class FiberVectorField:
    """One fiber vector per sample, in window coordinates."""

    grid: FiberSampleGrid
    window: LatticeWindow
    vectors: np.ndarray  # (n_samples, window size) complex

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.shape != (self.grid.size, self.window.size):
            raise ValueError(f"vectors shape {v.shape} does not match grid/window")
        if not np.all(np.isfinite(v)):
            raise ValueError("fiber entries must be finite")
        object.__setattr__(self, "vectors", _frozen_array(v, dtype=np.complex128))

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=1)

    def support(self, tol: float = PHASE_FLOOR) -> np.ndarray:
        return self.norms() > tol

    def is_unit_norm_on_support(self, tol: float = 1e-10) -> bool:
        n = self.norms()
        on = n > PHASE_FLOOR
        return bool(np.all(np.abs(n[on] - 1.0) <= tol)) if on.any() else True

    def to_rows(self) -> list[list[float]]:
        """Flattened re/im pairs per sample, for JSON/CSV golden files."""
        out = []
        for row in self.vectors:
            flat: list[float] = []
            for z in row:
                flat.extend((float(z.real), float(z.imag)))
            out.append(flat)
        return out


def _phase_fix(col: np.ndarray, floor: float = PHASE_FLOOR) -> np.ndarray:
    """Rotate so the first coordinate above the floor is real positive."""
    idx = np.nonzero(np.abs(col) > floor)[0]
    if idx.size == 0:
        return col
    z = col[idx[0]]
    return col * (abs(z) / z)


@dataclass(frozen=True, eq=False)
class RangeField:
    """Per-sample orthonormal bases of the fiber subspaces."""

    grid: FiberSampleGrid
    window: LatticeWindow
    bases: tuple[np.ndarray, ...]  # each (window size, m_g)

    def __post_init__(self):
        if len(self.bases) != self.grid.size:
            raise ValueError("one basis per grid sample required")
        w = self.window.size
        frozen = []
        for g, b in enumerate(self.bases):
            b = np.asarray(b, dtype=np.complex128)
            if b.ndim != 2 or b.shape[0] != w:
                raise ValueError(f"basis {g} has shape {b.shape}, expected ({w}, m)")
            frozen.append(_frozen_array(b, dtype=np.complex128))
        object.__setattr__(self, "bases", tuple(frozen))

    @property
    def dims(self) -> np.ndarray:
        return np.array([b.shape[1] for b in self.bases], dtype=np.int64)

    def projector(self, g: int) -> np.ndarray:
        b = self.bases[g]
        return b @ b.conj().T

    def orthonormality_defect(self) -> float:
        worst = 0.0
        for b in self.bases:
            if b.shape[1]:
                worst = max(worst, float(np.linalg.norm(
                    b.conj().T @ b - np.eye(b.shape[1]), 2)))
        return worst


@dataclass(frozen=True, eq=False)
class SpectrumMask:
    """Samples where the fiber subspace is nonzero."""

    grid: FiberSampleGrid
    flags: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "flags", _frozen_array(self.flags, dtype=bool))


def fiberize_indicator(region_lows, region_highs, a, window: LatticeWindow,
                       grid: FiberSampleGrid) -> np.ndarray:
    """Raw fiber fill of a frequency-modulated indicator; no completeness check."""
    a = np.asarray(a, dtype=float).reshape(window.lattice.dim)
    return kernels.fiber_phases(
        np.ascontiguousarray(grid.points),
        np.ascontiguousarray(window.points),
        region_lows,
        region_highs,
        a,
    )


def fiberize_pw_kernel(cfg: MultiTileConfig, a, window: LatticeWindow,
                       grid: FiberSampleGrid) -> FiberVectorField:
    """Fibers of the modulated-indicator generator exp(2πi a·x) on the tile.

    Entry (ω, λ) is exp(2πi a·(ω+λ)) when ω + λ lies in the tile and 0
    otherwise. Raises when the window misses a covering shift somewhere, i.e.
    when the per-sample nonzero count falls short of the full covering count.
    """
    vectors = fiberize_indicator(cfg.region.lows, cfg.region.highs, a, window, grid)
    full_counts = kernels.cover_counts(
        np.ascontiguousarray(grid.points),
        np.ascontiguousarray(cfg.window_points),
        cfg.region.lows,
        cfg.region.highs,
    )
    seen = (np.abs(vectors) > 0).sum(axis=1)
    short = np.nonzero(seen < full_counts)[0]
    if short.size:
        g = int(short[0])
        raise WindowTooSmallError(
            f"window misses {int(full_counts[g] - seen[g])} covering shift(s) at "
            f"sample {g} ({grid.points[g].tolist()}); enlarge the window radius"
        )
    return FiberVectorField(grid, window, vectors)


def range_field_from_generators(fields, rank_tol: float = RANK_TOL) -> RangeField:
    """Per-sample orthonormal basis of the span of the generator fibers."""
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one generator field")
    grid, window = fields[0].grid, fields[0].window
    for f in fields[1:]:
        if f.grid is not grid or f.window is not window:
            raise ValueError("generator fields must share one grid and window")
    w = window.size
    bases = []
    for g in range(grid.size):
        cols = np.stack([f.vectors[g] for f in fields], axis=1)
        bases.append(_orthonormal_range(cols, rank_tol))
    return RangeField(grid, window, tuple(bases))


def _orthonormal_range(cols: np.ndarray, rank_tol: float) -> np.ndarray:
    w = cols.shape[0]
    if cols.shape[1] == 0:
        return np.zeros((w, 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        return np.zeros((w, 0), dtype=np.complex128)
    m = int(np.sum(s > rank_tol * s[0]))
    basis = u[:, :m]
    return np.stack([_phase_fix(basis[:, j]) for j in range(m)], axis=1) \
        if m else np.zeros((w, 0), dtype=np.complex128)


def tile_range_field(cfg: MultiTileConfig, window: LatticeWindow,
                     grid: FiberSampleGrid) -> RangeField:
    """Canonical fiber space of a k-tile: coordinates supported on the covering shifts.

    At each sample the basis is the k window coordinate vectors indexed by the
    λ entries, in lexicographic order.
    """
    from .multitile import _lambda_indices

    # map config window indices into this window's indexing
    table = {tuple(row): i for i, row in enumerate(window.coords.tolist())}
    idx = _lambda_indices(cfg, grid)
    bases = []
    w = window.size
    for g in range(grid.size):
        b = np.zeros((w, cfg.level), dtype=np.complex128)
        for j, wi in enumerate(idx[g]):
            key = tuple(int(v) for v in cfg.window_coords[wi])
            if key not in table:
                raise WindowTooSmallError(
                    f"covering shift {key} at sample {g} is outside the window"
                )
            b[table[key], j] = 1.0
        bases.append(b)
    return RangeField(grid, window, tuple(bases))


def fiber_subspace_combine(mode: str, x: RangeField,
                           y: RangeField | None = None) -> RangeField:
    """Per-sample subspace calculus: complement, intersect, or direct_sum.

    complement is taken inside the window; intersect matches principal
    directions with cosine within 1e-9 of 1; direct_sum requires the two
    fields to be orthogonal per sample and concatenates their bases.
    """
    if mode not in ("complement", "intersect", "direct_sum"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "complement":
        if y is not None:
            raise ValueError("complement takes a single field")
        return _complement(x)
    if y is None:
        raise ValueError(f"{mode} needs two fields")
    if y.grid is not x.grid or y.window is not x.window:
        raise ValueError("fields must share one grid and window")
    return _intersect(x, y) if mode == "intersect" else _direct_sum(x, y)


def _complement(x: RangeField) -> RangeField:
    w = x.window.size
    bases = []
    for b in x.bases:
        m = b.shape[1]
        if m == 0:
            bases.append(np.eye(w, dtype=np.complex128))
            continue
        u, _, _ = np.linalg.svd(b, full_matrices=True)
        comp = u[:, m:]
        bases.append(
            np.stack([_phase_fix(comp[:, j]) for j in range(comp.shape[1])], axis=1)
            if comp.shape[1] else np.zeros((w, 0), dtype=np.complex128)
        )
    return RangeField(x.grid, x.window, tuple(bases))


def _intersect(x: RangeField, y: RangeField) -> RangeField:
    w = x.window.size
    bases = []
    for bx, by in zip(x.bases, y.bases):
        if bx.shape[1] == 0 or by.shape[1] == 0:
            bases.append(np.zeros((w, 0), dtype=np.complex128))
            continue
        u, s, _ = np.linalg.svd(bx.conj().T @ by)
        keep = s >= 1.0 - INTERSECT_COS_TOL
        if not keep.any():
            bases.append(np.zeros((w, 0), dtype=np.complex128))
            continue
        dirs = bx @ u[:, keep]
        bases.append(_orthonormal_range(dirs, RANK_TOL))
    return RangeField(x.grid, x.window, tuple(bases))


def _direct_sum(x: RangeField, y: RangeField) -> RangeField:
    worst = 0.0
    for bx, by in zip(x.bases, y.bases):
        if bx.shape[1] and by.shape[1]:
            worst = max(worst, float(np.linalg.norm(bx.conj().T @ by, 2)))
    if worst > ORTHO_TOL:
        raise ValueError(
            f"direct_sum requires per-sample orthogonality: max overlap {worst:.3e}"
        )
    bases = tuple(np.hstack([bx, by]) for bx, by in zip(x.bases, y.bases))
    return RangeField(x.grid, x.window, bases)


def length(x: RangeField) -> int:
    """Largest fiber dimension over the grid."""
    return int(x.dims.max()) if x.grid.size else 0


def dimension_strata(x: RangeField) -> dict[int, np.ndarray]:
    """Partition of sample indices by fiber dimension."""
    dims = x.dims
    return {int(n): np.nonzero(dims == n)[0] for n in np.unique(dims)}


def spectrum(x: RangeField) -> SpectrumMask:
    return SpectrumMask(x.grid, x.dims > 0)


def generator_with_full_spectrum(x: RangeField) -> FiberVectorField:
    """A unit fiber vector inside the subspace wherever it is nonzero.

    Takes the first basis column per sample, with the phase fixed so the
    first significant coordinate is real positive; zero off the spectrum.
    """
    w = x.window.size
    vectors = np.zeros((x.grid.size, w), dtype=np.complex128)
    for g, b in enumerate(x.bases):
        if b.shape[1]:
            vectors[g] = _phase_fix(b[:, 0])
    return FiberVectorField(x.grid, x.window, vectors)
