"""Multi-tiling sets as unions of half-open boxes, sampled on a midpoint grid.

A set built from finitely many disjoint half-open boxes k-tiles space under a
lattice when every point (off a null set) is covered by exactly k lattice
shifts of the set. On a midpoint-offset sample grid of the fundamental cell
this count is an exact integer per sample, which is what the verifier checks.
The per-sample covering shifts, sorted lexicographically, form the λ-vector
of the sample; the finite collection of distinct λ-vectors with their grid
frequencies drives the basis certification in :mod:`spectile.expbases`.

Grid construction fails loudly if any sample plus any window shift lands on a
box face: membership there is ambiguous at floating precision and the
almost-everywhere statements being checked say nothing on the faces.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import BoundaryCollisionError, WrongMultiplicityError
from .lattice import Lattice, _frozen_array

MEASURE_RTOL = 1e-9
BOUNDARY_TOL = 1e-9
ADJACENCY_TOL = 1e-12


class BoxUnion:
    """Finite union of pairwise disjoint half-open boxes [low, high).

    Boxes are normalized to lexicographic order of (low, high) corner pairs,
    so two unions built from permuted box lists compare identically.
    """

    def __init__(self, boxes):
        lows, highs = [], []
        for low, high in boxes:
            lows.append(np.asarray(low, dtype=float))
            highs.append(np.asarray(high, dtype=float))
        if lows:
            lows = np.vstack(lows)
            highs = np.vstack(highs)
        else:
            lows = np.zeros((0, 1))
            highs = np.zeros((0, 1))
        if lows.shape != highs.shape or lows.ndim != 2:
            raise ValueError("boxes must be pairs of equal-length corner vectors")
        if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))):
            raise ValueError("box corners must be finite")
        if np.any(highs <= lows):
            raise ValueError("each box needs low < high componentwise")
        order = np.lexsort(np.hstack([lows, highs]).T[::-1])
        self.lows = _frozen_array(lows[order])
        self.highs = _frozen_array(highs[order])
        self._check_disjoint()

    def _check_disjoint(self):
        b = self.n_boxes
        for i in range(b):
            for j in range(i + 1, b):
                lo = np.maximum(self.lows[i], self.lows[j])
                hi = np.minimum(self.highs[i], self.highs[j])
                if np.all(lo < hi):
                    raise ValueError(
                        f"boxes {i} and {j} overlap on [{lo.tolist()}, {hi.tolist()})"
                    )

    @property
    def dim(self) -> int:
        return self.lows.shape[1]

    @property
    def n_boxes(self) -> int:
        return self.lows.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.n_boxes == 0

    @cached_property
    def measure(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.sum(np.prod(self.highs - self.lows, axis=1)))

    @cached_property
    def circumradius(self) -> float:
        """Distance from the origin to the farthest box corner."""
        if self.is_empty:
            return 0.0
        corner_mag = np.maximum(np.abs(self.lows), np.abs(self.highs))
        return float(np.max(np.linalg.norm(corner_mag, axis=1)))

    def contains(self, points) -> np.ndarray:
        """Exact half-open membership for an (n, d) array of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_empty:
            return np.zeros(points.shape[0], dtype=bool)
        inside = (points[:, None, :] >= self.lows) & (points[:, None, :] < self.highs)
        return inside.all(axis=2).any(axis=1)

    def translate(self, v) -> "BoxUnion":
        v = np.asarray(v, dtype=float)
        return BoxUnion(list(zip(self.lows + v, self.highs + v)))

    def intersect(self, other: "BoxUnion") -> "BoxUnion":
        """Pairwise box intersections; exact for half-open boxes."""
        pieces = []
        for i in range(self.n_boxes):
            for j in range(other.n_boxes):
                lo = np.maximum(self.lows[i], other.lows[j])
                hi = np.minimum(self.highs[i], other.highs[j])
                if np.all(lo < hi):
                    pieces.append((lo, hi))
        return BoxUnion(pieces)

    def merged(self) -> "BoxUnion":
        """Coalesce boxes that are adjacent along one axis and equal on the rest."""
        boxes = [(self.lows[i].copy(), self.highs[i].copy()) for i in range(self.n_boxes)]
        changed = True
        while changed:
            changed = False
            for i in range(len(boxes)):
                for j in range(i + 1, len(boxes)):
                    merged = _try_merge(boxes[i], boxes[j])
                    if merged is not None:
                        boxes[i] = merged
                        del boxes[j]
                        changed = True
                        break
                if changed:
                    break
        return BoxUnion(boxes)

    def face_list(self) -> tuple[np.ndarray, np.ndarray]:
        """All (axis, coordinate) half-open face pairs, for boundary checks."""
        axes, coords = [], []
        for b in range(self.n_boxes):
            for i in range(self.dim):
                axes.extend((i, i))
                coords.extend((self.lows[b, i], self.highs[b, i]))
        return (
            np.asarray(axes, dtype=np.int64),
            np.asarray(coords, dtype=np.float64),
        )

    def to_json(self) -> dict:
        return {
            "boxes": [
                {"low": self.lows[i].tolist(), "high": self.highs[i].tolist()}
                for i in range(self.n_boxes)
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BoxUnion":
        return cls([(b["low"], b["high"]) for b in obj["boxes"]])


def _try_merge(a, b):
    alo, ahi = a
    blo, bhi = b
    d = alo.shape[0]
    for axis in range(d):
        others = [i for i in range(d) if i != axis]
        if others and not (
            np.allclose(alo[others], blo[others], atol=ADJACENCY_TOL)
            and np.allclose(ahi[others], bhi[others], atol=ADJACENCY_TOL)
        ):
            continue
        if abs(ahi[axis] - blo[axis]) <= ADJACENCY_TOL:
            lo, hi = alo.copy(), bhi.copy()
            lo[axis] = alo[axis]
            hi[axis] = bhi[axis]
            return lo, hi
        if abs(bhi[axis] - alo[axis]) <= ADJACENCY_TOL:
            lo, hi = blo.copy(), ahi.copy()
            lo[axis] = blo[axis]
            hi[axis] = ahi[axis]
            return lo, hi
    return None


@dataclass(frozen=True, eq=False)
class MultiTileConfig:
    """A candidate k-tiling: box-union set, lattice, and declared level.

    The measure identity measure = level · cell volume is a necessary
    condition for a k-tiling but is not enforced at construction, so that
    verification can run on bad candidates and report where they fail; see
    ``measure_consistent``.
    """

    region: BoxUnion
    lattice: Lattice
    level: int

    def __post_init__(self):
        if self.region.dim != self.lattice.dim:
            raise ValueError(
                f"region dimension {self.region.dim} != lattice dimension {self.lattice.dim}"
            )
        if int(self.level) < 1 or self.level != int(self.level):
            raise ValueError("level must be a positive integer")
        object.__setattr__(self, "level", int(self.level))

    @property
    def measure_consistent(self) -> bool:
        target = self.level * self.lattice.cell_volume
        return abs(self.region.measure - target) <= MEASURE_RTOL * max(abs(target), 1.0)

    @cached_property
    def window_radius(self) -> float:
        """Enumeration radius guaranteeing every covering shift is seen.

        Covering shifts satisfy λ = x - ω with x in the region and ω in the
        fundamental cell, so their norm is at most the sum of the two
        circumscribed radii.
        """
        return self.region.circumradius + self.lattice.cell_circumradius

    @cached_property
    def window_points(self) -> np.ndarray:
        return self.lattice.points_in_radius(np.zeros(self.lattice.dim), self.window_radius)

    @cached_property
    def window_coords(self) -> np.ndarray:
        return self.lattice.coords_in_radius(np.zeros(self.lattice.dim), self.window_radius)

    def sample_grid(self, per_axis: int) -> "FiberSampleGrid":
        """Build a midpoint grid and validate it against the region faces."""
        grid = FiberSampleGrid.build(self.lattice, per_axis)
        check_boundary_clearance(self, grid)
        return grid

    def to_json(self) -> dict:
        return {
            "lattice": self.lattice.to_json(),
            "set": self.region.to_json(),
            "level": self.level,
        }


@dataclass(frozen=True, eq=False)
class FiberSampleGrid:
    """Midpoint-offset sample grid of a fundamental cell.

    Fractional coordinates run over ((j + 1/2)/n - 1/2) per axis, indexed in
    lexicographic (C) order; ``points`` are their images under the lattice
    basis. Midpoint offsets keep samples off cell walls for every n.
    """

    lattice: Lattice
    per_axis: int
    frac: np.ndarray
    points: np.ndarray

    @classmethod
    def build(cls, lattice: Lattice, per_axis: int) -> "FiberSampleGrid":
        if per_axis < 2:
            raise ValueError("per_axis must be at least 2")
        d = lattice.dim
        idx = np.indices((per_axis,) * d).reshape(d, -1).T
        frac = (idx + 0.5) / per_axis - 0.5
        points = frac @ lattice.basis.T
        return cls(lattice, per_axis, _frozen_array(frac), _frozen_array(points))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.per_axis,) * self.lattice.dim

    @property
    def cell_weight(self) -> float:
        """Quadrature weight of one sample: cell volume over sample count."""
        return self.lattice.cell_volume / self.size


def check_boundary_clearance(cfg: MultiTileConfig, grid: FiberSampleGrid,
                             tol: float = BOUNDARY_TOL) -> None:
    """Raise if any sample plus any window shift sits on a box face."""
    face_axes, face_coords = cfg.region.face_list()
    total, first = kernels.boundary_hits(
        np.ascontiguousarray(grid.points),
        np.ascontiguousarray(cfg.window_points),
        face_axes,
        face_coords,
        tol,
    )
    if total:
        g, w, f = (int(v) for v in first)
        point = grid.points[g] + cfg.window_points[w]
        raise BoundaryCollisionError(
            f"{total} sample/shift combinations hit box faces within {tol:g}; "
            f"first: sample {g} + shift {w} = {point.tolist()} on face "
            f"(axis {face_axes[f]}, coord {face_coords[f]!r}). "
            "Choose a different per_axis or move the box corners."
        )


def cover_counts_at(region: BoxUnion, lattice: Lattice, points) -> np.ndarray:
    """Covering multiplicities of arbitrary cell points, as exact integers."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    radius = region.circumradius + lattice.cell_circumradius
    window = lattice.points_in_radius(np.zeros(lattice.dim), radius)
    return kernels.cover_counts(
        np.ascontiguousarray(points),
        np.ascontiguousarray(window),
        region.lows,
        region.highs,
    )


def tiling_level_at(cfg: MultiTileConfig, omega) -> int:
    """Number of lattice shifts λ with ω + λ inside the region."""
    point = np.atleast_2d(np.asarray(omega, dtype=float))
    counts = kernels.cover_counts(
        np.ascontiguousarray(point),
        np.ascontiguousarray(cfg.window_points),
        cfg.region.lows,
        cfg.region.highs,
    )
    return int(counts[0])


@dataclass(frozen=True, eq=False)
class TilingReport:
    ok: bool
    level: int
    counts: np.ndarray
    violations: tuple[tuple[np.ndarray, int], ...]


def verify_k_tiling(cfg: MultiTileConfig, grid: FiberSampleGrid) -> TilingReport:
    """Check the covering count equals the declared level at every sample."""
    counts = kernels.cover_counts(
        np.ascontiguousarray(grid.points),
        np.ascontiguousarray(cfg.window_points),
        cfg.region.lows,
        cfg.region.highs,
    )
    bad = np.nonzero(counts != cfg.level)[0]
    violations = tuple((grid.points[i].copy(), int(counts[i])) for i in bad)
    return TilingReport(len(bad) == 0, cfg.level, counts, violations)


@dataclass(frozen=True)
class LambdaVector:
    """The covering shifts at one sample, in lexicographic point order.

    Hashing and equality go through the exact integer basis coordinates, so
    vectors collected from different samples group reliably.
    """

    points: np.ndarray
    coords: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(self.points))

    @classmethod
    def from_int_coords(cls, coords, lattice: Lattice) -> "LambdaVector":
        coords = np.atleast_2d(np.asarray(coords, dtype=np.int64))
        points = coords @ lattice.basis.T
        order = np.lexsort(points.T[::-1])
        points = points[order]
        coords = coords[order]
        return cls(points, tuple(tuple(int(v) for v in row) for row in coords))

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def flat(self) -> tuple[float, ...]:
        return tuple(float(v) for v in self.points.ravel())

    def __hash__(self):
        return hash(self.coords)

    def __eq__(self, other):
        return isinstance(other, LambdaVector) and self.coords == other.coords

    def __repr__(self):
        return f"LambdaVector({[tuple(p) for p in self.points.tolist()]})"


@dataclass(frozen=True, eq=False)
class LambdaSet:
    """Distinct λ-vectors of a configuration with their grid frequencies."""

    vectors: tuple[LambdaVector, ...]
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if not self.vectors:
            raise ValueError("a lambda set needs at least one vector")
        ks = {v.k for v in self.vectors}
        if len(ks) != 1:
            raise ValueError(f"mixed tuple lengths in lambda set: {sorted(ks)}")

    @property
    def k(self) -> int:
        return self.vectors[0].k

    @property
    def dim(self) -> int:
        return self.vectors[0].dim

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c / self.total for c in self.counts)

    @property
    def weight_map(self) -> dict[LambdaVector, float]:
        return dict(zip(self.vectors, self.weights))

    def stacked_points(self) -> np.ndarray:
        """(s, k, d) array of all vectors, in stored order."""
        return np.stack([v.points for v in self.vectors])

    @classmethod
    def from_vectors(cls, vectors, counts=None) -> "LambdaSet":
        vectors = list(vectors)
        if counts is None:
            counts = [1] * len(vectors)
        order = sorted(range(len(vectors)), key=lambda i: vectors[i].flat())
        vectors = [vectors[i] for i in order]
        counts = [int(counts[i]) for i in order]
        return cls(tuple(vectors), tuple(counts), sum(counts))

    @classmethod
    def from_int_rows(cls, rows, lattice: Lattice, counts=None) -> "LambdaSet":
        vecs = [LambdaVector.from_int_coords(np.asarray(r).reshape(len(r), -1), lattice)
                for r in rows]
        return cls.from_vectors(vecs, counts)


def _lambda_indices(cfg: MultiTileConfig, grid: FiberSampleGrid):
    counts, idx = kernels.lambda_hits(
        np.ascontiguousarray(grid.points),
        np.ascontiguousarray(cfg.window_points),
        cfg.region.lows,
        cfg.region.highs,
        cfg.level,
    )
    bad = np.nonzero(counts != cfg.level)[0]
    if bad.size:
        g = int(bad[0])
        raise WrongMultiplicityError(grid.points[g].tolist(), int(counts[g]), cfg.level)
    return idx


def lambda_vector(cfg: MultiTileConfig, omega) -> LambdaVector:
    """The λ-vector at a single cell point; raises off a k-tile."""
    point = np.atleast_2d(np.asarray(omega, dtype=float))
    counts, idx = kernels.lambda_hits(
        np.ascontiguousarray(point),
        np.ascontiguousarray(cfg.window_points),
        cfg.region.lows,
        cfg.region.highs,
        cfg.level,
    )
    if int(counts[0]) != cfg.level:
        raise WrongMultiplicityError(
            np.asarray(omega, dtype=float).tolist(), int(counts[0]), cfg.level
        )
    coords = cfg.window_coords[idx[0]]
    return LambdaVector.from_int_coords(coords, cfg.lattice)


def lambda_map(cfg: MultiTileConfig, grid: FiberSampleGrid) -> np.ndarray:
    """Per-sample λ entries as an (n_samples, k, d) point array."""
    idx = _lambda_indices(cfg, grid)
    return cfg.window_points[idx]


def enumerate_lambda_set(cfg: MultiTileConfig, grid: FiberSampleGrid) -> LambdaSet:
    """Group samples by λ-vector; weights are exact grid fractions."""
    idx = _lambda_indices(cfg, grid)
    keys, inverse = np.unique(idx, axis=0, return_inverse=True)
    counts = np.bincount(inverse.ravel(), minlength=keys.shape[0])
    vecs = [
        LambdaVector.from_int_coords(cfg.window_coords[row], cfg.lattice)
        for row in keys
    ]
    return LambdaSet.from_vectors(vecs, counts.tolist())


@dataclass(frozen=True, eq=False)
class OneTileDecomposition:
    """Split of a k-tile into k pieces, each 1-tiling under the same lattice.

    ``assignments[g, j]`` is the j-th covering shift at sample g, so piece j
    is the set of points sample + shift. ``pieces`` holds exact box unions
    when the lattice basis is diagonal with positive entries (the cell is
    then itself a box and all the set algebra stays within box unions);
    otherwise it is None and only the grid assignment is available.
    """

    assignments: np.ndarray
    pieces: tuple[BoxUnion, ...] | None
    pieces_verified: tuple[bool, ...] | None


def decompose_into_one_tiles(cfg: MultiTileConfig, grid: FiberSampleGrid) -> OneTileDecomposition:
    idx = _lambda_indices(cfg, grid)
    assignments = cfg.window_points[idx]

    basis = cfg.lattice.basis
    diagonal = np.allclose(basis, np.diag(np.diag(basis)), atol=1e-12)
    positive = np.all(np.diag(basis) > 0)
    if not (diagonal and positive):
        return OneTileDecomposition(assignments, None, None)

    half = np.diag(basis) / 2.0
    cell = BoxUnion([(-half, half)])
    keys = np.unique(idx, axis=0)
    piece_parts: list[list[tuple[np.ndarray, np.ndarray]]] = [[] for _ in range(cfg.level)]
    for row in keys:
        shifts = cfg.window_points[row]
        part = cell
        for j in range(cfg.level):
            part = part.intersect(cfg.region.translate(-shifts[j]))
        if part.is_empty:
            continue
        for j in range(cfg.level):
            moved = part.translate(shifts[j])
            piece_parts[j].extend(zip(moved.lows, moved.highs))
    pieces = tuple(
        BoxUnion(parts).merged() for parts in piece_parts
    )
    verified = tuple(
        bool(np.all(cover_counts_at(piece, cfg.lattice, grid.points) == 1))
        for piece in pieces
    )
    return OneTileDecomposition(assignments, pieces, verified)
