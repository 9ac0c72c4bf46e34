"""Full-rank lattices, dual lattices, and half-open fundamental cells.

A lattice is the integer span of the columns of an invertible real matrix.
Its fundamental cell is the image of [-1/2, 1/2)^d under that matrix, with
the deterministic boundary rule that a coordinate landing exactly on +1/2
wraps to -1/2. All point enumerations are ordered lexicographically by
coordinates so downstream outputs are reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidLatticeError

DET_FLOOR = 1e-12
DUAL_INT_TOL = 1e-10
UNIMODULAR_SNAP = 1e-9
RADIUS_SLACK = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Lattice:
    """Lattice generated by the columns of ``basis`` (shape (d, d))."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[0] != basis.shape[1]:
            raise InvalidLatticeError(f"basis must be square, got shape {basis.shape}")
        if basis.shape[0] == 0:
            raise InvalidLatticeError("basis must be at least 1x1")
        if not np.all(np.isfinite(basis)):
            raise InvalidLatticeError("basis entries must be finite")
        if abs(np.linalg.det(basis)) <= DET_FLOOR:
            raise InvalidLatticeError(
                f"basis is numerically singular: |det| = {abs(np.linalg.det(basis)):.3e}"
            )
        object.__setattr__(self, "basis", _frozen_array(basis))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def inverse(self) -> np.ndarray:
        return _frozen_array(np.linalg.inv(self.basis))

    @cached_property
    def cell_volume(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    @cached_property
    def cell_circumradius(self) -> float:
        """Largest distance from the cell center to a corner of the cell."""
        corners = np.array(list(itertools.product((-0.5, 0.5), repeat=self.dim)))
        return float(np.max(np.linalg.norm(corners @ self.basis.T, axis=1)))

    def dual(self) -> "Lattice":
        """Dual lattice, generated by the inverse transpose of the basis."""
        return Lattice(np.linalg.inv(self.basis.T))

    def reduce(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Split ``x`` into a cell representative plus an integer combination.

        Returns ``(residue, coords)`` with ``x = residue + basis @ coords`` and
        ``inverse @ residue`` in [-1/2, 1/2)^d componentwise. A coordinate
        sitting exactly on +1/2 wraps to -1/2.
        """
        x = np.asarray(x, dtype=float)
        y = self.inverse @ x
        coords = np.floor(y + 0.5).astype(np.int64)
        residue = self.basis @ (y - coords)
        return residue, coords

    def points_in_radius(self, center, radius: float) -> np.ndarray:
        """All lattice points within Euclidean ``radius`` of ``center``.

        Rows are sorted lexicographically by point coordinates. The radius
        test is inclusive with a small absolute slack.
        """
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        pts, _ = self._points_and_coords(center, radius)
        return pts

    def coords_in_radius(self, center, radius: float) -> np.ndarray:
        """Integer basis coordinates matching ``points_in_radius`` row for row."""
        _, coords = self._points_and_coords(center, radius)
        return coords

    def _points_and_coords(self, center, radius):
        center = np.asarray(center, dtype=float)
        c = self.inverse @ center
        bound = radius * np.linalg.norm(self.inverse, axis=1) + RADIUS_SLACK
        los = np.ceil(c - bound).astype(np.int64)
        his = np.floor(c + bound).astype(np.int64)
        if np.any(his < los):
            empty = np.zeros((0, self.dim))
            return empty, np.zeros((0, self.dim), dtype=np.int64)
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(los, his)]
        grids = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        pts = coords @ self.basis.T
        keep = np.linalg.norm(pts - center, axis=1) <= radius + RADIUS_SLACK
        pts, coords = pts[keep], coords[keep]
        order = np.lexsort(pts.T[::-1])
        return pts[order], coords[order]

    def dual_int_coords(self, h, tol: float = DUAL_INT_TOL) -> np.ndarray:
        """Integer coordinates of ``h`` in the dual lattice, or raise.

        ``h`` belongs to the dual exactly when basisᵀ·h is an integer vector.
        """
        h = np.asarray(h, dtype=float)
        m = self.basis.T @ h
        rounded = np.round(m)
        if np.max(np.abs(m - rounded)) > tol:
            raise InvalidLatticeError(
                f"{h.tolist()} is not in the dual lattice (pairings {m.tolist()})"
            )
        return rounded.astype(np.int64)

    def same_lattice(self, other: "Lattice", tol: float = UNIMODULAR_SNAP) -> bool:
        """Whether both bases generate the same point set.

        True iff basis⁻¹·other is an integer matrix with determinant ±1 after
        snapping entries to integers at ``tol``.
        """
        if self.dim != other.dim:
            return False
        u = self.inverse @ other.basis
        snapped = np.round(u)
        if np.max(np.abs(u - snapped)) > tol:
            return False
        return abs(abs(np.linalg.det(snapped)) - 1.0) <= tol

    @property
    def fundamental_domain(self) -> "FundamentalDomain":
        return FundamentalDomain(self)

    def to_json(self) -> dict:
        return {"basis": self.basis.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Lattice":
        return cls(np.asarray(obj["basis"], dtype=float))


@dataclass(frozen=True, eq=False)
class FundamentalDomain:
    """Half-open cell basis·[-1/2, 1/2)^d of its owner lattice."""

    owner: Lattice

    def contains(self, x) -> bool:
        y = self.owner.inverse @ np.asarray(x, dtype=float)
        return bool(np.all(y >= -0.5) and np.all(y < 0.5))

    def reduce(self, x) -> tuple[np.ndarray, np.ndarray]:
        return self.owner.reduce(x)

    @property
    def circumradius(self) -> float:
        return self.owner.cell_circumradius
