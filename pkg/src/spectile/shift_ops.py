"""Shift-preserving operators as per-sample matrix fields on fiber subspaces.

An operator commuting with the translations of the dual lattice acts on each
fiber subspace separately; here it is a field of small complex matrices, one
per grid sample, written in the orthonormal basis of a :class:`RangeField`.
Global operator properties reduce to uniform per-sample matrix properties:
operator norm is the sup of spectral norms, adjoint/normality/kernels/images
are entrywise notions, and canonical forms are built fiber by fiber.

Triangularization deflates one eigenpair per step: select the eigenvalue
that is smallest in the (real, imaginary) lexicographic order, append its
unit eigenvector to the basis, compress the matrix onto the orthogonal
complement, and recurse. The resulting per-sample unitary conjugation is
upper triangular with the selected eigenvalues on the diagonal, and the
nested column spans are invariant under the field. Since step j exists only
where the fiber dimension is at least j, the generator supports are nested
by construction. For normal fields the same recursion lands on a diagonal,
each generator span is reducing, and the diagonal tracks are honest
multiplier symbols: an inverse offset transform on the uniform grid recovers
their dual-lattice tap coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import parallel
from .errors import EigensolverError, NonNormalOperatorError
from .fibers import FiberVectorField, RangeField, _phase_fix
from .lattice import _frozen_array
from .multitile import FiberSampleGrid

RESIDUAL_TOL = 1e-8
UNITARY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RangeOperatorField:
    """Per-sample matrices of an operator acting on a fiber subspace field."""

    space: RangeField
    mats: tuple[np.ndarray, ...]

    def __post_init__(self):
        dims = self.space.dims
        if len(self.mats) != self.space.grid.size:
            raise ValueError("one matrix per grid sample required")
        frozen = []
        for g, m in enumerate(self.mats):
            m = np.asarray(m, dtype=np.complex128)
            if m.shape != (dims[g], dims[g]):
                raise ValueError(
                    f"matrix {g} has shape {m.shape}, expected ({dims[g]}, {dims[g]})"
                )
            if m.size and not np.all(np.isfinite(m)):
                raise ValueError(f"matrix {g} has non-finite entries")
            frozen.append(_frozen_array(m, dtype=np.complex128))
        object.__setattr__(self, "mats", tuple(frozen))

    @property
    def grid(self) -> FiberSampleGrid:
        return self.space.grid


def op_norm(field: RangeOperatorField) -> float:
    """Largest per-sample spectral norm."""
    worst = 0.0
    for m in field.mats:
        if m.size:
            worst = max(worst, float(np.linalg.norm(m, 2)))
    return worst


def adjoint_and_normality(field: RangeOperatorField,
                          tol: float = RESIDUAL_TOL):
    """Per-sample conjugate transpose plus a normality verdict.

    Normal iff the largest commutator norm ||RR* - R*R|| stays within
    tol·(1 + ||R||²) of zero.
    """
    adj = RangeOperatorField(field.space, tuple(m.conj().T for m in field.mats))
    max_comm = 0.0
    for m in field.mats:
        if m.size:
            comm = m @ m.conj().T - m.conj().T @ m
            max_comm = max(max_comm, float(np.linalg.norm(comm, 2)))
    norm = op_norm(field)
    normal = max_comm <= tol * (1.0 + norm**2)
    return adj, normal, max_comm


def kernel_image_fields(field: RangeOperatorField,
                        rank_tol: float = 1e-9):
    """Per-sample kernel and column-space bases, in window coordinates."""
    w = field.space.window.size
    kernel_bases, image_bases = [], []
    for g, m in enumerate(field.mats):
        basis = field.space.bases[g]
        if m.shape[0] == 0:
            kernel_bases.append(np.zeros((w, 0), dtype=np.complex128))
            image_bases.append(np.zeros((w, 0), dtype=np.complex128))
            continue
        u, s, vh = np.linalg.svd(m)
        rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
        kern = basis @ vh[rank:].conj().T
        img = basis @ u[:, :rank]
        kernel_bases.append(_stack_phase_fixed(kern))
        image_bases.append(_stack_phase_fixed(img))
    return (
        RangeField(field.grid, field.space.window, tuple(kernel_bases)),
        RangeField(field.grid, field.space.window, tuple(image_bases)),
    )


def _stack_phase_fixed(cols: np.ndarray) -> np.ndarray:
    if cols.shape[1] == 0:
        return cols
    return np.stack([_phase_fix(cols[:, j]) for j in range(cols.shape[1])], axis=1)


def _sorted_eig(m: np.ndarray, grid_index: int):
    """Eigenpairs ordered by (real, imaginary) ascending."""
    try:
        vals, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare LAPACK failure
        raise EigensolverError(grid_index, str(exc)) from exc
    order = np.lexsort((vals.imag, vals.real))
    return vals[order], vecs[:, order]


@dataclass(frozen=True, eq=False)
class EigenSelection:
    """One measurably chosen eigenvalue per sample with a unit eigenvector."""

    grid: FiberSampleGrid
    values: np.ndarray
    vectors: FiberVectorField


def select_eigenvalue_field(field: RangeOperatorField) -> EigenSelection:
    """Pick the (Re, Im)-smallest eigenvalue per sample.

    The eigenvector is unit norm, phase fixed, and expressed in window
    coordinates; samples with zero-dimensional fibers get value 0 and a zero
    vector.
    """
    grid = field.grid
    values = np.zeros(grid.size, dtype=np.complex128)
    vectors = np.zeros((grid.size, field.space.window.size), dtype=np.complex128)
    for g, m in enumerate(field.mats):
        if m.shape[0] == 0:
            continue
        vals, vecs = _sorted_eig(m, g)
        v = vecs[:, 0]
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise EigensolverError(g, "eigensolver returned a zero vector")
        v = v / nrm
        values[g] = vals[0]
        vectors[g] = _phase_fix(field.space.bases[g] @ v)
    return EigenSelection(grid, values, FiberVectorField(grid, field.space.window, vectors))


def _deflate_schur(m: np.ndarray, grid_index: int):
    """Schur-style form by repeated eigenpair deflation.

    Returns (q, t, diag) with q unitary, t = q* m q upper triangular up to
    roundoff, and diag the eigenvalues in selection order.
    """
    size = m.shape[0]
    q_cols = []
    diag = np.empty(size, dtype=np.complex128)
    embed = np.eye(size, dtype=np.complex128)
    work = m
    for step in range(size):
        vals, vecs = _sorted_eig(work, grid_index)
        v = vecs[:, 0]
        nrm = np.linalg.norm(v)
        if nrm == 0.0:
            raise EigensolverError(grid_index, "eigensolver returned a zero vector")
        v = v / nrm
        diag[step] = vals[0]
        q_cols.append(embed @ v)
        if step == size - 1:
            break
        u, _, _ = np.linalg.svd(v[:, None], full_matrices=True)
        w = u[:, 1:]
        work = w.conj().T @ work @ w
        embed = embed @ w
    q = np.stack(q_cols, axis=1)
    t = q.conj().T @ m @ q
    return q, t, diag


@dataclass(frozen=True, eq=False)
class TriangularDecomposition:
    """Per-sample unitary triangularization with nested invariant spans.

    ``generators[j]`` is the (j+1)-th basis column as a fiber field, unit
    norm exactly where the fiber dimension exceeds j. ``eigen_tracks[j, g]``
    is the j-th selected eigenvalue at sample g (0 where undefined, see
    ``track_defined``). ``nested_dims[g, j]`` is the dimension of the j-th
    nested subspace at sample g.
    """

    space: RangeField
    qs: tuple[np.ndarray, ...]
    tris: tuple[np.ndarray, ...]
    eigen_tracks: np.ndarray
    track_defined: np.ndarray
    generators: tuple[FiberVectorField, ...]
    nested_dims: np.ndarray
    max_lower_residual: float
    max_unitarity_defect: float
    max_invariance_residual: float

    @property
    def length(self) -> int:
        return self.eigen_tracks.shape[0]


def _strict_lower_norm(t: np.ndarray) -> float:
    if t.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(np.tril(t, -1), 2))


def triangularize(field: RangeOperatorField, threads: int = 1) -> TriangularDecomposition:
    grid = field.grid
    dims = field.space.dims
    ell = int(dims.max()) if grid.size else 0
    w = field.space.window.size

    qs: list = [None] * grid.size
    tris: list = [None] * grid.size
    tracks = np.zeros((ell, grid.size), dtype=np.complex128)
    defined = np.zeros((ell, grid.size), dtype=bool)
    gen_vectors = np.zeros((ell, grid.size, w), dtype=np.complex128)
    lower = np.zeros(grid.size)
    unitary = np.zeros(grid.size)
    invariance = np.zeros(grid.size)

    def worker(lo: int, hi: int) -> None:
        for g in range(lo, hi):
            m = field.mats[g]
            size = m.shape[0]
            if size == 0:
                qs[g] = np.zeros((0, 0), dtype=np.complex128)
                tris[g] = np.zeros((0, 0), dtype=np.complex128)
                continue
            q, t, diag = _deflate_schur(m, g)
            qs[g] = q
            tris[g] = t
            tracks[:size, g] = diag
            defined[:size, g] = True
            basis = field.space.bases[g]
            for j in range(size):
                gen_vectors[j, g] = basis @ q[:, j]
            lower[g] = _strict_lower_norm(t)
            unitary[g] = float(np.linalg.norm(q.conj().T @ q - np.eye(size), 2))
            worst = 0.0
            for j in range(1, size):
                head = q[:, :j]
                p = head @ head.conj().T
                worst = max(worst, float(np.linalg.norm(
                    (np.eye(size) - p) @ m @ p, 2)))
            invariance[g] = worst

    parallel.map_blocks(worker, grid.size, threads)

    generators = tuple(
        FiberVectorField(grid, field.space.window, gen_vectors[j])
        for j in range(ell)
    )
    nested = np.minimum(np.arange(1, ell + 1)[None, :], dims[:, None])
    return TriangularDecomposition(
        space=field.space,
        qs=tuple(qs),
        tris=tuple(tris),
        eigen_tracks=tracks,
        track_defined=defined,
        generators=generators,
        nested_dims=nested,
        max_lower_residual=float(lower.max(initial=0.0)),
        max_unitarity_defect=float(unitary.max(initial=0.0)),
        max_invariance_residual=float(invariance.max(initial=0.0)),
    )


@dataclass(frozen=True, eq=False)
class DiagonalDecomposition:
    """Orthogonal rank-one resolution of a normal field.

    Per sample, the field equals the sum of eigen_tracks[j] times the
    rank-one projector on generators[j]; the generator spans are reducing.
    """

    space: RangeField
    generators: tuple[FiberVectorField, ...]
    eigen_tracks: np.ndarray
    track_defined: np.ndarray
    max_commutator: float
    max_reconstruction_residual: float
    max_reducing_residual: float

    @property
    def length(self) -> int:
        return self.eigen_tracks.shape[0]


def diagonalize_normal(field: RangeOperatorField, threads: int = 1,
                       tol: float = RESIDUAL_TOL) -> DiagonalDecomposition:
    """Diagonalize a normal field via the triangular recursion.

    Rejects non-normal input, reporting the measured commutator norm. For a
    normal field the triangular form is diagonal to roundoff, so the nested
    spans are reducing and the diagonal gives the eigenvalue tracks sorted
    per sample by the (Re, Im) rule.
    """
    _, normal, max_comm = adjoint_and_normality(field, tol)
    if not normal:
        raise NonNormalOperatorError(max_comm, tol * (1.0 + op_norm(field) ** 2))
    tri = triangularize(field, threads)

    recon = 0.0
    reducing = 0.0
    for g, m in enumerate(field.mats):
        size = m.shape[0]
        if size == 0:
            continue
        q = tri.qs[g]
        rebuilt = (q * tri.eigen_tracks[:size, g][None, :]) @ q.conj().T
        recon = max(recon, float(np.linalg.norm(m - rebuilt, 2)))
        for j in range(1, size):
            head = q[:, :j]
            p = head @ head.conj().T
            reducing = max(reducing, float(np.linalg.norm(
                p @ m @ (np.eye(size) - p), 2)))
    return DiagonalDecomposition(
        space=field.space,
        generators=tri.generators,
        eigen_tracks=tri.eigen_tracks,
        track_defined=tri.track_defined,
        max_commutator=max_comm,
        max_reconstruction_residual=recon,
        max_reducing_residual=reducing,
    )


# ---------------------------------------------------------------------------
# multiplier symbols and their tap coefficients


def _full_tap_coords(per_axis: int, d: int) -> np.ndarray:
    """Centered integer index set matching the grid's alias-free band."""
    half = per_axis // 2
    axis = np.arange(-half, per_axis - half)
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def symbol_on_grid(taps, grid: FiberSampleGrid) -> np.ndarray:
    """Evaluate the multiplier symbol Σ a(h)·exp(-2πi ω·h) on the grid.

    ``taps`` is a sequence of (dual integer coordinates, complex weight).
    Since each dual point pairs integrally with the lattice, the phase
    reduces exactly to the fractional grid coordinates.
    """
    out = np.zeros(grid.size, dtype=np.complex128)
    for coords, weight in taps:
        m = np.asarray(coords, dtype=np.int64).reshape(grid.lattice.dim)
        out += complex(weight) * np.exp(-2j * np.pi * (grid.frac @ m))
    return out


def lambda_a_apply(taps, f: FiberVectorField) -> FiberVectorField:
    """Apply the multiplier with the given dual-lattice taps to a fiber field.

    The fiber at ω is scaled by the symbol value there; this matches summing
    the translated fields weight by weight because translations act on fibers
    as multiplication by the same per-sample phase.
    """
    symbol = symbol_on_grid(taps, f.grid)
    return FiberVectorField(f.grid, f.window, symbol[:, None] * f.vectors)


def shift_operator_field(h, space: RangeField) -> RangeOperatorField:
    """The translation by a dual-lattice point, as a scalar phase per fiber."""
    m = space.window.lattice.dual_int_coords(h)
    phases = np.exp(-2j * np.pi * (space.grid.frac @ m))
    mats = tuple(
        phases[g] * np.eye(space.bases[g].shape[1], dtype=np.complex128)
        for g in range(space.grid.size)
    )
    return RangeOperatorField(space, mats)


def multiplier_operator_field(taps, space: RangeField) -> RangeOperatorField:
    """A finite tap combination of translations, as a scalar field."""
    symbol = symbol_on_grid(taps, space.grid)
    mats = tuple(
        symbol[g] * np.eye(space.bases[g].shape[1], dtype=np.complex128)
        for g in range(space.grid.size)
    )
    return RangeOperatorField(space, mats)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """A per-sample eigenvalue track with its dual-lattice tap coefficients."""

    values: np.ndarray
    tap_coords: np.ndarray  # (t, d) integer dual coordinates
    tap_points: np.ndarray  # (t, d) dual lattice points
    coeffs: np.ndarray      # (t,) complex

    def evaluate(self, grid: FiberSampleGrid) -> np.ndarray:
        phases = np.exp(-2j * np.pi * (grid.frac @ self.tap_coords.T))
        return phases @ self.coeffs


def _offset_inverse_transform(values: np.ndarray, grid: FiberSampleGrid) -> np.ndarray:
    """Tap grid of the symbol samples; exact on the grid's alias-free band.

    With fractional coordinates γ_j = (j+1/2)/n - 1/2 the inverse transform
    is a plain inverse FFT times per-axis half-sample phase twiddles.
    """
    n = grid.per_axis
    d = grid.lattice.dim
    spectrum = np.fft.ifftn(values.reshape(grid.shape))
    coords = _full_tap_coords(n, d)
    coeffs = spectrum.ravel()[
        np.ravel_multi_index((coords % n).T, grid.shape)
    ]
    twiddle = np.prod(
        np.exp(1j * np.pi * coords * (1.0 / n - 1.0)), axis=1
    )
    return coords, coeffs * twiddle


def s_eigenvalue_extract(decomp: DiagonalDecomposition,
                         h_window_radius: float | None = None) -> list[MultiplierSymbol]:
    """Tap coefficients for each diagonal eigenvalue track.

    Uses the full alias-free band of the uniform grid by default, in which
    case re-evaluating the taps reproduces the track exactly at the samples.
    A radius restricts the taps to dual points within it (lossy in general).
    """
    grid = decomp.space.grid
    dual = grid.lattice.dual()
    out = []
    for j in range(decomp.length):
        values = decomp.eigen_tracks[j].copy()
        coords, coeffs = _offset_inverse_transform(values, grid)
        points = coords @ dual.basis.T
        if h_window_radius is not None:
            keep = np.linalg.norm(points, axis=1) <= h_window_radius + 1e-9
            coords, coeffs, points = coords[keep], coeffs[keep], points[keep]
        order = np.lexsort(points.T[::-1])
        out.append(MultiplierSymbol(
            values=values,
            tap_coords=coords[order],
            tap_points=points[order],
            coeffs=coeffs[order],
        ))
    return out
