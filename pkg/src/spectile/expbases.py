"""Certificates for structured Riesz bases of exponentials on multi-tiles.

The frequency set of a structured exponential system is a finite list of
base frequencies repeated over a dual lattice. Whether such a system is a
Riesz basis reduces, fiber by fiber, to uniform two-sided bounds on the
unit-modulus matrices built from the base frequencies and the λ-vectors of
the tiling. Over a box-union tile the λ-set is finite, so the bounds become
finite minima/maxima of singular values and the basis test becomes a
determinant non-vanishing test over that finite set:

  * lower bound A = min over λ-vectors of σ_min(E)², upper B = max σ_max(E)²
    (squared-norm scale);
  * the system certifies iff min |det E| stays above a scale-aware floor,
    in which case A is itself at least (min |det E|)² / B^(k-1);
  * circle separation of the λ entries under a single probe frequency α
    lower-bounds |det| via a Vandermonde factorization with frequencies
    (α, 2α, ..., kα), giving a cheap sufficient search criterion;
  * integrality + distinctness of residues (admissibility) is the classical
    arithmetic special case of separation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import kernels
from .multitile import LambdaSet, LambdaVector

DET_TOL_FACTOR = 1e-8
ADMISSIBLE_INT_TOL = 1e-9
FULL_CIRCLE_GAP = 2.0  # diameter of the unit circle; the k=1 separation sentinel


def unit_phase(x) -> np.ndarray:
    """exp(2πi x) with the argument reduced to [-1/2, 1/2) first."""
    x = np.asarray(x, dtype=float)
    x = x - np.floor(x + 0.5)
    return np.exp(2j * np.pi * x)


def _freq_array(freqs, dim: int) -> np.ndarray:
    arr = np.asarray(freqs, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"frequencies must be (k, {dim}), got {arr.shape}")
    return arr


def e_matrix(freqs, lam: LambdaVector) -> np.ndarray:
    """Unit-modulus matrix with entry (j, l) = exp(2πi a_l·λ_j)."""
    freqs = _freq_array(freqs, lam.dim)
    if freqs.shape[0] != lam.k:
        raise ValueError(
            f"need as many frequencies as λ entries: {freqs.shape[0]} != {lam.k}"
        )
    return unit_phase(lam.points @ freqs.T)


def factor_t_matrix(freqs, lam: LambdaVector, omega):
    """Split the fiber matrix at ω into the λ-only part times a diagonal unitary.

    Returns (E, u) with u the diagonal entries exp(2πi a_j·ω); E·diag(u)
    equals the matrix of generator fibers exp(2πi a_l·(ω+λ_j)) entrywise.
    """
    freqs = _freq_array(freqs, lam.dim)
    omega = np.asarray(omega, dtype=float).reshape(lam.dim)
    e = e_matrix(freqs, lam)
    u = unit_phase(freqs @ omega)
    return e, u


@dataclass(frozen=True)
class PerLambdaSpectrum:
    vector: LambdaVector
    sigma_min: float
    sigma_max: float
    abs_det: float


@dataclass(frozen=True)
class RieszCertificate:
    """Two-sided squared-norm bounds of the fiber matrices over a λ-set."""

    lower: float  # min σ_min², the A of the squared-scale inequality
    upper: float  # max σ_max²
    min_abs_det: float
    per_lambda: tuple[PerLambdaSpectrum, ...]


def riesz_bounds(freqs, lset: LambdaSet) -> RieszCertificate:
    freqs = _freq_array(freqs, lset.dim)
    mats = kernels.phase_matrices(
        np.ascontiguousarray(freqs), np.ascontiguousarray(lset.stacked_points())
    )
    rows = []
    for vec, mat in zip(lset.vectors, mats):
        s = np.linalg.svd(mat, compute_uv=False)
        rows.append(
            PerLambdaSpectrum(vec, float(s[-1]), float(s[0]),
                              float(abs(np.linalg.det(mat))))
        )
    return RieszCertificate(
        lower=min(r.sigma_min**2 for r in rows),
        upper=max(r.sigma_max**2 for r in rows),
        min_abs_det=min(r.abs_det for r in rows),
        per_lambda=tuple(rows),
    )


@dataclass(frozen=True)
class SeparationCertificate:
    """Minimum pairwise circle gap of the λ entries under probe frequency α."""

    alpha: np.ndarray
    delta: float
    witness: tuple[LambdaVector, int, int] | None

    @property
    def separated(self) -> bool:
        return self.delta > 0.0


def check_separation(lset: LambdaSet, alpha) -> SeparationCertificate:
    """Smallest |e^{2πi α·λ_j} - e^{2πi α·λ_l}| within any λ-vector.

    For k = 1 there are no pairs; the full circle diameter 2 is returned as
    the "unconstrained" sentinel.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(lset.dim)
    if lset.k < 2:
        return SeparationCertificate(alpha, FULL_CIRCLE_GAP, None)
    best = math.inf
    witness = None
    for vec in lset.vectors:
        t = vec.points @ alpha
        for j in range(lset.k):
            for l in range(j + 1, lset.k):
                # |e^{iθ} - e^{iφ}| = 2|sin(π(t_j - t_l))| on the unit circle;
                # reduce mod 1 first so integer differences give an exact 0
                diff = t[j] - t[l]
                diff -= math.floor(diff + 0.5)
                gap = 2.0 * abs(math.sin(math.pi * diff))
                if gap < best:
                    best = gap
                    witness = (vec, j, l)
    return SeparationCertificate(alpha, float(best), witness)


def delta_alpha_gap(lset: LambdaSet, alpha) -> float:
    """Distance from 1 to the set of phase ratios e^{2πi α·(λ_j-λ_l)}, j ≠ l.

    Differences are taken within each λ-vector only. Equals the separation
    gap because ratios of unit-modulus numbers preserve distances.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(lset.dim)
    if lset.k < 2:
        return FULL_CIRCLE_GAP
    ratios = []
    for vec in lset.vectors:
        t = vec.points @ alpha
        for j in range(lset.k):
            for l in range(lset.k):
                if j != l:
                    ratios.append(unit_phase(t[j] - t[l]))
    return float(np.min(np.abs(np.asarray(ratios) - 1.0)))


@dataclass(frozen=True)
class AdmissibilityRow:
    vector: LambdaVector
    values: tuple[float, ...]
    integral: bool
    residues: tuple[int, ...] | None
    distinct: bool


@dataclass(frozen=True)
class AdmissibilityCertificate:
    ok: bool
    v: np.ndarray
    n: int
    rows: tuple[AdmissibilityRow, ...]


def check_admissibility(lset: LambdaSet, v, n: int,
                        int_tol: float = ADMISSIBLE_INT_TOL) -> AdmissibilityCertificate:
    """Do the pairings v·λ_j form pairwise distinct integers mod n, per vector?"""
    v = np.asarray(v, dtype=float).reshape(lset.dim)
    n = int(n)
    if n < 1:
        raise ValueError("modulus n must be a positive integer")
    rows = []
    ok = True
    for vec in lset.vectors:
        values = vec.points @ v
        rounded = np.round(values)
        integral = bool(np.max(np.abs(values - rounded)) <= int_tol)
        if integral:
            residues = tuple(int(r) % n for r in rounded)
            distinct = len(set(residues)) == len(residues)
        else:
            residues = None
            distinct = False
        ok = ok and integral and distinct
        rows.append(AdmissibilityRow(
            vec, tuple(float(x) for x in values), integral, residues, distinct
        ))
    return AdmissibilityCertificate(ok, v, n, tuple(rows))


def vandermonde_frequencies(alpha, k: int) -> np.ndarray:
    """Frequency stack (α, 2α, ..., kα); the fiber matrices it produces are
    Vandermonde in the nodes e^{2πi α·λ_j}."""
    if k < 1:
        raise ValueError("k must be at least 1")
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    return np.arange(1, k + 1)[:, None] * alpha[None, :]


@dataclass(frozen=True)
class BasisCertificate:
    """Determinant-criterion certificate for a structured exponential basis."""

    passed: bool
    lower: float
    upper: float
    min_abs_det: float
    det_threshold: float
    derived_lower_bound: float
    riesz: RieszCertificate


def certify_structured_basis(freqs, lset: LambdaSet,
                             det_tol_factor: float = DET_TOL_FACTOR) -> BasisCertificate:
    """Certify via min |det E| > tol over the λ-set.

    The threshold scales with k^(k/2), the Hadamard maximum of |det| for
    unit-modulus matrices. On pass, the reported derived lower bound
    (min |det|)² / B^(k-1) is a guaranteed floor for A.
    """
    cert = riesz_bounds(freqs, lset)
    k = lset.k
    threshold = det_tol_factor * k ** (k / 2.0)
    passed = cert.min_abs_det > threshold
    derived = cert.min_abs_det**2 / cert.upper ** (k - 1)
    return BasisCertificate(
        passed=passed,
        lower=cert.lower,
        upper=cert.upper,
        min_abs_det=cert.min_abs_det,
        det_threshold=threshold,
        derived_lower_bound=derived,
        riesz=cert,
    )


def two_tile_converse(freqs, lset: LambdaSet) -> SeparationCertificate:
    """For k = 2, the separation certificate at α = a₂ - a₁.

    When the pair of frequencies certifies a basis with squared-scale lower
    bound A, this gap is at least A.
    """
    if lset.k != 2:
        raise ValueError(f"two-tile converse needs k = 2, got k = {lset.k}")
    freqs = _freq_array(freqs, lset.dim)
    if freqs.shape[0] != 2:
        raise ValueError("two-tile converse needs exactly two frequencies")
    alpha = freqs[1] - freqs[0]
    return check_separation(lset, alpha)


@dataclass(frozen=True)
class SearchResult:
    alpha: np.ndarray
    frequencies: np.ndarray
    certificate: BasisCertificate


def search_structured_basis(lset: LambdaSet,
                            max_denominator: int = 16) -> SearchResult:
    """Scan probe frequencies α over a rational grid and keep the best certificate.

    Candidates are (p₁/q, ..., p_d/q) with q up to ``max_denominator`` and the
    tuple (p₁, ..., p_d, q) in lowest terms; each candidate is tried with the
    Vandermonde frequency stack. Preference: passing certificate, then larger
    lower bound, then smaller q, then lexicographic α (deterministic).
    """
    d, k = lset.dim, lset.k
    best = None
    best_key = None
    for q in range(1, max_denominator + 1):
        for ps in product(range(q), repeat=d):
            if math.gcd(q, *ps) != 1:
                continue
            alpha = np.asarray(ps, dtype=float) / q
            freqs = vandermonde_frequencies(alpha, k)
            cert = certify_structured_basis(freqs, lset)
            key = (cert.passed, cert.lower, -q, tuple(-a for a in alpha))
            if best_key is None or key > best_key:
                best = SearchResult(alpha, freqs, cert)
                best_key = key
    assert best is not None
    return best
