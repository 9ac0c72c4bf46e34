import itertools

import numpy as np
import pytest

from spectile import Lattice
from spectile.errors import InvalidLatticeError


def oracle_dual_pairings_integral(primal: Lattice, dual: Lattice, tol=1e-10):
    """Oracle: every dual generator pairs integrally with every primal generator."""
    for i in range(dual.dim):
        for j in range(primal.dim):
            pairing = float(dual.basis[:, i] @ primal.basis[:, j])
            if abs(pairing - round(pairing)) > tol:
                return False
    return True


def oracle_points_in_radius(basis, center, radius, span=12):
    """Oracle: exhaustive integer scan, lex-sorted by point coordinates."""
    basis = np.asarray(basis, dtype=float)
    d = basis.shape[0]
    pts = []
    for z in itertools.product(range(-span, span + 1), repeat=d):
        p = basis @ np.asarray(z, dtype=float)
        if np.linalg.norm(p - center) <= radius + 1e-9:
            pts.append(tuple(p))
    return sorted(pts)


def test_dual_identity_is_self_dual():
    lat = Lattice(np.eye(2))
    dual = lat.dual()
    assert np.allclose(dual.basis, np.eye(2))
    assert oracle_dual_pairings_integral(lat, dual)


def test_dual_scalar_inverse():
    lat = Lattice([[2.0]])
    assert np.allclose(lat.dual().basis, [[0.5]])


def test_dual_shear():
    lat = Lattice([[1.0, 1.0], [0.0, 1.0]])
    dual = lat.dual()
    expected = np.array([[1.0, 0.0], [-1.0, 1.0]])
    assert np.allclose(dual.basis, expected)
    assert oracle_dual_pairings_integral(lat, dual)


def test_dual_involution_returns_same_lattice():
    rng = np.random.default_rng(7)
    for _ in range(20):
        basis = rng.normal(size=(3, 3))
        if abs(np.linalg.det(basis)) < 0.1:
            continue
        lat = Lattice(basis)
        twice = lat.dual().dual()
        assert lat.same_lattice(twice)
        a = lat.points_in_radius(np.zeros(3), 3.0)
        b = twice.points_in_radius(np.zeros(3), 3.0)
        assert a.shape == b.shape
        assert np.max(np.abs(a - b)) < 1e-9


def test_singular_basis_rejected():
    with pytest.raises(InvalidLatticeError):
        Lattice([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(InvalidLatticeError):
        Lattice([[1.0, 0.0]])


def test_reduce_zero():
    lat = Lattice(np.eye(2))
    residue, coords = lat.reduce([0.0, 0.0])
    assert np.all(residue == 0)
    assert np.all(coords == 0)


def test_reduce_simple_point():
    # oracle: exhaustive nearest-shift search over z in a small range
    lat = Lattice([[1.0]])
    best = None
    for z in range(-3, 4):
        r = 0.6 - z
        if -0.5 <= r < 0.5:
            best = (r, z)
    assert best == (pytest.approx(-0.4), 1)
    residue, coords = lat.reduce([0.6])
    assert residue[0] == pytest.approx(-0.4)
    assert coords[0] == 1


def test_reduce_half_boundary_wraps_down():
    # both candidates 0.5 - 0 and 0.5 - 1 touch the boundary; only -0.5 is
    # inside the half-open cell
    lat = Lattice([[1.0]])
    assert not (-0.5 <= 0.5 < 0.5)
    assert -0.5 <= -0.5 < 0.5
    residue, coords = lat.reduce([0.5])
    assert residue[0] == -0.5
    assert coords[0] == 1


def test_reduce_idempotent_on_residue():
    rng = np.random.default_rng(3)
    for _ in range(25):
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
        basis = q @ np.diag(rng.uniform(0.5, 2.0, size=2))
        lat = Lattice(basis)
        x = rng.normal(scale=5.0, size=2)
        residue, _ = lat.reduce(x)
        again, coords = lat.reduce(residue)
        assert np.all(coords == 0)
        assert np.max(np.abs(again - residue)) < 1e-12


def test_reduce_linearity():
    rng = np.random.default_rng(11)
    lat = Lattice([[1.0, 0.3], [0.0, 0.8]])
    for _ in range(25):
        x = rng.normal(scale=3.0, size=2)
        z = rng.integers(-5, 6, size=2)
        r1, _ = lat.reduce(x)
        r2, _ = lat.reduce(x + lat.basis @ z)
        assert np.max(np.abs(r1 - r2)) < 1e-10


def test_points_in_radius_zero():
    lat = Lattice([[1.0]])
    pts = lat.points_in_radius([0.0], 0.0)
    assert pts.tolist() == [[0.0]]


def test_points_in_radius_line():
    lat = Lattice([[1.0]])
    pts = lat.points_in_radius([0.0], 2.5)
    assert pts.ravel().tolist() == [-2.0, -1.0, 0.0, 1.0, 2.0]
    assert pts.ravel().tolist() == [p[0] for p in
                                    oracle_points_in_radius(lat.basis, [0.0], 2.5)]


def test_points_in_radius_scaled_plane():
    lat = Lattice(2.0 * np.eye(2))
    pts = lat.points_in_radius([0.0, 0.0], 2.0)
    expected = [(-2.0, 0.0), (0.0, -2.0), (0.0, 0.0), (0.0, 2.0), (2.0, 0.0)]
    assert [tuple(p) for p in pts.tolist()] == expected
    assert [tuple(p) for p in pts.tolist()] == oracle_points_in_radius(
        lat.basis, [0.0, 0.0], 2.0)


def test_points_in_radius_matches_oracle_on_skewed_lattice():
    lat = Lattice([[1.0, 0.4], [0.1, 0.9]])
    got = [tuple(p) for p in lat.points_in_radius([0.3, -0.2], 2.7).tolist()]
    want = oracle_points_in_radius(lat.basis, [0.3, -0.2], 2.7)
    assert len(got) == len(want)
    assert np.allclose(np.asarray(got), np.asarray(want))


def test_dual_int_coords():
    lat = Lattice([[2.0]])
    assert lat.dual_int_coords([0.5]).tolist() == [1]
    assert lat.dual_int_coords([1.5]).tolist() == [3]
    with pytest.raises(InvalidLatticeError):
        lat.dual_int_coords([0.3])


def test_same_lattice_under_unimodular_change():
    lat = Lattice([[1.0, 0.0], [0.0, 1.0]])
    other = Lattice([[1.0, 1.0], [0.0, 1.0]])  # unimodular change of basis
    assert lat.same_lattice(other)
    assert not lat.same_lattice(Lattice(2.0 * np.eye(2)))


def test_fundamental_domain_membership():
    lat = Lattice([[2.0]])
    dom = lat.fundamental_domain
    assert dom.contains([0.99])
    assert not dom.contains([1.0])  # +1/2 fractional coordinate is excluded
    assert dom.contains([-1.0])


def test_json_round_trip():
    lat = Lattice([[1.0, 0.25], [0.0, 0.5]])
    again = Lattice.from_json(lat.to_json())
    assert np.array_equal(lat.basis, again.basis)
