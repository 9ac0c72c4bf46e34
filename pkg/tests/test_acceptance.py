"""Acceptance suite: one test per criterion, at the stated tolerances.

All grid sweeps use 64 samples per axis in dimension one unless noted. Each
test prints a pass line on success (visible with ``pytest -s`` or in captured
output); the per-test PASSED/FAILED line of ``pytest -v`` mirrors it.
"""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from spectile import (
    FiberSampleGrid,
    Lattice,
    LambdaSet,
    LatticeWindow,
    RangeField,
    RangeOperatorField,
    certify_structured_basis,
    check_admissibility,
    check_separation,
    diagonalize_normal,
    e_matrix,
    enumerate_lambda_set,
    fiber_subspace_combine,
    fiberize_pw_kernel,
    lambda_a_apply,
    op_norm,
    riesz_bounds,
    s_eigenvalue_extract,
    search_structured_basis,
    shift_operator_field,
    triangularize,
    two_tile_converse,
    vandermonde_frequencies,
    verify_k_tiling,
)

from conftest import make_line_config

Z1 = Lattice([[1.0]])
N = 64


def report_pass(number, text):
    print(f"ACCEPTANCE CRITERION {number}: PASS - {text}", flush=True)


def int_lambda_set(rows):
    return LambdaSet.from_int_rows([[(int(e),) for e in row] for row in rows], Z1)


def random_orthonormal_space(rng, grid, window, m):
    bases = []
    for _ in range(grid.size):
        a = rng.standard_normal((window.size, m)) + 1j * rng.standard_normal(
            (window.size, m))
        q, _ = np.linalg.qr(a)
        bases.append(q[:, :m])
    return RangeField(grid, window, tuple(bases))


def test_criterion_1_tiling_verification():
    cfg = make_line_config([(0.0, 2.0)], 2)
    rep = verify_k_tiling(cfg, cfg.sample_grid(N))
    assert rep.ok
    assert rep.counts.tolist() == [2] * N

    split = make_line_config([(0.0, 0.5), (1.5, 2.0)], 1)
    rep = verify_k_tiling(split, split.sample_grid(N))
    assert rep.ok
    assert rep.counts.tolist() == [1] * N

    bad = make_line_config([(0.0, 1.5)], 1)
    grid = bad.sample_grid(N)
    rep = verify_k_tiling(bad, grid)
    assert not rep.ok
    violating = sorted(pt[0] for pt, _ in rep.violations)
    expected = sorted(p for p in grid.points[:, 0] if 0.0 <= p < 0.5)
    assert violating == expected
    assert all(count == 2 for _, count in rep.violations)
    report_pass(1, "k-tiling verification with exact integer counts")


def test_criterion_2_lambda_set_enumeration():
    cfg = make_line_config([(0.0, 2.0)], 2)
    lset = enumerate_lambda_set(cfg, cfg.sample_grid(N))
    assert [v.coords for v in lset.vectors] == [((0,), (1,)), ((1,), (2,))]
    assert lset.counts == (32, 32)
    assert lset.weights == (0.5, 0.5)
    report_pass(2, "lambda set {(0,1),(1,2)} with exact 0.5/0.5 weights")


def test_criterion_3_riesz_certification():
    cfg = make_line_config([(0.0, 2.0)], 2)
    lset = enumerate_lambda_set(cfg, cfg.sample_grid(N))
    good = certify_structured_basis([[0.5], [1.0]], lset)
    assert good.passed
    assert abs(good.lower - 2.0) <= 1e-10
    assert abs(good.upper - 2.0) <= 1e-10
    assert abs(good.min_abs_det - 2.0) <= 1e-10
    assert abs(good.derived_lower_bound - 2.0) <= 1e-9
    assert abs(good.derived_lower_bound - good.lower) <= 1e-9

    bad = certify_structured_basis([[1.0], [2.0]], lset)
    assert not bad.passed
    assert bad.min_abs_det <= 1e-12
    report_pass(3, "A = B = 2 with tight determinant bound; singular pair fails")


def test_criterion_4_separation_and_vandermonde():
    cfg = make_line_config([(0.0, 2.0)], 2)
    lset = enumerate_lambda_set(cfg, cfg.sample_grid(N))
    assert check_separation(lset, [0.5]).delta == pytest.approx(2.0, abs=1e-12)
    assert check_separation(int_lambda_set([[0, 1]]), [1 / 3]).delta == pytest.approx(
        math.sqrt(3.0), abs=1e-12)

    rng = np.random.default_rng(404)
    for _ in range(100):
        k = int(rng.choice([2, 3]))
        rows = [np.sort(rng.choice(np.arange(-12, 13), size=k,
                                   replace=False)).tolist()
                for _ in range(int(rng.integers(1, 4)))]
        s = int_lambda_set(rows)
        alpha = float(rng.uniform(0.01, 0.99))
        delta = check_separation(s, [alpha]).delta
        freqs = vandermonde_frequencies([alpha], k)
        for vec in s.vectors:
            det_sq = abs(np.linalg.det(e_matrix(freqs, vec))) ** 2
            assert det_sq >= delta ** (k * (k - 1)) - 1e-9
    report_pass(4, "separation gaps and the Vandermonde determinant bound "
                   "(100 random trials)")


def random_two_tile(rng):
    """Two disjoint split 1-tiles of Z, corners on a 0.05 grid."""
    def split_tile(offset):
        c = round(float(rng.integers(1, 20)) * 0.05, 2)
        jump = int(rng.integers(0, 3))
        return [
            (offset, offset + c),
            (offset + c + jump, offset + 1.0 + jump),
        ]

    boxes = split_tile(0.0) + split_tile(4.0)
    return make_line_config(boxes, 2)


def test_criterion_5_two_tile_converse():
    rng = np.random.default_rng(505)
    for _ in range(20):
        cfg = random_two_tile(rng)
        lset = enumerate_lambda_set(cfg, cfg.sample_grid(N))
        found = search_structured_basis(lset)
        assert found.certificate.passed
        bound = riesz_bounds(found.frequencies, lset)
        sep = two_tile_converse(found.frequencies, lset)
        assert sep.delta >= bound.lower - 1e-9
    report_pass(5, "alpha = a2 - a1 separation dominates the lower Riesz "
                   "bound on 20 random 2-tiles")


def test_criterion_6_admissibility():
    # goldens frozen from the brute-force residue oracle in
    # tests/test_expbases.py::test_admissibility_matches_brute_force_oracle
    cfg = make_line_config([(0.0, 2.0)], 2)
    lset = enumerate_lambda_set(cfg, cfg.sample_grid(N))
    cert = check_admissibility(lset, [1.0], 2)
    assert cert.ok
    assert [row.residues for row in cert.rows] == [(0, 1), (1, 0)]

    gapped = make_line_config([(0.0, 1.0), (2.0, 3.0)], 2)
    gap_set = enumerate_lambda_set(gapped, gapped.sample_grid(N))
    assert [v.coords for v in gap_set.vectors] == [((0,), (2,)), ((1,), (3,))]
    # oracle: residues mod 2 are {0,0} and {1,1} -> collisions, not admissible
    cert2 = check_admissibility(gap_set, [1.0], 2)
    assert not cert2.ok
    assert [row.residues for row in cert2.rows] == [(0, 0), (1, 1)]
    # mod 4 the residues {0,2} and {1,3} are distinct -> admissible
    cert4 = check_admissibility(gap_set, [1.0], 4)
    assert cert4.ok
    assert [row.residues for row in cert4.rows] == [(0, 2), (1, 3)]

    collision = check_admissibility(int_lambda_set([[0, 2]]), [1.0], 2)
    assert not collision.ok
    report_pass(6, "admissibility residues match the brute-force oracle "
                   "(collision cases fail)")


def test_criterion_7_triangularization():
    rng = np.random.default_rng(707)
    grid = FiberSampleGrid.build(Z1, N)
    window = LatticeWindow.from_radius(Z1, 3.0)
    for trial in range(100):
        ell = int(rng.choice([2, 3, 4]))
        space = random_orthonormal_space(rng, grid, window, ell)
        mats = tuple(
            (rng.standard_normal((ell, ell)) + 1j * rng.standard_normal((ell, ell)))
            / math.sqrt(2.0)
            for _ in range(grid.size)
        )
        field = RangeOperatorField(space, mats)
        tri = triangularize(field)
        scale = 1.0 + op_norm(field)
        assert tri.max_unitarity_defect <= 1e-10
        assert tri.max_lower_residual <= 1e-8 * scale
        assert tri.max_invariance_residual <= 1e-8 * scale
        supports = [gen.support() for gen in tri.generators]
        for j in range(1, ell):
            assert not np.any(supports[j] & ~supports[j - 1])
    report_pass(7, "100 random operator fields triangularize within tolerance "
                   "with nested spectra")


def test_criterion_8_normal_diagonalization():
    rng = np.random.default_rng(808)
    grid = FiberSampleGrid.build(Z1, N)
    window = LatticeWindow.from_radius(Z1, 3.0)
    for trial in range(100):
        ell = int(rng.choice([2, 3, 4]))
        space = random_orthonormal_space(rng, grid, window, ell)
        mats = []
        for _ in range(grid.size):
            a = rng.standard_normal((ell, ell)) + 1j * rng.standard_normal((ell, ell))
            q, r = np.linalg.qr(a)
            q = q * (np.diag(r) / np.abs(np.diag(r)))
            d = np.diag(rng.standard_normal(ell) + 1j * rng.standard_normal(ell))
            mats.append(q @ d @ q.conj().T)
        field = RangeOperatorField(space, tuple(mats))
        decomp = diagonalize_normal(field)
        scale = 1.0 + op_norm(field)
        assert decomp.max_reconstruction_residual <= 1e-8 * scale
        if trial % 10 == 0:
            for sym in s_eigenvalue_extract(decomp):
                assert np.max(np.abs(sym.evaluate(grid) - sym.values)) <= 1e-9

    # translation flow: unit mass at the matching dual point
    basis = np.zeros((window.size, 2), dtype=complex)
    basis[0, 0] = basis[1, 1] = 1.0
    space = RangeField(grid, window, tuple(basis for _ in range(grid.size)))
    flow = shift_operator_field([1.0], space)
    for sym in s_eigenvalue_extract(diagonalize_normal(flow)):
        mags = np.abs(sym.coeffs)
        peak = int(np.argmax(mags))
        assert sym.tap_coords[peak].tolist() == [1]
        assert abs(sym.coeffs[peak] - 1.0) <= 1e-12
        assert np.max(np.delete(mags, peak)) <= 1e-12
    report_pass(8, "100 random normal fields diagonalize and round-trip; "
                   "translation taps sit at h = 1")


def test_criterion_9_multiplier_two_routes():
    cfg = make_line_config([(0.0, 2.0)], 2)
    grid = cfg.sample_grid(N)
    window = LatticeWindow.for_config(cfg)
    rng = np.random.default_rng(909)
    for _ in range(20):
        a = float(rng.uniform(-1.5, 1.5))
        f = fiberize_pw_kernel(cfg, [a], window, grid)
        taps = [((h,), complex(rng.standard_normal(), rng.standard_normal()))
                for h in range(-2, 3)]
        multiplied = lambda_a_apply(taps, f)
        summed = np.zeros_like(f.vectors)
        for (h,), weight in taps:
            summed = summed + weight * fiberize_pw_kernel(
                cfg, [a - h], window, grid).vectors
        assert np.max(np.abs(multiplied.vectors - summed)) <= 1e-10
    report_pass(9, "multiplication route equals the translated-kernel sum "
                   "for 20 random 5-tap symbols")


def test_criterion_10_subspace_calculus():
    rng = np.random.default_rng(1010)
    grid = FiberSampleGrid.build(Z1, 8)
    window = LatticeWindow.from_radius(Z1, 3.0)
    w = window.size
    for _ in range(100):
        dims = rng.integers(0, w - 1, size=grid.size)
        x = random_orthonormal_space_with_dims(rng, grid, window, dims)
        back = fiber_subspace_combine("complement",
                                      fiber_subspace_combine("complement", x))
        comp = fiber_subspace_combine("complement", x)
        both = fiber_subspace_combine("intersect", x, x)
        ysub = RangeField(grid, window, tuple(
            b[:, : min(1, b.shape[1])] for b in comp.bases))
        total = fiber_subspace_combine("direct_sum", x, ysub)
        assert np.array_equal(total.dims, x.dims + ysub.dims)
        for g in range(grid.size):
            px = x.projector(g)
            assert np.linalg.norm(back.projector(g) - px, 2) <= 1e-9
            assert np.linalg.norm(both.projector(g) - px, 2) <= 1e-9
    report_pass(10, "complement involution, intersection idempotence, and "
                    "rank additivity on 100 random fields")


def random_orthonormal_space_with_dims(rng, grid, window, dims):
    bases = []
    for g in range(grid.size):
        m = int(dims[g])
        if m == 0:
            bases.append(np.zeros((window.size, 0), dtype=complex))
            continue
        a = rng.standard_normal((window.size, m)) + 1j * rng.standard_normal(
            (window.size, m))
        q, _ = np.linalg.qr(a)
        bases.append(q[:, :m])
    return RangeField(grid, window, tuple(bases))


# ---------------------------------------------------------------------------
# criterion 11: byte determinism of every subcommand


BASE = {
    "lattice": {"basis": [[1.0]]},
    "set": {"boxes": [{"low": [0.0], "high": [2.0]}]},
    "level": 2,
}

SUBCOMMAND_CONFIGS = {
    "tile-check": BASE,
    "lambda-map": BASE,
    "separation": {**BASE, "alpha": [0.5]},
    "admissible": {**BASE, "admissibility": {"v": [1.0], "n": 2}},
    "certify": {**BASE, "frequencies": [[0.5], [1.0]]},
    "triangularize": {**BASE, "operator": {"kind": "matrix_field",
                                           "expr": {"name": "nilpotent",
                                                    "h": [1.0]}}},
    "diagonalize": {**BASE, "operator": {"kind": "shift", "h": [1.0]}},
}


def run_subcommand(subcommand, cfg_path, out, csv, threads, backend):
    env = dict(os.environ)
    env["SPECTILE_BACKEND"] = backend
    res = subprocess.run(
        [sys.executable, "-m", "spectile", subcommand,
         "--config", cfg_path, "--out", str(out), "--csv", str(csv),
         "--threads", str(threads)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert res.returncode in (0, 1), res.stderr
    return out.read_bytes(), csv.read_bytes()


@pytest.mark.parametrize("subcommand", sorted(SUBCOMMAND_CONFIGS))
def test_criterion_11_determinism(subcommand, tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(SUBCOMMAND_CONFIGS[subcommand]),
                        encoding="utf-8")
    outputs = []
    for tag, threads in (("r1", 1), ("r2", 1), ("t8", 8)):
        out = tmp_path / f"{tag}.json"
        csv = tmp_path / f"{tag}.csv"
        outputs.append(run_subcommand(subcommand, str(cfg_path), out, csv,
                                      threads, backend="numpy"))
    assert outputs[0] == outputs[1] == outputs[2]
    report_pass(11, f"{subcommand} is byte-identical across runs and "
                    "thread counts 1/8")


def test_criterion_11_determinism_default_backend(tmp_path):
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(SUBCOMMAND_CONFIGS["tile-check"]),
                        encoding="utf-8")
    outputs = []
    for tag, threads in (("r1", 1), ("r2", 8)):
        out = tmp_path / f"{tag}.json"
        csv = tmp_path / f"{tag}.csv"
        outputs.append(run_subcommand("tile-check", str(cfg_path), out, csv,
                                      threads, backend="auto"))
    assert outputs[0] == outputs[1]
    report_pass(11, "tile-check also byte-identical on the default backend")
