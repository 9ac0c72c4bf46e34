"""Pipeline orchestration: one entry point per CLI subcommand.

Each runner builds the sampled model from the parsed config, calls the
domain modules, and packs a deterministic report. Module-level failures
discovered while computing (wrong covering multiplicity, non-normal input
to diagonalize) become failed reports rather than exceptions; input problems
stay exceptions for the CLI to map to exit code 2.
"""

from __future__ import annotations

import time

import numpy as np

from . import expbases, fibers, multitile, shift_ops
from .config import RunConfig
from .errors import ConfigError, NonNormalOperatorError, WrongMultiplicityError
from .report import Report, Table

SUBCOMMANDS = (
    "tile-check",
    "lambda-map",
    "separation",
    "admissible",
    "certify",
    "triangularize",
    "diagonalize",
)


def run(subcommand: str, cfg: RunConfig, threads: int = 1) -> Report:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError("/", f"unknown subcommand {subcommand!r}")
    started = time.perf_counter()
    handler = _HANDLERS[subcommand]
    try:
        report = handler(cfg, threads)
    except WrongMultiplicityError as exc:
        report = Report(
            subcommand=subcommand,
            input_digest=cfg.digest,
            passed=False,
            result={
                "error": {
                    "type": "wrong_multiplicity",
                    "omega": list(exc.point),
                    "observed": exc.observed,
                    "expected": exc.expected,
                }
            },
        )
    report.subcommand = subcommand
    report.input_digest = cfg.digest
    report.wall_time_s = time.perf_counter() - started
    return report


def _grid(cfg: RunConfig):
    return cfg.tile.sample_grid(cfg.per_axis)


def _omega_header(dim: int) -> list[str]:
    return [f"omega_{i + 1}" for i in range(dim)]


def _lambda_header(k: int, dim: int) -> list[str]:
    return [f"lambda_{j + 1}_{i + 1}" for j in range(k) for i in range(dim)]


def _vector_cells(vec: multitile.LambdaVector) -> list[float]:
    return [float(x) for x in vec.points.ravel()]


def _run_tile_check(cfg: RunConfig, threads: int) -> Report:
    grid = _grid(cfg)
    rep = multitile.verify_k_tiling(cfg.tile, grid)
    dim = cfg.tile.lattice.dim
    table = Table(
        header=tuple(_omega_header(dim) + ["count"]),
        rows=tuple(
            tuple(float(x) for x in grid.points[g]) + (int(rep.counts[g]),)
            for g in range(grid.size)
        ),
    )
    return Report(
        subcommand="tile-check",
        input_digest=cfg.digest,
        passed=rep.ok,
        result={
            "ok": rep.ok,
            "level": rep.level,
            "samples": grid.size,
            "measure_consistent": cfg.tile.measure_consistent,
            "violation_count": len(rep.violations),
            "violations": [
                {"omega": point.tolist(), "count": count}
                for point, count in rep.violations
            ],
        },
        table=table,
    )


def _run_lambda_map(cfg: RunConfig, threads: int) -> Report:
    grid = _grid(cfg)
    lam = multitile.lambda_map(cfg.tile, grid)
    lset = multitile.enumerate_lambda_set(cfg.tile, grid)
    dim = cfg.tile.lattice.dim
    k = cfg.tile.level
    rows = []
    for g in range(grid.size):
        rows.append(
            tuple(float(x) for x in grid.points[g])
            + tuple(float(x) for x in lam[g].ravel())
        )
    table = Table(
        header=tuple(_omega_header(dim) + _lambda_header(k, dim)),
        rows=tuple(rows),
    )
    return Report(
        subcommand="lambda-map",
        input_digest=cfg.digest,
        passed=True,
        result={
            "ok": True,
            "level": k,
            "samples": grid.size,
            "distinct_vectors": len(lset.vectors),
            "vectors": [
                {
                    "lambda": vec.points.tolist(),
                    "count": count,
                    "weight": count / lset.total,
                }
                for vec, count in zip(lset.vectors, lset.counts)
            ],
        },
        table=table,
    )


def _certificate_result(**kwargs) -> dict:
    base = {"pass": None, "A": None, "B": None, "min_abs_det": None,
            "delta": None, "witness": None}
    base.update(kwargs)
    return base


def _witness_payload(cert: expbases.SeparationCertificate):
    if cert.witness is None:
        return None
    vec, j, l = cert.witness
    return {"lambda": vec.points.tolist(), "pair": [j, l]}


def _run_separation(cfg: RunConfig, threads: int) -> Report:
    if cfg.alpha is None:
        raise ConfigError("/alpha", "separation requires an alpha vector")
    grid = _grid(cfg)
    lset = multitile.enumerate_lambda_set(cfg.tile, grid)
    cert = expbases.check_separation(lset, cfg.alpha)
    dim, k = cfg.tile.lattice.dim, cfg.tile.level
    rows = []
    for vec in lset.vectors:
        one = expbases.check_separation(
            multitile.LambdaSet((vec,), (1,), 1), cfg.alpha
        )
        rows.append(tuple(_vector_cells(vec)) + (float(one.delta),))
    table = Table(
        header=tuple(_lambda_header(k, dim) + ["min_gap"]),
        rows=tuple(rows),
    )
    return Report(
        subcommand="separation",
        input_digest=cfg.digest,
        passed=cert.separated,
        result=_certificate_result(
            **{
                "pass": cert.separated,
                "delta": cert.delta,
                "witness": _witness_payload(cert),
                "alpha": cfg.alpha.tolist(),
            }
        ),
        table=table,
    )


def _run_admissible(cfg: RunConfig, threads: int) -> Report:
    if cfg.admissibility is None:
        raise ConfigError("/admissibility", "admissible requires v and n")
    v, n = cfg.admissibility
    grid = _grid(cfg)
    lset = multitile.enumerate_lambda_set(cfg.tile, grid)
    cert = expbases.check_admissibility(lset, v, n)
    dim, k = cfg.tile.lattice.dim, cfg.tile.level
    rows = []
    for row in cert.rows:
        residues = row.residues if row.residues is not None else (None,) * k
        rows.append(
            tuple(_vector_cells(row.vector))
            + tuple(float(x) for x in row.values)
            + tuple(residues)
            + (row.integral, row.distinct)
        )
    header = (
        _lambda_header(k, dim)
        + [f"value_{j + 1}" for j in range(k)]
        + [f"residue_{j + 1}" for j in range(k)]
        + ["integral", "distinct"]
    )
    return Report(
        subcommand="admissible",
        input_digest=cfg.digest,
        passed=cert.ok,
        result=_certificate_result(
            **{
                "pass": cert.ok,
                "v": v.tolist(),
                "n": n,
                "rows": [
                    {
                        "lambda": row.vector.points.tolist(),
                        "values": list(row.values),
                        "integral": row.integral,
                        "residues": list(row.residues) if row.residues is not None else None,
                        "distinct": row.distinct,
                    }
                    for row in cert.rows
                ],
            }
        ),
        table=Table(tuple(header), tuple(rows)),
    )


def _run_certify(cfg: RunConfig, threads: int) -> Report:
    grid = _grid(cfg)
    lset = multitile.enumerate_lambda_set(cfg.tile, grid)
    alpha = None
    search_used = False
    if cfg.frequencies is not None:
        freqs = cfg.frequencies
        if freqs.shape[0] != lset.k:
            raise ConfigError(
                "/frequencies", f"need {lset.k} frequencies, got {freqs.shape[0]}"
            )
    elif cfg.alpha is not None:
        alpha = cfg.alpha
        freqs = expbases.vandermonde_frequencies(alpha, lset.k)
    else:
        found = expbases.search_structured_basis(lset)
        alpha, freqs, search_used = found.alpha, found.frequencies, True
    cert = expbases.certify_structured_basis(freqs, lset,
                                             det_tol_factor=cfg.tolerances.det)
    delta = None
    witness = None
    if alpha is not None:
        sep = expbases.check_separation(lset, alpha)
        delta = sep.delta
        witness = _witness_payload(sep)
    elif lset.k == 2:
        sep = expbases.two_tile_converse(freqs, lset)
        delta = sep.delta
        witness = _witness_payload(sep)
    dim, k = cfg.tile.lattice.dim, cfg.tile.level
    rows = tuple(
        tuple(_vector_cells(r.vector)) + (r.sigma_min, r.sigma_max, r.abs_det)
        for r in cert.riesz.per_lambda
    )
    table = Table(
        header=tuple(_lambda_header(k, dim) + ["sigma_min", "sigma_max", "abs_det"]),
        rows=rows,
    )
    return Report(
        subcommand="certify",
        input_digest=cfg.digest,
        passed=cert.passed,
        result=_certificate_result(
            **{
                "pass": cert.passed,
                "A": cert.lower,
                "B": cert.upper,
                "min_abs_det": cert.min_abs_det,
                "delta": delta,
                "witness": witness,
                "derived_lower_bound": cert.derived_lower_bound,
                "det_threshold": cert.det_threshold,
                "frequencies": freqs.tolist(),
                "alpha": alpha.tolist() if alpha is not None else None,
                "search_used": search_used,
            }
        ),
        table=table,
    )


def _build_operator(cfg: RunConfig, space: fibers.RangeField):
    spec = cfg.operator
    lattice = cfg.tile.lattice
    grid = space.grid
    kind = spec["kind"]
    if kind == "shift":
        try:
            return shift_ops.shift_operator_field(spec["h"], space)
        except Exception as exc:
            raise ConfigError("/operator/h", str(exc)) from exc
    if kind == "multiplier":
        taps = []
        for i, tap in enumerate(spec["taps"]):
            try:
                coords = lattice.dual_int_coords(tap["h"])
            except Exception as exc:
                raise ConfigError(f"/operator/taps/{i}/h", str(exc)) from exc
            taps.append((coords, complex(tap["re"], tap["im"])))
        return shift_ops.multiplier_operator_field(taps, space)
    expr = spec["expr"]
    name = expr["name"]
    k = cfg.tile.level
    if name == "constant":
        mat = np.array(
            [[complex(c["re"], c["im"]) for c in row] for row in expr["entries"]],
            dtype=np.complex128,
        )
        mats = tuple(mat.copy() for _ in range(grid.size))
        return shift_ops.RangeOperatorField(space, mats)
    if name == "diag_exponentials":
        symbols = []
        for i, h in enumerate(expr["h"]):
            try:
                coords = lattice.dual_int_coords(h)
            except Exception as exc:
                raise ConfigError(f"/operator/expr/h/{i}", str(exc)) from exc
            symbols.append(np.exp(-2j * np.pi * (grid.frac @ coords)))
        mats = tuple(
            np.diag([symbols[j][g] for j in range(k)]).astype(np.complex128)
            for g in range(grid.size)
        )
        return shift_ops.RangeOperatorField(space, mats)
    # nilpotent: zeros with the symbol on the superdiagonal
    try:
        coords = lattice.dual_int_coords(expr["h"])
    except Exception as exc:
        raise ConfigError("/operator/expr/h", str(exc)) from exc
    symbol = np.exp(-2j * np.pi * (grid.frac @ coords))
    mats = []
    for g in range(grid.size):
        m = np.zeros((k, k), dtype=np.complex128)
        for j in range(k - 1):
            m[j, j + 1] = symbol[g]
        mats.append(m)
    return shift_ops.RangeOperatorField(space, tuple(mats))


def _operator_space(cfg: RunConfig):
    grid = _grid(cfg)
    window = fibers.LatticeWindow.for_config(cfg.tile, cfg.window_radius)
    space = fibers.tile_range_field(cfg.tile, window, grid)
    return grid, space


def _strata_payload(space: fibers.RangeField) -> dict:
    return {
        str(dim): int(idx.size)
        for dim, idx in sorted(fibers.dimension_strata(space).items())
    }


def _nested_spectra_ok(generators) -> bool:
    previous = None
    for gen in generators:
        sup = gen.support()
        if previous is not None and np.any(sup & ~previous):
            return False
        previous = sup
    return True


def _tracks_table(grid, tracks, dims) -> Table:
    dim = grid.lattice.dim
    ell = tracks.shape[0]
    header = _omega_header(dim) + ["dim"]
    for j in range(ell):
        header += [f"lambda_{j + 1}_re", f"lambda_{j + 1}_im"]
    rows = []
    for g in range(grid.size):
        row = [float(x) for x in grid.points[g]] + [int(dims[g])]
        for j in range(ell):
            row += [float(tracks[j, g].real), float(tracks[j, g].imag)]
        rows.append(tuple(row))
    return Table(tuple(header), tuple(rows))


def _run_triangularize(cfg: RunConfig, threads: int) -> Report:
    if cfg.operator is None:
        raise ConfigError("/operator", "triangularize requires an operator spec")
    grid, space = _operator_space(cfg)
    field = _build_operator(cfg, space)
    tri = shift_ops.triangularize(field, threads)
    tol = cfg.tolerances.residual * (1.0 + shift_ops.op_norm(field))
    nested_ok = _nested_spectra_ok(tri.generators)
    passed = (
        tri.max_lower_residual <= tol
        and tri.max_invariance_residual <= tol
        and tri.max_unitarity_defect <= shift_ops.UNITARY_TOL
        and nested_ok
    )
    return Report(
        subcommand="triangularize",
        input_digest=cfg.digest,
        passed=passed,
        result={
            "pass": passed,
            "length": tri.length,
            "samples": grid.size,
            "residual_tolerance": tol,
            "max_lower_residual": tri.max_lower_residual,
            "max_unitarity_defect": tri.max_unitarity_defect,
            "max_invariance_residual": tri.max_invariance_residual,
            "spectra_nested": nested_ok,
            "strata": _strata_payload(space),
            "operator": cfg.operator,
        },
        table=_tracks_table(grid, tri.eigen_tracks, space.dims),
    )


def _run_diagonalize(cfg: RunConfig, threads: int) -> Report:
    if cfg.operator is None:
        raise ConfigError("/operator", "diagonalize requires an operator spec")
    grid, space = _operator_space(cfg)
    field = _build_operator(cfg, space)
    try:
        diag = shift_ops.diagonalize_normal(field, threads,
                                            tol=cfg.tolerances.residual)
    except NonNormalOperatorError as exc:
        return Report(
            subcommand="diagonalize",
            input_digest=cfg.digest,
            passed=False,
            result={
                "pass": False,
                "normal": False,
                "max_commutator": exc.max_commutator,
                "tolerance": exc.tolerance,
                "operator": cfg.operator,
            },
        )
    symbols = shift_ops.s_eigenvalue_extract(diag)
    tol = cfg.tolerances.residual * (1.0 + shift_ops.op_norm(field))
    nested_ok = _nested_spectra_ok(diag.generators)
    sym_payload = []
    roundtrip_worst = 0.0
    for sym in symbols:
        err = float(np.max(np.abs(sym.evaluate(grid) - sym.values))) if grid.size else 0.0
        roundtrip_worst = max(roundtrip_worst, err)
        big = np.abs(sym.coeffs) > 1e-12
        sym_payload.append({
            "roundtrip_error": err,
            "tap_count": int(big.sum()),
            "taps": [
                {
                    "h": sym.tap_points[i].tolist(),
                    "coords": sym.tap_coords[i].tolist(),
                    "re": float(sym.coeffs[i].real),
                    "im": float(sym.coeffs[i].imag),
                }
                for i in np.nonzero(big)[0]
            ],
        })
    passed = (
        diag.max_reconstruction_residual <= tol
        and diag.max_reducing_residual <= tol
        and nested_ok
        and roundtrip_worst <= 1e-9
    )
    return Report(
        subcommand="diagonalize",
        input_digest=cfg.digest,
        passed=passed,
        result={
            "pass": passed,
            "normal": True,
            "length": diag.length,
            "samples": grid.size,
            "residual_tolerance": tol,
            "max_commutator": diag.max_commutator,
            "max_reconstruction_residual": diag.max_reconstruction_residual,
            "max_reducing_residual": diag.max_reducing_residual,
            "spectra_nested": nested_ok,
            "strata": _strata_payload(space),
            "s_eigenvalues": sym_payload,
            "operator": cfg.operator,
        },
        table=_tracks_table(grid, diag.eigen_tracks, space.dims),
    )


_HANDLERS = {
    "tile-check": _run_tile_check,
    "lambda-map": _run_lambda_map,
    "separation": _run_separation,
    "admissible": _run_admissible,
    "certify": _run_certify,
    "triangularize": _run_triangularize,
    "diagonalize": _run_diagonalize,
}
