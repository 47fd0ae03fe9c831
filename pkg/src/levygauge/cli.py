"""Command-line driver.

Subcommands: verify-instanton, levy, holonomy, charge, lemma2, selftest.
Each loads a TOML config, runs the experiment, writes ``report.json`` and
``tables/*.csv`` under --out-dir, and prints one-line summaries.  Reports are
byte-identical for identical config + seed: sorted keys, no timestamps, and
every tolerance echoed.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or
configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import algebra, connection as conn_mod, curves as curves_mod, geometry, holonomy as hol_mod, levy as levy_mod, transport as tp
from .config import (
    ExperimentConfig,
    build_chart,
    build_connection,
    build_curves,
    build_rotation_curve,
    config_hash,
    load_config,
)
from .errors import ClassificationError, ConfigError, ContractError, DomainError, NumericError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _write_report(out_dir: Path, report: dict):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "report.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(out_dir: Path, name: str, header, rows):
    tdir = out_dir / "tables"
    tdir.mkdir(parents=True, exist_ok=True)
    with open(tdir / name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _base_report(command: str, cfg: ExperimentConfig) -> dict:
    return {
        "command": command,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
    }


def cmd_verify_instanton(cfg: ExperimentConfig, out_dir: Path) -> int:
    opts = cfg.command_opts["verify_instanton"]
    grid_pts = int(opts.get("grid_points", 20))
    half = float(opts.get("box_halfwidth", 2.0))
    ratio_tol = float(opts.get("duality_ratio_tol", 1e-10))
    ym_tol = float(opts.get("ym_residual_tol", 1e-6))
    chart = build_chart(cfg.chart)
    conn = build_connection(cfg.connection)

    axes = [np.linspace(-half, half, grid_pts) + c for c in cfg.connection.center]
    G = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in G], axis=-1)
    max_ratio = 0.0
    max_dstar = 0.0
    sign = 1.0 if cfg.connection.duality == "anti_self_dual" else -1.0
    for k in range(0, pts.shape[0], 8192):
        x = pts[k : k + 8192]
        F = conn_mod.curvature(conn, x)
        Fp, Fm = conn_mod.curvature_split(chart, x, F)
        vanishing = Fp if sign > 0 else Fm
        num = np.sqrt(np.maximum(conn_mod.gauge_norm2_form(chart, x, vanishing), 0.0))
        den = np.sqrt(np.maximum(conn_mod.gauge_norm2_form(chart, x, F), 1e-300))
        max_ratio = max(max_ratio, float((num / den).max()))
        dstar = conn_mod.codifferential(conn, chart, x)
        max_dstar = max(max_dstar, float(np.abs(dstar).max()))
    passed = max_ratio < ratio_tol and max_dstar < ym_tol
    report = _base_report("verify-instanton", cfg)
    report.update(
        {
            "connection": conn.label,
            "chart": chart.name,
            "grid_points_per_axis": grid_pts,
            "box_halfwidth": half,
            "max_duality_ratio": max_ratio,
            "max_ym_residual": max_dstar,
            "tolerances": {"duality_ratio": ratio_tol, "ym_residual": ym_tol},
            "passed": bool(passed),
        }
    )
    _write_report(out_dir, report)
    print(f"verify-instanton: max |F_van|/|F| = {max_ratio:.3e}, max |D_A*F| = {max_dstar:.3e} -> "
          + ("PASS" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_charge(cfg: ExperimentConfig, out_dir: Path) -> int:
    opts = cfg.command_opts["charge"]
    radius = float(opts.get("radius", 50.0))
    expected_k = opts.get("expected_charge")
    k_tol = float(opts.get("charge_tol", 0.02))
    action_rel_tol = float(opts.get("action_rel_tol", 0.01))
    chart = build_chart(cfg.chart)
    conn = build_connection(cfg.connection)
    res = cfg.resolution
    region = conn_mod.BallRegion(
        center=tuple(cfg.connection.center),
        radius=radius,
        n_radial=res.quad_radial,
        angular=tuple(res.quad_angular),
        radial_split=float(opts.get("radial_split", radius / 10.0)),
    )
    S, S_tail = conn_mod.ym_action(conn, chart, region)
    k, k_tail = conn_mod.topological_charge(conn, chart, region)
    checks = {}
    if expected_k is not None:
        checks["charge"] = abs(k - float(expected_k)) < k_tol
        checks["saturation"] = abs(S - 4.0 * np.pi**2 * abs(float(expected_k))) < action_rel_tol * 4.0 * np.pi**2 * max(abs(float(expected_k)), 1.0)
    checks["bound"] = S >= 4.0 * np.pi**2 * abs(k) - max(S_tail if np.isfinite(S_tail) else 0.0, 1e-6) - 1e-6
    passed = all(checks.values())
    report = _base_report("charge", cfg)
    report.update(
        {
            "connection": conn.label,
            "chart": chart.name,
            "region_radius": radius,
            "ym_action": S,
            "action_tail_bound": S_tail if np.isfinite(S_tail) else None,
            "topological_charge": k,
            "charge_tail_bound": k_tail if np.isfinite(k_tail) else None,
            "four_pi_squared": 4.0 * np.pi**2,
            "tolerances": {"charge": k_tol, "action_rel": action_rel_tol},
            "checks": checks,
            "passed": bool(passed),
        }
    )
    _write_report(out_dir, report)
    _write_csv(out_dir, "charge.csv", ["quantity", "value", "tail_bound"],
               [["ym_action", repr(S), repr(S_tail)], ["charge", repr(k), repr(k_tail)]])
    print(f"charge: S_YM = {S:.6f} (4pi^2 = {4*np.pi**2:.6f}), k = {k:.6f} -> "
          + ("PASS" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _levy_record(conn, chart, curve, W, n, ci, wi):
    tr = tp.transports(conn, chart, curve, n=n)
    kern = levy_mod.transport_kernels(conn, chart, curve, tr=tr)
    res = levy_mod.modified_levy_laplacian_transport(conn, chart, curve, W, tr=tr, kernels=kern)
    return {
        "curve": getattr(curve, "label", f"curve{ci}"),
        "curve_idx": ci,
        "w": W.label,
        "w_idx": wi,
        "norm_term_ym": float(np.linalg.norm(res.term_ym)),
        "norm_term_rot_plus": float(np.linalg.norm(res.term_rot_plus)),
        "norm_term_rot_minus": float(np.linalg.norm(res.term_rot_minus)),
        "norm_value": res.norm,
        "route_discrepancy": res.route_discrepancy,
        "split_consistency": res.split_consistency,
    }


def _levy_job(args):
    cfg_path, seed_override, ci, wi, n = args
    cfg = load_config(cfg_path, seed_override)
    chart = build_chart(cfg.chart)
    conn = build_connection(cfg.connection)
    curve = build_curves(cfg.curves)[ci]
    W = build_rotation_curve(cfg.rotation_curves[wi])
    return _levy_record(conn, chart, curve, W, n, ci, wi)


def cmd_levy(cfg: ExperimentConfig, out_dir: Path, jobs: int, cfg_path, seed_override) -> int:
    opts = cfg.command_opts["levy"]
    expect = opts.get("expect", "zero")
    if expect not in ("zero", "nonzero", "report"):
        raise ConfigError("levy.expect must be 'zero', 'nonzero' or 'report'")
    abs_tol = float(opts.get("abs_tol", 1e-5))
    disc_factor = float(opts.get("disc_factor", 10.0))
    noise_floor = float(opts.get("noise_floor", 1e-9))
    nonzero_tol = float(opts.get("nonzero_tol", 1e-3))
    n = cfg.resolution.ode_steps

    chart = build_chart(cfg.chart)
    conn = build_connection(cfg.connection)
    curves = build_curves(cfg.curves)
    Ws = [build_rotation_curve(rc) for rc in cfg.rotation_curves]
    if not Ws:
        raise ConfigError("levy needs at least one [[rotation_curves]] entry")

    if jobs > 1:
        tasks = [(str(cfg_path), seed_override, ci, wi, n) for ci in range(len(curves)) for wi in range(len(Ws))]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_levy_job, tasks))
        records.sort(key=lambda r: (r["curve_idx"], r["w_idx"]))
    else:
        records = []
        for ci, curve in enumerate(curves):
            tr = tp.transports(conn, chart, curve, n=n)
            kern = levy_mod.transport_kernels(conn, chart, curve, tr=tr)
            for wi, W in enumerate(Ws):
                res = levy_mod.modified_levy_laplacian_transport(conn, chart, curve, W, tr=tr, kernels=kern)
                records.append(
                    {
                        "curve": getattr(curve, "label", f"curve{ci}"),
                        "curve_idx": ci,
                        "w": W.label,
                        "w_idx": wi,
                        "norm_term_ym": float(np.linalg.norm(res.term_ym)),
                        "norm_term_rot_plus": float(np.linalg.norm(res.term_rot_plus)),
                        "norm_term_rot_minus": float(np.linalg.norm(res.term_rot_minus)),
                        "norm_value": res.norm,
                        "route_discrepancy": res.route_discrepancy,
                        "split_consistency": res.split_consistency,
                    }
                )

    for r in records:
        r["vanished"] = bool(
            r["norm_value"] <= max(disc_factor * r["route_discrepancy"], noise_floor)
            and r["norm_value"] < abs_tol
        )
    all_vanished = all(r["vanished"] for r in records)
    any_nonzero = any(r["norm_value"] > nonzero_tol for r in records)
    max_disc = max(r["route_discrepancy"] for r in records)
    if expect == "zero":
        passed = all_vanished
    elif expect == "nonzero":
        passed = any_nonzero
    else:
        passed = True

    report = _base_report("levy", cfg)
    report.update(
        {
            "connection": conn.label,
            "chart": chart.name,
            "n_curves": len(curves),
            "rotation_curves": [W.label for W in Ws],
            "ode_steps": n,
            "tolerances": {
                "abs_tol": abs_tol,
                "disc_factor": disc_factor,
                "noise_floor": noise_floor,
                "nonzero_tol": nonzero_tol,
            },
            "expect": expect,
            "records": records,
            "max_route_discrepancy": max_disc,
            "all_vanished": bool(all_vanished),
            "any_nonzero": bool(any_nonzero),
            "passed": bool(passed),
        }
    )
    _write_report(out_dir, report)
    _write_csv(
        out_dir,
        "levy.csv",
        ["curve", "w", "norm_term_ym", "norm_term_rot_plus", "norm_term_rot_minus", "norm_value", "route_discrepancy"],
        [
            [r["curve"], r["w"], repr(r["norm_term_ym"]), repr(r["norm_term_rot_plus"]),
             repr(r["norm_term_rot_minus"]), repr(r["norm_value"]), repr(r["route_discrepancy"])]
            for r in records
        ],
    )
    print(
        f"levy: {len(records)} jobs, max |value| = {max(r['norm_value'] for r in records):.3e}, "
        f"max route disc = {max_disc:.3e}, verdict "
        + ("PASS" if passed else "FAIL")
    )
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_holonomy(cfg: ExperimentConfig, out_dir: Path) -> int:
    opts = cfg.command_opts["holonomy"]
    expected = opts.get("expected_class")
    synthetic = opts.get("synthetic", "")
    count = int(opts.get("count", 50))
    n = cfg.resolution.ode_steps
    report = _base_report("holonomy", cfg)
    if synthetic:
        if synthetic != "so2_about_v1":
            raise ConfigError(f"unknown synthetic holonomy mode '{synthetic}'")
        Rs = hol_mod.synthetic_so2_rotations(cfg.seed, count)
        cls = hol_mod.classify_from_rotations(Rs)
        cls.diagnostics["chart"] = "synthetic"
    else:
        chart = build_chart(cfg.chart)
        cls = hol_mod.classify_holonomy(chart, n=n, seed=cfg.seed, count=count, scale=cfg.curves.scale)
    passed = expected is None or cls.class_name == expected
    report.update(
        {
            "class": cls.class_name,
            "algebra_dimension": cls.algebra_dimension,
            "singular_values": [float(s) for s in cls.singular_values],
            "sample_count": cls.sample_count,
            "fixed_axis": None if cls.fixed_axis is None else [float(v) for v in cls.fixed_axis],
            "algebra_basis": None if cls.algebra_basis is None else [[float(v) for v in row] for row in cls.algebra_basis],
            "expected_class": expected,
            "per_loop": cls.diagnostics.get("per_loop", []),
            "passed": bool(passed),
        }
    )
    _write_report(out_dir, report)
    rows = [
        [d["loop"], repr(d["cross_block"]), repr(d["orthogonality_defect"])]
        for d in cls.diagnostics.get("per_loop", [])
    ]
    if rows:
        _write_csv(out_dir, "holonomy_loops.csv", ["loop", "cross_block", "orthogonality_defect"], rows)
    print(f"holonomy: class = {cls.class_name} (dim {cls.algebra_dimension}) -> "
          + ("PASS" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_lemma2(cfg: ExperimentConfig, out_dir: Path) -> int:
    opts = cfg.command_opts["lemma2"]
    r_values = [float(r) for r in opts.get("r_values", (0.5, 0.25, 0.125, 0.0625))]
    r2_tol = float(opts.get("r_squared_min", 0.99))
    check_fit = bool(opts.get("check_fit", True))
    chart = build_chart(cfg.chart)
    conn = build_connection(cfg.connection)
    curves = build_curves(cfg.curves)
    Ws = [build_rotation_curve(rc) for rc in cfg.rotation_curves]
    if not Ws:
        raise ConfigError("lemma2 needs a [[rotation_curves]] entry")
    n = cfg.resolution.ode_steps
    entries = []
    rows = []
    passed = True
    for curve in curves:
        for W in Ws:
            rep = levy_mod.reparam_limit(conn, chart, curve, W, r_values, n=n)
            fit_ok = (not check_fit) or (rep.fitted_slope > 0 and rep.r_squared > r2_tol)
            passed = passed and fit_ok
            entries.append(
                {
                    "curve": getattr(curve, "label", "curve"),
                    "w": W.label,
                    "r_values": [float(r) for r in rep.r_values],
                    "residuals": [float(r) for r in rep.residuals],
                    "fitted_slope": rep.fitted_slope,
                    "r_squared": rep.r_squared,
                    "endpoint_norm": float(np.linalg.norm(rep.endpoint)),
                    "fit_ok": bool(fit_ok),
                }
            )
            for r, resid in zip(rep.r_values, rep.residuals):
                rows.append([getattr(curve, "label", "curve"), W.label, repr(float(r)), repr(float(resid))])
    report = _base_report("lemma2", cfg)
    report.update(
        {
            "connection": conn.label,
            "chart": chart.name,
            "tolerances": {"r_squared_min": r2_tol},
            "entries": entries,
            "passed": bool(passed),
        }
    )
    _write_report(out_dir, report)
    _write_csv(out_dir, "lemma2.csv", ["curve", "w", "r", "residual"], rows)
    print(f"lemma2: {len(entries)} fits, min R^2 = "
          f"{min(e['r_squared'] for e in entries):.6f} -> " + ("PASS" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _selftest_battery(seed: int = 7):
    """Structural invariant suite: (name, ok, measured) triples."""
    rng = np.random.default_rng(seed)
    out = []

    def check(name, value, tol):
        out.append((name, bool(value < tol), float(value), tol))

    flat = geometry.flat_chart()
    s4 = geometry.round_s4_chart()
    s13 = geometry.s1xs3_chart()
    phi = geometry.scalar_field("gaussian", amp=0.3, width=1.4)
    conf = geometry.conformally_flat_chart(phi)

    # Hodge involution and eigenbasis
    worst = 0.0
    for chart in (flat, s4, s13, conf):
        xs = rng.standard_normal((6, 4)) * 0.4
        B = rng.standard_normal((6, 4, 4))
        B = B - np.swapaxes(B, -1, -2)
        ss = geometry.hodge_star(chart, xs, geometry.hodge_star(chart, xs, B))
        worst = max(worst, float(np.abs(ss - B).max()))
    check("hodge_star involution", worst, 1e-12)
    plus, minus = geometry.selfdual_basis()
    e1 = float(np.abs(geometry.hodge_star(flat, np.zeros(4), plus, kind="bivector") - plus).max())
    e2 = float(np.abs(geometry.hodge_star(flat, np.zeros(4), minus, kind="bivector") + minus).max())
    check("star eigenbasis", max(e1, e2), 1e-12)

    # Christoffels: flat zero, symmetry, FD agreement
    xs = rng.standard_normal((5, 4)) * 0.4
    check("christoffel flat", float(np.abs(geometry.christoffel(flat, xs)).max()), 1e-14)
    worst = 0.0
    sym = 0.0
    for chart in (s4, conf):
        G = geometry.christoffel(chart, xs)
        sym = max(sym, float(np.abs(G - np.swapaxes(G, -1, -2)).max()))
        rel = np.abs(G - geometry.christoffel_fd(chart, xs)).max() / max(np.abs(G).max(), 1e-12)
        worst = max(worst, float(rel))
    check("christoffel symmetry", sym, 1e-12)
    check("christoffel FD agreement", worst, 1e-6)

    # so(4) projections
    X = rng.standard_normal((20, 4, 4))
    X = X - np.swapaxes(X, -1, -2)
    PL, PR = algebra.project_left(X), algebra.project_right(X)
    check("P_L + P_R identity", float(np.abs(PL + PR - X).max()), 1e-13)
    check("P idempotent", float(np.abs(algebra.project_left(PL) - PL).max()), 1e-13)
    check("P_L P_R zero", float(np.abs(algebra.project_left(PR)).max()), 1e-13)
    comm = 0.0
    for Ei in algebra.LEFT_BASIS:
        for Fj in algebra.RIGHT_BASIS:
            comm = max(comm, float(np.abs(Ei @ Fj - Fj @ Ei).max()))
    check("subalgebra commutation", comm, 1e-14)
    op, om = algebra.omega_coefficients(X)
    check("omega round trip", float(np.abs(algebra.from_coefficients(op, om) - X).max()), 1e-13)
    E = algebra.exp_so4(X[:4])
    check("exp_so4 inverse", float(np.abs(E @ np.swapaxes(E, -1, -2) - np.eye(4)).max()), 1e-12)

    # transports
    inst = conn_mod.quaternion_instanton()
    loop = curves_mod.random_fourier_loops(seed, 1, scale=0.5)[0]
    tr1 = tp.gauge_transport(inst, loop, n=1024)
    check("transport orthogonality", tr1.meta["orthogonality_defect"], 1e-9)
    i, j = 300, 700
    comp = tr1.U_between(j, tr1.grid.size - 1) @ tr1.U_between(i, j) @ tr1.U_between(0, i)
    check("transport composition", float(np.abs(comp - tr1.U[-1]).max()), 1e-9)
    tr_r = tp.gauge_transport(inst, curves_mod.reparameterize(loop, 0.5), n=1024)
    check("reparameterization invariance", float(np.abs(tr_r.U[-1] - tr1.U[-1]).max()), 1e-8)
    eA = np.abs(tp.gauge_transport(inst, loop, n=256).U[-1] - tp.gauge_transport(inst, loop, n=512).U[-1]).max()
    eB = np.abs(tp.gauge_transport(inst, loop, n=512).U[-1] - tr1.U[-1]).max()
    out.append(("integrator order (ratio >= 8)", bool(eA / max(eB, 1e-300) >= 8.0), float(eA / max(eB, 1e-300)), 8.0))

    # gauge covariance of U and F
    psi = conn_mod.gauge_field("gaussian", direction=(0.3, -0.5, 0.8), amp=0.7, width=1.3, center=(0.2, 0, 0, 0))
    gconn = conn_mod.gauge_transform(inst, psi)
    tr_g = tp.gauge_transport(gconn, loop, n=1024)
    p0 = psi.psi(loop.pos(np.array(0.0)))
    p1 = psi.psi(loop.pos(np.array(1.0)))
    check("gauge covariance of U", float(np.abs(tr_g.U[-1] - p1.T @ tr1.U[-1] @ p0).max()), 1e-8)
    xs = rng.standard_normal((4, 4)) * 0.5
    Fg = conn_mod.curvature(gconn, xs)
    F = conn_mod.curvature(inst, xs)
    px = psi.psi(xs)
    pred = np.einsum("pji,pmnjk,pkl->pmnil", px, F, px, optimize=True)
    check("gauge covariance of F", float(np.abs(Fg - pred).max()), 1e-8)

    # Levi-Civita isometry and bivector transport
    lc = tp.levi_civita_transport(s4, loop, n=1024)
    check("frame isometry", lc.meta["isometry_defect"], 1e-8)
    pl, mi = tp.transport_bivectors(lc)
    star_pl = geometry.hodge_star(s4, lc.positions, pl, kind="bivector")
    check("transported self-duality", float(np.abs(star_pl - pl).max()), 1e-8)

    # modified trace: split identity and conjugation oracle on synthetic kernels
    from .quadrature import make_grid

    grid = make_grid(400)
    ts = grid.nodes
    cs = rng.standard_normal((2, 3, 4, 4))
    M = sum(np.multiply.outer(np.cos(2 * np.pi * (k + 1) * ts), cs[0, k]) for k in range(3))
    QL = 0.5 * (M + np.swapaxes(M, 1, 2))
    M = sum(np.multiply.outer(np.sin(2 * np.pi * (k + 1) * ts), cs[1, k]) for k in range(3))
    QS = 0.5 * (M - np.swapaxes(M, 1, 2))
    Q = levy_mod.KernelTriple(grid, QL, QS)
    W = algebra.trig_rotation_curve(
        [((0.7, -0.3, 0.2), (0.1, 0.4, -0.2), 1.0, 1.0, 0.0), ((-0.2, 0.5, 0.1), (0.3, -0.1, 0.6), 2.0, 0.0, 1.0)]
    )
    mt = levy_mod.modified_levy_trace(W, Q)
    check("trace split identity", mt.split_consistency, 1e-12)
    oracle = levy_mod.levy_trace(levy_mod.conjugated_kernels(W, Q))
    check("trace conjugation oracle", float(np.abs(np.asarray(mt.value) - oracle).max()), 1e-8)

    # functional value
    f = geometry.scalar_field("norm2")
    arc = curves_mod.random_fourier_arcs(seed + 1, 1, scale=0.5)[0]
    val = levy_mod.levy_laplacian_functional(f, flat, arc, W)
    check("curve functional Laplacian", abs(val - 8.0), 1e-8)

    return out


def cmd_selftest(cfg: ExperimentConfig | None, out_dir: Path) -> int:
    seed = cfg.seed if cfg is not None else 7
    results = _selftest_battery(seed)
    for name, ok, value, tol in results:
        print(f"  [{'PASS' if ok else 'FAIL'}] {name}: {value:.3e} (tol {tol:g})")
    passed = all(ok for _, ok, _, _ in results)
    report = {
        "command": "selftest",
        "seed": seed,
        "checks": [
            {"name": name, "passed": ok, "value": value, "tolerance": tol}
            for name, ok, value, tol in results
        ],
        "passed": bool(passed),
    }
    if cfg is not None:
        report["config_hash"] = config_hash(cfg)
    _write_report(out_dir, report)
    print(f"selftest: {sum(ok for _, ok, _, _ in results)}/{len(results)} checks -> "
          + ("PASS" if passed else "FAIL"))
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="levygauge",
        description="Gauge-geometric experiments: duality of curvature vs the "
        "modified Levy Laplacian of parallel transport.",
    )
    parser.add_argument("--config", type=Path, help="TOML experiment configuration")
    parser.add_argument("--out-dir", type=Path, default=Path("out"), help="report directory")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for job sweeps")
    parser.add_argument("--seed-override", type=int, default=None, help="replace the config seed")
    parser.add_argument(
        "command",
        choices=["verify-instanton", "levy", "holonomy", "charge", "lemma2", "selftest"],
    )
    args = parser.parse_args(argv)

    try:
        if args.command == "selftest":
            cfg = load_config(args.config, args.seed_override) if args.config else None
            return cmd_selftest(cfg, args.out_dir)
        if args.config is None:
            print("error: --config is required for this command", file=sys.stderr)
            return EXIT_USAGE
        cfg = load_config(args.config, args.seed_override)
        if args.command == "verify-instanton":
            return cmd_verify_instanton(cfg, args.out_dir)
        if args.command == "charge":
            return cmd_charge(cfg, args.out_dir)
        if args.command == "levy":
            return cmd_levy(cfg, args.out_dir, args.jobs, args.config, args.seed_override)
        if args.command == "holonomy":
            return cmd_holonomy(cfg, args.out_dir)
        if args.command == "lemma2":
            return cmd_lemma2(cfg, args.out_dir)
        raise ConfigError(f"unhandled command {args.command}")
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ClassificationError, ContractError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
