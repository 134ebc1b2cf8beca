"""Scenario-driven command line driver.

Four commands around one directory layout:

    init     validate the scenario and geometry, write t = 0 snapshots
             and a validation report
    run      evolve every mollification level, write snapshot cadences
             and per-level summary tables
    analyze  read trajectory directories back, evaluate the invariant
             suite, write a verdict file and plot-ready tables
    sweep    run, then analyze

Exit codes: 0 success, 2 malformed scenario or missing snapshots,
3 rejected geometry, 4 a run that ended before tmax (monitor blowup,
rejection cascade, or a marker leaving the window; the last good
snapshot is kept).  Everything written is deterministic: same scenario
and build, same bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .dynamics import (StepDiagnostics, Trajectory, compute_b,
                       mollify_initial, run as evolve)
from .diagnostics import (ENERGY_TERMS, acceleration_consistency, aitken,
                          angle_rigidity, blowup_certificate,
                          crest_angle_drift, cusp_evolution_check,
                          energy_boundary, energy_interior, gauge_identity,
                          pressure_laplacian_check, singular_set_track,
                          tip_acceleration)
from .field import workspace
from .geometry import (GeometryRejection, InadmissibleGeometry,
                       chord_arc_constant, cusp_log_residual,
                       singular_exponent_fit, validate_jordan)
from .scenario import (ScenarioError, _parse_eps_list, build_map,
                       build_velocity, canonical_text, parse_scenario,
                       read_snapshot, scenario_hash, snapshot_from_state,
                       snapshot_to_state, write_snapshot)

EXIT_OK = 0
EXIT_SCENARIO = 2
EXIT_GEOMETRY = 3
EXIT_ABORTED = 4

# verdict tolerances; the per-identity rationale lives with the
# diagnostics themselves
TOL_UNIT_MODULUS = 1e-12
TOL_ANGLE_MATCH = 1e-3
TOL_ANGLE_CONSTANT = 1e-3
TOL_GAUGE = 1e-3
TOL_LAPLACIAN = 1e-5
TOL_GRADIENT = 1e-3
TOL_TIP_LIMIT = 0.05
TOL_TANGENT_PERSIST = 0.05
NODE_RATIO_FLOOR = 0.1
CUSP_WINDOW_T = 0.1
SUP_UNIFORM_FACTOR = 2.0
BLOWUP_GROWTH = 2.0


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _eps_dirname(eps: float) -> str:
    return f"eps_{eps:g}"


def _write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _prepare(scen):
    """Map, velocity, grid, hash; geometry errors propagate to main."""
    grid = scen.grid()
    cmap = build_map(scen)
    validate_jordan(cmap, grid)
    vel = build_velocity(scen)
    return cmap, vel, grid, scenario_hash(scen)


# ---------------------------------------------------------------------------
# init


def cmd_init(scen, outdir: str) -> int:
    cmap, vel, grid, shash = _prepare(scen)
    os.makedirs(outdir, exist_ok=True)
    _write_text(os.path.join(outdir, "scenario.txt"), canonical_text(scen))

    lines = [f"scenario = {shash}", f"kind = {scen.initial_kind}"]
    interior = energy_interior(cmap, vel, grid)
    lines.append(f"interior_energy = {_fmt(interior['total'])}")
    lines.append(f"interior_c0 = {_fmt(interior['c0'])}")
    dmin, dmax = chord_arc_constant(cmap, grid)
    lines.append(f"chord_arc_delta = {_fmt(dmin)}")
    lines.append(f"chord_arc_upper = {_fmt(dmax)}")
    if scen.initial_kind == "corner":
        fit = singular_exponent_fit(cmap, grid)
        lines.append(f"corner_exponent = {_fmt(fit['exponent'])}")
        lines.append(f"corner_exponent_target = {_fmt(1.0 - scen.corner_nu)}")
    elif scen.initial_kind == "cusp":
        fit = cusp_log_residual(cmap, grid)
        lines.append(f"cusp_log_residual = {_fmt(fit['residual'])}")
        lines.append(f"cusp_power_residual = {_fmt(fit['power_residual'])}")

    for eps in scen.epsilons:
        st = mollify_initial(cmap, vel, eps, grid)
        edir = os.path.join(outdir, _eps_dirname(eps))
        os.makedirs(edir, exist_ok=True)
        _write_text(os.path.join(edir, "scenario.txt"), canonical_text(scen))
        write_snapshot(os.path.join(edir, "snap_0000.txt"),
                       snapshot_from_state(st, shash))
        lines.append(f"init_residual eps={eps:g} = {st.holo_residual:.6e}")

    _write_text(os.path.join(outdir, "init_report.txt"),
                "\n".join(lines) + "\n")
    print(f"initialized {len(scen.epsilons)} level(s) under {outdir}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# run


def _summary_csv(traj) -> str:
    n_mark = len(traj.states[0].marker_alpha0)
    cols = ["t", *ENERGY_TERMS, "a1_sup"]
    for k in range(n_mark):
        cols += [f"angle_{k}", f"ratio_{k}", f"accel_{k}"]
    rows = [",".join(cols)]

    ws = workspace(traj.grid)
    a = traj.grid.nodes
    first = traj.states[0]
    za0 = np.abs(1.0 / (1.0 + ws.derivative_raw(first.dev)))
    r0 = np.interp(first.marker_alpha0, a, za0)

    for st, dg in zip(traj.states, traj.diags):
        e = energy_boundary(st)
        vals = [st.t, *(e[k] for k in ENERGY_TERMS), float(np.max(dg.A1))]
        za = np.abs(1.0 / (1.0 + ws.derivative_raw(st.dev)))
        r = np.interp(st.markers, a, za) / r0
        acc = np.interp(st.markers, a, np.abs(dg.ztt_bar - 1j))
        for k in range(n_mark):
            vals += [st.angle_int[k], r[k], acc[k]]
        rows.append(",".join(_fmt(v) for v in vals))
    return "\n".join(rows) + "\n"


def _run_log(traj, scen) -> str:
    halvings = [dg.halvings for dg in traj.diags]
    worst = max(halvings) if halvings else 0
    lines = [
        f"status = {traj.status}",
        f"detail = {traj.detail}",
        f"outputs = {len(traj.states)}",
        f"t_final = {_fmt(traj.times[-1])}",
        f"dt = {_fmt(scen.time_dt)}",
        f"halvings_max = {worst}",
        f"dt_min = {_fmt(scen.time_dt / 2 ** worst)}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(scen, outdir: str) -> int:
    cmap, vel, grid, shash = _prepare(scen)
    os.makedirs(outdir, exist_ok=True)
    _write_text(os.path.join(outdir, "scenario.txt"), canonical_text(scen))

    aborted = False
    for eps in scen.epsilons:
        traj = evolve(cmap, vel, eps, grid, dt=scen.time_dt,
                      tmax=scen.time_tmax,
                      output_every=scen.time_output_every,
                      ceiling=scen.monitors_ceiling)
        edir = os.path.join(outdir, _eps_dirname(eps))
        os.makedirs(edir, exist_ok=True)
        _write_text(os.path.join(edir, "scenario.txt"), canonical_text(scen))
        for idx, st in enumerate(traj.states):
            write_snapshot(os.path.join(edir, f"snap_{idx:04d}.txt"),
                           snapshot_from_state(st, shash))
        _write_text(os.path.join(edir, "summary.csv"), _summary_csv(traj))
        _write_text(os.path.join(edir, "run.log"), _run_log(traj, scen))
        print(f"eps {eps:g}: {traj.status}, {len(traj.states)} outputs, "
              f"t_final {traj.times[-1]:.6g}")
        if traj.status != "completed":
            aborted = True
            print(f"  {traj.detail}", file=sys.stderr)
    return EXIT_ABORTED if aborted else EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _discover_eps_dirs(paths):
    """Trajectory directories, finest last, or None if any path is empty."""
    found = []
    for p in paths:
        if os.path.isfile(os.path.join(p, "snap_0000.txt")):
            found.append(p)
            continue
        subs = [os.path.join(p, d) for d in sorted(os.listdir(p))
                if d.startswith("eps_")
                and os.path.isfile(os.path.join(p, d, "snap_0000.txt"))]
        if not subs:
            return None, p
        found.extend(subs)

    def eps_of(d):
        return read_snapshot(os.path.join(d, "snap_0000.txt")).eps

    found.sort(key=eps_of, reverse=True)
    return found, None


def _load_trajectory(edir):
    names = sorted(f for f in os.listdir(edir)
                   if f.startswith("snap_") and f.endswith(".txt"))
    snaps = [read_snapshot(os.path.join(edir, f)) for f in names]
    states = [snapshot_to_state(s) for s in snaps]
    grid = states[0].grid
    ws = workspace(grid)
    diags = []
    for st in states:
        za = 1.0 + ws.derivative_raw(st.dev)
        b = compute_b(st.ztbar, za, grid)
        diags.append(StepDiagnostics(A1=None, b=b, ztt_bar=None,
                                     dt_used=np.nan, halvings=0,
                                     holo_residual=np.nan,
                                     dev_residual=np.nan))
    return Trajectory(grid=grid, eps=states[0].eps,
                      times=[st.t for st in states],
                      states=states, diags=diags)


def _load_sidecar_scenario(edir):
    for cand in (os.path.join(edir, "scenario.txt"),
                 os.path.join(os.path.dirname(edir.rstrip(os.sep)) or ".",
                              "scenario.txt")):
        if os.path.isfile(cand):
            return parse_scenario(cand)
    return None


class _Verdicts:
    def __init__(self):
        self.lines = []

    def record(self, name, ok, note):
        word = "skipped" if ok is None else ("pass" if ok else "fail")
        self.lines.append(f"{name} = {word} ({note})")

    def text(self):
        return "\n".join(self.lines) + "\n"


def cmd_analyze(paths, outdir=None) -> int:
    eps_dirs, bad = _discover_eps_dirs(paths)
    if eps_dirs is None:
        print(f"no snapshots under {bad}", file=sys.stderr)
        return EXIT_SCENARIO
    outdir = outdir or paths[0]
    os.makedirs(os.path.join(outdir, "plots"), exist_ok=True)

    trajs = [_load_trajectory(d) for d in eps_dirs]
    scen = _load_sidecar_scenario(eps_dirs[0])
    kind = scen.initial_kind if scen else None
    singular = kind in ("corner", "cusp")
    alpha0 = None
    cmap = vel = None
    if scen is not None:
        cmap, vel, _, _ = _prepare(scen)
        pts = cmap.singular_points()
        alpha0 = pts[0].alpha0 if pts else None

    v = _Verdicts()
    rigs = [angle_rigidity(t) for t in trajs]
    tracks = [singular_set_track(t) for t in trajs]

    worst = max(r["unit_defect"] for r in rigs)
    v.record("unit_modulus_prediction", worst <= TOL_UNIT_MODULUS,
             f"max deviation {worst:.3e} vs {TOL_UNIT_MODULUS:g}")
    worst = max(r["factor_mismatch"] for r in rigs)
    v.record("angle_factor_match", worst <= TOL_ANGLE_MATCH,
             f"max mismatch {worst:.3e} vs {TOL_ANGLE_MATCH:g}")
    if scen is not None and scen.velocity_kind == "zero":
        worst = max(float(np.max(np.abs(r["measured_drift"]))) for r in rigs)
        v.record("angle_constant", worst <= TOL_ANGLE_CONSTANT,
                 f"max drift {worst:.3e} vs {TOL_ANGLE_CONSTANT:g}")
    else:
        v.record("angle_constant", None, "needs zero velocity")

    if kind == "corner" and alpha0 is not None:
        # one-sided fits at each run's own smoothing scale: the interior
        # angle read above the core must persist to the final time
        ok, note = True, []
        for t in trajs:
            cad = crest_angle_drift(t, alpha0)
            rel = cad["jump_change"] / max(abs(cad["initial_jump"]), 1e-12)
            ok &= rel <= TOL_TANGENT_PERSIST
            note.append(f"eps {t.eps:g}: {rel:.4f}")
        v.record("tangent_persistence", ok,
                 "relative jump change " + "; ".join(note)
                 + f" vs {TOL_TANGENT_PERSIST:g}")
    else:
        v.record("tangent_persistence", None, "corner scenarios only")

    ok, note = True, []
    for t, tr in zip(trajs, tracks):
        lo, hi = float(np.min(tr["measured"])), float(np.max(tr["measured"]))
        band = tr["band"]
        ok &= (hi <= band) and (lo >= 1.0 / band)
        note.append(f"eps {t.eps:g}: [{lo:.4f}, {hi:.4f}] in "
                    f"[{1.0 / band:.4f}, {band:.4f}]")
    v.record("ratio_band", ok, "; ".join(note))

    if kind in ("flat", "bump"):
        worst = min(tr["node_min_ratio"] for tr in tracks)
        v.record("no_new_singularity", worst >= NODE_RATIO_FLOOR,
                 f"min node ratio {worst:.4f} vs {NODE_RATIO_FLOOR:g}")
    else:
        v.record("no_new_singularity", None, "smooth scenarios only")

    if scen is not None:
        excl = 16.0 * trajs[0].grid.spacing if singular else 0.0
        worst = max(gauge_identity(cmap, vel, t.grid, t.eps,
                                   exclude_half=excl)["worst"]
                    for t in trajs)
        v.record("gauge_identity", worst <= TOL_GAUGE,
                 f"max residual {worst:.3e} vs {TOL_GAUGE:g}")
        g = trajs[-1].grid
        lap = pressure_laplacian_check(cmap, vel, g, trajs[-1].eps,
                                       depth=8.0 * g.spacing)["worst"]
        v.record("pressure_laplacian", lap <= TOL_LAPLACIAN,
                 f"residual {lap:.3e} vs {TOL_LAPLACIAN:g} at depth 8h")
        worst = max(acceleration_consistency(cmap, vel, t.grid, t.eps,
                                             exclude_half=excl)["worst"]
                    for t in trajs)
        v.record("boundary_gradient", worst <= TOL_GRADIENT,
                 f"max residual {worst:.3e} vs {TOL_GRADIENT:g}")
    else:
        for name in ("gauge_identity", "pressure_laplacian",
                     "boundary_gradient"):
            v.record(name, None, "no scenario.txt sidecar")

    # cross-level checks
    multi = len(trajs) >= 2
    if scen is not None and singular and alpha0 is not None:
        tips = [tip_acceleration(cmap, vel, t.grid, t.eps,
                                 alpha0=alpha0)["at_tip"] for t in trajs]
        rows = ["eps,at_tip"] + [f"{t.eps:g},{_fmt(val)}"
                                 for t, val in zip(trajs, tips)]
        _write_text(os.path.join(outdir, "plots", "tip_accel_vs_eps.csv"),
                    "\n".join(rows) + "\n")
        # Aitken needs a (nearly) geometric ladder; off one, its
        # denominator loses all its digits and the number is noise
        eps_seq = [t.eps for t in trajs]
        ratios = [b / a for a, b in zip(eps_seq, eps_seq[1:])]
        geometric = (len(ratios) >= 2
                     and max(ratios) / min(ratios) <= 1.02)
        if geometric:
            ext = abs(aitken(tips))
            v.record("tip_acceleration_limit", ext <= TOL_TIP_LIMIT,
                     f"extrapolated {ext:.4f} vs {TOL_TIP_LIMIT:g}")
        else:
            v.record("tip_acceleration_limit", None,
                     "needs a geometric ladder of at least 3 levels")
    else:
        v.record("tip_acceleration_limit", None, "needs a singular scenario")

    if (scen is not None and kind == "corner"
            and scen.velocity_kind == "zero" and multi and alpha0 is not None):
        # one instrument for the whole ladder: the window of the coarsest
        # run, where every member resolves the wedge.  Each run measured
        # at its own scale sits at a fixed offset from its own smoothing
        # and the ordering inverts.
        eps_max = trajs[0].eps
        win = (2.0 * eps_max, 4.0 * eps_max)
        jumps = [crest_angle_drift(t, alpha0, window=win)["jump_change"]
                 for t in trajs]
        mono = all(b <= a for a, b in zip(jumps, jumps[1:]))
        v.record("crest_angle_monotone", mono,
                 "jump changes " + ", ".join(f"{j:.3e}" for j in jumps)
                 + f" at window [{win[0]:g}, {win[1]:g}]")
    else:
        v.record("crest_angle_monotone", None,
                 "needs a zero-velocity corner ladder")

    if multi:
        growth = 0.0
        for t0, t1 in zip(trajs, trajs[1:]):
            e0 = energy_boundary(t0.states[0])
            e1 = energy_boundary(t1.states[0])
            for k in ENERGY_TERMS:
                if e0[k] > 1e-14:
                    growth = max(growth, e1[k] / e0[k])
        v.record("energy_ladder", growth <= 2.0,
                 f"max term growth per level {growth:.3f} vs 2.0")
    else:
        v.record("energy_ladder", None, "needs at least 2 levels")

    # sup of (1/Psi_z) F_z over the lower half plane, per level.  The
    # product is holomorphic and decays, so the interior sup is exactly
    # the sup of its boundary trace d_a' Zbar_t / Z_,a'^2.
    sups = []
    for t in trajs:
        ws = workspace(t.grid)
        level = 0.0
        for st in t.states:
            inv_za = 1.0 / (1.0 + ws.derivative_raw(st.dev))
            prod = ws.derivative_raw(st.ztbar) * inv_za ** 2
            level = max(level, float(np.max(np.abs(prod))))
        sups.append(level)
    note = ", ".join(f"{s:.4g}" for s in sups)
    if multi:
        lo, hi = min(sups), max(sups)
        v.record("linf_monitor", hi <= SUP_UNIFORM_FACTOR * max(lo, 1e-12)
                 or hi <= 1e-12,
                 f"per-level sups {note}, uniform to factor "
                 f"{SUP_UNIFORM_FACTOR:g}")
    else:
        v.record("linf_monitor", None,
                 f"needs at least 2 levels (recorded sup {note})")

    if kind == "corner" and cmap is not None:
        cert = blowup_certificate(cmap, alpha0=alpha0)
        v.record("blowup_certificate", cert["min_ratio"] >= BLOWUP_GROWTH,
                 f"min slice growth per halving {cert['min_ratio']:.3f} vs "
                 f"{BLOWUP_GROWTH:g} (total x{cert['total_growth']:.1f} over "
                 f"{len(cert['ratios'])} halvings)")
    else:
        v.record("blowup_certificate", None, "corner maps only")

    if scen is not None and kind == "cusp" and alpha0 is not None:
        checks = [cusp_evolution_check(t, alpha0) for t in trajs]
        ok, note = True, []
        for t, c in zip(trajs, checks):
            tail = min(CUSP_WINDOW_T, t.times[-1])
            ok &= c["half_time"] >= tail
            note.append(f"eps {t.eps:g}: half bound to t = {c['half_time']:g}")
        v.record("cusp_half_bound", ok, "; ".join(note))
        Ks = [c["K"] for c in checks]
        if multi and min(Ks) > 0:
            mid = float(np.mean(Ks))
            spread = max(abs(K - mid) for K in Ks) / mid
            v.record("cusp_rate_stable", spread <= 0.3,
                     f"K spread {spread:.3f} vs 0.3 around {mid:.3f}")
        else:
            v.record("cusp_rate_stable", None, "needs at least 2 levels")
    else:
        for name in ("cusp_half_bound", "cusp_rate_stable"):
            v.record(name, None, "cusp scenarios only")

    _write_plot_tables(trajs, outdir)
    _write_text(os.path.join(outdir, "verdicts.txt"), v.text())
    print(v.text(), end="")
    return EXIT_OK


def _write_plot_tables(trajs, outdir):
    angle = ["eps,t,marker,angle"]
    ratio = ["eps,t,marker,ratio"]
    energy = ["eps,t," + ",".join(ENERGY_TERMS) + ",total"]
    for traj in trajs:
        ws = workspace(traj.grid)
        a = traj.grid.nodes
        first = traj.states[0]
        za0 = np.abs(1.0 / (1.0 + ws.derivative_raw(first.dev)))
        r0 = np.interp(first.marker_alpha0, a, za0)
        for st in traj.states:
            za = np.abs(1.0 / (1.0 + ws.derivative_raw(st.dev)))
            r = np.interp(st.markers, a, za) / r0
            for k in range(len(st.markers)):
                angle.append(f"{traj.eps:g},{_fmt(st.t)},{k},"
                             f"{_fmt(st.angle_int[k])}")
                ratio.append(f"{traj.eps:g},{_fmt(st.t)},{k},{_fmt(r[k])}")
            e = energy_boundary(st)
            energy.append(f"{traj.eps:g},{_fmt(st.t)},"
                          + ",".join(_fmt(e[k]) for k in ENERGY_TERMS)
                          + f",{_fmt(e['total'])}")
    pdir = os.path.join(outdir, "plots")
    _write_text(os.path.join(pdir, "angle_vs_t.csv"), "\n".join(angle) + "\n")
    _write_text(os.path.join(pdir, "ratio_vs_t.csv"), "\n".join(ratio) + "\n")
    _write_text(os.path.join(pdir, "energy_vs_t.csv"), "\n".join(energy) + "\n")


# ---------------------------------------------------------------------------
# entry point


def _apply_overrides(scen, args):
    changes = {}
    if getattr(args, "out", None):
        changes["output_dir"] = args.out
    if getattr(args, "epsilons", None):
        changes["epsilons"] = _parse_eps_list(args.epsilons)
    if getattr(args, "allow_inadmissible", False):
        changes["allow_inadmissible"] = True
    if changes:
        scen = replace(scen, **changes)
        from .scenario import validate_scenario
        validate_scenario(scen)
    return scen


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crestwave",
        description="Water-wave interfaces with angled crests and cusps: "
                    "build, evolve, verify.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("init", "validate and write t = 0 snapshots"),
                      ("run", "evolve the mollification ladder"),
                      ("sweep", "run, then analyze")):
        sp = sub.add_parser(name, help=doc)
        sp.add_argument("--scenario", required=True, help="scenario file")
        sp.add_argument("--out", help="output directory override")
        sp.add_argument("--epsilons", help="comma list override, decreasing")
        sp.add_argument("--allow-inadmissible", action="store_true",
                        help="build energy-inadmissible corners anyway")
    ap = sub.add_parser("analyze", help="verdicts and plot tables "
                                        "from trajectory directories")
    ap.add_argument("paths", nargs="+", help="run root or eps_* directories")
    ap.add_argument("--out", help="where to write verdicts and plots")

    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.paths, args.out)
        scen = _apply_overrides(parse_scenario(args.scenario), args)
        outdir = scen.output_dir
        if args.command == "init":
            return cmd_init(scen, outdir)
        if args.command == "run":
            return cmd_run(scen, outdir)
        rc = cmd_run(scen, outdir)
        if rc != EXIT_OK:
            return rc
        return cmd_analyze([outdir], outdir)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (InadmissibleGeometry, GeometryRejection) as exc:
        print(f"geometry rejected: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
