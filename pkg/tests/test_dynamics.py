"""Evolution layer: coefficient integrals, the stepper, run control, kernels."""
import dataclasses
import os
import subprocess
import sys

import numpy as np
import pytest

from crestwave import (
    BlowupError,
    Grid,
    StepRejected,
    VelocityProfile,
    build_bump_map,
    build_corner_map,
    build_flat_map,
    build_multi_corner_map,
    vertical_ray,
)
from crestwave import kernels
from crestwave._accel import NUMBA_ENABLED, backend_name
from crestwave.dynamics import (
    MONITOR_NAMES,
    advance_markers,
    compute_A1,
    compute_b,
    compute_ztt_bar,
    default_markers,
    mollify_initial,
    run,
    step_rk4,
)
from oracles import a1_for_pole_velocity, b_for_pole_velocity


def _advance(state, dt, nsteps, ceiling=1e-6):
    for _ in range(nsteps):
        state, _ = step_rk4(state, dt, ceiling=ceiling)
    return state


class TestCoefficients:
    def test_a1_against_closed_form(self):
        g = Grid(L=80.0, n=4096)
        ztbar = 1.0 / (g.nodes - 1j)
        A1 = compute_A1(ztbar, g)
        assert np.max(np.abs(A1 - a1_for_pole_velocity(g.nodes))) <= 2e-5

    def test_a1_positivity(self):
        g = Grid(L=80.0, n=4096)
        A1 = compute_A1(1.0 / (g.nodes - 1j), g)
        assert np.min(A1) >= 1.0 - 1e-10

    def test_b_against_closed_form(self):
        # Z_t has its pole below the line, so (I - H) doubles the trace
        g = Grid(L=80.0, n=4096)
        one = np.ones(g.n, dtype=complex)
        b = compute_b(1.0 / (g.nodes - 1j), one, g)
        assert np.max(np.abs(b - b_for_pole_velocity(g.nodes))) <= 1e-12

    def test_b_vanishes_on_holomorphic_velocity(self):
        # pole above the line: Z_t / Z_,a' is already in the class and
        # (I - H) annihilates it, so the interface needs no reparametrization
        g = Grid(L=80.0, n=4096)
        one = np.ones(g.n, dtype=complex)
        b = compute_b(1.0 / (g.nodes + 1j), one, g)
        assert np.max(np.abs(b)) <= 1e-12

    def test_ztt_bar_formula(self):
        z_alpha = np.array([1.0 + 0.0j, 2.0 + 0.0j])
        A1 = np.array([1.0, 1.5])
        out = compute_ztt_bar(z_alpha, A1)
        assert out[0] == 0.0
        assert out[1] == 1j - 1j * 1.5 / 2.0

    def test_ztt_bar_rejects_collapsed_derivative(self):
        z_alpha = np.array([1.0 + 0j, 1e-12 + 0j])
        with pytest.raises(BlowupError, match="map derivative collapsed"):
            compute_ztt_bar(z_alpha, np.ones(2))


class TestMarkers:
    def test_constant_transport_is_exact(self):
        g = Grid(L=20.0, n=256)
        b = np.full(g.n, 0.3)
        h = advance_markers(np.array([-1.0, 0.0, 2.0]), b, g, 0.5)
        assert np.allclose(h, [-0.85, 0.15, 2.15], atol=1e-14)

    def test_zero_field_fixes_markers(self):
        g = Grid(L=20.0, n=256)
        h0 = np.array([-1.0, 0.5])
        h = advance_markers(h0, np.zeros(g.n), g, 0.7)
        assert np.array_equal(h, h0)

    def test_default_markers_smooth(self):
        mk = default_markers(build_flat_map(), Grid(L=20.0, n=256))
        assert len(mk) == 7
        assert np.all(np.diff(mk) > 0)

    def test_default_markers_corner(self):
        g = Grid(L=20.0, n=512)
        mk = default_markers(build_corner_map(nu=0.3), g)
        assert len(mk) == 9
        assert 0.0 in mk
        assert np.all(np.diff(mk) > 0)
        # probe ladder sits on grid nodes around the crest
        assert np.allclose(sorted(abs(mk) / g.spacing), [0, 8, 8, 16, 16, 32, 32, 64, 64])

    def test_default_markers_two_crests(self):
        m = build_multi_corner_map(((0.3, -8.0, 1.0), (0.3, 8.0, 1.0)))
        mk = default_markers(m, Grid(L=20.0, n=512))
        assert len(mk) == 18
        assert np.all(np.diff(mk) > 0)


class TestMollify:
    def test_rejects_nonpositive_eps(self):
        g = Grid(L=20.0, n=512)
        with pytest.raises(ValueError, match="must be positive"):
            mollify_initial(build_flat_map(), VelocityProfile(kind="zero"), 0.0, g)

    def test_rejects_under_resolved_eps(self):
        g = Grid(L=20.0, n=512)
        with pytest.raises(ValueError, match="under-resolved"):
            mollify_initial(build_flat_map(), VelocityProfile(kind="zero"), 0.3, g)

    def test_initial_state_shape(self):
        g = Grid(L=20.0, n=512)
        bm = build_bump_map(0.4, 1.0)
        s = mollify_initial(bm, VelocityProfile(kind="pole", mu=0.2, k=1), 1.0, g)
        assert s.t == 0.0
        assert s.offset == -1.0j
        assert np.all(s.angle_int == 0.0) and np.all(s.log_deriv_int == 0.0)
        assert s.holo_residual < 1e-6

    def test_positions_sample_the_lowered_map(self):
        # Z(a') = psi(a' - i eps): the projected state still sits on the
        # exact curve to within the recorded holomorphic defect scale
        g = Grid(L=20.0, n=512)
        bm = build_bump_map(0.4, 1.0)
        s = mollify_initial(bm, VelocityProfile(kind="zero"), 1.0, g)
        Z = s.positions()
        for j in (100, 256, 300, 450):
            ray = vertical_ray(bm, g.nodes[j], np.array([-1.0]))[0]
            assert abs(Z[j] - ray) <= 1e-7


class TestStepper:
    def test_flat_rest_is_a_fixed_point(self):
        g = Grid(L=20.0, n=512)
        traj = run(build_flat_map(), VelocityProfile(kind="zero"), eps=1.0,
                   grid=g, dt=0.035, tmax=1.75)
        assert traj.status == "completed"
        last = traj.states[-1]
        assert np.max(np.abs(last.dev)) <= 1e-14
        assert np.max(np.abs(last.ztbar)) <= 1e-14
        assert np.max(np.abs(last.markers - traj.states[0].markers)) <= 1e-14

    def test_self_convergence_is_fourth_order(self):
        # needs the far-field defect near machine floor, else the once-per-
        # step projection leaves a dt-linear remainder that buries dt^4
        g = Grid(L=80.0, n=2048)
        bm = build_bump_map(0.3, 1.0)
        vel = VelocityProfile(kind="pole", mu=0.3, k=2)
        s0 = mollify_initial(bm, vel, 1.0, g)
        base = 0.45 * g.spacing
        sA = _advance(s0, base, 8)
        sB = _advance(s0, base / 2, 16)
        sC = _advance(s0, base / 4, 32)
        e1 = np.max(np.abs(sA.dev - sB.dev)) + np.max(np.abs(sA.ztbar - sB.ztbar))
        e2 = np.max(np.abs(sB.dev - sC.dev)) + np.max(np.abs(sB.ztbar - sC.ztbar))
        assert 13.0 <= e1 / e2 <= 19.0

    def test_time_reversal(self):
        # (Z, Z_t) -> (Z, -Z_t) retraces the trajectory
        g = Grid(L=20.0, n=512)
        bm = build_bump_map(0.4, 1.0)
        s0 = mollify_initial(bm, VelocityProfile(kind="pole", mu=0.05, k=2), 1.0, g)
        fwd = _advance(s0, 0.008, 12)
        back = _advance(dataclasses.replace(fwd, ztbar=-fwd.ztbar), 0.008, 12)
        assert np.max(np.abs(back.dev - s0.dev)) <= 1e-9
        assert np.max(np.abs(back.ztbar + s0.ztbar)) <= 1e-10
        assert np.max(np.abs(back.markers - s0.markers)) <= 1e-9

    def test_step_rejected_below_ceiling(self):
        g = Grid(L=20.0, n=512)
        s0 = mollify_initial(build_bump_map(0.4, 1.0),
                             VelocityProfile(kind="pole", mu=0.2, k=1), 1.0, g)
        with pytest.raises(StepRejected, match="projection defect"):
            step_rk4(s0, 0.03, ceiling=1e-18)

    def test_run_enforces_dt_bound(self):
        g = Grid(L=20.0, n=512)
        with pytest.raises(ValueError, match="stability bound"):
            run(build_flat_map(), VelocityProfile(kind="zero"), 1.0, g,
                dt=g.spacing, tmax=1.0)

    def test_euler_residual_first_order_in_dt(self):
        g = Grid(L=20.0, n=512)
        bm = build_bump_map(0.4, 1.0)
        vel = VelocityProfile(kind="pole", mu=0.2, k=1)
        worst = []
        for dt in (0.03, 0.015):
            t = run(bm, vel, 1.0, g, dt=dt, tmax=0.24, output_every=2)
            assert t.status == "completed"
            worst.append(max(d.euler_residual for d in t.diags[1:]))
        assert worst[0] <= 1e-2
        assert 1.7 <= worst[0] / worst[1] <= 2.3


class TestRunControl:
    def test_completed_trajectory_is_consistent(self):
        g = Grid(L=20.0, n=512)
        t = run(build_bump_map(0.4, 1.0), VelocityProfile(kind="pole", mu=0.2, k=1),
                1.0, g, dt=0.03, tmax=0.3, output_every=2)
        assert t.status == "completed"
        assert len(t.times) == len(t.states) == len(t.diags)
        assert all(len(t.monitors[k]) == len(t.times) for k in MONITOR_NAMES)
        assert np.all(np.diff(t.times) > 0)
        assert t.times[-1] == pytest.approx(0.3)

    def test_rejection_cascade_keeps_initial_state(self):
        g = Grid(L=20.0, n=512)
        t = run(build_bump_map(0.4, 1.0), VelocityProfile(kind="pole", mu=0.2, k=1),
                1.0, g, dt=0.03, tmax=0.3, ceiling=1e-18)
        assert t.status == "rejection_cascade"
        assert "projection defect" in t.detail
        assert len(t.states) == 1

    def test_blowup_stops_the_run(self):
        g = Grid(L=20.0, n=512)
        t = run(build_bump_map(0.4, 1.0), VelocityProfile(kind="pole", mu=0.2, k=1),
                1.0, g, dt=0.03, tmax=0.3, blowup_factor=1e-9)
        assert t.status == "blowup"
        assert "monitor grew" in t.detail
        assert t.times[-1] < 0.3

    def test_marker_exit_stops_the_run(self):
        g = Grid(L=20.0, n=512)
        mk = np.array([0.0, 0.96 * g.L])
        t = run(build_bump_map(0.4, 1.0), VelocityProfile(kind="pole", mu=0.2, k=1),
                1.0, g, dt=0.03, tmax=0.3, markers=mk)
        assert t.status == "marker_exit"
        assert "damped edge" in t.detail

    def test_rest_monitors(self):
        g = Grid(L=20.0, n=512)
        t = run(build_flat_map(), VelocityProfile(kind="zero"), 1.0, g,
                dt=0.035, tmax=0.35)
        assert np.all(t.monitor_series("a1_sup") == 1.0)
        assert np.all(t.monitor_series("inv_za_sup") == 1.0)
        assert np.all(t.monitor_series("ztbar_a_l2") == 0.0)


class TestKernels:
    """Jit loop and numpy twin must agree; either backend serves the API."""

    RNG = np.random.default_rng(7)

    def test_backend_flag(self):
        assert backend_name() in ("numba", "numpy")
        assert NUMBA_ENABLED == (backend_name() == "numba")

    def test_a1_sum_twins(self):
        n = 513
        zr = self.RNG.standard_normal(n)
        zi = self.RNG.standard_normal(n)
        alpha = np.sort(self.RNG.uniform(-10, 10, n))
        diag = self.RNG.uniform(0, 1, n)
        a = kernels._a1_sum_numpy(zr, zi, alpha, 0.01, diag)
        b = kernels.a1_sum(zr, zi, alpha, 0.01, diag)
        assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))

    def test_chord_arc_twins(self):
        n = 400
        x = np.linspace(0, 10, n)
        y = np.sin(x) * 0.3
        s = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))])
        a = kernels._chord_arc_numpy(x, y, s)
        b = kernels.chord_arc_scan(x, y, s)
        assert a[0] == pytest.approx(b[0], abs=1e-14)
        assert a[1] == pytest.approx(b[1], abs=1e-14)
        assert a[2:] == b[2:]

    def test_self_intersect_detects_crossing(self):
        # a figure-X: segment 0 and segment 2 cross properly
        x = np.array([0.0, 1.0, 1.0, 0.0])
        y = np.array([0.0, 1.0, 0.0, 1.0])
        assert kernels.self_intersect(x, y) == (0, 2)
        assert kernels._self_intersect_numpy(x, y) == (0, 2)

    def test_self_intersect_clean_curve(self):
        x = np.linspace(0, 10, 200)
        y = np.sin(x)
        assert kernels.self_intersect(x, y) == (-1, -1)
        assert kernels._self_intersect_numpy(x, y) == (-1, -1)

    def test_pair_bound_twins(self):
        n = 200
        alpha = np.linspace(-1, 1, n)
        x = alpha + 0.05 * np.sin(3 * alpha)
        y = 0.3 * np.abs(alpha) ** 1.5
        for frac in (0.0, 0.5):
            a = kernels._pair_bound_numpy(x, y, alpha, 10, n - 10, 0.0, frac)
            b = kernels.pair_bound(x, y, alpha, 10, n - 10, x0=0.0, frac=frac)
            assert a[0] == pytest.approx(b[0], rel=1e-13)
            assert a[1] == pytest.approx(b[1], rel=1e-13)

    def test_numpy_fallback_subprocess(self):
        # the env flag is read at import, so the fallback needs its own
        # interpreter; values must match the in-process backend
        n = 257
        zr = self.RNG.standard_normal(n)
        zi = self.RNG.standard_normal(n)
        alpha = np.sort(self.RNG.uniform(-10, 10, n))
        diag = self.RNG.uniform(0, 1, n)
        here = kernels.a1_sum(zr, zi, alpha, 0.01, diag)
        code = (
            "import sys, numpy as np\n"
            "from crestwave._accel import backend_name\n"
            "data = np.load(sys.argv[1])\n"
            "from crestwave import kernels\n"
            "out = kernels.a1_sum(data['zr'], data['zi'], data['alpha'], 0.01, data['diag'])\n"
            "np.save(sys.argv[2], out)\n"
            "print(backend_name())\n"
        )
        import tempfile
        with tempfile.TemporaryDirectory() as td:
            inp = os.path.join(td, "in.npz")
            outp = os.path.join(td, "out.npy")
            np.savez(inp, zr=zr, zi=zi, alpha=alpha, diag=diag)
            env = dict(os.environ, CRESTWAVE_NO_NUMBA="1")
            proc = subprocess.run([sys.executable, "-c", code, inp, outp],
                                  capture_output=True, text=True, env=env)
            assert proc.returncode == 0, proc.stderr
            assert proc.stdout.strip() == "numpy"
            there = np.load(outp)
        assert np.max(np.abs(here - there)) <= 1e-12 * max(1.0, np.max(np.abs(here)))
