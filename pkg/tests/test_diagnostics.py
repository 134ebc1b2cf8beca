"""Verification instruments: energies, transport checks, pressure identities."""
import numpy as np
import pytest

from crestwave import (
    ENERGY_TERMS,
    Grid,
    PressureField,
    VelocityProfile,
    acceleration_consistency,
    aitken,
    angle_rigidity,
    blowup_certificate,
    build_bump_map,
    build_corner_map,
    build_cusp_map,
    build_flat_map,
    crest_angle_drift,
    cusp_evolution_check,
    energy_boundary,
    energy_interior,
    gauge_identity,
    gradient_sup_ladder,
    modal_gradient_check,
    pressure_laplacian_check,
    singular_set_track,
    tangent_vanishing,
    tip_acceleration,
)
from crestwave.dynamics import mollify_initial, run
from oracles import lorentz

POLE_VEL = VelocityProfile(kind="pole", mu=0.05, k=2)


@pytest.fixture(scope="module")
def corner():
    return build_corner_map(nu=0.3)


@pytest.fixture(scope="module")
def corner_traj(corner):
    g = Grid(L=20.0, n=2048)
    traj = run(corner, VelocityProfile(kind="zero"), 0.2, g,
               dt=0.4 * g.spacing, tmax=0.1, output_every=4)
    assert traj.status == "completed"
    return traj


@pytest.fixture(scope="module")
def cusp_traj():
    g = Grid(L=10.0, n=1024)
    traj = run(build_cusp_map(), VelocityProfile(kind="zero"), 0.16, g,
               dt=0.4 * g.spacing, tmax=0.05, output_every=4)
    assert traj.status == "completed"
    return traj


class TestEnergies:
    def test_flat_rest_boundary_energy(self):
        g = Grid(L=20.0, n=512)
        st = mollify_initial(build_flat_map(), VelocityProfile(kind="zero"), 1.0, g)
        e = energy_boundary(st)
        assert e["v_sup"] == 1.0
        assert e["total"] == 1.0
        for k in ENERGY_TERMS:
            if k != "v_sup":
                assert e[k] == 0.0

    def test_flat_rest_interior_energy(self):
        g = Grid(L=20.0, n=512)
        e = energy_interior(build_flat_map(), VelocityProfile(kind="zero"), g)
        assert e["total"] == 1.0
        assert e["c0"] == 0.0

    def test_moving_state_terms_finite_positive(self, corner):
        g = Grid(L=20.0, n=2048)
        st = mollify_initial(corner, POLE_VEL, 0.2, g)
        e = energy_boundary(st)
        assert all(np.isfinite(e[k]) and e[k] >= 0.0 for k in ENERGY_TERMS)
        assert e["total"] == pytest.approx(sum(e[k] for k in ENERGY_TERMS))
        assert e["dv_l2"] > 0.0

    def test_interior_sup_dominates_single_depth(self, corner):
        g = Grid(L=20.0, n=1024)
        full = energy_interior(corner, POLE_VEL, g)
        one = energy_interior(corner, POLE_VEL, g, depths=[1.0])
        for k in ENERGY_TERMS:
            assert full[k] >= one[k] - 1e-15


class TestCrestScreens:
    def test_tangent_vanishing_at_the_crest(self, corner):
        # the map derivative blows up under the crest while the velocity
        # gradient stays bounded, so the product dies there and survives
        # at a regular point
        tv = tangent_vanishing(corner, POLE_VEL, 0.0, 3.0)
        assert tv["monotone_tail"]
        assert tv["crest_limit"] <= 1e-4
        assert tv["crest_limit"] < 0.1 * tv["away_limit"]

    def test_gradient_sup_uniform_in_mollification(self, corner):
        g = Grid(L=20.0, n=4096)
        lo = gradient_sup_ladder(corner, POLE_VEL, g, 0.2)
        hi = gradient_sup_ladder(corner, POLE_VEL, g, 0.1)
        assert max(lo, hi) <= 2.0 * min(lo, hi)

    def test_crest_slice_mass_diverges(self, corner):
        cert = blowup_certificate(corner)
        assert np.all(cert["ratios"] > 1.0)
        assert cert["total_growth"] >= 3.0
        assert np.all(np.diff(cert["integrals"]) > 0)

    def test_crest_slice_mass_doubles_per_halving(self, corner):
        cert = blowup_certificate(corner)
        assert cert["min_ratio"] >= 2.0

    def test_smooth_map_slice_mass_saturates(self):
        cert = blowup_certificate(build_bump_map(0.3, 1.0), alpha0=0.0)
        assert cert["total_growth"] <= 1.05


class TestMarkerTransport:
    def test_contraction_tracks_prediction(self, corner_traj):
        tr = singular_set_track(corner_traj)
        assert tr["mismatch"] <= 1e-3
        assert tr["spread"] <= tr["band"]
        assert tr["node_min_ratio"] >= 0.9
        assert tr["drift"] <= 0.01

    def test_angle_factor_is_unit_modulus(self, corner_traj):
        ar = angle_rigidity(corner_traj)
        assert ar["unit_defect"] <= 1e-12

    def test_angle_factor_matches_measured_rotation(self, corner_traj):
        ar = angle_rigidity(corner_traj)
        assert ar["factor_mismatch"] <= 1e-3

    def test_crest_rotation_factor_is_identity(self, corner_traj):
        # zero-velocity start on a mirror-symmetric crest: the accumulated
        # rotation at the singular marker stays at exactly 1
        ar = angle_rigidity(corner_traj)
        k0 = int(np.argmin(np.abs(corner_traj.states[-1].marker_alpha0)))
        assert ar["predicted_factor_dist"][k0] <= 1e-10

    def test_crest_angle_drift_small(self, corner_traj):
        cad = crest_angle_drift(corner_traj, 0.0)
        assert abs(cad["initial_jump"]) == pytest.approx(1.1976, abs=2e-3)
        assert cad["jump_change"] <= 0.05 * abs(cad["initial_jump"])

    def test_crest_angle_drift_window_override(self, corner_traj):
        cad = crest_angle_drift(corner_traj, 0.0, window=(0.8, 1.6))
        h = corner_traj.grid.spacing
        lo, hi = cad["window"]
        assert lo == pytest.approx(0.8, abs=h)
        assert hi == pytest.approx(1.6, abs=2 * h)


class TestPressure:
    G = Grid(L=20.0, n=2048)

    def test_vanishes_on_the_sampling_line(self):
        P = PressureField(build_flat_map(), POLE_VEL, self.G, 0.2)
        inner = np.abs(self.G.nodes) < 0.8 * self.G.L
        assert np.max(np.abs(P.on_grid(0.0, 0.0)[inner])) <= 1e-15

    def test_hydrostatic_at_rest(self):
        P = PressureField(build_flat_map(), VelocityProfile(kind="zero"), self.G, 0.2)
        assert np.max(np.abs(P.at(np.array([0.0, 3.0]), 1.7) - 1.7)) == 0.0

    def test_laplacian_sources_speed_squared(self):
        out = pressure_laplacian_check(build_flat_map(), POLE_VEL, self.G, 0.2,
                                       depth=8 * self.G.spacing)
        assert out["worst"] <= 1e-5

    def test_acceleration_two_routes_flat(self):
        out = acceleration_consistency(build_flat_map(), POLE_VEL, self.G, 0.2)
        assert out["worst"] <= 1e-3

    def test_acceleration_two_routes_corner_at_rest(self, corner):
        out = acceleration_consistency(corner, VelocityProfile(kind="zero"),
                                       self.G, 0.2,
                                       exclude_half=16 * self.G.spacing)
        assert out["worst"] <= 1e-3

    def test_modal_gradient_identity(self):
        g = Grid(L=40.0, n=4096)
        errs = [modal_gradient_check(g, lorentz(g.nodes), y)["err"]
                for y in (0.1, 0.3, 1.0)]
        assert errs[0] <= 2e-3
        assert errs[1] <= 1e-3
        assert errs[2] <= 2e-4
        assert errs[0] > errs[1] > errs[2]

    def test_gauge_identity_exact_at_rest(self):
        out = gauge_identity(build_flat_map(), VelocityProfile(kind="zero"),
                             self.G, 0.2)
        assert out["worst"] == 0.0

    def test_gauge_identity_smooth(self):
        out = gauge_identity(build_bump_map(0.3, 1.0), POLE_VEL, self.G, 0.2)
        assert out["worst"] <= 1e-5

    def test_gauge_identity_corner(self, corner):
        out = gauge_identity(corner, POLE_VEL, self.G, 0.2,
                             exclude_half=16 * self.G.spacing)
        assert out["worst"] <= 1e-5


class TestTipAcceleration:
    def test_tip_dies_with_the_mollification(self, corner):
        g = Grid(L=20.0, n=4096)
        tips = [tip_acceleration(corner, POLE_VEL, g, e)["at_tip"]
                for e in (0.4, 0.2, 0.1)]
        assert tips[0] > tips[1] > tips[2]
        assert tips[0] == pytest.approx(0.51147, rel=1e-3)
        assert tips[2] == pytest.approx(0.23439, rel=1e-3)

    def test_envelope_saturates_at_one(self, corner):
        g = Grid(L=20.0, n=4096)
        out = tip_acceleration(corner, POLE_VEL, g, 0.2)
        assert out["envelope_margin"] <= 1.0 + 1e-12
        assert out["a1_sup"] >= 1.0

    def test_aitken_geometric_exact(self):
        assert aitken([2 + 3 * 0.5 ** k for k in range(5)]) == pytest.approx(2.0, abs=1e-12)

    def test_aitken_constant_sequence(self):
        assert aitken([5.0, 5.0, 5.0]) == 5.0


class TestCuspEvolution:
    def test_pair_separation_controlled(self, cusp_traj):
        out = cusp_evolution_check(cusp_traj, 0.0)
        assert out["n_pairs"] >= 10
        assert out["K"] <= 0.1
        assert out["floor_initial"] >= 0.5
        assert out["floor_final"] >= 0.5
        assert out["half_time"] == pytest.approx(cusp_traj.times[-1])

    def test_requires_comparable_pairs(self, cusp_traj):
        with pytest.raises(ValueError, match="no scale-comparable marker pairs"):
            cusp_evolution_check(cusp_traj, 0.0, frac=1e6)
