"""Line-trace transforms against closed forms."""
import numpy as np
import pytest

from crestwave import (
    BoundaryField,
    Grid,
    HalfPlanePoint,
    boundary_limit,
    depth_ladder,
    hilbert,
    holo_derivative,
    holomorphic_projection,
    poisson_extend,
    sobolev_half_seminorm,
    spectral_derivative,
)

from oracles import (
    LORENTZ_HALF_SEMINORM,
    d_lorentz,
    hilbert_of_lorentz,
    lhp_pole_trace,
    lorentz,
    lorentz_field,
    poisson_of_lorentz,
    smooth_decaying_family,
)


@pytest.fixture(scope="module")
def grid():
    return Grid(L=80.0, n=4096)


def rel_sup(got, want):
    return float(np.max(np.abs(got - want)) / np.max(np.abs(want)))


class TestHilbert:
    def test_lorentz_oracle(self, grid):
        got = hilbert(lorentz_field(grid)).samples
        keep = np.abs(grid.nodes) <= grid.L / 2
        err = rel_sup(got[keep], hilbert_of_lorentz(grid.nodes[keep]))
        assert err <= 1e-6

    def test_involution(self, grid):
        for f in smooth_decaying_family(grid.nodes):
            bf = BoundaryField(grid, f)
            back = hilbert(hilbert(bf)).samples
            assert np.max(np.abs(back - f)) <= 1e-8

    def test_lhp_trace_is_fixed(self, grid):
        bf = lhp_pole_trace(grid)
        assert np.max(np.abs(hilbert(bf).samples - bf.samples)) <= 1e-6

    def test_aliased_carrier_recovers_under_refinement(self):
        # carrier at xi = 4 against a Nyquist of 5.03 at n = 256: the
        # packet aliases and the involution error is O(1); doubling n
        # restores machine accuracy
        errs = []
        for n in (256, 512):
            g = Grid(L=80.0, n=n)
            f = np.exp(-g.nodes ** 2 / 25.0) * np.cos(4.0 * g.nodes)
            bf = BoundaryField(g, f)
            errs.append(np.max(np.abs(hilbert(hilbert(bf)).samples - f)))
        assert errs[0] > 1.0
        assert errs[1] <= 1e-12

    def test_rejects_constant_class(self, grid):
        bf = BoundaryField(grid, 1.0 + lorentz(grid.nodes),
                           decay_class="constant_plus_decaying")
        with pytest.raises(ValueError, match="decaying"):
            hilbert(bf)


class TestProjection:
    def test_idempotent(self, grid):
        # the wing template refit on the projected image costs a few
        # digits over machine precision for rational tails
        for f in smooth_decaying_family(grid.nodes):
            p1 = holomorphic_projection(BoundaryField(grid, f))
            p2 = holomorphic_projection(p1)
            assert np.max(np.abs(p2.samples - p1.samples)) <= 1e-10

    def test_projection_lands_in_fixed_class(self, grid):
        p = holomorphic_projection(lorentz_field(grid))
        hp = hilbert(p)
        assert np.max(np.abs(hp.samples - p.samples)) <= 1e-12

    def test_constant_passes_through(self, grid):
        # gaussian deviation: its wings vanish, so the recovered
        # constant is exact and the two pipelines must agree
        c = 0.7 - 0.2j
        dev = np.exp(-grid.nodes ** 2 / 16.0)
        bf = BoundaryField(grid, c + dev,
                           decay_class="constant_plus_decaying")
        p = holomorphic_projection(bf).samples
        q = holomorphic_projection(BoundaryField(grid, dev)).samples
        assert np.max(np.abs(p - (c + q))) <= 1e-12


class TestPoisson:
    @pytest.mark.parametrize("y", [-0.5, -1.0, -2.0])
    def test_lorentz_oracle(self, grid, y):
        got = poisson_extend(lorentz_field(grid), y).samples
        err = rel_sup(got, poisson_of_lorentz(grid.nodes, y))
        assert err <= 1e-6

    def test_zero_depth_is_identity(self, grid):
        bf = lorentz_field(grid)
        assert poisson_extend(bf, 0.0) is bf

    def test_upward_rejected(self, grid):
        with pytest.raises(ValueError, match="downward"):
            poisson_extend(lorentz_field(grid), 0.1)

    def test_constant_passes_through(self, grid):
        c = 1.5
        dev = np.exp(-grid.nodes ** 2 / 16.0)
        bf = BoundaryField(grid, c + dev,
                           decay_class="constant_plus_decaying")
        got = poisson_extend(bf, -1.0).samples
        want = c + poisson_extend(BoundaryField(grid, dev), -1.0).samples
        assert np.max(np.abs(got - want)) <= 1e-12


class TestDerivative:
    def test_lorentz_oracle(self, grid):
        got = spectral_derivative(lorentz_field(grid)).samples
        assert rel_sup(got, d_lorentz(grid.nodes)) <= 1e-6

    def test_constant_drops_out(self, grid):
        dev = np.exp(-grid.nodes ** 2 / 16.0)
        bf = BoundaryField(grid, 2.0 + dev,
                           decay_class="constant_plus_decaying")
        got = spectral_derivative(bf).samples
        want = spectral_derivative(BoundaryField(grid, dev)).samples
        # the multiplier scales the 1-ulp split residual by the Nyquist
        # frequency
        assert np.max(np.abs(got - want)) <= 1e-11


class TestHoloDerivative:
    def test_pole_trace(self, grid):
        pt = HalfPlanePoint(0.5, -0.7)
        got = holo_derivative(lhp_pole_trace(grid), pt)
        want = -1.0 / (pt.z - 1j) ** 2
        assert abs(got - want) / abs(want) <= 1e-6

    def test_rejects_non_holomorphic(self, grid):
        with pytest.raises(ValueError, match="holomorphic"):
            holo_derivative(lorentz_field(grid), HalfPlanePoint(0.0, -1.0))

    def test_rejects_boundary_point(self, grid):
        with pytest.raises(ValueError, match="interior"):
            holo_derivative(lhp_pole_trace(grid), HalfPlanePoint(0.0, 0.0))


def test_sobolev_half_lorentz():
    # the |xi|^(1/2) weight has a cusp at xi = 0 and the bin sum feels
    # it at the window scale: the error is set by L, not n, and falls
    # roughly as L^-2
    errs = []
    for L, n in ((80.0, 4096), (160.0, 8192)):
        g = Grid(L=L, n=n)
        got = sobolev_half_seminorm(BoundaryField(g, lorentz(g.nodes)))
        errs.append(abs(got - LORENTZ_HALF_SEMINORM) / LORENTZ_HALF_SEMINORM)
    assert errs[0] <= 5e-4
    assert errs[1] <= errs[0] / 3.0


class TestBoundaryLimit:
    def test_smooth_limit(self, grid):
        lim = boundary_limit(lambda z: 1.0 / (z - 1j), 0.5,
                             depth_ladder(grid))
        want = 1.0 / (0.5 - 1j)
        assert lim.converged
        assert abs(lim.value - want) <= 1e-3
        assert abs(lim.value - want) <= lim.error

    def test_slow_ladder_flagged(self, grid):
        # |y|^0.1 differences contract by 2^0.1, under the gate factor
        lim = boundary_limit(lambda z: (-z.imag) ** 0.1, 0.0,
                             depth_ladder(grid))
        assert not lim.converged

    def test_needs_three_depths(self):
        with pytest.raises(ValueError, match="3 depths"):
            boundary_limit(lambda z: 0.0, 0.0, [-0.1, -0.05])

    def test_depths_negative(self):
        with pytest.raises(ValueError, match="negative"):
            boundary_limit(lambda z: 0.0, 0.0, [-0.1, -0.05, 0.0])


class TestValidation:
    def test_grid_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            Grid(L=10.0, n=1000)

    def test_grid_minimum(self):
        with pytest.raises(ValueError, match="power of two"):
            Grid(L=10.0, n=8)

    def test_grid_positive_length(self):
        with pytest.raises(ValueError, match="positive"):
            Grid(L=0.0, n=64)

    def test_field_length(self, grid):
        with pytest.raises(ValueError, match="samples"):
            BoundaryField(grid, np.zeros(17))

    def test_field_decay_gate(self, grid):
        with pytest.raises(ValueError, match="not decaying"):
            BoundaryField(grid, np.ones(grid.n))

    def test_field_class_name(self, grid):
        with pytest.raises(ValueError, match="decay_class"):
            BoundaryField(grid, np.zeros(grid.n), decay_class="bounded")

    def test_field_immutable(self, grid):
        bf = lorentz_field(grid)
        with pytest.raises(AttributeError):
            bf.samples = np.zeros(grid.n)
        with pytest.raises(ValueError):
            bf.samples[0] = 1.0
