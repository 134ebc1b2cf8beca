"""Closed-form references shared across the test modules.

Everything here is checkable by hand: rational traces with one pole,
their transforms, and the two velocity-coefficient integrals they
induce.  Tests compare grid computations against these, never against
stored outputs of the code itself.
"""
import numpy as np

from crestwave import BoundaryField, Grid


def lorentz(x):
    return 1.0 / (1.0 + x ** 2)


def hilbert_of_lorentz(x):
    # H under the (1/(i pi)) pv convention: -i times the classical x/(1+x^2)
    return -1j * x / (1.0 + x ** 2)


def poisson_of_lorentz(x, y):
    """Half-plane harmonic extension of lorentz at depth y <= 0."""
    s = 1.0 + abs(y)
    return s / (x ** 2 + s ** 2)


def d_lorentz(x):
    return -2.0 * x / (1.0 + x ** 2) ** 2


LORENTZ_HALF_SEMINORM = np.sqrt(np.pi / 4.0)


def lorentz_field(grid: Grid) -> BoundaryField:
    return BoundaryField(grid, lorentz(grid.nodes))


def lhp_pole_trace(grid: Grid) -> BoundaryField:
    """Trace of 1/(z - i), holomorphic on the closed lower half-plane."""
    return BoundaryField(grid, 1.0 / (grid.nodes - 1j))


def a1_for_pole_velocity(alpha):
    """A1 on a flat interface with Z_t = 1/(a' + i).

    The difference quotient collapses: |Z_t(a) - Z_t(b)|^2 / (a-b)^2
    = 1/((1+a^2)(1+b^2)), the b' integral closes to pi/(1+a^2), and
    the 1/2pi prefactor leaves 1 + 1/(2(1+a^2)).
    """
    return 1.0 + 0.5 / (1.0 + alpha ** 2)


def b_for_pole_velocity(alpha):
    """b = Re (I - H)(Z_t) for the same Z_t = 1/(a' + i) on Z_,a' = 1.

    The pole sits at -i, so the trace is upper-half-plane holomorphic,
    H flips its sign, and (I - H) doubles it.
    """
    return 2.0 * alpha / (1.0 + alpha ** 2)


def smooth_decaying_family(x):
    """Five decaying line traces with distinct shapes and scales.

    All are either rational (tails inside the wing-template span) or
    modulated packets with no spectral mass at the symbol break at
    xi = 0.  A field with nonzero mean leaves this class: its transform
    grows a 1/x far tail that a finite window cannot carry exactly.
    """
    return [
        lorentz(x),
        1.0 / (4.0 + x ** 2),
        x / (4.0 + x ** 2) ** 2,
        np.exp(-x ** 2 / 25.0) * np.cos(3.0 * x),
        np.exp(-x ** 2 / 16.0) * np.sin(3.0 * x),
    ]
