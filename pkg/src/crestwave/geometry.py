"""Conformal interface geometry: singular Riemann-map families and their checks.

A water-wave interface is encoded by a conformal map ``psi`` from the lower
half-plane onto the fluid domain, normalized so that ``psi(z) - z`` decays
at infinity.  All map families here are specified through the closed-form
derivative ``psi_z``; positions on the boundary (and on mollified lines
``Im z = -eps``) are recovered by integrating ``psi_z - 1`` along the line,
anchored by a tail integral out to -infinity.

Families
--------
flat
    psi(z) = z.
bump
    psi(z) = z + i*a*w**2/(z - x0 - i*w).  Smooth, injective for a < 1.
corner
    psi_z = m**(nu-1) * exp((1-nu)*i*R/(z - x0 - i*SIGMA*R)) with
    m = (z - x0)/(z - x0 - i*R).  The exponential factor cancels the 1/z
    term of log(psi_z) so the deviation decays; it is smooth near x0 and
    real there, so the interior angle nu*pi is untouched.  Products of
    factors give several corners on one interface.
cusp
    psi_z = c**2 / (m * (c - log m)**2) times the analogous compensating
    factor exp((1 - 2/c)*i*R/(z - x0 - i*SIGMA*R)), which is unity at the
    default c = 2.

On the boundary the corner derivative blows up like |alpha - x0|**(nu-1)
and the cusp like 1/(|alpha - x0| log**2|alpha - x0|); both are integrable,
so panel quadrature with a substitution on the singular panels recovers
positions to near machine accuracy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from . import kernels
from .field import Grid

# Offset scale of the compensating pole, in units of R below the crest.
# Larger values shrink the pole's bending of the interface but grow the
# 1/z**2 residual of log(psi_z); 3 keeps the injectivity certificate
# (1-nu)*(pi/2 + 1/SIGMA) < pi/2 valid down to nu ~ 0.18.
SIGMA = 3.0

# Gauss-Legendre panel rule for boundary integration.  12 points on panels
# of width ~5e-3 is far below roundoff for the smooth panels.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


class InadmissibleGeometry(ValueError):
    """Interface rejected by the energy admissibility screen."""


class GeometryRejection(ValueError):
    """Interface failed a structural check (injectivity, self-intersection)."""


@dataclass(frozen=True)
class SingularPoint:
    """Location and type of an interface singularity on the boundary line."""

    alpha0: float
    kind: str          # "corner" | "cusp"
    nu: float | None   # interior angle / pi for corners, None for cusps


class BoundaryFrame(NamedTuple):
    """Boundary samples of a map on a grid (optionally on a mollified line)."""

    deviation: np.ndarray   # psi(alpha - i eps) - (alpha - i eps), complex
    psi_z: np.ndarray       # complex; nan at singular nodes when eps == 0
    arclength: np.ndarray   # cumulative integral of |psi_z| from the left node


@dataclass(frozen=True)
class ConformalMap:
    """Conformal parametrization of a fluid interface.

    Instances are immutable and hashable so boundary frames can be cached
    per (map, grid, eps).  Use the ``build_*`` constructors, which run the
    admissibility and injectivity screens.

    Attributes
    ----------
    kind : str
        One of "flat", "bump", "corner", "cusp".
    corners : tuple of (nu, x0, R)
        Corner factors, possibly several for a multi-crest interface.
    cusp : (x0, R, c) or None
    bump : (a, w, x0) or None
    base_point : complex
        Interior anchor recorded for reference; evaluation routines
        integrate along coordinate lines with a tail anchor at -infinity.
    """

    kind: str
    corners: tuple = ()
    cusp: tuple | None = None
    bump: tuple | None = None
    base_point: complex = -1j

    # -- pointwise closed forms ------------------------------------------

    def psi_z(self, z):
        """Derivative of the map, vectorized over complex ``z`` in P_-."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for nu, x0, R in self.corners:
            w = z - x0
            m = w / (w - 1j * R)
            out = out * m ** (nu - 1.0) * np.exp(
                (1.0 - nu) * 1j * R / (w - 1j * SIGMA * R))
        if self.cusp is not None:
            x0, R, c = self.cusp
            w = z - x0
            m = w / (w - 1j * R)
            lg = np.log(m)
            out = out * c * c / (m * (c - lg) ** 2) * np.exp(
                (1.0 - 2.0 / c) * 1j * R / (w - 1j * SIGMA * R))
        if self.bump is not None:
            a, wd, x0 = self.bump
            out = out * (1.0 - 1j * a * wd * wd / (z - x0 - 1j * wd) ** 2)
        return out

    def dlog_psi_z(self, z):
        """d/dz log(psi_z); gives psi_zz = psi_z * dlog and
        d/dz (1/psi_z) = -(1/psi_z) * dlog."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for nu, x0, R in self.corners:
            w = z - x0
            dlm = -1j * R / (w * (w - 1j * R))        # (log m)'
            out = out + (nu - 1.0) * dlm \
                - (1.0 - nu) * 1j * R / (w - 1j * SIGMA * R) ** 2
        if self.cusp is not None:
            x0, R, c = self.cusp
            w = z - x0
            m = w / (w - 1j * R)
            dlm = -1j * R / (w * (w - 1j * R))
            out = out - dlm * (1.0 - 2.0 / (c - np.log(m))) \
                - (1.0 - 2.0 / c) * 1j * R / (w - 1j * SIGMA * R) ** 2
        if self.bump is not None:
            a, wd, x0 = self.bump
            q = z - x0 - 1j * wd
            out = out + (2j * a * wd * wd / q ** 3) / (1.0 - 1j * a * wd * wd / q ** 2)
        return out

    def inv_psi_z(self, z):
        return 1.0 / self.psi_z(z)

    def d_inv_psi_z(self, z):
        """d/dz of 1/psi_z, the gradient screened by the interior energy."""
        return -self.inv_psi_z(z) * self.dlog_psi_z(z)

    def deviation_closed(self, z):
        """psi(z) - z where a closed form exists, else None."""
        if self.kind == "flat":
            return np.zeros_like(np.asarray(z, dtype=complex))
        if self.kind == "bump":
            a, wd, x0 = self.bump
            return 1j * a * wd * wd / (np.asarray(z, dtype=complex) - x0 - 1j * wd)
        return None

    def singular_points(self):
        pts = [SingularPoint(x0, "corner", nu) for nu, x0, R in self.corners]
        if self.cusp is not None:
            pts.append(SingularPoint(self.cusp[0], "cusp", None))
        return tuple(sorted(pts, key=lambda p: p.alpha0))

    @property
    def has_singularity(self):
        return bool(self.corners) or self.cusp is not None


# ---------------------------------------------------------------------------
# constructors with admissibility screens


def _sample_interior(x0, R, n, seed=0):
    # Depth distribution is log-uniform down to 1e-6 R: the angle of psi_z
    # is worst approaching the boundary near the crest, so concentrate there.
    rng = np.random.default_rng(seed)
    x = x0 + R * rng.uniform(-6.0, 6.0, n)
    y = -R * 10.0 ** rng.uniform(-6.0, 0.7, n)
    return x + 1j * y


def injectivity_certificate(cmap: ConformalMap, n_samples: int = 10_000,
                            seed: int = 0) -> float:
    """Min of Re(psi_z) over sampled interior points near each singularity.

    A positive value certifies local injectivity on the sampled region:
    Re(psi_z) > 0 makes Re(psi) strictly monotone along horizontal lines.
    """
    worst = np.inf
    spots = [(x0, R) for nu, x0, R in cmap.corners]
    if cmap.cusp is not None:
        spots.append((cmap.cusp[0], cmap.cusp[1]))
    if cmap.bump is not None:
        spots.append((cmap.bump[2], max(cmap.bump[1], 1.0)))
    if not spots:
        spots = [(0.0, 1.0)]
    for j, (x0, R) in enumerate(spots):
        z = _sample_interior(x0, R, n_samples, seed + j)
        worst = min(worst, float(np.min(cmap.psi_z(z).real)))
    return worst


def build_flat_map() -> ConformalMap:
    return ConformalMap(kind="flat", base_point=-1j)


def build_bump_map(a: float, w: float, x0: float = 0.0) -> ConformalMap:
    """Smooth localized deformation of amplitude ``a`` and width ``w``.

    Requires a < 1: on the half-plane |z - x0 - i w| >= w, so the derivative
    satisfies Re(psi_z) >= 1 - a and the map is injective.
    """
    if not (0 <= a < 1):
        raise GeometryRejection(f"bump amplitude must lie in [0, 1), got {a}")
    if w <= 0:
        raise GeometryRejection(f"bump width must be positive, got {w}")
    return ConformalMap(kind="bump", bump=(float(a), float(w), float(x0)),
                        base_point=x0 - 1j * w)


def _check_corner_nu(nu, allow_inadmissible):
    if not (0.0 < nu < 1.0):
        raise GeometryRejection(f"corner exponent must lie in (0, 1), got {nu}")
    if nu >= 0.5 and not allow_inadmissible:
        raise InadmissibleGeometry(
            f"energy-inadmissible corner: nu = {nu} >= 1/2 puts the interior "
            "gradient mass outside L2; pass allow_inadmissible to build anyway")


def build_corner_map(nu: float, x0: float = 0.0, R: float = 1.0, *,
                     allow_inadmissible: bool = False) -> ConformalMap:
    """Interface with a single angled crest of interior angle nu*pi at x0.

    Parameters
    ----------
    nu : float
        Interior angle divided by pi.  The energy screen admits (0, 1/2);
        nu >= 1/2 raises unless ``allow_inadmissible`` is set.
    x0, R : float
        Crest position and the length scale of the bent region.
    """
    _check_corner_nu(nu, allow_inadmissible)
    if R <= 0:
        raise GeometryRejection(f"corner scale must be positive, got {R}")
    cmap = ConformalMap(kind="corner", corners=((float(nu), float(x0), float(R)),),
                        base_point=x0 - 1j * R)
    cert = injectivity_certificate(cmap)
    if cert <= 0:
        raise GeometryRejection(
            f"corner map failed the injectivity certificate: min Re psi_z = {cert:.3e}")
    return cmap


def build_multi_corner_map(corners, *, allow_inadmissible: bool = False) -> ConformalMap:
    """Product of corner factors: several angled crests on one interface.

    ``corners`` is an iterable of (nu, x0, R).  Crest positions must be
    pairwise separated by at least 4 times the larger of the two scales,
    otherwise the factors interact enough to void the angle bookkeeping.
    """
    corners = tuple((float(nu), float(x0), float(R)) for nu, x0, R in corners)
    if not corners:
        raise GeometryRejection("multi-corner map needs at least one factor")
    for nu, x0, R in corners:
        _check_corner_nu(nu, allow_inadmissible)
        if R <= 0:
            raise GeometryRejection(f"corner scale must be positive, got {R}")
    for i in range(len(corners)):
        for j in range(i + 1, len(corners)):
            sep = abs(corners[i][1] - corners[j][1])
            need = 4.0 * max(corners[i][2], corners[j][2])
            if sep < need:
                raise GeometryRejection(
                    f"corner crests at {corners[i][1]} and {corners[j][1]} are "
                    f"separated by {sep:g} < {need:g}")
    cmap = ConformalMap(kind="corner", corners=corners,
                        base_point=corners[0][1] - 1j * corners[0][2])
    cert = injectivity_certificate(cmap)
    if cert <= 0:
        raise GeometryRejection(
            f"multi-corner map failed the injectivity certificate: "
            f"min Re psi_z = {cert:.3e}")
    return cmap


def build_cusp_map(c: float = 2.0, x0: float = 0.0, R: float = 1.0) -> ConformalMap:
    """Interface with a downward cusp at x0.

    The default c = 2 is the canonical family; c > 2 widens the cusp
    logarithmically.  Values below 2 are rejected.
    """
    if c < 2.0:
        raise GeometryRejection(f"cusp parameter must satisfy c >= 2, got {c}")
    if R <= 0:
        raise GeometryRejection(f"cusp scale must be positive, got {R}")
    return ConformalMap(kind="cusp", cusp=(float(x0), float(R), float(c)),
                        base_point=x0 - 1j * R)


# ---------------------------------------------------------------------------
# boundary frames by panel integration


def _quad_c(f, a, b, **kw):
    # slow-decay tails trip the subdivision-limit warning at roundoff
    # level; the closure tests below bound the actual error, so keep the
    # console quiet
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(lambda s: f(s).real, a, b, **kw)[0]
        im = quad(lambda s: f(s).imag, a, b, **kw)[0]
    return re + 1j * im


# Cap for the logarithmic substitution x = x0 +/- exp(-u): beyond u = 690
# the offset underflows.  Corner integrands decay like exp(-nu u) and the
# truncated mass is below 1e-50; the cusp's 1/u^2 tail is added in closed
# form by the callers that need it.
_U_CAP = 690.0


def _sub_quad(f, lo, hi, x0, side):
    """Integrate f over [lo, hi] with an endpoint singularity at x0.

    Substitutes x = x0 +/- exp(-u), which turns an algebraic or
    logarithmic endpoint profile into a decaying integrand on [u0, cap].
    """
    width = hi - lo
    u0 = -np.log(width)
    if side == "right":        # lo == x0
        g = lambda u: f(x0 + np.exp(-u)) * np.exp(-u)
    else:                      # hi == x0
        g = lambda u: f(x0 - np.exp(-u)) * np.exp(-u)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        re = quad(lambda u: g(u).real, u0, _U_CAP, **_QUAD_OPTS)[0]
        im = quad(lambda u: g(u).imag, u0, _U_CAP, **_QUAD_OPTS)[0]
    return re + 1j * im


def _cusp_directed_dev(x0, R, c, w1):
    """Exact-route integral of psi_z over the boundary segment [x0, x0+w1].

    Changes variables to m = w/(w - iR), where the integrand has the
    antiderivative c**2/(c - log m) up to a factor smooth at m = 0.  The
    smooth remainder is integrated along the straight segment 0 -> m(w1).
    This avoids truncating the logarithmically slow mass at the tip.
    """
    m1 = w1 / (w1 - 1j * R)
    fac = 1.0 - 2.0 / c

    def g(m):
        w = 1j * R * m / (m - 1.0)
        return np.exp(fac * 1j * R / (w - 1j * SIGMA * R)) / (1.0 - m) ** 2

    g0 = g(0.0)
    lead = g0 / (c - np.log(m1))
    q = lambda t: (g(t * m1) - g0) / t * (c - np.log(t * m1)) ** (-2)
    Q = quad(lambda t: q(t).real, 0.0, 1.0, **_QUAD_OPTS)[0] \
        + 1j * quad(lambda t: q(t).imag, 0.0, 1.0, **_QUAD_OPTS)[0]
    return -1j * R * c * c * (lead + Q)


def _cusp_arc_tail(R, c):
    """Arclength of the cusp within exp(-_U_CAP) of the tip, one side.

    In t = c - log(v/R) the density is c**2 E0 R / (t**2 + (pi/2)**2) with
    E0 the (real) value of the compensating factor at the tip.
    """
    t0 = c + _U_CAP + np.log(R)
    E0 = np.exp(-(1.0 - 2.0 / c) / SIGMA)
    return c * c * E0 * R * (2.0 / np.pi) * (np.pi / 2.0 - np.arctan(2.0 * t0 / np.pi))


def _singular_panel(cmap, lo, hi, sp):
    """Panel integrals of (psi_z - 1) and |psi_z| for a panel near sp.

    The substitution quadrature applies when the singular point touches
    the panel; panels merely adjacent to it are smooth inside and fall
    back to plain adaptive quadrature.
    """
    x0 = sp.alpha0
    f = lambda x: cmap.psi_z(complex(x, 0.0))
    fm1 = lambda x: f(x) - 1.0
    fab = lambda x: abs(f(x)) + 0j
    tol = 1e-12 * max(1.0, abs(x0))
    touches_left = abs(x0 - lo) <= tol
    touches_right = abs(x0 - hi) <= tol
    inside = lo + tol < x0 < hi - tol

    if not (inside or touches_left or touches_right):
        dev = _quad_c(fm1, lo, hi, **_QUAD_OPTS)
        arc = _quad_c(fab, lo, hi, **_QUAD_OPTS)
        return dev, arc.real

    if sp.kind == "cusp":
        _, R, c = cmap.cusp
        if inside:
            dev = -_cusp_directed_dev(x0, R, c, lo - x0) \
                + _cusp_directed_dev(x0, R, c, hi - x0) - (hi - lo)
            arc = (_sub_quad(fab, lo, x0, x0, "left")
                   + _sub_quad(fab, x0, hi, x0, "right")).real \
                + 2.0 * _cusp_arc_tail(R, c)
        elif touches_left:
            dev = _cusp_directed_dev(x0, R, c, hi - x0) - (hi - lo)
            arc = _sub_quad(fab, lo, hi, x0, "right").real + _cusp_arc_tail(R, c)
        else:
            dev = -_cusp_directed_dev(x0, R, c, lo - x0) - (hi - lo)
            arc = _sub_quad(fab, lo, hi, x0, "left").real + _cusp_arc_tail(R, c)
        return dev, arc

    # corner: the substitution integrand decays like exp(-nu u), so the
    # capped substitution is already complete to ~1e-50
    if inside:
        dev = _sub_quad(fm1, lo, x0, x0, "left") + _sub_quad(fm1, x0, hi, x0, "right")
        arc = _sub_quad(fab, lo, x0, x0, "left") + _sub_quad(fab, x0, hi, x0, "right")
    elif touches_left:
        dev = _sub_quad(fm1, lo, hi, x0, "right")
        arc = _sub_quad(fab, lo, hi, x0, "right")
    else:
        dev = _sub_quad(fm1, lo, hi, x0, "left")
        arc = _sub_quad(fab, lo, hi, x0, "left")
    return dev, arc.real


@lru_cache(maxsize=64)
def boundary_frame(cmap: ConformalMap, grid: Grid, eps: float = 0.0) -> BoundaryFrame:
    """Boundary samples of a map on the line Im z = -eps.

    The deviation psi(z) - z is integrated panel by panel from the left
    grid node, anchored by a tail integral over (-inf, -L].  With eps = 0
    the panels touching a singularity are integrated by adaptive quadrature
    under a logarithmic substitution; psi_z is set to nan at singular nodes.

    Returned arrays are cached; treat them as read-only.
    """
    alpha = grid.nodes
    h = grid.spacing
    n = grid.n

    closed = cmap.deviation_closed(alpha - 1j * eps)
    if closed is not None:
        psz = cmap.psi_z(alpha - 1j * eps)
        # arclength by the same panel rule as below, for uniformity
        mids = 0.5 * (alpha[:-1] + alpha[1:])
        zs = mids[:, None] + (h / 2.0) * _GL_X[None, :] - 1j * eps
        arc_inc = (h / 2.0) * (np.abs(cmap.psi_z(zs)) @ _GL_W)
        arclength = np.concatenate(([0.0], np.cumsum(arc_inc)))
        return BoundaryFrame(closed, psz, arclength)

    sing = cmap.singular_points() if eps == 0.0 else ()

    # tail anchor: psi_z - 1 = O(1/s^2), so the improper integral converges
    tail = _quad_c(lambda s: cmap.psi_z(complex(s, -eps)) - 1.0,
                   -np.inf, -grid.L, **_QUAD_OPTS)

    mids = 0.5 * (alpha[:-1] + alpha[1:])
    zs = mids[:, None] + (h / 2.0) * _GL_X[None, :] - 1j * eps
    with np.errstate(all="ignore"):
        vals = cmap.psi_z(zs)
    dev_inc = (h / 2.0) * ((vals - 1.0) @ _GL_W)
    arc_inc = (h / 2.0) * (np.abs(vals) @ _GL_W)

    for sp in sing:
        # panels whose closure comes within one spacing of the singularity
        x0 = sp.alpha0
        bad = np.nonzero((alpha[:-1] <= x0 + h) & (alpha[1:] >= x0 - h))[0]
        for j in bad:
            dev_inc[j], arc_inc[j] = _singular_panel(cmap, alpha[j], alpha[j + 1], sp)

    deviation = tail + np.concatenate(([0.0], np.cumsum(dev_inc)))
    arclength = np.concatenate(([0.0], np.cumsum(arc_inc)))

    with np.errstate(all="ignore"):
        psz = cmap.psi_z(alpha - 1j * eps)
    for sp in sing:
        at = np.nonzero(np.abs(alpha - sp.alpha0) < h / 2.0)[0]
        psz[at] = complex(np.nan, np.nan)
    return BoundaryFrame(deviation, psz, arclength)


def vertical_ray(cmap: ConformalMap, x0: float, ys) -> np.ndarray:
    """psi(x0 + i y) for an increasing ladder of depths y < 0.

    Integrates psi_z - 1 up the vertical line through x0, segment by
    segment, with a tail anchor below the deepest requested point.
    """
    ys = np.asarray(ys, dtype=float)
    if np.any(ys >= 0):
        raise ValueError("vertical ray expects strictly negative depths")
    order = np.argsort(ys)
    ys_sorted = ys[order]
    y_deep = ys_sorted[0] - 50.0
    f = lambda s: (cmap.psi_z(complex(x0, s)) - 1.0) * 1j
    dev = _quad_c(f, -np.inf, y_deep, **_QUAD_OPTS)
    out = np.empty(len(ys_sorted), dtype=complex)
    lo = y_deep
    for k, y in enumerate(ys_sorted):
        dev = dev + _quad_c(f, lo, y, **_QUAD_OPTS)
        out[k] = (x0 + 1j * y) + dev
        lo = y
    result = np.empty_like(out)
    result[order] = out
    return result


# ---------------------------------------------------------------------------
# structural checks


def validate_jordan(cmap: ConformalMap, grid: Grid):
    """Check the boundary curve is simple on the given grid resolution.

    Returns (ok, (i, j)); on failure the indices name a crossing segment
    pair.  Uses the unmollified boundary polyline.
    """
    frame = boundary_frame(cmap, grid, 0.0)
    Z = grid.nodes + frame.deviation
    ok, i, j = _polyline_simple(Z)
    return ok, (i, j)


def _polyline_simple(Z):
    x = np.ascontiguousarray(Z.real)
    y = np.ascontiguousarray(Z.imag)
    i, j = kernels.self_intersect(x, y)
    return (i < 0), i, j


def chord_arc_constant(cmap: ConformalMap, grid: Grid, max_nodes: int = 1024):
    """Brute-force chord-arc scan.

    Returns (delta, worst_upper) where delta = min |Z(a)-Z(b)| / arc(a,b)
    over sampled pairs and worst_upper = max of the same ratio.  A simple
    rectifiable curve has worst_upper <= 1 up to discretization error;
    delta > 0 uniformly in resolution is the chord-arc property.  Cusped
    interfaces show delta -> 0 as the grid refines.
    """
    frame = boundary_frame(cmap, grid, 0.0)
    Z = grid.nodes + frame.deviation
    s = frame.arclength
    stride = max(1, grid.n // max_nodes)
    Zs, ss = Z[::stride], s[::stride]
    dmin, dmax, _, _ = kernels.chord_arc_scan(
        np.ascontiguousarray(Zs.real), np.ascontiguousarray(Zs.imag),
        np.ascontiguousarray(ss))
    return dmin, dmax


def cusp_separation_bound(cmap: ConformalMap, grid: Grid, halfwidth: float = 1.0,
                          frac: float = 0.5):
    """Worst K with sqrt|a - b| <= K |Z(a) - Z(b)| near the cusp point.

    Also returns the floor min |Z(a)-Z(b)| / sqrt|a-b|; a floor of 1/2 or
    better is the quantitative non-self-intersection statement for cusps.
    Only scale-comparable pairs are scored (separation at least ``frac``
    times the distance to the tip): tighter pairs probe the local
    derivative, where no rectifiable curve can have a square-root modulus,
    and self-intersection is governed by the comparable pairs.
    """
    if cmap.cusp is None:
        raise ValueError("cusp separation bound is only defined for cusp maps")
    x0 = cmap.cusp[0]
    frame = boundary_frame(cmap, grid, 0.0)
    Z = grid.nodes + frame.deviation
    alpha = grid.nodes
    lo = int(np.searchsorted(alpha, x0 - halfwidth))
    hi = int(np.searchsorted(alpha, x0 + halfwidth))
    K, floor = kernels.pair_bound(
        np.ascontiguousarray(Z.real), np.ascontiguousarray(Z.imag),
        np.ascontiguousarray(alpha), lo, hi, x0, frac)
    return K, floor


def interior_gradient_mass(cmap: ConformalMap, depths, halfwidth: float | None = None):
    """Window integral of |d/dz (1/psi_z)|^2 on horizontal lines.

    The screened quantity: its sup over depth is finite exactly when the
    map is energy-admissible.  For a corner of exponent nu the line
    integrals scale like depth**(1 - 2 nu) near the crest, so the ladder
    diverges for nu > 1/2 and saturates for nu < 1/2.

    Parameters
    ----------
    depths : array_like
        Positive numbers; the lines are Im z = -depth.
    halfwidth : float, optional
        Window half-width about the (single) singularity; defaults to R/4.
    """
    pts = cmap.singular_points()
    if len(pts) != 1:
        raise ValueError("gradient screen expects a map with one singularity")
    x0 = pts[0].alpha0
    scale = cmap.corners[0][2] if cmap.corners else cmap.cusp[1]
    W = 0.25 * scale if halfwidth is None else halfwidth
    out = np.empty(len(depths), dtype=float)
    for k, d in enumerate(depths):
        f = lambda x: abs(cmap.d_inv_psi_z(complex(x, -d))) ** 2
        val, _ = quad(f, x0 - W, x0 + W, points=[x0], **_QUAD_OPTS)
        out[k] = val
    return out


# ---------------------------------------------------------------------------
# initial velocity profiles


@dataclass(frozen=True)
class VelocityProfile:
    """Holomorphic initial velocity trace F, decaying in the lower half-plane.

    kind "zero" is the rest state.  kind "pole" is mu * (i/(z - i))**k,
    with the pole at +i (outside the fluid), so the trace and all its
    derivatives are exact boundary values of a holomorphic function.
    """

    kind: str = "zero"
    mu: float = 0.0
    k: int = 2

    def __post_init__(self):
        if self.kind not in ("zero", "pole"):
            raise ValueError(f"unknown velocity kind {self.kind!r}")
        if self.kind == "pole" and self.k < 1:
            raise ValueError("pole order must be at least 1")

    def eval(self, z, order: int = 0):
        """F and its z-derivatives: order 0..3."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "zero" or self.mu == 0.0:
            return np.zeros_like(z)
        poch = 1.0
        for m in range(order):
            poch *= -(self.k + m)
        return self.mu * (1j ** self.k) * poch * (z - 1j) ** (-(self.k + order))


def velocity_sup_norms(vel: VelocityProfile, grid: Grid, depths):
    """Trapezoid H^3 norms of F on a ladder of horizontal lines.

    Returns an array of shape (len(depths),) with
    sum_{m<=3} ||F^(m)(. + i y)||_2^2.  For a decaying holomorphic F these
    are nonincreasing with depth; used as a sanity ladder on velocity data.
    """
    alpha = grid.nodes
    h = grid.spacing
    out = np.empty(len(depths))
    for j, d in enumerate(depths):
        line = alpha - 1j * float(d)
        total = 0.0
        for m in range(4):
            vals = vel.eval(line, m)
            total += h * float(np.sum(np.abs(vals) ** 2))
        out[j] = total
    return out


# ---------------------------------------------------------------------------
# one-sided tangent fits


def one_sided_angle(alpha, z_alpha, center: float, side: str,
                    skip: int = 3, count: int = 12) -> float:
    """Tangent angle at ``center`` by one-sided extrapolation of arg(Z_alpha).

    Fits a line to arg(z_alpha) on ``count`` nodes starting ``skip`` nodes
    away from the center on the given side and evaluates it at the center.
    The skipped nodes dodge both the nan at a singular node and the
    rounding of a mollified crest.
    """
    alpha = np.asarray(alpha)
    h = alpha[1] - alpha[0]
    idx = int(round((center - alpha[0]) / h))
    if side == "right":
        sel = np.arange(idx + skip + 1, idx + skip + 1 + count)
    elif side == "left":
        sel = np.arange(idx - skip - count, idx - skip)
    else:
        raise ValueError("side must be 'left' or 'right'")
    if sel[0] < 0 or sel[-1] >= len(alpha):
        raise ValueError("one-sided fit window leaves the grid")
    x = alpha[sel] - center
    ang = np.unwrap(np.angle(np.asarray(z_alpha)[sel]))
    coef = np.polynomial.polynomial.polyfit(x, ang, 1)
    return float(coef[0])


def singular_exponent_fit(cmap: ConformalMap, grid: Grid, alpha0=None,
                          inner: float | None = None, outer: float = 0.1):
    """Decay exponent of 1/|Z_,a'| at a power singularity, from the frame.

    Fits log(1/|psi_z|) against log|a' - alpha0| over nodes with distance
    in [inner, outer] (inner defaults to 4 spacings), both sides pooled.
    For a corner of interior angle nu pi the slope is 1 - nu.
    """
    if alpha0 is None:
        alpha0 = cmap.singular_points()[0].alpha0
    if inner is None:
        inner = 4.0 * grid.spacing
    frame = boundary_frame(cmap, grid)
    d = np.abs(grid.nodes - alpha0)
    sel = (d >= inner) & (d <= outer) & np.isfinite(frame.psi_z)
    x = np.log(d[sel])
    y = np.log(1.0 / np.abs(frame.psi_z[sel]))
    coef = np.polynomial.polynomial.polyfit(x, y, 1)
    resid = y - (coef[0] + coef[1] * x)
    return {"exponent": float(coef[1]),
            "rms": float(np.sqrt(np.mean(resid ** 2))),
            "n_nodes": int(np.count_nonzero(sel))}


def cusp_log_residual(cmap: ConformalMap, grid: Grid,
                      inner: float | None = None, outer: float = 0.1):
    """Goodness of the logarithmic cusp model for 1/|Z_,a'|.

    The cusp family has 1/|psi_z| ~ A d (c + log(R/d))^2 near the tip;
    a pure power law misses the slowly varying square factor.  Fits only
    the amplitude A in log space and reports the relative sup residual of
    the model over the window, plus the same for the best two-parameter
    power law.  The comparison needs a wide scale range to bite: over a
    narrow window the free exponent absorbs the log factor, and its
    fitted slope drifts with the window while A stays put.
    """
    x0, R, c = cmap.cusp
    if inner is None:
        inner = 4.0 * grid.spacing
    frame = boundary_frame(cmap, grid)
    d = np.abs(grid.nodes - x0)
    sel = (d >= inner) & (d <= outer) & np.isfinite(frame.psi_z)
    dd = d[sel]
    y = np.log(1.0 / np.abs(frame.psi_z[sel]))
    model = np.log(dd) + 2.0 * np.log(c + np.log(R / dd))
    amp = float(np.mean(y - model))
    resid_log = float(np.max(np.abs(y - model - amp)))
    coef = np.polynomial.polynomial.polyfit(np.log(dd), y, 1)
    resid_pow = float(np.max(np.abs(y - (coef[0] + coef[1] * np.log(dd)))))
    return {"amplitude": float(np.exp(amp)),
            "residual": resid_log,
            "power_residual": resid_pow,
            "power_slope": float(coef[1]),
            "n_nodes": int(np.count_nonzero(sel))}
