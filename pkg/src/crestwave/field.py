"""Truncated boundary line and the nonlocal analysis primitives.

Fields live on a uniform grid over [-L, L] and stand for traces on the
full line that decay at infinity.  The Hilbert transform convention is

    (H f)(a) = (1/i pi) p.v. int f(b) / (a - b) db,

so boundary values g of functions holomorphic and decaying on the lower
half-plane satisfy H g = g, and the Fourier symbol is -sign(xi).  This
orientation is a convention of this package, fixed once here; every
other module inherits it.

Discretization: a plain tapered FFT multiplier cannot reach the
accuracy targets, because the image of an algebraically decaying field
has slow 1/x tails that wrap under periodization.  The operator here
first fits the field's tails against a small basis of rational
templates

    phi_k(a) = (a - i)^{-k},   chi_k(a) = (a + i)^{-k},   k = 1..K,

whose transforms are known exactly (H phi_k = +phi_k, H chi_k =
-chi_k), applies the closed forms to the fitted part, and sends only
the fast-decaying remainder through the tapered multiplier.  The fit is
a least-squares problem over the whole window with row weights
(1 + a^2)^2, which makes the weighted columns grow like a^(4-k) and
keeps them well separated; fields with no tail mass (wave packets) skip
the fit entirely and keep the machine-exact pure-FFT path.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np

TAIL_TOL = 0.05          # construction-time ceiling on |f| at the window ends
TEMPLATE_ORDER = 6       # K above; 2K real-dimension-4K fit
WING_FRACTION = 0.8      # |a| >= WING_FRACTION * L counts as tail for gating
GATE_REL = 1e-9          # wing mass below GATE_REL * max|f| skips the fit
GATE_MEAN_REL = 1e-6     # ... provided |integral of f| is also below this * max|f|
TAPER_START = 0.9        # taper is identity for |a| <= TAPER_START * L
CONTRACTION = 1.3        # boundary_limit ladder must contract by this factor

__all__ = [
    "Grid", "BoundaryField", "HalfPlanePoint", "BoundaryLimit",
    "hilbert", "holomorphic_projection", "poisson_extend",
    "holo_derivative", "spectral_derivative", "sobolev_half_seminorm",
    "boundary_limit", "depth_ladder",
]


@dataclass(frozen=True)
class Grid:
    """Uniform nodes a_j = -L + j * spacing, j = 0..n-1, spacing = 2L/n."""

    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.n < 16 or self.n & (self.n - 1) != 0:
            raise ValueError("n must be a power of two, n >= 16")
        # spacing * n must reproduce 2L exactly; true whenever L is a
        # binary-representable value, which every shipped scenario uses
        if self.spacing * self.n != 2.0 * self.L:
            raise ValueError("spacing*n != 2L in floating point; choose binary-friendly L")

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def nodes(self) -> np.ndarray:
        return _workspace(self).alpha


@dataclass(frozen=True)
class HalfPlanePoint:
    """Point x + iy of the closed lower half-plane, y <= 0."""

    x: float
    y: float

    def __post_init__(self):
        if self.y > 0:
            raise ValueError("upper half-plane point")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


class BoundaryField:
    """Samples of a line trace on a Grid.

    decay_class 'decaying' asserts |f| -> 0 at both window ends (checked
    against TAIL_TOL at construction); 'constant_plus_decaying' allows a
    far-field constant, used for Z - a' whose real part tends to a
    (generally nonzero) shift.
    """

    __slots__ = ("grid", "samples", "decay_class")

    def __init__(self, grid: Grid, samples, decay_class: str = "decaying",
                 tail_tol: float = TAIL_TOL):
        samples = np.asarray(samples, dtype=np.complex128)
        if samples.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got {samples.shape}")
        if decay_class not in ("decaying", "constant_plus_decaying"):
            raise ValueError(f"unknown decay_class {decay_class!r}")
        if decay_class == "decaying":
            edge = max(abs(samples[0]), abs(samples[-1]))
            if edge > tail_tol:
                raise ValueError(
                    f"tail magnitude {edge:.3g} exceeds tolerance {tail_tol:.3g}; "
                    "field is not decaying on this window")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "decay_class", decay_class)

    def __setattr__(self, name, value):
        raise AttributeError("BoundaryField is immutable")

    def with_samples(self, samples, decay_class=None) -> "BoundaryField":
        # operator images may decay slower than their input (H of a field
        # with nonzero mean picks up a 1/a tail), so results skip the
        # construction-time tail gate
        return BoundaryField(self.grid, samples,
                             decay_class or self.decay_class,
                             tail_tol=np.inf)


class BoundaryLimit(NamedTuple):
    value: complex
    converged: bool
    error: float


# ---------------------------------------------------------------------------
# Per-grid workspace: template matrices, taper, multipliers.

class _Workspace:
    def __init__(self, grid: Grid):
        L, n = grid.L, grid.n
        h = grid.spacing
        self.grid = grid
        self.h = h
        self.alpha = -L + h * np.arange(n)
        self.alpha.flags.writeable = False
        self.xi = 2.0 * np.pi * np.fft.fftfreq(n, d=h)

        K = TEMPLATE_ORDER
        self.K = K
        # columns phi_1..phi_K, chi_1..chi_K; one extra power for derivatives
        p = self.alpha - 1j
        q = self.alpha + 1j
        self.pow_lower = np.stack([1.0 / p ** k for k in range(1, K + 2)], axis=-1)
        self.pow_upper = np.stack([1.0 / q ** k for k in range(1, K + 2)], axis=-1)
        self.T = np.concatenate([self.pow_lower[:, :K], self.pow_upper[:, :K]], axis=1)
        self.weight = (1.0 + self.alpha ** 2) ** 2
        A = self.T * self.weight[:, None]
        self.col_scale = np.linalg.norm(A, axis=0)
        self.A_normed = A / self.col_scale

        self.taper = np.ones(n)
        edge = np.abs(self.alpha) > TAPER_START * L
        width = (1.0 - TAPER_START) * L
        self.taper[edge] = 0.5 * (1.0 + np.cos(
            np.pi * (np.abs(self.alpha[edge]) - TAPER_START * L) / width))

        self.mult_hilbert = -np.sign(self.xi)
        self.mult_hilbert[n // 2] = 0.0          # Nyquist has no sign
        self.mask_neg = (self.xi < 0).astype(float)  # one-sided projector symbol
        self.mask_neg[n // 2] = 0.0              # keep P = (I+H)/2 at Nyquist too

        self.wing = np.abs(self.alpha) >= WING_FRACTION * L
        self.n_const = max(4, n // 64)           # nodes per side for constant split

    # -- template machinery ------------------------------------------------

    def fit_tails(self, f: np.ndarray) -> np.ndarray:
        """Weighted LS fit of f against the rational templates.

        Returns the 2K coefficients (phi block, then chi block).  Fields
        with negligible wing mass AND negligible mean skip the fit so
        the pure spectral path stays exact for band-limited data.  The
        mean matters because H of a field with integral m has a true
        -i m / (pi a) tail that the fit (via the k = 1 columns) is the
        only machinery able to reproduce; forcing the fit on a pure
        wave packet, conversely, yields large near-canceling template
        coefficients and ruins it.
        """
        fmax = np.max(np.abs(f))
        if fmax == 0.0:
            return np.zeros(2 * self.K, dtype=np.complex128)
        no_wing = np.max(np.abs(f[self.wing])) < GATE_REL * fmax
        no_mean = abs(self.h * np.sum(f)) < GATE_MEAN_REL * fmax
        if no_wing and no_mean:
            return np.zeros(2 * self.K, dtype=np.complex128)
        c, *_ = np.linalg.lstsq(self.A_normed, f * self.weight, rcond=1e-12)
        return c / self.col_scale

    def template_values(self, c) -> np.ndarray:
        return self.T @ c

    def template_hilbert(self, c) -> np.ndarray:
        K = self.K
        return self.T[:, :K] @ c[:K] - self.T[:, K:] @ c[K:]

    def template_project(self, c) -> np.ndarray:
        # P phi = phi, P chi = 0
        return self.T[:, :self.K] @ c[:self.K]

    def template_extend(self, c, z) -> np.ndarray:
        """Harmonic extension of the template part at points z (Im z <= 0).

        phi_k extends holomorphically as (z - i)^{-k}; chi_k is the
        trace of an upper-half-plane function, whose harmonic extension
        downward is (x + i(1 + |y|))^{-k} by Schwarz reflection.
        """
        z = np.asarray(z, dtype=np.complex128)
        K = self.K
        out = np.zeros(z.shape, dtype=np.complex128)
        zr = z.real + 1j * (1.0 + np.abs(z.imag))
        for k in range(1, K + 1):
            out += c[k - 1] / (z - 1j) ** k
            out += c[K + k - 1] / zr ** k
        return out

    def template_extend_dz(self, c, z) -> np.ndarray:
        """d/dz of the holomorphic (phi) part of the extension."""
        z = np.asarray(z, dtype=np.complex128)
        out = np.zeros(z.shape, dtype=np.complex128)
        for k in range(1, self.K + 1):
            out += -k * c[k - 1] / (z - 1j) ** (k + 1)
        return out

    def template_derivative(self, c) -> np.ndarray:
        # d/da phi_k = -k phi_{k+1}, same for chi
        K = self.K
        ks = np.arange(1, K + 1)
        return (self.pow_lower[:, 1:K + 1] @ (-ks * c[:K])
                + self.pow_upper[:, 1:K + 1] @ (-ks * c[K:]))

    # -- operators on raw sample arrays ------------------------------------

    def split(self, f):
        c = self.fit_tails(f)
        return c, f - self.template_values(c)

    def hilbert_raw(self, f):
        c, r = self.split(f)
        spec = np.fft.ifft(self.mult_hilbert * np.fft.fft(self.taper * r))
        return self.template_hilbert(c) + spec

    def project_raw(self, f):
        c, r = self.split(f)
        spec = np.fft.ifft(self.mask_neg * np.fft.fft(self.taper * r))
        return self.template_project(c) + spec

    def derivative_raw(self, f):
        c, r = self.split(f)
        spec = np.fft.ifft(1j * self.xi * np.fft.fft(self.taper * r))
        return self.template_derivative(c) + spec

    def poisson_raw(self, f, y):
        c, r = self.split(f)
        spec = np.fft.ifft(np.exp(-np.abs(self.xi) * abs(y)) * np.fft.fft(self.taper * r))
        return self.template_extend(c, self.alpha + 1j * y) + spec

    def extend_raw(self, f, z):
        """Holomorphic extension of (the projection of) f at interior points.

        Modes with xi < 0 extend as exp(i xi (z + L)); the xi >= 0
        content is the non-holomorphic residual and is dropped, so feed
        fields that already pass the projection test.
        """
        c, r = self.split(f)
        rhat = np.fft.fft(self.taper * r)
        neg = self.mask_neg > 0
        z = np.asarray(z, dtype=np.complex128)
        # fft phases are relative to a_0 = -L, hence the shift
        phase = np.exp(1j * np.outer(z.ravel() + self.grid.L, self.xi[neg]))
        ext = phase @ rhat[neg] / self.grid.n
        out = self.template_extend(c, z.ravel()) + ext
        return out.reshape(z.shape)

    def extend_dz_raw(self, f, z):
        c, r = self.split(f)
        rhat = np.fft.fft(self.taper * r)
        neg = self.mask_neg > 0
        z = np.asarray(z, dtype=np.complex128)
        phase = np.exp(1j * np.outer(z.ravel() + self.grid.L, self.xi[neg]))
        ext = phase @ (1j * self.xi[neg] * rhat[neg]) / self.grid.n
        out = self.template_extend_dz(c, z.ravel()) + ext
        return out.reshape(z.shape)

    def seminorm_half(self, f) -> float:
        fhat = np.fft.fft(self.taper * f)
        return float(np.sqrt(self.h / self.grid.n
                             * np.sum(np.abs(self.xi) * np.abs(fhat) ** 2)))

    def split_constant(self, f):
        m = self.n_const
        const = 0.5 * (np.mean(f[:m]) + np.mean(f[-m:]))
        return const, f - const


@lru_cache(maxsize=8)
def _workspace(grid: Grid) -> _Workspace:
    return _Workspace(grid)


def workspace(grid: Grid) -> _Workspace:
    """Internal accessor used by the dynamics and diagnostics modules."""
    return _workspace(grid)


# ---------------------------------------------------------------------------
# Public operations.

def _require_decaying(f: BoundaryField, op: str):
    if f.decay_class != "decaying":
        raise ValueError(f"{op} requires a decaying field; "
                         f"got decay_class={f.decay_class!r}")


def hilbert(f: BoundaryField) -> BoundaryField:
    """H f under the -sign(xi) convention; H g = g for P_- traces."""
    _require_decaying(f, "hilbert")
    ws = _workspace(f.grid)
    return f.with_samples(ws.hilbert_raw(f.samples))


def holomorphic_projection(f: BoundaryField) -> BoundaryField:
    """P f = (I + H)f / 2, realized with the one-sided spectral symbol.

    On the xi = 0 bin the symbol is taken as 0 for the decaying
    remainder (a decaying trace carries no discrete mean worth keeping),
    while an explicit far-field constant -- allowed by the
    constant_plus_decaying class -- is treated as the trace of a
    constant function on P_- and passes through unchanged.
    """
    ws = _workspace(f.grid)
    if f.decay_class == "constant_plus_decaying":
        const, dev = ws.split_constant(f.samples)
        return f.with_samples(const + ws.project_raw(dev))
    return f.with_samples(ws.project_raw(f.samples))


def poisson_extend(f: BoundaryField, y: float) -> BoundaryField:
    """Convolution with the half-plane Poisson kernel at depth y <= 0."""
    if y > 0:
        raise ValueError("Poisson extension goes downward: y <= 0")
    if y == 0:
        return f
    ws = _workspace(f.grid)
    if f.decay_class == "constant_plus_decaying":
        const, dev = ws.split_constant(f.samples)
        return f.with_samples(const + ws.poisson_raw(dev, y))
    return f.with_samples(ws.poisson_raw(f.samples, y))


def spectral_derivative(f: BoundaryField) -> BoundaryField:
    """d f / d a via the template split plus the spectral multiplier."""
    ws = _workspace(f.grid)
    if f.decay_class == "constant_plus_decaying":
        _, dev = ws.split_constant(f.samples)
        return f.with_samples(ws.derivative_raw(dev))
    return f.with_samples(ws.derivative_raw(f.samples))


def holo_derivative(f: BoundaryField, point: HalfPlanePoint,
                    residual_tol: float = 1e-6) -> complex:
    """d/dz of the holomorphic extension of f at an interior point.

    f must already be a holomorphic trace: the projection residual is
    measured and rejected above residual_tol.  Boundary points are
    rejected; take boundary values through boundary_limit instead.
    """
    _require_decaying(f, "holo_derivative")
    if point.y >= 0:
        raise ValueError("holo_derivative needs a strictly interior point")
    ws = _workspace(f.grid)
    res = np.max(np.abs(ws.project_raw(f.samples) - f.samples))
    if res > residual_tol:
        raise ValueError(f"not a holomorphic trace: |(I-P)f| = {res:.3g}")
    return complex(ws.extend_dz_raw(f.samples, np.array([point.z]))[0])


def sobolev_half_seminorm(f: BoundaryField) -> float:
    """Homogeneous H^{1/2} seminorm, |xi|^{1/2} weight in Fourier."""
    _require_decaying(f, "sobolev_half_seminorm")
    return _workspace(f.grid).seminorm_half(f.samples)


def depth_ladder(grid: Grid, k: int = 7) -> np.ndarray:
    """Default boundary_limit ladder: y = -8 spacing * 2^0 .. 2^{-(k-1)}."""
    return -8.0 * grid.spacing * 0.5 ** np.arange(k)


def boundary_limit(f_interior: Callable[[complex], complex], alpha0: float,
                   depths: Sequence[float]) -> BoundaryLimit:
    """Estimate lim_{y -> 0^-} f(alpha0 + iy) over a depth ladder.

    Aitken extrapolation of the last three ladder values; the flag is
    true when successive differences contract by at least CONTRACTION
    (or have hit the rounding floor).  On a non-contracting ladder the
    last value is still reported, with the last difference as the bar.
    """
    depths = np.asarray(depths, dtype=float)
    if depths.size < 3:
        raise ValueError("boundary_limit needs at least 3 depths")
    if np.any(depths >= 0):
        raise ValueError("depths must be negative")
    vals = np.array([f_interior(complex(alpha0, y)) for y in depths],
                    dtype=np.complex128)
    diffs = np.abs(np.diff(vals))
    scale = max(np.max(np.abs(vals)), 1.0)
    floor = 1e-13 * scale
    converged = True
    for k in range(len(diffs) - 1):
        if diffs[k + 1] <= floor:
            break
        if diffs[k + 1] * CONTRACTION > diffs[k]:
            converged = False
            break
    if not np.all(np.isfinite(vals)):
        return BoundaryLimit(vals[-1], False, float("inf"))
    if diffs[-1] <= floor:
        return BoundaryLimit(complex(vals[-1]), converged, float(diffs[-1]))
    if not converged:
        return BoundaryLimit(complex(vals[-1]), False, float(diffs[-1]))
    # Aitken on the last triple; exact for a geometric tail
    d1 = vals[-2] - vals[-3]
    d2 = vals[-1] - vals[-2]
    denom = d2 - d1
    if abs(denom) < floor:
        return BoundaryLimit(complex(vals[-1]), True, float(diffs[-1]))
    limit = vals[-1] - d2 * d2 / denom
    return BoundaryLimit(complex(limit), True, float(abs(d2 * d2 / denom)))
