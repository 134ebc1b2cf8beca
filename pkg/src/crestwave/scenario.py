"""Scenario files and snapshot files.

A scenario is a plain-text description of one experiment: the grid, the
interface family, the initial velocity, the time window, and the ladder
of mollification widths.  One ``key = value`` per line, ``#`` starts a
comment, keys are dotted paths.  The format is deliberately dumb so that
regression baselines diff cleanly.

A snapshot is one boundary state on one mollification level, written as
a text table: header lines, then one row per node with alpha,
Re(Z - alpha'), Im(Z - alpha'), Re Zbar_t, Im Zbar_t, then one row per
marker.  All floats go through %.17g, which round-trips IEEE doubles
exactly, so write/read is bit-exact and a re-run can be byte-compared.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

import numpy as np

from .field import Grid
from .geometry import (VelocityProfile, build_bump_map, build_corner_map,
                       build_cusp_map, build_flat_map)
from .dynamics import DEFAULT_CEILING, WaveState


class ScenarioError(ValueError):
    """Malformed scenario text; carries the offending key when known."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


_REQUIRED = object()

# key -> (attribute, parser, default); registry order is the canonical
# serialization order, so the scenario hash is stable under reformatting.
_KEYS: dict = {}


def _register(key, parser, default):
    _KEYS[key] = (key.replace(".", "_"), parser, default)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_eps_list(text: str):
    vals = tuple(float(tok) for tok in text.replace(",", " ").split())
    if not vals:
        raise ValueError("empty list")
    return vals


_register("grid.L", float, _REQUIRED)
_register("grid.n", int, _REQUIRED)
_register("initial.kind", str, _REQUIRED)
_register("corner.nu", float, None)
_register("corner.x0", float, 0.0)
_register("corner.R", float, 1.0)
_register("cusp.c", float, 2.0)
_register("bump.a", float, 0.1)
_register("bump.w", float, 1.0)
_register("bump.x0", float, 0.0)
_register("velocity.kind", str, "zero")
_register("velocity.mu", float, 0.05)
_register("velocity.k", int, 2)
_register("time.dt", float, _REQUIRED)
_register("time.tmax", float, _REQUIRED)
_register("time.output_every", int, 1)
_register("epsilons", _parse_eps_list, _REQUIRED)
_register("output.dir", str, "out")
_register("monitors.ceiling", float, DEFAULT_CEILING)
_register("allow_inadmissible", _parse_bool, False)

_KINDS = ("flat", "bump", "corner", "cusp")
_VEL_KINDS = ("zero", "pole")


@dataclass
class Scenario:
    grid_L: float = 0.0
    grid_n: int = 0
    initial_kind: str = ""
    corner_nu: float | None = None
    corner_x0: float = 0.0
    corner_R: float = 1.0
    cusp_c: float = 2.0
    bump_a: float = 0.1
    bump_w: float = 1.0
    bump_x0: float = 0.0
    velocity_kind: str = "zero"
    velocity_mu: float = 0.05
    velocity_k: int = 2
    time_dt: float = 0.0
    time_tmax: float = 0.0
    time_output_every: int = 1
    epsilons: tuple = ()
    output_dir: str = "out"
    monitors_ceiling: float = DEFAULT_CEILING
    allow_inadmissible: bool = False

    @property
    def spacing(self) -> float:
        return 2.0 * self.grid_L / self.grid_n

    def grid(self) -> Grid:
        return Grid(L=self.grid_L, n=self.grid_n)


def parse_scenario_text(text: str) -> Scenario:
    """Parse scenario text into a validated Scenario."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _KEYS:
            raise ScenarioError(f"unknown scenario key: {key}", key=key)
        if key in seen:
            raise ScenarioError(f"duplicate scenario key: {key}", key=key)
        _, parser, _ = _KEYS[key]
        try:
            seen[key] = parser(value)
        except ValueError as exc:
            raise ScenarioError(f"bad value for {key}: {exc}", key=key) from exc

    kwargs = {}
    for key, (attr, _, default) in _KEYS.items():
        if key in seen:
            kwargs[attr] = seen[key]
        elif default is _REQUIRED:
            raise ScenarioError(f"missing required scenario key: {key}", key=key)
        else:
            kwargs[attr] = default
    scen = Scenario(**kwargs)
    validate_scenario(scen)
    return scen


def parse_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario_text(fh.read())


def validate_scenario(scen: Scenario):
    """Structural invariants; raises ScenarioError naming the bad key."""
    if scen.initial_kind not in _KINDS:
        raise ScenarioError(f"initial.kind must be one of {_KINDS}, "
                            f"got {scen.initial_kind!r}", key="initial.kind")
    if scen.velocity_kind not in _VEL_KINDS:
        raise ScenarioError(f"velocity.kind must be one of {_VEL_KINDS}, "
                            f"got {scen.velocity_kind!r}", key="velocity.kind")
    if scen.grid_L <= 0.0:
        raise ScenarioError("grid.L must be positive", key="grid.L")
    if scen.grid_n < 16 or scen.grid_n % 2:
        raise ScenarioError("grid.n must be even and at least 16", key="grid.n")
    if scen.initial_kind == "corner" and scen.corner_nu is None:
        raise ScenarioError("corner scenarios need corner.nu", key="corner.nu")
    if scen.time_dt <= 0.0:
        raise ScenarioError("time.dt must be positive", key="time.dt")
    if scen.time_tmax < 0.0:
        raise ScenarioError("time.tmax must not be negative", key="time.tmax")
    if scen.time_dt > 0.5 * scen.spacing:
        raise ScenarioError(
            f"time.dt = {scen.time_dt:g} exceeds half the spacing "
            f"{scen.spacing:g}", key="time.dt")
    if scen.time_output_every < 1:
        raise ScenarioError("time.output_every must be at least 1",
                            key="time.output_every")
    if scen.monitors_ceiling <= 0.0:
        raise ScenarioError("monitors.ceiling must be positive",
                            key="monitors.ceiling")
    eps = scen.epsilons
    if any(e <= 0.0 or e > 1.0 for e in eps):
        raise ScenarioError("epsilons must lie in (0, 1]", key="epsilons")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ScenarioError("epsilons must decrease strictly", key="epsilons")
    floor = 8.0 * scen.spacing
    if any(e < floor for e in eps):
        raise ScenarioError(
            f"every epsilon must be at least 8 spacings = {floor:g}",
            key="epsilons")


def canonical_text(scen: Scenario) -> str:
    """Scenario re-serialized in registry order; hash input.

    output.dir is omitted: the hash identifies the experiment, and where
    its artifacts land is not part of the experiment.
    """
    lines = []
    for key, (attr, _, _) in _KEYS.items():
        val = getattr(scen, attr)
        if val is None or key == "output.dir":
            continue
        if key == "epsilons":
            text = ", ".join(repr(v) for v in val)
        elif isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def scenario_hash(scen: Scenario) -> str:
    return hashlib.sha256(canonical_text(scen).encode()).hexdigest()[:12]


def build_map(scen: Scenario):
    """The interface family named by the scenario.

    May raise InadmissibleGeometry (corner too steep without the
    override) or GeometryRejection; the driver maps those to exit 3.
    """
    kind = scen.initial_kind
    if kind == "flat":
        return build_flat_map()
    if kind == "bump":
        return build_bump_map(a=scen.bump_a, w=scen.bump_w, x0=scen.bump_x0)
    if kind == "corner":
        return build_corner_map(nu=scen.corner_nu, x0=scen.corner_x0,
                                R=scen.corner_R,
                                allow_inadmissible=scen.allow_inadmissible)
    return build_cusp_map(c=scen.cusp_c)


def build_velocity(scen: Scenario) -> VelocityProfile:
    return VelocityProfile(kind=scen.velocity_kind, mu=scen.velocity_mu,
                           k=scen.velocity_k)


# ---------------------------------------------------------------------------
# snapshot files


@dataclass
class Snapshot:
    """One boundary state as stored on disk.

    ``z_dev`` is the full deviation Z - alpha' including the far-field
    constant; the constant itself is repeated in the header so a loader
    can split the state the way the stepper keeps it.  Marker columns
    carry the transported parameters and both accumulated line
    integrals.
    """

    t: float
    eps: float
    L: float
    n: int
    scenario: str
    offset: complex
    alpha: np.ndarray
    z_dev: np.ndarray
    ztbar: np.ndarray
    marker_alpha0: np.ndarray
    markers: np.ndarray
    angle_int: np.ndarray
    log_w: np.ndarray

    def grid(self) -> Grid:
        return Grid(L=self.L, n=self.n)


def snapshot_from_state(state: WaveState, scen_hash: str) -> Snapshot:
    return Snapshot(
        t=state.t, eps=state.eps, L=state.grid.L, n=state.grid.n,
        scenario=scen_hash, offset=state.offset,
        alpha=state.grid.nodes,
        z_dev=state.dev + state.offset,
        ztbar=state.ztbar,
        marker_alpha0=state.marker_alpha0,
        markers=state.markers,
        angle_int=state.angle_int,
        log_w=state.log_deriv_int,
    )


def snapshot_to_state(snap: Snapshot) -> WaveState:
    return WaveState(
        t=snap.t, eps=snap.eps, grid=snap.grid(),
        dev=snap.z_dev - snap.offset,
        ztbar=snap.ztbar.copy(),
        offset=snap.offset,
        marker_alpha0=snap.marker_alpha0.copy(),
        markers=snap.markers.copy(),
        angle_int=snap.angle_int.copy(),
        log_deriv_int=snap.log_w.copy(),
        holo_residual=float("nan"),
    )


def _g17(x: float) -> str:
    return f"{x:.17g}"


def write_snapshot(path, snap: Snapshot):
    lines = [
        "# boundary snapshot",
        f"t = {_g17(snap.t)}",
        f"eps = {_g17(snap.eps)}",
        f"L = {_g17(snap.L)}",
        f"n = {snap.n}",
        f"scenario = {snap.scenario}",
        f"offset_re = {_g17(snap.offset.real)}",
        f"offset_im = {_g17(snap.offset.imag)}",
        "# alpha  re(Z-alpha)  im(Z-alpha)  re(Zbar_t)  im(Zbar_t)",
    ]
    for a, z, w in zip(snap.alpha, snap.z_dev, snap.ztbar):
        lines.append(" ".join(_g17(v) for v in (a, z.real, z.imag,
                                                w.real, w.imag)))
    lines.append("# markers: alpha0  h  angle  w_re  w_im")
    for a0, h, th, w in zip(snap.marker_alpha0, snap.markers,
                            snap.angle_int, snap.log_w):
        lines.append(" ".join(_g17(v) for v in (a0, h, th, w.real, w.imag)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot(path) -> Snapshot:
    header = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, value = line.partition("=")
                header[key.strip()] = value.strip()
            else:
                rows.append([float(tok) for tok in line.split()])
    try:
        t = float(header["t"])
        eps = float(header["eps"])
        L = float(header["L"])
        n = int(header["n"])
        scen = header["scenario"]
        offset = complex(float(header["offset_re"]),
                         float(header["offset_im"]))
    except KeyError as exc:
        raise ScenarioError(f"snapshot {path}: missing header {exc}") from exc
    if len(rows) < n:
        raise ScenarioError(f"snapshot {path}: expected {n} node rows, "
                            f"found {len(rows)}")
    body = np.asarray(rows[:n], dtype=float)
    mark = np.asarray(rows[n:], dtype=float).reshape(-1, 5)
    return Snapshot(
        t=t, eps=eps, L=L, n=n, scenario=scen, offset=offset,
        alpha=body[:, 0],
        z_dev=body[:, 1] + 1j * body[:, 2],
        ztbar=body[:, 3] + 1j * body[:, 4],
        marker_alpha0=mark[:, 0],
        markers=mark[:, 1],
        angle_int=mark[:, 2],
        log_w=mark[:, 3] + 1j * mark[:, 4],
    )
