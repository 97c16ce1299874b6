"""Scenario configuration: YAML file <-> validated ``ScenarioConfig``.

Every key is optional; omitted keys take the defaults below (750 MHz
carrier, -30 dB reference loss, 6x10 UPA at 3/8-wavelength spacing,
-105 dBm noise, 20 dBm PU power, 20 dB PU SINR target). The IRS sits 2 m
above the origin facing +y, P1 and S1 are redrawn per trial in a 2 m disc
centered 1.5 m in front of its foot, and P2 and S2 stand 50 m away.
"""

import copy
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from ..channel import FadingSpec, NodeGeometry
from ..lowcomplexity import DesignKind
from ..system import SystemParams, db_to_linear, dbm_to_watts

AO_DESIGN = "IrsAO"
ALL_DESIGNS = (AO_DESIGN,) + tuple(k.value for k in DesignKind)

SPEED_OF_LIGHT = 299_792_458.0

# (PU transmitter, SU transmitter) per setup. Setup 1: PR and SR in the
# hotspot; setup 2: PT and SR; setup 3: PR and ST.
SETUP_ROLES = {1: ("p2", "s2"), 2: ("p1", "s2"), 3: ("p2", "s1")}


def _polar(distance, azimuth_deg):
    """Ground-level point, azimuth measured from the IRS broadside (+y) about the IRS foot."""
    a = math.radians(azimuth_deg)
    return [distance * math.sin(a), distance * math.cos(a), 0.0]


DEFAULTS = {
    "setup_id": 1,
    "trials": 50,
    "master_seed": 0,
    "sweep_dbm": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    "designs": list(ALL_DESIGNS),
    "workers": 1,
    "record_timing": False,
    "system": {
        "p_p_dbm": 20.0,
        "noise_dbm": -105.0,
        "gamma_th_db": 20.0,
    },
    "geometry": {
        "carrier_hz": 750e6,
        "rows": 6,
        "cols": 10,
        "spacing": None,  # None: 3/8 of the wavelength
        "irs_position": [0.0, 0.0, 2.0],
        "irs_normal": [0.0, 1.0, 0.0],
        # "hotspot": P1 and S1 redrawn every trial, uniform in a disc in
        # front of the IRS; "fixed": the p1/s1 coordinates below are used
        "placement": "hotspot",
        "hotspot_center": [0.0, 1.5, 0.0],
        "hotspot_radius": 2.0,
        "min_separation": 1.0,
        "p1": None,
        "s1": None,
        # None: far_distance from the IRS foot at -/+ far_azimuth_deg
        "p2": None,
        "s2": None,
        "far_distance": 50.0,
        "far_azimuth_deg": 30.0,
    },
    "fading": {
        "reference_loss_db": -30.0,
        "reference_distance": 1.0,
        "ground": {"path_loss_exponent": 3.0, "rician_factor": 0.0},
        "irs_near": {"path_loss_exponent": 2.0, "rician_factor": math.inf},
        "irs_far": {"path_loss_exponent": 3.0, "rician_factor": 0.0},
    },
    "solver": {
        "init": "random",
        "restarts": 1,
        "outer_tol": 1e-4,
        "max_outer": 50,
        "inner_tol": 1e-5,
        "max_inner": 100,
        "bisection_tol": 1e-8,
        "randomization_count": 1000,
    },
}


class ConfigError(ValueError):
    """Raised for unreadable, unparsable or invalid configuration files."""


@dataclass(frozen=True)
class SolverSettings:
    init: str = "random"
    restarts: int = 1
    outer_tol: float = 1e-4
    max_outer: int = 50
    inner_tol: float = 1e-5
    max_inner: int = 100
    bisection_tol: float = 1e-8
    randomization_count: int = 1000


@dataclass(frozen=True)
class HotspotPlacement:
    """Uniform placement of P1 and S1 in a horizontal disc.

    Draws behind the IRS panel or closer than ``min_separation`` to each
    other are rejected and redrawn.
    """

    center: tuple
    radius: float
    min_separation: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("hotspot radius must be positive")
        if self.min_separation < 0:
            raise ValueError("min_separation must be nonnegative")

    def sample(self, rng, irs_position, irs_normal, max_tries=10_000):
        center = np.asarray(self.center, dtype=float)
        irs_position = np.asarray(irs_position, dtype=float)
        for _ in range(max_tries):
            r = self.radius * np.sqrt(rng.uniform(size=2))
            theta = rng.uniform(0.0, 2.0 * np.pi, size=2)
            pts = center + np.stack([r * np.cos(theta), r * np.sin(theta), np.zeros(2)], axis=1)
            in_front = np.all((pts - irs_position) @ irs_normal > 0.0)
            if in_front and np.linalg.norm(pts[0] - pts[1]) >= self.min_separation:
                return pts[0], pts[1]
        raise ValueError("hotspot disc admits no valid placement")


@dataclass(frozen=True)
class ScenarioConfig:
    setup_id: int
    geometry: NodeGeometry
    fading: dict
    p_p_dbm: float
    noise_dbm: float
    gamma_th_db: float
    sweep_dbm: tuple
    trials: int
    master_seed: int
    designs: tuple
    solver: SolverSettings = field(default_factory=SolverSettings)
    workers: int = 1
    record_timing: bool = False
    placement: HotspotPlacement = None  # None: fixed positions from ``geometry``
    raw: dict = field(default=None, repr=False, compare=False)

    @property
    def n_elements(self):
        return self.geometry.n_elements

    def system_params(self, p_max_dbm):
        """Linear-unit parameters at one sweep point."""
        noise = float(dbm_to_watts(self.noise_dbm))
        return SystemParams(
            p_p=float(dbm_to_watts(self.p_p_dbm)),
            p_max=float(dbm_to_watts(p_max_dbm)),
            sigma2_p=noise,
            sigma2_s=noise,
            gamma_th=float(db_to_linear(self.gamma_th_db)),
            n_elements=self.n_elements,
        )

    def with_overrides(self, **overrides):
        """Re-validate with top-level keys replaced (``None`` values are ignored)."""
        raw = copy.deepcopy(self.raw)
        raw.update({k: v for k, v in overrides.items() if v is not None})
        return config_from_dict(raw)


def _merge(defaults, user, path=""):
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'config'}: expected a mapping, got {type(user).__name__}")
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        name = f"{path}.{key}" if path else str(key)
        if key not in defaults:
            raise ConfigError(f"{name}: unknown field")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, name)
        else:
            out[key] = value
    return out


def _number(raw, name, cast=float):
    value = raw
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        value = math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {raw!r}")
    if cast is int:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{name}: expected an integer, got {raw!r}")
        return int(value)
    return float(value)


def _point(raw, name):
    if not isinstance(raw, (list, tuple)) or len(raw) != 3:
        raise ConfigError(f"{name}: expected a list of 3 coordinates")
    return [_number(x, name) for x in raw]


def config_from_dict(user):
    """Apply defaults to ``user`` (a possibly partial mapping) and validate."""
    raw = _merge(DEFAULTS, {} if user is None else user)

    setup_id = _number(raw["setup_id"], "setup_id", int)
    if setup_id not in SETUP_ROLES:
        raise ConfigError(f"setup_id: must be 1, 2 or 3, got {setup_id}")
    trials = _number(raw["trials"], "trials", int)
    if trials < 1:
        raise ConfigError(f"trials: must be >= 1, got {trials}")
    master_seed = _number(raw["master_seed"], "master_seed", int)
    if master_seed < 0:
        raise ConfigError("master_seed: must be nonnegative")
    workers = _number(raw["workers"], "workers", int)
    if workers < 1:
        raise ConfigError("workers: must be >= 1")
    if not isinstance(raw["record_timing"], bool):
        raise ConfigError("record_timing: expected true or false")

    if not isinstance(raw["sweep_dbm"], (list, tuple)) or not raw["sweep_dbm"]:
        raise ConfigError("sweep_dbm: must be a nonempty list")
    sweep = tuple(_number(x, "sweep_dbm") for x in raw["sweep_dbm"])
    if not all(np.isfinite(sweep)) or any(b <= a for a, b in zip(sweep, sweep[1:])):
        raise ConfigError("sweep_dbm: must be finite and strictly increasing")

    designs = raw["designs"]
    if isinstance(designs, str):
        designs = [d.strip() for d in designs.split(",") if d.strip()]
    if not isinstance(designs, (list, tuple)) or not designs:
        raise ConfigError("designs: must be a nonempty list")
    for d in designs:
        if d not in ALL_DESIGNS:
            raise ConfigError(f"designs: unknown design {d!r}; choose from {', '.join(ALL_DESIGNS)}")
    if len(set(designs)) != len(designs):
        raise ConfigError("designs: duplicate entries")

    sysraw = raw["system"]
    p_p_dbm = _number(sysraw["p_p_dbm"], "system.p_p_dbm")
    noise_dbm = _number(sysraw["noise_dbm"], "system.noise_dbm")
    gamma_th_db = _number(sysraw["gamma_th_db"], "system.gamma_th_db")
    for name, value in (("p_p_dbm", p_p_dbm), ("noise_dbm", noise_dbm), ("gamma_th_db", gamma_th_db)):
        if not np.isfinite(value):
            raise ConfigError(f"system.{name}: must be finite")

    g = raw["geometry"]
    carrier = _number(g["carrier_hz"], "geometry.carrier_hz")
    if not carrier > 0:
        raise ConfigError("geometry.carrier_hz: must be positive")
    wavelength = SPEED_OF_LIGHT / carrier
    spacing = 0.375 * wavelength if g["spacing"] is None else _number(g["spacing"], "geometry.spacing")
    roles = SETUP_ROLES[setup_id]
    if g["placement"] not in ("hotspot", "fixed"):
        raise ConfigError(f"geometry.placement: must be 'hotspot' or 'fixed', got {g['placement']!r}")
    far = _number(g["far_distance"], "geometry.far_distance")
    azimuth = _number(g["far_azimuth_deg"], "geometry.far_azimuth_deg")
    if not far > 0:
        raise ConfigError("geometry.far_distance: must be positive")
    placement = None
    if g["placement"] == "hotspot":
        center = _point(g["hotspot_center"], "geometry.hotspot_center")
        try:
            placement = HotspotPlacement(
                center=tuple(center),
                radius=_number(g["hotspot_radius"], "geometry.hotspot_radius"),
                min_separation=_number(g["min_separation"], "geometry.min_separation"),
            )
        except ValueError as exc:
            raise ConfigError(f"geometry: {exc}") from None
        # nominal positions; every trial draws its own
        half = 0.5 * placement.min_separation + 1e-3
        p1 = [center[0] - half, center[1], center[2]]
        s1 = [center[0] + half, center[1], center[2]]
    else:
        for name in ("p1", "s1"):
            if g[name] is None:
                raise ConfigError(f"geometry.{name}: required when placement is 'fixed'")
        p1, s1 = _point(g["p1"], "geometry.p1"), _point(g["s1"], "geometry.s1")
    p2 = _polar(far, -azimuth) if g["p2"] is None else _point(g["p2"], "geometry.p2")
    s2 = _polar(far, azimuth) if g["s2"] is None else _point(g["s2"], "geometry.s2")
    try:
        geometry = NodeGeometry(
            p1=p1,
            p2=p2,
            s1=s1,
            s2=s2,
            irs_position=_point(g["irs_position"], "geometry.irs_position"),
            irs_normal=_point(g["irs_normal"], "geometry.irs_normal"),
            rows=_number(g["rows"], "geometry.rows", int),
            cols=_number(g["cols"], "geometry.cols", int),
            spacing=spacing,
            wavelength=wavelength,
            pu_tx=roles[0],
            su_tx=roles[1],
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"geometry: {exc}") from None

    f = raw["fading"]
    fading = {}
    for cls in ("ground", "irs_near", "irs_far"):
        try:
            fading[cls] = FadingSpec(
                path_loss_exponent=_number(f[cls]["path_loss_exponent"], f"fading.{cls}.path_loss_exponent"),
                rician_factor=_number(f[cls]["rician_factor"], f"fading.{cls}.rician_factor"),
                reference_loss_db=_number(f["reference_loss_db"], "fading.reference_loss_db"),
                reference_distance=_number(f["reference_distance"], "fading.reference_distance"),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"fading.{cls}: {exc}") from None

    s = raw["solver"]
    if s["init"] not in ("random", "zeros"):
        raise ConfigError(f"solver.init: must be 'random' or 'zeros', got {s['init']!r}")
    solver = SolverSettings(
        init=s["init"],
        restarts=_number(s["restarts"], "solver.restarts", int),
        outer_tol=_number(s["outer_tol"], "solver.outer_tol"),
        max_outer=_number(s["max_outer"], "solver.max_outer", int),
        inner_tol=_number(s["inner_tol"], "solver.inner_tol"),
        max_inner=_number(s["max_inner"], "solver.max_inner", int),
        bisection_tol=_number(s["bisection_tol"], "solver.bisection_tol"),
        randomization_count=_number(s["randomization_count"], "solver.randomization_count", int),
    )
    for name in ("restarts", "max_outer", "max_inner"):
        if getattr(solver, name) < 1:
            raise ConfigError(f"solver.{name}: must be >= 1")
    for name in ("outer_tol", "inner_tol", "bisection_tol"):
        if not getattr(solver, name) > 0:
            raise ConfigError(f"solver.{name}: must be positive")
    if solver.randomization_count < 0:
        raise ConfigError("solver.randomization_count: must be >= 0")

    raw["designs"] = list(designs)
    return ScenarioConfig(
        setup_id=setup_id,
        geometry=geometry,
        fading=fading,
        p_p_dbm=p_p_dbm,
        noise_dbm=noise_dbm,
        gamma_th_db=gamma_th_db,
        sweep_dbm=sweep,
        trials=trials,
        master_seed=master_seed,
        designs=tuple(designs),
        solver=solver,
        workers=workers,
        record_timing=raw["record_timing"],
        placement=placement,
        raw=raw,
    )


def parse_config(text, source="<string>"):
    try:
        user = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}:{mark.column + 1}" if mark is not None else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: parse error: {problem}") from None
    return config_from_dict({} if user is None else user)


def load_config(path):
    """Read, parse and validate a YAML scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    return parse_config(text, str(path))


def dump_config(config):
    return yaml.safe_dump(config.raw, sort_keys=False)


def save_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(config))
