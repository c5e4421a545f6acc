"""Flat ``section.key = value`` configuration files.

Each physical quantity has one *canonical* key holding the linear / SI value
stored in :class:`~geoleo.scenario.ScenarioConfig`, plus optional convenience
keys in dB, degrees or satellite counts that are converted once at parse
time.  At most one key per quantity may be given.  :func:`dump_config` writes
canonical keys only, so ``parse_config_text(dump_config(...))`` reproduces
the configuration exactly.

Example::

    # Ka-band hybrid scenario
    geo.count = 1000
    geo.eirp_density_dbw_mhz = 40
    leo.count = 100
    sweep.variable = tau_db
    sweep.grid = -10:20:5
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytic import QuadratureSpec
from .channel import ChannelParams, LinkBudget, eirp_density_to_power
from .geometry import OrbitGeometry, TerminalLocation
from .scenario import (
    GEO,
    LEO,
    Constellation,
    ScenarioConfig,
    geo_density_from_count,
    leo_density_from_count,
)

SWEEP_VARIABLES = ("tau_db", "latitude_deg", "bias_ratio_db", "leo_count", "geo_count", "pathloss_ratio")
MODES = ("analytic", "montecarlo", "validate")
ASSOCIATION_MODES = ("marginal", "joint")

_TYPE_DEFAULTS = {
    GEO: {"count": 1000.0, "eirp_density_dbw_mhz": 40.0, "pathloss_exp": 2.7},
    LEO: {"count": 100.0, "eirp_density_dbw_mhz": 4.0, "pathloss_exp": 3.0},
}

_SCALAR_KEYS = {
    "earth.radius_km",
    "geo.altitude_km",
    "leo.altitude_km",
    "terminal.latitude_deg",
    "terminal.latitude_rad",
    "terminal.longitude_deg",
    "terminal.longitude_rad",
    "terminal.rx_gain_db",
    "channel.carrier_freq_hz",
    "channel.nakagami_m",
    "channel.noise_psd_dbm_hz",
    "channel.bandwidth_hz",
    "analysis.tau_db",
    "analysis.z_threshold",
    "analysis.rel_tol",
}
for _t in (GEO, LEO):
    _SCALAR_KEYS |= {
        f"{_t}.count",
        f"{_t}.density_per_km" if _t == GEO else f"{_t}.density_per_km2",
        f"{_t}.eirp_density_dbw_mhz",
        f"{_t}.tx_power_dbw",
        f"{_t}.tx_power_w",
        f"{_t}.tx_gain_dbi",
        f"{_t}.mainlobe_gain",
        f"{_t}.misalignment_db",
        f"{_t}.interferer_gain",
        f"{_t}.bias_db",
        f"{_t}.bias",
        f"{_t}.pathloss_exp",
    }
_WORD_KEYS = {"sweep.variable", "sweep.mode", "analysis.association"}
_LIST_KEYS = {"sweep.grid"}
KNOWN_KEYS = frozenset(_SCALAR_KEYS | _WORD_KEYS | _LIST_KEYS)

# quantity -> mutually exclusive keys
_EXCLUSIVE = [
    ("terminal.latitude_deg", "terminal.latitude_rad"),
    ("terminal.longitude_deg", "terminal.longitude_rad"),
]
for _t in (GEO, LEO):
    dens = f"{_t}.density_per_km" if _t == GEO else f"{_t}.density_per_km2"
    _EXCLUSIVE += [
        (f"{_t}.count", dens),
        (f"{_t}.eirp_density_dbw_mhz", f"{_t}.tx_power_dbw", f"{_t}.tx_power_w"),
        (f"{_t}.tx_gain_dbi", f"{_t}.mainlobe_gain"),
        (f"{_t}.misalignment_db", f"{_t}.interferer_gain"),
        (f"{_t}.bias_db", f"{_t}.bias"),
    ]


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "tau_db"
    grid: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    mode: str = "analytic"

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable: must be one of {', '.join(SWEEP_VARIABLES)}, got {self.variable!r}")
        if self.mode not in MODES:
            raise ConfigError(f"sweep.mode: must be one of {', '.join(MODES)}, got {self.mode!r}")
        if len(self.grid) == 0:
            raise ConfigError("sweep.grid: grid must not be empty")
        diffs = np.diff(np.asarray(self.grid, dtype=float))
        if len(diffs) and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ConfigError("sweep.grid: grid must be strictly monotone")


@dataclass(frozen=True)
class RunSettings:
    tau_db: float = 0.0
    z_threshold: float = 4.0
    association: str = "marginal"
    rel_tol: float = 1e-7

    def __post_init__(self) -> None:
        if self.association not in ASSOCIATION_MODES:
            raise ConfigError(
                f"analysis.association: must be one of {', '.join(ASSOCIATION_MODES)}, got {self.association!r}"
            )
        if not self.z_threshold > 0:
            raise ConfigError("analysis.z_threshold: must be positive")
        if not 0 < self.rel_tol < 1:
            raise ConfigError("analysis.rel_tol: must lie in (0, 1)")

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.rel_tol, abs_tol=self.rel_tol * 1e-3)


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    sweep: SweepSpec
    settings: RunSettings


def _parse_grid(key: str, text: str) -> tuple[float, ...]:
    text = text.strip()
    if not text:
        raise ConfigError(f"{key}: grid must not be empty")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: range syntax is start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{key}: non-numeric range {text!r}") from None
        if step == 0 or (stop - start) / step < 0:
            raise ConfigError(f"{key}: step {step} does not move from {start} toward {stop}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 12)) for i in range(n))
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: non-numeric grid value in {text!r}") from None


def _read_pairs(text: str, source: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{key}: unknown key ({source}:{lineno})")
        if key in pairs:
            raise ConfigError(f"{key}: given twice ({source}:{lineno})")
        pairs[key] = value
    return pairs


def _num(pairs: dict[str, str], key: str, default=None):
    if key not in pairs:
        return default
    try:
        return float(pairs[key])
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {pairs[key]!r}") from None


def _build(key: str, factory, *args, **kwargs):
    """Construct a domain object, prefixing validation errors with ``key``."""
    try:
        return factory(*args, **kwargs)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _link(kind: str, pairs: dict[str, str], channel: ChannelParams, rx_gain_db: float) -> LinkBudget:
    p = f"{kind}."
    defaults = _TYPE_DEFAULTS[kind]
    tx_gain_db = _num(pairs, p + "tx_gain_dbi", 0.0)
    mainlobe = _num(pairs, p + "mainlobe_gain")
    if mainlobe is None:
        mainlobe = 10.0 ** ((tx_gain_db + rx_gain_db) / 10.0)
    tx_power = _num(pairs, p + "tx_power_w")
    if tx_power is None and p + "tx_power_dbw" in pairs:
        tx_power = 10.0 ** (_num(pairs, p + "tx_power_dbw") / 10.0)
    if tx_power is None:
        eirp = _num(pairs, p + "eirp_density_dbw_mhz", defaults["eirp_density_dbw_mhz"])
        tx_power = eirp_density_to_power(eirp, 10.0 ** (tx_gain_db / 10.0), channel.bandwidth_hz)
    interferer = _num(pairs, p + "interferer_gain")
    if interferer is None:
        interferer = mainlobe * 10.0 ** (-_num(pairs, p + "misalignment_db", 30.0) / 10.0)
    bias = _num(pairs, p + "bias")
    if bias is None:
        bias = 10.0 ** (_num(pairs, p + "bias_db", 0.0) / 10.0)
    alpha = _num(pairs, p + "pathloss_exp", defaults["pathloss_exp"])
    return _build(
        kind,
        LinkBudget,
        tx_power_w=tx_power,
        mainlobe_gain=mainlobe,
        interferer_gain=interferer,
        bias=bias,
        pathloss_exp=alpha,
    )


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    pairs = _read_pairs(text, source)
    for group in _EXCLUSIVE:
        given = [k for k in group if k in pairs]
        if len(given) > 1:
            raise ConfigError(f"{given[1]}: conflicts with {given[0]} (give only one)")

    geom = _build(
        "geometry",
        OrbitGeometry,
        earth_radius_km=_num(pairs, "earth.radius_km", 6378.0),
        geo_altitude_km=_num(pairs, "geo.altitude_km", 35786.0),
        leo_altitude_km=_num(pairs, "leo.altitude_km", 600.0),
    )
    if "terminal.latitude_rad" in pairs:
        lat = _num(pairs, "terminal.latitude_rad")
    else:
        lat = math.radians(_num(pairs, "terminal.latitude_deg", 0.0))
    if "terminal.longitude_rad" in pairs:
        lon = _num(pairs, "terminal.longitude_rad")
    else:
        lon = math.radians(_num(pairs, "terminal.longitude_deg", 0.0))
    terminal = _build("terminal", TerminalLocation, lat, lon)

    m_raw = _num(pairs, "channel.nakagami_m", 1.0)
    if m_raw != int(m_raw):
        raise ConfigError(
            f"channel.nakagami_m: must be an integer (the coverage expressions sum over i = 1..m), got {m_raw:g}"
        )
    channel = _build(
        "channel",
        ChannelParams,
        carrier_freq_hz=_num(pairs, "channel.carrier_freq_hz", 20e9),
        nakagami_m=int(m_raw),
        noise_psd_dbm_hz=_num(pairs, "channel.noise_psd_dbm_hz", -174.0),
        bandwidth_hz=_num(pairs, "channel.bandwidth_hz", 30e6),
    )
    rx_gain_db = _num(pairs, "terminal.rx_gain_db", 0.0)

    constellations = {}
    for kind in (GEO, LEO):
        dens_key = f"{kind}.density_per_km" if kind == GEO else f"{kind}.density_per_km2"
        density = _num(pairs, dens_key)
        if density is None:
            count = _num(pairs, f"{kind}.count", _TYPE_DEFAULTS[kind]["count"])
            if count < 0:
                raise ConfigError(f"{kind}.count: must be nonnegative, got {count:g}")
            density = (geo_density_from_count if kind == GEO else leo_density_from_count)(count, geom)
        link = _link(kind, pairs, channel, rx_gain_db)
        constellations[kind] = _build(dens_key, Constellation, density, link)

    scenario = ScenarioConfig(
        geo=constellations[GEO], leo=constellations[LEO], geom=geom, terminal=terminal, channel=channel
    )
    sweep = SweepSpec(
        variable=pairs.get("sweep.variable", SweepSpec.variable),
        grid=_parse_grid("sweep.grid", pairs["sweep.grid"]) if "sweep.grid" in pairs else SweepSpec.grid,
        mode=pairs.get("sweep.mode", SweepSpec.mode),
    )
    settings = RunSettings(
        tau_db=_num(pairs, "analysis.tau_db", 0.0),
        z_threshold=_num(pairs, "analysis.z_threshold", 4.0),
        association=pairs.get("analysis.association", "marginal"),
        rel_tol=_num(pairs, "analysis.rel_tol", 1e-7),
    )
    return RunConfig(scenario, sweep, settings)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_config_text(text, str(path))


def config_to_dict(run: RunConfig) -> dict[str, object]:
    """Canonical flat key/value view of a run configuration."""
    s = run.scenario
    out: dict[str, object] = {
        "earth.radius_km": s.geom.earth_radius_km,
        "geo.altitude_km": s.geom.geo_altitude_km,
        "leo.altitude_km": s.geom.leo_altitude_km,
        "terminal.latitude_rad": s.terminal.latitude,
        "terminal.longitude_rad": s.terminal.longitude,
        "channel.carrier_freq_hz": s.channel.carrier_freq_hz,
        "channel.nakagami_m": s.channel.nakagami_m,
        "channel.noise_psd_dbm_hz": s.channel.noise_psd_dbm_hz,
        "channel.bandwidth_hz": s.channel.bandwidth_hz,
    }
    for kind in (GEO, LEO):
        c = s.constellation(kind)
        out[f"{kind}.density_per_km" if kind == GEO else f"{kind}.density_per_km2"] = c.density
        out[f"{kind}.tx_power_w"] = c.link.tx_power_w
        out[f"{kind}.mainlobe_gain"] = c.link.mainlobe_gain
        out[f"{kind}.interferer_gain"] = c.link.interferer_gain
        out[f"{kind}.bias"] = c.link.bias
        out[f"{kind}.pathloss_exp"] = c.link.pathloss_exp
    out["sweep.variable"] = run.sweep.variable
    out["sweep.mode"] = run.sweep.mode
    out["sweep.grid"] = list(run.sweep.grid)
    out["analysis.tau_db"] = run.settings.tau_db
    out["analysis.z_threshold"] = run.settings.z_threshold
    out["analysis.association"] = run.settings.association
    out["analysis.rel_tol"] = run.settings.rel_tol
    return out


def _fmt(value) -> str:
    if isinstance(value, list):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(run: RunConfig) -> str:
    lines = ["# canonical geoleo configuration (linear units, radians)"]
    lines += [f"{k} = {_fmt(v)}" for k, v in config_to_dict(run).items()]
    return "\n".join(lines) + "\n"


DEFAULT_CONFIG_TEXT = """\
# Ka-band hybrid GEO-LEO downlink, snapshot defaults
earth.radius_km = 6378
geo.altitude_km = 35786
leo.altitude_km = 600

terminal.latitude_deg = 0
terminal.longitude_deg = 0
terminal.rx_gain_db = 0          # handheld, omnidirectional

# average satellite counts -> densities (per km of orbit / per km^2 of shell)
# note: more GEO than LEO satellites is unusual but kept as the reference setting
geo.count = 1000
leo.count = 100

geo.eirp_density_dbw_mhz = 40
leo.eirp_density_dbw_mhz = 4
geo.tx_gain_dbi = 0
leo.tx_gain_dbi = 0
geo.misalignment_db = 30         # interferer beams 30 dB below the main lobe
leo.misalignment_db = 30
geo.bias_db = 0
leo.bias_db = 0
geo.pathloss_exp = 2.7
leo.pathloss_exp = 3.0

channel.carrier_freq_hz = 20e9
channel.bandwidth_hz = 30e6
channel.noise_psd_dbm_hz = -174
channel.nakagami_m = 1

sweep.variable = tau_db
sweep.grid = -10:20:5
sweep.mode = analytic

analysis.tau_db = 0
analysis.z_threshold = 4
analysis.association = marginal
"""


def default_run_config() -> RunConfig:
    return parse_config_text(DEFAULT_CONFIG_TEXT, "<default>")
