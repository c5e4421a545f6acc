"""Network scenario description shared by the analytic and simulation paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .channel import ChannelParams, LinkBudget, eirp_density_to_power
from .geometry import OrbitGeometry, TerminalLocation

GEO = "geo"
LEO = "leo"
SAT_TYPES = (GEO, LEO)


def other(kind: str) -> str:
    if kind == GEO:
        return LEO
    if kind == LEO:
        return GEO
    raise ValueError(f"unknown satellite type {kind!r}")


@dataclass(frozen=True)
class Constellation:
    """Density (per km of orbit for GEO, per km^2 of shell for LEO) plus link budget."""

    density: float
    link: LinkBudget

    def __post_init__(self) -> None:
        if not (math.isfinite(self.density) and self.density >= 0):
            raise ValueError(f"density must be nonnegative, got {self.density!r}")


def geo_density_from_count(count: float, geom: OrbitGeometry) -> float:
    return count / (2.0 * math.pi * geom.geo_radius_km)


def leo_density_from_count(count: float, geom: OrbitGeometry) -> float:
    return count / (4.0 * math.pi * geom.leo_radius_km**2)


def _default_geom() -> OrbitGeometry:
    return OrbitGeometry()


@dataclass(frozen=True)
class ScenarioConfig:
    geo: Constellation
    leo: Constellation
    geom: OrbitGeometry = field(default_factory=_default_geom)
    terminal: TerminalLocation = field(default_factory=TerminalLocation)
    channel: ChannelParams = field(default_factory=ChannelParams)

    def constellation(self, kind: str) -> Constellation:
        if kind == GEO:
            return self.geo
        if kind == LEO:
            return self.leo
        raise ValueError(f"unknown satellite type {kind!r}")

    def with_density(self, kind: str, density: float) -> "ScenarioConfig":
        c = self.constellation(kind)
        return replace(self, **{kind: replace(c, density=density)})

    def with_link(self, kind: str, **changes) -> "ScenarioConfig":
        c = self.constellation(kind)
        return replace(self, **{kind: replace(c, link=replace(c.link, **changes))})

    def with_latitude(self, latitude: float) -> "ScenarioConfig":
        return replace(self, terminal=replace(self.terminal, latitude=latitude))

    def with_nakagami(self, m: int) -> "ScenarioConfig":
        return replace(self, channel=replace(self.channel, nakagami_m=m))


def default_scenario(
    *,
    geo_count: float = 1000,
    leo_count: float = 100,
    geo_eirp_density_dbw_mhz: float = 40.0,
    leo_eirp_density_dbw_mhz: float = 4.0,
    geo_pathloss_exp: float = 2.7,
    leo_pathloss_exp: float = 3.0,
    misalignment_db: float = 30.0,
    rx_gain_db: float = 0.0,
    geo_bias_db: float = 0.0,
    nakagami_m: int = 1,
    latitude_deg: float = 0.0,
) -> ScenarioConfig:
    """Ka-band hybrid scenario with the default constellation sizes.

    Transmit antennas are taken as 0 dBi so the EIRP lands entirely in the
    transmit power; only the product P_t * G_0 enters any result.
    """
    geom = OrbitGeometry()
    channel = ChannelParams(nakagami_m=nakagami_m)
    g_r = 10.0 ** (rx_gain_db / 10.0)
    ratio = 10.0 ** (-misalignment_db / 10.0)

    def link(eirp_db: float, alpha: float, bias_db: float) -> LinkBudget:
        p_t = eirp_density_to_power(eirp_db, 1.0, channel.bandwidth_hz)
        return LinkBudget(
            tx_power_w=p_t,
            mainlobe_gain=g_r,
            interferer_gain=g_r * ratio,
            bias=10.0 ** (bias_db / 10.0),
            pathloss_exp=alpha,
        )

    return ScenarioConfig(
        geo=Constellation(geo_density_from_count(geo_count, geom), link(geo_eirp_density_dbw_mhz, geo_pathloss_exp, geo_bias_db)),
        leo=Constellation(leo_density_from_count(leo_count, geom), link(leo_eirp_density_dbw_mhz, leo_pathloss_exp, 0.0)),
        geom=geom,
        terminal=TerminalLocation.from_degrees(latitude_deg, 0.0),
        channel=channel,
    )
