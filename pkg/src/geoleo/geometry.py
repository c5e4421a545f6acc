"""Earth / geostationary-orbit / LEO-shell geometry.

Distances are in km and angles in radians throughout.  The geostationary
orbit is the equatorial circle of radius ``r_E + a_G``; LEO satellites live
on the sphere of radius ``r_E + a_L``.  A satellite is visible when it is on
or above the terminal's local horizontal plane (0 deg elevation mask).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_KM = 6378.0
GEO_ALTITUDE_KM = 35786.0
LEO_ALTITUDE_KM = 600.0

# Latitudes this close to the GEO invisibility boundary are treated as invisible.
POLAR_MARGIN_RAD = 1e-9


class GeoInvisibleError(ValueError):
    """The terminal latitude is beyond the GEO visibility limit."""


class OutsideSupportError(ValueError):
    """A distance argument lies outside the support of the quantity requested."""


@dataclass(frozen=True)
class TerminalLocation:
    latitude: float = 0.0
    longitude: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.latitude) or abs(self.latitude) > math.pi / 2 + 1e-12:
            raise ValueError(f"latitude must lie in [-pi/2, pi/2], got {self.latitude!r}")
        if not math.isfinite(self.longitude):
            raise ValueError(f"longitude must be finite, got {self.longitude!r}")
        # normalise longitude into [0, 2pi)
        lon = self.longitude % (2 * math.pi)
        if lon != self.longitude:
            object.__setattr__(self, "longitude", lon)

    @classmethod
    def from_degrees(cls, latitude_deg: float, longitude_deg: float = 0.0) -> "TerminalLocation":
        return cls(math.radians(latitude_deg), math.radians(longitude_deg))


@dataclass(frozen=True)
class OrbitGeometry:
    earth_radius_km: float = EARTH_RADIUS_KM
    geo_altitude_km: float = GEO_ALTITUDE_KM
    leo_altitude_km: float = LEO_ALTITUDE_KM

    def __post_init__(self) -> None:
        for name in ("earth_radius_km", "geo_altitude_km", "leo_altitude_km"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.geo_altitude_km <= self.leo_altitude_km:
            raise ValueError("geo_altitude_km must exceed leo_altitude_km")

    @property
    def geo_radius_km(self) -> float:
        return self.earth_radius_km + self.geo_altitude_km

    @property
    def leo_radius_km(self) -> float:
        return self.earth_radius_km + self.leo_altitude_km


@dataclass(frozen=True)
class DistanceBounds:
    r_min_km: float
    r_vis_max_km: float


def terminal_position(loc: TerminalLocation, geom: OrbitGeometry) -> np.ndarray:
    """Cartesian position of the terminal on the Earth's surface (km)."""
    r_e = geom.earth_radius_km
    cphi = math.cos(loc.latitude)
    return np.array(
        [
            r_e * cphi * math.cos(loc.longitude),
            r_e * cphi * math.sin(loc.longitude),
            r_e * math.sin(loc.latitude),
        ]
    )


def inv_latitude(geom: OrbitGeometry) -> float:
    """Latitude above which no point of the geostationary orbit is visible."""
    return math.acos(geom.earth_radius_km / geom.geo_radius_km)


def geo_visible(loc: TerminalLocation, geom: OrbitGeometry) -> bool:
    return abs(loc.latitude) < inv_latitude(geom) - POLAR_MARGIN_RAD


def geo_visible_half_angle(loc: TerminalLocation, geom: OrbitGeometry) -> float:
    """Half-width (orbit longitude offset) of the visible GEO arc; 0 when invisible."""
    if not geo_visible(loc, geom):
        return 0.0
    arg = geom.earth_radius_km / (geom.geo_radius_km * math.cos(loc.latitude))
    return math.acos(min(arg, 1.0))


def geo_visible_arc_length(loc: TerminalLocation, geom: OrbitGeometry) -> float:
    return 2.0 * geom.geo_radius_km * geo_visible_half_angle(loc, geom)


def leo_visible_cap_area(geom: OrbitGeometry) -> float:
    return 2.0 * math.pi * geom.leo_radius_km * geom.leo_altitude_km


def _geo_law_of_cosines(loc: TerminalLocation, geom: OrbitGeometry) -> tuple[float, float]:
    """(r_min^2, k) with |x - t|^2 = r_min^2 + 2 k sin^2(offset / 2) for an orbit point at longitude offset.

    The half-angle form keeps distances near the closest orbit point accurate;
    the plain law of cosines loses most digits there.
    """
    rg, re = geom.geo_radius_km, geom.earth_radius_km
    k = 2.0 * rg * re * math.cos(loc.latitude)
    r_min_sq = (rg - re) ** 2 + 4.0 * rg * re * math.sin(loc.latitude / 2.0) ** 2
    return r_min_sq, k


def geo_distance_at_offset(offset, loc: TerminalLocation, geom: OrbitGeometry):
    """Distance from the terminal to the orbit point at longitude offset ``offset``."""
    r_min_sq, k = _geo_law_of_cosines(loc, geom)
    return np.sqrt(r_min_sq + 2.0 * k * np.sin(np.asarray(offset, dtype=float) / 2.0) ** 2)


def geo_offset_at_distance(r, loc: TerminalLocation, geom: OrbitGeometry):
    """Inverse of :func:`geo_distance_at_offset` on ``[0, pi]``, clipped to that range."""
    r_min_sq, k = _geo_law_of_cosines(loc, geom)
    r = np.asarray(r, dtype=float)
    r_min = math.sqrt(r_min_sq)
    excess = (r - r_min) * (r + r_min)
    return 2.0 * np.arcsin(np.sqrt(np.clip(excess / (2.0 * k), 0.0, 1.0)))


def geo_distance_bounds(loc: TerminalLocation, geom: OrbitGeometry) -> DistanceBounds:
    """Nearest and farthest distance to a visible point of the geostationary orbit.

    Raises
    ------
    GeoInvisibleError
        If ``|latitude| >= inv_latitude(geom)``.
    """
    if not geo_visible(loc, geom):
        raise GeoInvisibleError(
            f"GEO invisible at latitude {math.degrees(loc.latitude):.4f} deg "
            f"(limit {math.degrees(inv_latitude(geom)):.4f} deg)"
        )
    re, ag = geom.earth_radius_km, geom.geo_altitude_km
    r_min_sq, _ = _geo_law_of_cosines(loc, geom)
    r_vis = math.sqrt(ag * ag + 2.0 * ag * re)
    return DistanceBounds(math.sqrt(r_min_sq), r_vis)


def leo_distance_bounds(geom: OrbitGeometry) -> DistanceBounds:
    al = geom.leo_altitude_km
    return DistanceBounds(al, math.sqrt(al * al + 2.0 * al * geom.earth_radius_km))


def geo_arc_measure_derivative(r: float, loc: TerminalLocation, geom: OrbitGeometry) -> float:
    """Growth rate d|A_G(r)|/dr of the orbit arc within distance ``r`` of the terminal.

    Diverges like ``1/sqrt(r - r_min)`` at the nearest orbit point.

    Raises
    ------
    OutsideSupportError
        If ``r`` is not strictly between the nearest and farthest orbit distance.
    """
    rg = geom.geo_radius_km
    r_min_sq, k = _geo_law_of_cosines(loc, geom)
    r_min = math.sqrt(r_min_sq)
    # k^2 - (v2 - r^2)^2 factored as (r^2 - r_min^2)(r_far^2 - r^2)
    near = (r - r_min) * (r + r_min)
    far = 2.0 * k - near
    if not (near > 0.0 and far > 0.0):
        raise OutsideSupportError(f"r={r!r} km is outside the GEO arc support")
    return 4.0 * r * rg / math.sqrt(near * far)


def leo_cap_measure_derivative(r: float, geom: OrbitGeometry) -> float:
    """Growth rate d|A_L(r)|/dr of the LEO-sphere cap within distance ``r``."""
    rl = geom.leo_radius_km
    if r < geom.leo_altitude_km or r > geom.leo_altitude_km + 2.0 * geom.earth_radius_km:
        raise OutsideSupportError(f"r={r!r} km is outside the LEO cap support")
    return 2.0 * math.pi * r * rl / geom.earth_radius_km


def leo_cap_area_within(r, geom: OrbitGeometry):
    """Area of the LEO-sphere cap whose points are within ``r`` of the terminal."""
    al = geom.leo_altitude_km
    r = np.asarray(r, dtype=float)
    return math.pi * geom.leo_radius_km * (r * r - al * al) / geom.earth_radius_km
