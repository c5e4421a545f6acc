"""Closed-form and quadrature evaluation of visibility, distance, association,
interference Laplace transforms and SINR coverage for the hybrid network.

Integration strategy
--------------------
GEO quantities are integrated over the orbit longitude offset ``u`` instead
of the distance ``r``: the arc measure is ``2 R_G du`` on each side of the
terminal, which removes the inverse-square-root singularity of ``d|A_G|/dr``
at the nearest orbit point.  Expectations over the nearest-satellite distance
are written as integrals of the quantile function over ``p in [0, 1]``
(``E[h(R)] = int_0^1 h(F^-1(p)) dp``); both distance CDFs invert in closed
form, so the outer integrands stay smooth even when the distance density is
sharply peaked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .channel import alzer_nu, omega_coefficient
from .geometry import (
    GeoInvisibleError,
    OutsideSupportError,
    geo_arc_measure_derivative,
    geo_distance_at_offset,
    geo_distance_bounds,
    geo_offset_at_distance,
    geo_visible,
    geo_visible_arc_length,
    geo_visible_half_angle,
    leo_cap_area_within,
    leo_cap_measure_derivative,
    leo_distance_bounds,
    leo_visible_cap_area,
)
from .scenario import GEO, LEO, ScenarioConfig, other


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    method: str = "adaptive"
    rel_tol: float = 1e-7
    abs_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if self.method != "adaptive":
            raise ValueError(f"unsupported quadrature method {self.method!r}")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def inner(self) -> "QuadratureSpec":
        """Tolerances for integrals nested inside another integrand."""
        return replace(self, rel_tol=self.rel_tol / 10.0, abs_tol=self.abs_tol / 10.0)


DEFAULT_QUAD = QuadratureSpec()


def integrate_1d(f, a: float, b: float, quad: QuadratureSpec = DEFAULT_QUAD, points=None) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[a, b]`` (never samples endpoints)."""
    if not b > a:
        return 0.0
    pts = sorted({p for p in (points or ()) if a < p < b}) or None
    res = integrate.quad(
        f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.max_subdivisions, points=pts, full_output=1
    )
    value, abserr = res[0], res[1]
    if len(res) > 3:
        tol = max(quad.abs_tol, quad.rel_tol * abs(value))
        if not (math.isfinite(value) and abserr <= 100.0 * tol):
            raise QuadratureError(f"{res[3]} (value={value!r}, abserr={abserr!r})")
    return value


@dataclass(frozen=True)
class CoverageBreakdown:
    p_vis_geo: float
    p_vis_leo: float
    p_assc_geo: float
    p_assc_leo: float
    p_cov_geo: float
    p_cov_leo: float
    p_cov_geo_nocross: float
    p_cov_leo_nocross: float
    p_cov_total: float

    @property
    def p_any_visible(self) -> float:
        return 1.0 - (1.0 - self.p_vis_geo) * (1.0 - self.p_vis_leo)

    @property
    def p_cov_given_visible(self) -> float:
        """Coverage normalised by the probability that some satellite is visible."""
        pv = self.p_any_visible
        return self.p_cov_total / pv if pv > 0 else 0.0

    @property
    def p_cov_geo_only_network(self) -> float:
        """Total coverage of a network without LEO satellites."""
        return self.p_vis_geo * self.p_cov_geo_nocross

    @property
    def p_cov_leo_only_network(self) -> float:
        return self.p_vis_leo * self.p_cov_leo_nocross


# --------------------------------------------------------------------- visibility


def geo_capable(cfg: ScenarioConfig) -> bool:
    """True when a GEO satellite can be visible at all from the terminal."""
    return cfg.geo.density > 0 and geo_visible(cfg.terminal, cfg.geom)


def leo_capable(cfg: ScenarioConfig) -> bool:
    return cfg.leo.density > 0


def p_vis_geo(cfg: ScenarioConfig) -> float:
    if not geo_capable(cfg):
        return 0.0
    return -math.expm1(-cfg.geo.density * geo_visible_arc_length(cfg.terminal, cfg.geom))


def p_vis_leo(cfg: ScenarioConfig) -> float:
    return -math.expm1(-cfg.leo.density * leo_visible_cap_area(cfg.geom))


# --------------------------------------------------------------------- distances


def _geo_rate(cfg: ScenarioConfig) -> float:
    """Expected number of GEO satellites per radian of longitude offset (both sides)."""
    return 2.0 * cfg.geo.density * cfg.geom.geo_radius_km


def _leo_rate(cfg: ScenarioConfig) -> float:
    return math.pi * cfg.leo.density * cfg.geom.leo_radius_km / cfg.geom.earth_radius_km


def _require_geo(cfg: ScenarioConfig) -> None:
    if not geo_visible(cfg.terminal, cfg.geom):
        raise GeoInvisibleError("GEO satellites are invisible at this latitude")
    if not cfg.geo.density > 0:
        raise ValueError("GEO density is zero")


def _require_leo(cfg: ScenarioConfig) -> None:
    if not cfg.leo.density > 0:
        raise ValueError("LEO density is zero")


def _check_support(r: float, lo: float, hi: float, clip: bool) -> float | None:
    """Return 0/1 for clipped out-of-support arguments, ``None`` when inside."""
    if r < lo:
        if clip:
            return 0.0
        raise OutsideSupportError(f"r={r!r} km below support [{lo}, {hi}]")
    if r >= hi:
        if clip or r == hi:
            return 1.0
        raise OutsideSupportError(f"r={r!r} km above support [{lo}, {hi}]")
    return None


def cdf_r0_geo(r: float, cfg: ScenarioConfig, clip: bool = False) -> float:
    """CDF of the distance to the nearest visible GEO satellite, given one is visible.

    With ``clip=True`` arguments outside the support map to 0 or 1 instead of
    raising :class:`OutsideSupportError`.
    """
    _require_geo(cfg)
    b = geo_distance_bounds(cfg.terminal, cfg.geom)
    edge = _check_support(r, b.r_min_km, b.r_vis_max_km, clip)
    if edge is not None:
        return edge
    rate = _geo_rate(cfg)
    u = float(geo_offset_at_distance(r, cfg.terminal, cfg.geom))
    u_vis = geo_visible_half_angle(cfg.terminal, cfg.geom)
    return min(1.0, math.expm1(-rate * u) / math.expm1(-rate * u_vis))


def pdf_r0_geo(r: float, cfg: ScenarioConfig) -> float:
    _require_geo(cfg)
    b = geo_distance_bounds(cfg.terminal, cfg.geom)
    if r < b.r_min_km or r > b.r_vis_max_km:
        raise OutsideSupportError(f"r={r!r} km outside GEO support")
    if r == b.r_min_km:
        return math.inf
    lam = cfg.geo.density
    arc = 2.0 * cfg.geom.geo_radius_km * float(geo_offset_at_distance(r, cfg.terminal, cfg.geom))
    norm = -math.expm1(-lam * geo_visible_arc_length(cfg.terminal, cfg.geom))
    return lam * geo_arc_measure_derivative(r, cfg.terminal, cfg.geom) * math.exp(-lam * arc) / norm


def quantile_r0_geo(p: float, cfg: ScenarioConfig) -> float:
    """Inverse of :func:`cdf_r0_geo` for ``p`` in [0, 1]."""
    rate = _geo_rate(cfg)
    u_vis = geo_visible_half_angle(cfg.terminal, cfg.geom)
    arg = p * math.expm1(-rate * u_vis)
    # a dense constellation rounds the top quantiles onto the support edge
    u = u_vis if arg <= -1.0 else -math.log1p(arg) / rate
    return float(geo_distance_at_offset(min(u, u_vis), cfg.terminal, cfg.geom))


def cdf_r0_leo(r: float, cfg: ScenarioConfig, clip: bool = False) -> float:
    _require_leo(cfg)
    b = leo_distance_bounds(cfg.geom)
    edge = _check_support(r, b.r_min_km, b.r_vis_max_km, clip)
    if edge is not None:
        return edge
    rate = _leo_rate(cfg)
    a = cfg.geom.leo_altitude_km
    return min(1.0, math.expm1(-rate * (r * r - a * a)) / math.expm1(-rate * (b.r_vis_max_km**2 - a * a)))


def pdf_r0_leo(r: float, cfg: ScenarioConfig) -> float:
    _require_leo(cfg)
    b = leo_distance_bounds(cfg.geom)
    if r < b.r_min_km or r > b.r_vis_max_km:
        raise OutsideSupportError(f"r={r!r} km outside LEO support")
    lam = cfg.leo.density
    norm = -math.expm1(-lam * leo_visible_cap_area(cfg.geom))
    return lam * leo_cap_measure_derivative(r, cfg.geom) * math.exp(-lam * float(leo_cap_area_within(r, cfg.geom))) / norm


def quantile_r0_leo(p: float, cfg: ScenarioConfig) -> float:
    rate = _leo_rate(cfg)
    b = leo_distance_bounds(cfg.geom)
    a2 = b.r_min_km**2
    arg = p * math.expm1(-rate * (b.r_vis_max_km**2 - a2))
    if arg <= -1.0:
        return b.r_vis_max_km
    return min(math.sqrt(a2 - math.log1p(arg) / rate), b.r_vis_max_km)


def _cdf(kind: str, r: float, cfg: ScenarioConfig) -> float:
    return cdf_r0_geo(r, cfg, clip=True) if kind == GEO else cdf_r0_leo(r, cfg, clip=True)


def _quantile(kind: str, p: float, cfg: ScenarioConfig) -> float:
    return quantile_r0_geo(p, cfg) if kind == GEO else quantile_r0_leo(p, cfg)


def _bounds(kind: str, cfg: ScenarioConfig):
    return geo_distance_bounds(cfg.terminal, cfg.geom) if kind == GEO else leo_distance_bounds(cfg.geom)


# --------------------------------------------------------------------- association


def biased_distance(r: float, toward: str, cfg: ScenarioConfig) -> float:
    """Distance at which a ``toward`` satellite matches the biased power of the other type at ``r``."""
    own = cfg.constellation(toward).link
    rival = cfg.constellation(other(toward)).link
    ratio = own.biased_power / rival.biased_power
    return ratio ** (1.0 / own.pathloss_exp) * r ** (rival.pathloss_exp / own.pathloss_exp)


_RIVAL_LEVELS = (1e-6, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999)


def _kink_points(kind: str, cfg: ScenarioConfig) -> list[float]:
    """Breakpoints (CDF levels of the ``kind`` distance) for integrands involving the rival.

    Includes the levels where the rival's biased distance enters and leaves its
    support, and where the rival distance CDF crosses a ladder of quantiles; a
    dense constellation makes that CDF rise over a tiny range that adaptive
    quadrature would otherwise step over.
    """
    rival = other(kind)
    rb = _bounds(rival, cfg)
    edges = [rb.r_min_km, rb.r_vis_max_km] + [_quantile(rival, q, cfg) for q in _RIVAL_LEVELS]
    pts = set()
    for edge in edges:
        # biased_distance toward ``kind`` inverts biased_distance toward the rival
        p = _cdf(kind, biased_distance(edge, kind, cfg), cfg)
        if 0.0 < p < 1.0:
            pts.add(p)
    return sorted(pts)


def _p_assc(kind: str, cfg: ScenarioConfig, quad: QuadratureSpec) -> float:
    rival = other(kind)

    def integrand(p: float) -> float:
        r = _quantile(kind, p, cfg)
        return _cdf(rival, biased_distance(r, rival, cfg), cfg)

    value = 1.0 - integrate_1d(integrand, 0.0, 1.0, quad, _kink_points(kind, cfg))
    return min(1.0, max(0.0, value))


def p_assc_geo(cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Probability of GEO association given both types are visible.

    Degenerate networks follow the visibility table: 0 when GEO cannot be
    visible, 1 when only GEO can be.
    """
    if not geo_capable(cfg):
        return 0.0
    if not leo_capable(cfg):
        return 1.0
    return _p_assc(GEO, cfg, quad)


def p_assc_leo(cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if not leo_capable(cfg):
        return 0.0
    if not geo_capable(cfg):
        return 1.0
    return _p_assc(LEO, cfg, quad)


# --------------------------------------------------------------------- interference


def _void_term(s: float, r: float, omega: float, alpha: float, m: int) -> float:
    """1 - E[exp(-s h / (omega r^alpha))] for unit-mean Nakagami-m h."""
    x = s / (m * omega * r**alpha)
    return -math.expm1(-m * math.log1p(x))


def interferer_omega(kind: str, cfg: ScenarioConfig) -> float:
    link = cfg.constellation(kind).link
    return omega_coefficient(link.tx_power_w, link.interferer_gain, cfg.channel)


def serving_omega(kind: str, cfg: ScenarioConfig) -> float:
    link = cfg.constellation(kind).link
    return omega_coefficient(link.tx_power_w, link.mainlobe_gain, cfg.channel)


def omega_integral(s: float, r0: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """GEO interference integral ``int_{r0}^{r_vis} (1 - L_h) r dr / sqrt(k^2 - (v2 - r^2)^2)``.

    Evaluated in the longitude offset ``u``, where ``r dr / sqrt(...) = du / 2``.
    """
    _require_geo(cfg)
    b = geo_distance_bounds(cfg.terminal, cfg.geom)
    r0 = min(max(r0, b.r_min_km), b.r_vis_max_km)
    if s == 0 or r0 >= b.r_vis_max_km:
        return 0.0
    u0 = float(geo_offset_at_distance(r0, cfg.terminal, cfg.geom))
    u1 = geo_visible_half_angle(cfg.terminal, cfg.geom)
    omega = interferer_omega(GEO, cfg)
    alpha = cfg.geo.link.pathloss_exp
    m = cfg.channel.nakagami_m

    def integrand(u: float) -> float:
        return _void_term(s, float(geo_distance_at_offset(u, cfg.terminal, cfg.geom)), omega, alpha, m)

    return 0.5 * integrate_1d(integrand, u0, u1, quad)


def kappa_integral(s: float, r0: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """LEO interference integral ``int_{r0}^{r_vis} (1 - L_h) r dr``."""
    b = leo_distance_bounds(cfg.geom)
    r0 = min(max(r0, b.r_min_km), b.r_vis_max_km)
    if s == 0 or r0 >= b.r_vis_max_km:
        return 0.0
    omega = interferer_omega(LEO, cfg)
    alpha = cfg.leo.link.pathloss_exp
    m = cfg.channel.nakagami_m
    return integrate_1d(lambda r: _void_term(s, r, omega, alpha, m) * r, r0, b.r_vis_max_km, quad)


def laplace_interference_geo(s: float, r0: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """E[exp(-s I)] for the GEO interference from satellites farther than ``r0``."""
    if s < 0:
        raise ValueError("Laplace argument must be nonnegative")
    if s == 0 or not geo_capable(cfg):
        return 1.0
    return math.exp(-4.0 * cfg.geo.density * cfg.geom.geo_radius_km * omega_integral(s, r0, cfg, quad))


def laplace_interference_leo(s: float, r0: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """E[exp(-s I)] for the LEO interference from satellites farther than ``r0``."""
    if s < 0:
        raise ValueError("Laplace argument must be nonnegative")
    if s == 0 or not leo_capable(cfg):
        return 1.0
    scale = 2.0 * math.pi * cfg.leo.density * cfg.geom.leo_radius_km / cfg.geom.earth_radius_km
    return math.exp(-scale * kappa_integral(s, r0, cfg, quad))


def laplace_interference(kind: str, s: float, r0: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if kind == GEO:
        return laplace_interference_geo(s, r0, cfg, quad)
    return laplace_interference_leo(s, r0, cfg, quad)


# --------------------------------------------------------------------- coverage


def _binomial_signs(m: int) -> list[tuple[int, int]]:
    return [(i, math.comb(m, i) * (-1) ** (i + 1)) for i in range(1, m + 1)]


def _rival_voids(rival: str, d: float, cfg: ScenarioConfig) -> tuple[float, float, float]:
    """Void probabilities of the rival inside distance ``d``, of its visible region beyond ``d``,
    and its visibility probability."""
    c = cfg.constellation(rival)
    b = _bounds(rival, cfg)
    d = min(max(d, b.r_min_km), b.r_vis_max_km)
    if rival == GEO:
        inner = 2.0 * cfg.geom.geo_radius_km * float(geo_offset_at_distance(d, cfg.terminal, cfg.geom))
        total = geo_visible_arc_length(cfg.terminal, cfg.geom)
    else:
        inner = float(leo_cap_area_within(d, cfg.geom))
        total = leo_visible_cap_area(cfg.geom)
    return math.exp(-c.density * inner), math.exp(-c.density * max(total - inner, 0.0)), -math.expm1(-c.density * total)


def _p_cov(kind: str, tau: float, cfg: ScenarioConfig, quad: QuadratureSpec, cross: bool, joint: bool = False) -> float:
    if not tau > 0:
        raise ValueError("SINR threshold must be positive (linear)")
    if kind == GEO:
        _require_geo(cfg)
    else:
        _require_leo(cfg)
    rival = other(kind)
    cross = cross and (geo_capable(cfg) if rival == GEO else leo_capable(cfg))
    joint = joint and cross
    inner = quad.inner()
    m = cfg.channel.nakagami_m
    terms = _binomial_signs(m)
    scale = alzer_nu(m) * tau * serving_omega(kind, cfg)
    alpha = cfg.constellation(kind).link.pathloss_exp
    noise = cfg.channel.noise_power_w
    rival_hi = _bounds(rival, cfg).r_vis_max_km if cross else math.inf

    def integrand(p: float) -> float:
        r = _quantile(kind, p, cfg)
        delta = scale * r**alpha
        d_rival = biased_distance(r, rival, cfg) if cross else math.inf
        if joint:
            if d_rival >= rival_hi:
                return 0.0
            void_in, void_out, vis = _rival_voids(rival, d_rival, cfg)
        total = 0.0
        for i, coef in terms:
            s = i * delta
            val = math.exp(-s * noise)
            if val == 0.0:
                continue
            val *= laplace_interference(kind, s, r, cfg, inner)
            if joint:
                # rival visible, none of it inside d_rival, interference from the rest
                lt = laplace_interference(rival, s, d_rival, cfg, inner)
                val *= void_in * (lt - void_out) / vis
            elif d_rival < rival_hi and val > 0.0:
                val *= laplace_interference(rival, s, d_rival, cfg, inner)
            total += coef * val
        return total

    pts = _kink_points(kind, cfg) if cross else None
    return min(1.0, max(0.0, integrate_1d(integrand, 0.0, 1.0, quad, pts)))


def p_cov_geo(tau: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coverage at linear SINR threshold ``tau`` when served by the nearest GEO satellite.

    GEO interferers lie beyond the serving distance ``r``; LEO interferers
    beyond the biased distance ``d_L(r)``.  Nakagami-m fading enters through
    the exponential-mixture CDF approximation, exact for ``m = 1``.
    """
    return _p_cov(GEO, tau, cfg, quad, cross=True)


def p_cov_leo(tau: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return _p_cov(LEO, tau, cfg, quad, cross=True)


def p_cov_nocross_geo(tau: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """GEO-served coverage ignoring LEO interference (no LEO satellite visible)."""
    return _p_cov(GEO, tau, cfg, quad, cross=False)


def p_cov_nocross_leo(tau: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return _p_cov(LEO, tau, cfg, quad, cross=False)


def p_cov_joint(kind: str, tau: float, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """P[SINR >= tau and ``kind`` serves | both types visible].

    Unlike :func:`p_cov_geo` / :func:`p_cov_leo`, the serving distance is
    weighted by the probability that the association rule actually picks
    ``kind`` at that distance, and the rival's interference is conditioned on
    the rival being visible.  Exact for ``m = 1``.
    """
    if not (geo_capable(cfg) and leo_capable(cfg)):
        raise ValueError("joint coverage needs both constellations visible-capable")
    return _p_cov(kind, tau, cfg, quad, cross=True, joint=True)


def p_cov_total(
    tau: float,
    cfg: ScenarioConfig,
    quad: QuadratureSpec = DEFAULT_QUAD,
    exact_association: bool = False,
) -> CoverageBreakdown:
    """All component probabilities and the total coverage at linear threshold ``tau``.

    By default the serving-type coverages integrate over the unconditioned
    nearest-distance density and are then weighted by the association
    probabilities.  ``exact_association=True`` uses :func:`p_cov_joint`
    instead and reports ``p_cov_geo`` / ``p_cov_leo`` as true conditional
    probabilities given the association.

    Components whose visibility case has zero probability are reported as 0.
    """
    if not tau > 0:
        raise ValueError("SINR threshold must be positive (linear)")
    g_ok, l_ok = geo_capable(cfg), leo_capable(cfg)
    pvg, pvl = p_vis_geo(cfg), p_vis_leo(cfg)
    pag = p_assc_geo(cfg, quad)
    pal = 1.0 - pag if (g_ok and l_ok) else p_assc_leo(cfg, quad)
    if exact_association and g_ok and l_ok:
        pcg = p_cov_joint(GEO, tau, cfg, quad) / pag if pag > 0 else 0.0
        pcl = p_cov_joint(LEO, tau, cfg, quad) / pal if pal > 0 else 0.0
        pcg, pcl = min(pcg, 1.0), min(pcl, 1.0)
    else:
        pcg = p_cov_geo(tau, cfg, quad) if g_ok else 0.0
        pcl = p_cov_leo(tau, cfg, quad) if l_ok else 0.0
    if g_ok and l_ok:
        png = p_cov_nocross_geo(tau, cfg, quad)
        pnl = p_cov_nocross_leo(tau, cfg, quad)
    else:
        # without the rival constellation the cross factor is already 1
        png, pnl = pcg, pcl
    total = pvg * pvl * (pag * pcg + pal * pcl) + pvg * (1.0 - pvl) * png + (1.0 - pvg) * pvl * pnl
    return CoverageBreakdown(
        p_vis_geo=pvg,
        p_vis_leo=pvl,
        p_assc_geo=pag,
        p_assc_leo=pal,
        p_cov_geo=pcg,
        p_cov_leo=pcl,
        p_cov_geo_nocross=png,
        p_cov_leo_nocross=pnl,
        p_cov_total=min(1.0, max(0.0, total)),
    )


def coverage_curve(taus, cfg: ScenarioConfig, quad: QuadratureSpec = DEFAULT_QUAD) -> list[CoverageBreakdown]:
    return [p_cov_total(float(t), cfg, quad) for t in np.atleast_1d(taus)]
