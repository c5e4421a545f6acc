"""Snapshot Monte Carlo simulator for the hybrid GEO-LEO downlink.

Satellites are drawn as Poisson processes restricted to the visible arc
(GEO) and visible cap (LEO); invisible satellites neither serve nor
interfere, so nothing outside those regions is sampled.  Distances are
computed from Cartesian positions, independently of the closed-form distance
formulas used by :mod:`geoleo.analytic`.

Randomness is organised in fixed-size chunks of trials.  Chunk ``k`` of a
run seeded with ``seed`` draws from ``SeedSequence(seed, spawn_key=(k,))``,
so a result depends only on ``(seed, n_trials, chunk_size)`` and not on how
many workers process the chunks.  Aggregation sums integer counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import geo_capable, leo_capable
from .channel import path_loss, sample_channel_gain
from .geometry import (
    geo_visible_arc_length,
    geo_visible_half_angle,
    leo_visible_cap_area,
    terminal_position,
)
from .scenario import GEO, LEO, ScenarioConfig

DEFAULT_CHUNK = 10_000


@dataclass(frozen=True)
class SatellitePoint:
    kind: str
    position: np.ndarray
    distance_km: float


@dataclass
class Snapshot:
    geo_sats: list[SatellitePoint]
    leo_sats: list[SatellitePoint]
    serving: tuple[str, int] | None = None
    fading: dict[str, np.ndarray] = field(default_factory=dict)
    sinr: float | None = None


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    n_trials: int

    @classmethod
    def bernoulli(cls, hits: int, n: int) -> "EstimateWithCI":
        if n <= 0:
            return cls(math.nan, math.nan, 0)
        p = hits / n
        return cls(p, math.sqrt(p * (1.0 - p) / n), int(n))

    def z_score(self, reference: float) -> float:
        """Standardised gap to ``reference``; the error is floored at 1/n."""
        if self.n_trials == 0 or math.isnan(self.mean):
            return math.nan
        return (reference - self.mean) / max(self.std_error, 1.0 / self.n_trials)


@dataclass
class CoverageReport:
    taus: np.ndarray
    seed: int
    n_trials: int
    p_vis_geo: EstimateWithCI
    p_vis_leo: EstimateWithCI
    p_assc_geo: EstimateWithCI
    p_assc_leo: EstimateWithCI
    p_cov_geo: list[EstimateWithCI]
    p_cov_leo: list[EstimateWithCI]
    p_cov_geo_nocross: list[EstimateWithCI]
    p_cov_leo_nocross: list[EstimateWithCI]
    p_cov_total: list[EstimateWithCI]
    p_cov_given_visible: list[EstimateWithCI]
    p_cov_geo_only_network: list[EstimateWithCI]
    p_cov_leo_only_network: list[EstimateWithCI]


# --------------------------------------------------------------------- sampling primitives


def _draw_geo(cfg: ScenarioConfig, rng: np.random.Generator, n_trials: int):
    """Visible GEO satellites for ``n_trials`` independent snapshots.

    Returns per-trial counts and the flat (trial-major) positions.
    """
    if not geo_capable(cfg):
        return np.zeros(n_trials, dtype=np.int64), np.zeros((0, 3))
    mean = cfg.geo.density * geo_visible_arc_length(cfg.terminal, cfg.geom)
    counts = rng.poisson(mean, n_trials)
    half = geo_visible_half_angle(cfg.terminal, cfg.geom)
    lon = cfg.terminal.longitude + rng.uniform(-half, half, counts.sum())
    rg = cfg.geom.geo_radius_km
    pos = np.column_stack([rg * np.cos(lon), rg * np.sin(lon), np.zeros_like(lon)])
    return counts, pos


def _terminal_frame(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = terminal_position(cfg.terminal, cfg.geom)
    up = t / np.linalg.norm(t)
    helper = np.array([0.0, 0.0, 1.0]) if abs(up[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(up, helper)
    e1 /= np.linalg.norm(e1)
    return up, e1, np.cross(up, e1)


def _draw_leo(cfg: ScenarioConfig, rng: np.random.Generator, n_trials: int):
    if not leo_capable(cfg):
        return np.zeros(n_trials, dtype=np.int64), np.zeros((0, 3))
    counts = rng.poisson(cfg.leo.density * leo_visible_cap_area(cfg.geom), n_trials)
    n = counts.sum()
    rl = cfg.geom.leo_radius_km
    # uniform on the cap: cos(polar angle from the zenith direction) is uniform
    cos_psi = rng.uniform(cfg.geom.earth_radius_km / rl, 1.0, n)
    sin_psi = np.sqrt(1.0 - cos_psi**2)
    az = rng.uniform(0.0, 2.0 * math.pi, n)
    up, e1, e2 = _terminal_frame(cfg)
    pos = rl * (
        cos_psi[:, None] * up + (sin_psi * np.cos(az))[:, None] * e1 + (sin_psi * np.sin(az))[:, None] * e2
    )
    return counts, pos


def _distances(pos: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    return np.linalg.norm(pos - terminal_position(cfg.terminal, cfg.geom), axis=1)


def _to_points(kind: str, pos: np.ndarray, cfg: ScenarioConfig) -> list[SatellitePoint]:
    d = _distances(pos, cfg)
    order = np.argsort(d, kind="stable")
    return [SatellitePoint(kind, pos[i].copy(), float(d[i])) for i in order]


def sample_geo_visible(cfg: ScenarioConfig, rng: np.random.Generator) -> list[SatellitePoint]:
    """One realisation of the visible GEO satellites, nearest first."""
    _, pos = _draw_geo(cfg, rng, 1)
    return _to_points(GEO, pos, cfg)


def sample_leo_visible(cfg: ScenarioConfig, rng: np.random.Generator) -> list[SatellitePoint]:
    _, pos = _draw_leo(cfg, rng, 1)
    return _to_points(LEO, pos, cfg)


# --------------------------------------------------------------------- single snapshot


def _biased_power(kind: str, d: float, cfg: ScenarioConfig) -> float:
    link = cfg.constellation(kind).link
    return link.biased_power * path_loss(d, link.pathloss_exp, cfg.channel)


def associate(geo_sats: list[SatellitePoint], leo_sats: list[SatellitePoint], cfg: ScenarioConfig) -> str | None:
    """Serving type: the larger long-term biased received power of the two nearest satellites.

    Equal biased powers resolve to GEO.  Returns ``None`` when nothing is visible.
    """
    if geo_sats and leo_sats:
        pg = _biased_power(GEO, geo_sats[0].distance_km, cfg)
        pl = _biased_power(LEO, leo_sats[0].distance_km, cfg)
        return GEO if pg >= pl else LEO
    if geo_sats:
        return GEO
    if leo_sats:
        return LEO
    return None


def compute_sinr(
    serving: str,
    geo_sats: list[SatellitePoint],
    leo_sats: list[SatellitePoint],
    fading: dict[str, np.ndarray],
    cfg: ScenarioConfig,
) -> float:
    """SINR with the nearest ``serving`` satellite on its main lobe and every other visible one interfering."""
    sats = {GEO: geo_sats, LEO: leo_sats}
    signal = 0.0
    interference = 0.0
    for kind, pts in sats.items():
        link = cfg.constellation(kind).link
        for n, sat in enumerate(pts):
            rx = link.tx_power_w * fading[kind][n] * path_loss(sat.distance_km, link.pathloss_exp, cfg.channel)
            if kind == serving and n == 0:
                signal = rx * link.mainlobe_gain
            else:
                interference += rx * link.interferer_gain
    denom = interference + cfg.channel.noise_power_w
    if denom == 0.0:
        return math.inf
    return signal / denom


def snapshot_sinr(cfg: ScenarioConfig, rng: np.random.Generator) -> Snapshot:
    geo_sats = sample_geo_visible(cfg, rng)
    leo_sats = sample_leo_visible(cfg, rng)
    m = cfg.channel.nakagami_m
    fading = {GEO: sample_channel_gain(m, rng, len(geo_sats)), LEO: sample_channel_gain(m, rng, len(leo_sats))}
    snap = Snapshot(geo_sats, leo_sats, fading=fading)
    kind = associate(geo_sats, leo_sats, cfg)
    if kind is not None:
        snap.serving = (kind, 0)
        snap.sinr = compute_sinr(kind, geo_sats, leo_sats, fading, cfg)
    return snap


# --------------------------------------------------------------------- vectorised engine


def _segment_nearest(counts: np.ndarray, d: np.ndarray):
    """Per-trial minimum distance (inf when empty) and a mask of the minimising points."""
    n = len(counts)
    nearest = np.full(n, np.inf)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    nonempty = counts > 0
    if d.size:
        nearest[nonempty] = np.minimum.reduceat(d, starts[nonempty])
    owner = np.repeat(np.arange(n), counts)
    is_nearest = d == nearest[owner]
    # exact distance ties are measure-zero; keep only the first occurrence
    first = np.zeros_like(is_nearest)
    idx = np.flatnonzero(is_nearest)
    if idx.size:
        _, keep = np.unique(owner[idx], return_index=True)
        first[idx[keep]] = True
    return nearest, first, owner


@dataclass
class _TypeDraw:
    visible: np.ndarray
    nearest: np.ndarray
    signal: np.ndarray  # serving-beam power of the nearest satellite
    nearest_interf: np.ndarray  # same satellite seen with the interferer gain
    others: np.ndarray  # interference from all but the nearest
    biased: np.ndarray


def _draw_type(kind: str, cfg: ScenarioConfig, rng: np.random.Generator, n: int) -> _TypeDraw:
    counts, pos = (_draw_geo if kind == GEO else _draw_leo)(cfg, rng, n)
    d = _distances(pos, cfg)
    h = sample_channel_gain(cfg.channel.nakagami_m, rng, d.size)
    link = cfg.constellation(kind).link
    nearest, first, owner = _segment_nearest(counts, d)
    rx = link.tx_power_w * h * (path_loss(d, link.pathloss_exp, cfg.channel) if d.size else d)
    visible = counts > 0
    signal = np.zeros(n)
    near_i = np.zeros(n)
    signal[owner[first]] = rx[first] * link.mainlobe_gain
    near_i[owner[first]] = rx[first] * link.interferer_gain
    others = np.bincount(owner[~first], weights=rx[~first] * link.interferer_gain, minlength=n)
    biased = np.zeros(n)
    if visible.any():
        biased[visible] = link.biased_power * path_loss(nearest[visible], link.pathloss_exp, cfg.channel)
    return _TypeDraw(visible, nearest, signal, near_i, others, biased)


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))


def _simulate_chunk(args) -> dict[str, np.ndarray]:
    cfg, taus, seed, chunk_index, n = args
    rng = chunk_rng(seed, chunk_index)
    g = _draw_type(GEO, cfg, rng, n)
    l = _draw_type(LEO, cfg, rng, n)
    noise = cfg.channel.noise_power_w

    both = g.visible & l.visible
    geo_serves = g.visible & (~l.visible | (g.biased >= l.biased))
    leo_serves = l.visible & ~geo_serves
    any_vis = g.visible | l.visible

    signal = np.where(geo_serves, g.signal, l.signal)
    interf = g.others + l.others + np.where(geo_serves, l.nearest_interf, g.nearest_interf)
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(any_vis, signal / (interf + noise), 0.0)
        sinr_geo_alone = np.where(g.visible, g.signal / (g.others + noise), 0.0)
        sinr_leo_alone = np.where(l.visible, l.signal / (l.others + noise), 0.0)

    taus = np.asarray(taus, dtype=float)[:, None]
    cov = sinr[None, :] >= taus
    cov_g = sinr_geo_alone[None, :] >= taus
    cov_l = sinr_leo_alone[None, :] >= taus
    geo_both = both & geo_serves
    leo_both = both & leo_serves
    return {
        "n": np.array(n),
        "vis_geo": np.array(g.visible.sum()),
        "vis_leo": np.array(l.visible.sum()),
        "vis_any": np.array(any_vis.sum()),
        "both": np.array(both.sum()),
        "assc_geo_both": np.array(geo_both.sum()),
        "assc_leo_both": np.array(leo_both.sum()),
        "cov_total": cov.sum(axis=1),
        "cov_geo_both": (cov & geo_both).sum(axis=1),
        "cov_leo_both": (cov & leo_both).sum(axis=1),
        "cov_geo_alone": cov_g.sum(axis=1),
        "cov_leo_alone": cov_l.sum(axis=1),
    }


def _chunks(n_trials: int, chunk_size: int):
    full, rest = divmod(n_trials, chunk_size)
    sizes = [chunk_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _run_chunks(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


def estimate(
    cfg: ScenarioConfig,
    taus,
    n_trials: int = 100_000,
    seed: int = 0,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
) -> CoverageReport:
    """Monte Carlo estimates of every probability in the coverage decomposition.

    ``taus`` are linear SINR thresholds.  Conditional quantities use their own
    denominators: association given both types visible, ``p_cov_geo`` given
    both visible and GEO serving, ``p_cov_*_nocross`` given that type visible
    with the other constellation removed.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    jobs = [(cfg, taus, seed, k, size) for k, size in _chunks(n_trials, chunk_size)]
    parts = _run_chunks(_simulate_chunk, jobs, workers)
    tot = {key: sum(p[key] for p in parts) for key in parts[0]}

    def per_tau(key: str, denom: int) -> list[EstimateWithCI]:
        return [EstimateWithCI.bernoulli(int(k), int(denom)) for k in tot[key]]

    n = int(tot["n"])
    both = int(tot["both"])
    return CoverageReport(
        taus=taus,
        seed=seed,
        n_trials=n,
        p_vis_geo=EstimateWithCI.bernoulli(int(tot["vis_geo"]), n),
        p_vis_leo=EstimateWithCI.bernoulli(int(tot["vis_leo"]), n),
        p_assc_geo=EstimateWithCI.bernoulli(int(tot["assc_geo_both"]), both),
        p_assc_leo=EstimateWithCI.bernoulli(int(tot["assc_leo_both"]), both),
        p_cov_geo=per_tau("cov_geo_both", int(tot["assc_geo_both"])),
        p_cov_leo=per_tau("cov_leo_both", int(tot["assc_leo_both"])),
        p_cov_geo_nocross=per_tau("cov_geo_alone", int(tot["vis_geo"])),
        p_cov_leo_nocross=per_tau("cov_leo_alone", int(tot["vis_leo"])),
        p_cov_total=per_tau("cov_total", n),
        p_cov_given_visible=per_tau("cov_total", int(tot["vis_any"])),
        p_cov_geo_only_network=per_tau("cov_geo_alone", n),
        p_cov_leo_only_network=per_tau("cov_leo_alone", n),
    )


# --------------------------------------------------------------------- oracle helpers


def visible_counts(kind: str, cfg: ScenarioConfig, n_trials: int, seed: int = 0) -> np.ndarray:
    """Number of visible satellites of one type in each of ``n_trials`` snapshots."""
    draw = _draw_geo if kind == GEO else _draw_leo
    out = []
    for k, size in _chunks(n_trials, DEFAULT_CHUNK):
        counts, _ = draw(cfg, chunk_rng(seed, k), size)
        out.append(counts)
    return np.concatenate(out)


def nearest_distance_samples(kind: str, cfg: ScenarioConfig, n_samples: int, seed: int = 0) -> np.ndarray:
    """Distances to the nearest visible satellite, from snapshots where one is visible."""
    draw = _draw_geo if kind == GEO else _draw_leo
    got: list[np.ndarray] = []
    have = 0
    k = 0
    while have < n_samples:
        counts, pos = draw(cfg, chunk_rng(seed, k), DEFAULT_CHUNK)
        if not counts.any() and k > 100:
            raise ValueError(f"no visible {kind} satellites in {k * DEFAULT_CHUNK} snapshots")
        nearest, _, _ = _segment_nearest(counts, _distances(pos, cfg))
        nearest = nearest[counts > 0]
        got.append(nearest)
        have += nearest.size
        k += 1
    return np.concatenate(got)[:n_samples]


def _laplace_chunk(args):
    kind, s_values, r0, cfg, seed, k, n = args
    rng = chunk_rng(seed, k)
    counts, pos = (_draw_geo if kind == GEO else _draw_leo)(cfg, rng, n)
    d = _distances(pos, cfg)
    h = sample_channel_gain(cfg.channel.nakagami_m, rng, d.size)
    link = cfg.constellation(kind).link
    owner = np.repeat(np.arange(n), counts)
    far = d > r0
    power = link.tx_power_w * link.interferer_gain * h[far] * path_loss(d[far], link.pathloss_exp, cfg.channel) if far.any() else np.zeros(0)
    interference = np.bincount(owner[far], weights=power, minlength=n)
    vals = np.exp(-np.outer(s_values, interference))
    return vals.sum(axis=1), (vals**2).sum(axis=1)


def laplace_functional_mc(
    kind: str,
    s_values,
    r0: float,
    cfg: ScenarioConfig,
    n_trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
) -> list[EstimateWithCI]:
    """Sample mean of ``exp(-s I)`` where ``I`` sums interferer-beam power beyond ``r0``."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    jobs = [(kind, s_values, r0, cfg, seed, k, size) for k, size in _chunks(n_trials, DEFAULT_CHUNK)]
    parts = _run_chunks(_laplace_chunk, jobs, workers)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n_trials
    var = np.maximum(s2 / n_trials - mean**2, 0.0)
    se = np.sqrt(var / n_trials)
    return [EstimateWithCI(float(mu), float(e), n_trials) for mu, e in zip(mean, se)]
