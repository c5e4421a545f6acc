import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoleo.config import (
    DEFAULT_CONFIG_TEXT,
    ConfigError,
    SweepSpec,
    config_to_dict,
    default_run_config,
    dump_config,
    parse_config,
    parse_config_text,
)
from geoleo.scenario import default_scenario

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_default_config_matches_reference_scenario():
    run = default_run_config()
    s = run.scenario
    assert s == default_scenario()
    assert (s.geom.earth_radius_km, s.geom.geo_altitude_km, s.geom.leo_altitude_km) == (6378.0, 35786.0, 600.0)
    assert s.geo.density == pytest.approx(1000 / (2 * math.pi * 42164.0), rel=1e-14)
    assert s.leo.density == pytest.approx(100 / (4 * math.pi * 6978.0**2), rel=1e-14)
    assert s.geo.link.tx_power_w == pytest.approx(3e5)
    assert s.leo.link.tx_power_w == pytest.approx(10**0.4 * 30)
    assert s.geo.link.bias == 1.0
    assert s.channel.carrier_freq_hz == 20e9 and s.channel.bandwidth_hz == 30e6
    assert s.channel.noise_psd_dbm_hz == -174.0
    assert s.terminal.latitude == 0.0 and s.terminal.longitude == 0.0
    assert run.sweep.grid == (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


def test_shipped_default_file_equals_builtin():
    assert parse_config(CONFIGS / "default.cfg") == default_run_config()


@pytest.mark.parametrize("name", ["association_vs_latitude.cfg", "coverage_vs_threshold.cfg"])
def test_shipped_configs_parse(name):
    run = parse_config(CONFIGS / name)
    assert parse_config_text(dump_config(run)) == run


def test_roundtrip_default():
    run = default_run_config()
    assert parse_config_text(dump_config(run)) == run


@settings(max_examples=40, deadline=None)
@given(
    geo_count=st.floats(0, 5000),
    leo_count=st.floats(0, 5000),
    lat=st.floats(-90, 90),
    alpha=st.floats(2, 6),
    bias_db=st.floats(-40, 40),
    m=st.integers(1, 20),
    grid=st.lists(st.floats(-50, 50), min_size=1, max_size=8, unique=True),
)
def test_roundtrip_random(geo_count, leo_count, lat, alpha, bias_db, m, grid):
    text = "\n".join(
        [
            f"geo.count = {geo_count!r}",
            f"leo.count = {leo_count!r}",
            f"terminal.latitude_deg = {lat!r}",
            f"geo.pathloss_exp = {alpha!r}",
            f"geo.bias_db = {bias_db!r}",
            f"channel.nakagami_m = {m}",
            "sweep.grid = " + ", ".join(repr(g) for g in sorted(grid)),
        ]
    )
    run = parse_config_text(text)
    back = parse_config_text(dump_config(run))
    assert back == run
    assert config_to_dict(back) == config_to_dict(run)


def test_counts_become_densities():
    run = parse_config_text("geo.count = 500\nleo.count = 2000\nleo.altitude_km = 1200")
    assert run.scenario.geo.density == pytest.approx(500 / (2 * math.pi * (6378 + 35786)), rel=1e-14)
    assert run.scenario.leo.density == pytest.approx(2000 / (4 * math.pi * (6378 + 1200) ** 2), rel=1e-14)


def test_db_keys_convert_once():
    run = parse_config_text(
        "terminal.rx_gain_db = 20\ngeo.tx_gain_dbi = 10\ngeo.misalignment_db = 25\nleo.bias_db = 3\ngeo.tx_power_dbw = 30"
    )
    g = run.scenario.geo.link
    assert g.mainlobe_gain == pytest.approx(1000.0)
    assert g.interferer_gain == pytest.approx(1000.0 * 10**-2.5)
    assert g.tx_power_w == pytest.approx(1000.0)
    assert run.scenario.leo.link.bias == pytest.approx(10**0.3)
    assert run.scenario.leo.link.mainlobe_gain == pytest.approx(100.0)


@pytest.mark.parametrize(
    "text, key",
    [
        ("channel.nakagami_m = 2.5", "channel.nakagami_m"),
        ("geo.altitude_km = -100", "geometry"),
        ("sweep.grid = ", "sweep.grid"),
        ("sweep.grid = 1, 3, 2", "sweep.grid"),
        ("geo.colour = red", "geo.colour"),
        ("geo.count = 5\ngeo.count = 6", "geo.count"),
        ("geo.count = 5\ngeo.density_per_km = 1e-3", "geo.density_per_km"),
        ("geo.count = many", "geo.count"),
        ("leo.count = -3", "leo.count"),
        ("sweep.variable = altitude", "sweep.variable"),
        ("sweep.mode = fast", "sweep.mode"),
        ("analysis.association = guess", "analysis.association"),
        ("leo.pathloss_exp = 1.5", "leo"),
        ("sweep.grid = 0:10:-1", "sweep.grid"),
        ("just some words", "<config>:1"),
    ],
)
def test_rejections_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text)
    assert str(info.value).startswith(key)


def test_integer_m_message():
    with pytest.raises(ConfigError, match="must be an integer"):
        parse_config_text("channel.nakagami_m = 2.5")


def test_grid_range_syntax():
    assert parse_config_text("sweep.grid = -90:90:45").sweep.grid == (-90.0, -45.0, 0.0, 45.0, 90.0)
    assert parse_config_text("sweep.grid = 20:-10:-10").sweep.grid == (20.0, 10.0, 0.0, -10.0)
    assert parse_config_text("sweep.grid = 0:1:0.1").sweep.grid[-1] == 1.0


def test_missing_file_names_path(tmp_path):
    with pytest.raises(ConfigError, match="nope.cfg"):
        parse_config(tmp_path / "nope.cfg")


def test_comments_and_blank_lines():
    run = parse_config_text("# heading\n\ngeo.count = 10   # trailing\n")
    assert run.scenario.geo.density == pytest.approx(10 / (2 * math.pi * 42164.0))


def test_sweep_spec_validation():
    with pytest.raises(ConfigError):
        SweepSpec(grid=())
    assert SweepSpec(grid=(3.0,)).grid == (3.0,)


def test_default_text_is_documented():
    assert "geo.count = 1000" in DEFAULT_CONFIG_TEXT
    assert "unusual" in DEFAULT_CONFIG_TEXT
