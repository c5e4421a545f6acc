import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoleo.channel import (
    ChannelParams,
    LinkBudget,
    alzer_nu,
    db_to_linear,
    eirp_density_to_power,
    linear_to_db,
    nakagami_cdf,
    nakagami_cdf_approx,
    omega_coefficient,
    path_loss,
    sample_channel_gain,
)

PARAMS = ChannelParams()


def test_path_loss_values():
    # free-space loss at 20 GHz over 600 km is about 174 dB
    assert path_loss(600.0, 2.0, PARAMS) == pytest.approx(3.957859e-18, rel=1e-6)
    assert -10 * math.log10(path_loss(600.0, 2.0, PARAMS)) == pytest.approx(174.025, abs=1e-3)
    assert path_loss(1200.0, 2.0, PARAMS) == pytest.approx(path_loss(600.0, 2.0, PARAMS) / 4, rel=1e-14)
    assert path_loss(1.0, 4.0, PARAMS) == pytest.approx((3e5 / (4 * math.pi * 20e9)) ** 2, rel=1e-14)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss(0.0, 2.0, PARAMS)
    with pytest.raises(ValueError):
        path_loss(np.array([1.0, -1.0]), 2.0, PARAMS)


def test_nakagami_cdf_values():
    assert nakagami_cdf(0.0, 3) == 0.0
    assert nakagami_cdf(1.0, 1) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert nakagami_cdf(1.0, 3) == pytest.approx(0.5768099, abs=1e-6)


def test_nakagami_cdf_matches_gamma_law():
    from scipy.stats import gamma

    x = np.linspace(0.0, 5.0, 51)
    for m in (1, 2, 5, 12):
        np.testing.assert_allclose(nakagami_cdf(x, m), gamma.cdf(x, m, scale=1.0 / m), atol=1e-12)


def test_alzer_approximation():
    assert alzer_nu(1) == 1.0
    assert alzer_nu(3) == pytest.approx(1.6509636, abs=1e-6)
    x = np.linspace(0.0, 4.0, 41)
    np.testing.assert_allclose(nakagami_cdf_approx(x, 1), nakagami_cdf(x, 1), atol=1e-14)
    assert nakagami_cdf_approx(0.0, 3) == 0.0
    nu = alzer_nu(3)
    explicit = 1 - (3 * math.exp(-nu) - 3 * math.exp(-2 * nu) + math.exp(-3 * nu))
    assert nakagami_cdf_approx(1.0, 3) == pytest.approx(explicit, abs=1e-14)
    assert nakagami_cdf_approx(1.0, 3) == pytest.approx(0.5277787, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(m=st.integers(1, 20), x=st.floats(0.0, 50.0))
def test_approx_cdf_against_binomial_sum(m, x):
    nu = alzer_nu(m)
    total = sum(math.comb(m, i) * (-1) ** (i + 1) * math.exp(-nu * i * x) for i in range(1, m + 1))
    assert nakagami_cdf_approx(x, m) == pytest.approx(1 - total, abs=1e-9)
    assert 0.0 <= nakagami_cdf_approx(x, m) <= 1.0


def test_channel_gain_moments():
    rng = np.random.default_rng(7)
    h3 = sample_channel_gain(3, rng, 1_000_000)
    assert h3.mean() == pytest.approx(1.0, abs=0.01)
    assert np.mean(h3 <= 1.0) == pytest.approx(0.5768099, abs=0.005)
    h1 = sample_channel_gain(1, rng, 1_000_000)
    assert h1.var() == pytest.approx(1.0, abs=0.02)


def test_eirp_conversion():
    assert eirp_density_to_power(40.0, 1.0, 30e6) == pytest.approx(3e5)
    assert eirp_density_to_power(4.0, 1.0, 30e6) == pytest.approx(75.35659, rel=1e-6)
    assert linear_to_db(eirp_density_to_power(4.0, 1.0, 30e6)) == pytest.approx(18.7712, abs=1e-4)
    assert eirp_density_to_power(0.0, 1.0, 1e6) == pytest.approx(1.0)
    assert eirp_density_to_power(40.0, 10.0, 30e6) == pytest.approx(3e4)


def test_omega_coefficient():
    w = omega_coefficient(3e5, 1.0, PARAMS)
    assert w * 3e5 * PARAMS.unit_distance_gain == pytest.approx(1.0, abs=1e-12)
    # oracle: reciprocal of the 1 km path gain times P_t G_0
    assert w == pytest.approx(1.0 / (path_loss(1.0, 2.0, PARAMS) * 3e5), rel=1e-12)
    assert w == pytest.approx(2.339462e6, rel=1e-6)
    assert omega_coefficient(1.5e5, 1.0, PARAMS) == pytest.approx(2 * w, rel=1e-14)


def test_noise_power():
    assert PARAMS.noise_power_w == pytest.approx(1.1943215e-13, rel=1e-6)


def test_db_roundtrip():
    assert db_to_linear(30.0) == pytest.approx(1000.0)
    assert linear_to_db(db_to_linear(-17.5)) == pytest.approx(-17.5)


@pytest.mark.parametrize("m", [0, 21, 2.5])
def test_channel_params_reject_bad_m(m):
    with pytest.raises(ValueError):
        ChannelParams(nakagami_m=m)


def test_link_budget_validation():
    with pytest.raises(ValueError):
        LinkBudget(tx_power_w=0.0)
    with pytest.raises(ValueError):
        LinkBudget(tx_power_w=1.0, pathloss_exp=1.5)
    assert LinkBudget(tx_power_w=2.0, mainlobe_gain=3.0, bias=5.0).biased_power == pytest.approx(30.0)
