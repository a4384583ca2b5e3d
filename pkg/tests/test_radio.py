import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crosslearn import radio


def test_macro_pathloss_at_one_km():
    assert radio.pathloss(radio.MACRO_TO_UE, 1000.0) == pytest.approx(128.1)


def test_scbs_pathloss_at_100_m():
    assert radio.pathloss(radio.SCBS_TO_UE, 100.0) == pytest.approx(140.7 - 36.7, abs=1e-9)


def test_pathloss_clamp_near_station():
    assert radio.pathloss(radio.MACRO_TO_UE, 0.001) == pytest.approx(38.0)


@pytest.mark.parametrize("d", [0.0, -5.0])
def test_pathloss_rejects_non_positive_distance(d):
    with pytest.raises(ValueError):
        radio.pathloss(radio.MACRO_TO_UE, d)


@given(st.floats(1.0, 5000.0), st.floats(1.0, 5000.0))
def test_pathloss_monotone(d1, d2):
    lo, hi = sorted((d1, d2))
    for link in (radio.MACRO_TO_UE, radio.SCBS_TO_UE):
        assert radio.pathloss(link, lo) <= radio.pathloss(link, hi)


def test_sinr_definitions():
    assert radio.sinr(1.0, [], 1.0) == 1.0
    assert radio.sinr(1.0, [1.0, 1.0], 1e-30) == pytest.approx(0.5)


def _brute_sinr(tx_mw, gains, server, noise):
    # independent scalar re-implementation
    signal = tx_mw[server] * gains[server]
    interference = 0.0
    for j in range(len(tx_mw)):
        if j != server:
            interference += tx_mw[j] * gains[j]
    return signal / (interference + noise)


def test_sinr_matches_scalar_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        tx = 10 ** rng.uniform(0, 4.6, 3)
        pos = rng.uniform(-300, 300, (3, 2))
        ue = rng.uniform(-300, 300, 2)
        d = np.hypot(*(pos - ue).T)
        gains = 10 ** (-radio.pathloss(radio.SCBS_TO_UE, d) / 10)
        noise = radio.noise_power(1.25e6)
        got = radio.sinr(tx[0] * gains[0], tx[1:] * gains[1:], noise)
        assert got == pytest.approx(_brute_sinr(tx, gains, 0, noise), rel=1e-12)


def test_licensed_rate_examples():
    assert radio.licensed_rate(1.0, 1.0) == 1.0
    assert radio.licensed_rate(0.0, 5e6) == 0.0
    assert radio.licensed_rate(3.0, 5e6) == pytest.approx(10e6)


def test_licensed_rate_capped():
    assert radio.licensed_rate(1e6, 1.0) == pytest.approx(math.log2(1001.0))


def test_licensed_rate_rejects_negative_sinr():
    with pytest.raises(ValueError):
        radio.licensed_rate(-0.1, 1.0)


@given(st.floats(0, 1e5), st.floats(0, 1e5))
def test_rate_monotone_in_sinr(a, b):
    lo, hi = sorted((a, b))
    assert radio.licensed_rate(lo, 1e6) <= radio.licensed_rate(hi, 1e6)


@given(st.floats(1e-12, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_sinr_monotone_in_interference(signal, i1, i2):
    lo, hi = sorted((i1, i2))
    assert radio.sinr(signal, [hi], 1e-9) <= radio.sinr(signal, [lo], 1e-9)


def test_wifi_share_examples():
    assert radio.wifi_share(0, 100e6) == 0.0
    assert radio.wifi_share(1, 100e6) == pytest.approx(80e6)
    assert radio.wifi_share(5, 100e6) == pytest.approx(0.8 / 1.2 * 20e6)


@given(st.integers(1, 200))
def test_wifi_total_non_increasing(n):
    cap = 50e6
    assert radio.wifi_share(n + 1, cap) * (n + 1) <= radio.wifi_share(n, cap) * n


def test_wifi_cell_properties():
    cell = radio.WifiCell(contenders=4, capacity=100e6)
    assert cell.efficiency == pytest.approx(0.8 / 1.15)
    assert cell.per_station_share == pytest.approx(radio.wifi_share(4, 100e6))


def test_rsrp_subtraction():
    assert radio.rsrp(30.0, 100.0) == -70.0


def test_rsrp_monotone_in_distance():
    d = np.linspace(10, 2000, 100)
    values = radio.rsrp(30.0, radio.pathloss(radio.SCBS_TO_UE, d))
    assert np.all(np.diff(values) <= 0)


def test_noise_power_over_one_hz():
    assert radio.noise_power(1.0) == pytest.approx(10 ** (-17.4))


def test_served_bits_within_subband_capacity():
    """Served bits on a subband never exceed its capacity at the best scheduled SINR."""
    from crosslearn import ScenarioConfig
    from crosslearn.engine import Simulation

    sim = Simulation(ScenarioConfig(num_ues_per_sector=10, tti_count=60), "hetnet", "pf", "random")
    cap_bits = radio.licensed_rate(1e300, sim.w_lic) * 1e-3
    for _ in range(60):
        m = sim.run_tti()
        subbands_in_use = np.where(np.arange(sim.n_station) < sim.n_macro,
                                   sim.config.num_subbands_licensed, 1)
        assert np.all(m.per_cell_bits[:, 0] <= subbands_in_use * cap_bits + 1e-9)
