import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crosslearn.model import (
    LICENSED,
    UNLICENSED,
    ConfigError,
    PlacementError,
    ScenarioConfig,
    build_scenario,
    derive_rng,
    dump_config,
    enumerate_actions,
    parse_config,
    power_of_level,
)


def test_default_config_is_valid():
    cfg = ScenarioConfig()
    assert cfg.num_scbs == 6
    assert cfg.num_ues == 90
    assert cfg.bias_values == (0.0, 3.0, 6.0, 9.0)


@pytest.mark.parametrize("changes", [
    dict(num_small_cells=-1),
    dict(num_ues_per_sector=0),
    dict(power_levels=0),
    dict(num_subbands_licensed=0),
    dict(bias_levels=2, bias_values=(0.0,)),
    dict(bias_levels=2, bias_values=(3.0, 3.0)),
    dict(bias_levels=2, bias_values=(-1.0, 3.0)),
])
def test_invalid_config_rejected(changes):
    with pytest.raises(ConfigError):
        ScenarioConfig(**changes)


def test_parse_config_round_trip():
    cfg = ScenarioConfig(num_small_cells=4, seed=7, traffic={"voip": {"period_ms": 10.0}})
    assert parse_config(dump_config(cfg)) == cfg


def test_parse_config_comments_and_overrides():
    cfg = parse_config("# scenario\nnum_small_cells = 3  # K\ntraffic.ftp.file_bytes = 1e6\n")
    assert cfg.num_small_cells == 3
    assert cfg.traffic == {"ftp": {"file_bytes": 1e6}}


@pytest.mark.parametrize("text", [
    "no_such_key = 1",
    "num_small_cells = 2.5",
    "traffic.ftp.nonsense = 1",
    "traffic.telnet.rate = 1",
    "just words",
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_action_count_licensed():
    cfg = ScenarioConfig(power_levels=3, num_subbands_licensed=4, bias_levels=2)
    assert len(enumerate_actions(cfg, LICENSED)) == 24


def test_action_count_unlicensed_ignores_bias():
    cfg = ScenarioConfig(power_levels=3, num_subbands_unlicensed=2, bias_levels=4)
    acts = enumerate_actions(cfg, UNLICENSED)
    assert len(acts) == 6
    assert set(acts.biases_db) == {0.0}


def test_singleton_action_set():
    cfg = ScenarioConfig(power_levels=1, num_subbands_licensed=1, bias_levels=1)
    assert len(enumerate_actions(cfg, LICENSED)) == 1


def test_power_grid_two_levels():
    # 20 dBm = 100 mW
    cfg = ScenarioConfig(power_levels=2, max_power=20.0)
    powers = sorted({round(a.transmit_power, 9) for a in enumerate_actions(cfg, LICENSED)})
    assert powers == pytest.approx([50.0, 100.0])


def test_power_of_level_bounds():
    assert power_of_level(1, 4, 100.0) == 25.0
    with pytest.raises(IndexError):
        power_of_level(0, 4, 100.0)
    with pytest.raises(IndexError):
        power_of_level(5, 4, 100.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.integers(1, 4))
def test_action_set_invariants(levels, subbands, biases):
    cfg = ScenarioConfig(power_levels=levels, num_subbands_licensed=subbands, bias_levels=biases)
    acts = enumerate_actions(cfg, LICENSED)
    keys = {(a.power_level, a.subband, a.bias) for a in acts}
    assert len(acts) == len(keys) == levels * subbands * biases
    assert np.all(acts.powers <= cfg.max_power_mw * (1 + 1e-12))
    for s in range(1, subbands + 1):
        for b in range(1, biases + 1):
            ladder = [a.transmit_power for a in acts if a.subband == s and a.bias == b]
            assert np.all(np.diff(ladder) > 0)


def test_topology_default_counts():
    cfg = ScenarioConfig(num_small_cells=2, num_ues_per_sector=30)
    topo = build_scenario(cfg)
    for k in range(topo.num_scbs):
        assert np.sum(topo.ue_home == k) == 10
    for sector in range(3):
        in_sector = topo.ue_sector == sector
        assert np.sum(in_sector & (topo.ue_home == -1)) == 10


def test_topology_without_small_cells():
    topo = build_scenario(ScenarioConfig(num_small_cells=0, num_ues_per_sector=10))
    assert topo.num_scbs == 0
    assert topo.num_ues == 30
    assert np.all(topo.ue_home == -1)


def test_topology_deterministic():
    cfg = ScenarioConfig(seed=11)
    assert build_scenario(cfg) == build_scenario(cfg)
    assert not build_scenario(cfg) == build_scenario(cfg.replace(seed=12))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 6), st.integers(1, 60), st.integers(0, 10_000))
def test_topology_invariants(k, n_ue, seed):
    cfg = ScenarioConfig(num_small_cells=k, num_ues_per_sector=n_ue, seed=seed)
    topo = build_scenario(cfg)
    d_mbs = np.hypot(*topo.scbs_positions.T) if k else np.zeros(0)
    assert np.all(d_mbs >= cfg.min_mbs_scbs_distance)
    for j in range(topo.num_scbs):
        home = topo.ue_home == j
        assert home.sum() == cfg.hotspot_ues_per_scbs
        d = np.hypot(*(topo.ue_positions[home] - topo.scbs_positions[j]).T)
        assert np.all(d <= cfg.hotspot_radius + 1e-9)
    uniform = topo.ue_positions[topo.ue_home == -1]
    assert np.all(np.hypot(*uniform.T) <= cfg.sector_radius + 1e-9)
    assert topo.num_ues == 3 * n_ue


def test_infeasible_placement():
    cfg = ScenarioConfig(num_small_cells=40, sector_radius=120.0)
    with pytest.raises(PlacementError):
        build_scenario(cfg)


def test_rng_streams_are_label_keyed():
    a = derive_rng(3, "traffic/0").random(4)
    assert np.array_equal(a, derive_rng(3, "traffic/0").random(4))
    assert not np.array_equal(a, derive_rng(3, "traffic/1").random(4))
