import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crosslearn import traffic
from crosslearn.traffic import (
    BY_NAME,
    CLASSES,
    FlowState,
    assign_mix,
    generate_arrivals,
    is_delay_tolerant,
    make_source,
    mix_counts,
)


def test_mix_thirty():
    assert mix_counts(30) == {"FTP": 3, "HTTP": 6, "VideoStreaming": 6, "VoIP": 9, "Gaming": 6}


def test_mix_ten():
    assert mix_counts(10) == {"FTP": 1, "HTTP": 2, "VideoStreaming": 2, "VoIP": 3, "Gaming": 2}


def test_mix_one_goes_to_largest_share():
    assert mix_counts(1) == {"FTP": 0, "HTTP": 0, "VideoStreaming": 0, "VoIP": 1, "Gaming": 0}


def test_mix_rejects_empty():
    with pytest.raises(ValueError):
        mix_counts(0)


@given(st.integers(1, 300))
def test_mix_sums_and_stays_within_one(n):
    counts = mix_counts(n)
    assert sum(counts.values()) == n
    for cls in CLASSES:
        assert abs(counts[cls.name] - cls.share * n) < 1


def test_assign_mix_counts_and_seed():
    a = assign_mix(30, np.random.default_rng(1))
    b = assign_mix(30, np.random.default_rng(1))
    assert [c.name for c in a] == [c.name for c in b]
    names = [c.name for c in a]
    assert {n: names.count(n) for n in set(names)} == {k: v for k, v in mix_counts(30).items() if v}


@pytest.mark.parametrize("name,expected", [
    ("HTTP", True), ("FTP", True), ("VoIP", False), ("Gaming", False), ("VideoStreaming", False),
])
def test_delay_tolerance(name, expected):
    assert is_delay_tolerant(name) is expected
    assert is_delay_tolerant(BY_NAME[name]) is expected


def test_class_table_invariants():
    for cls in CLASSES:
        assert cls.delay_tolerant == (cls.name in ("FTP", "HTTP"))
        assert math.isfinite(cls.delay_budget) != cls.delay_tolerant


def test_voip_every_twentieth_tti():
    src = make_source(BY_NAME["VoIP"], np.random.default_rng(0))
    ttis = [t for t in range(400) if generate_arrivals(src, t)]
    assert len(ttis) == 20
    assert set(np.diff(ttis)) == {20}
    packet = make_source(BY_NAME["VoIP"], np.random.default_rng(0)).arrivals(ttis[0])[0]
    assert packet.remaining_bits == 1280
    assert packet.deadline_tti == ttis[0] + 50


def test_ftp_waits_for_completion():
    src = make_source(BY_NAME["FTP"], np.random.default_rng(0))
    first = generate_arrivals(src, 0, idle=True)
    assert len(first) == 1 and first[0].remaining_bits == 16e6
    assert generate_arrivals(src, 1, idle=False) == []
    assert len(generate_arrivals(src, 2, idle=True)) == 1


def test_http_first_page_then_reading():
    src = make_source(BY_NAME["HTTP"], np.random.default_rng(4))
    assert len(generate_arrivals(src, 0, idle=True)) == 1
    assert generate_arrivals(src, 1, idle=False) == []
    # page delivered: the next request waits for a reading time
    later = [t for t in range(2, 20_000) if generate_arrivals(src, t, idle=True)]
    assert later and later[0] > 2


def test_http_page_sizes_truncated():
    src = make_source(BY_NAME["HTTP"], np.random.default_rng(2))
    sizes = np.array([src._page_bits() for _ in range(2000)]) / 8
    assert sizes.min() >= 5e3 and sizes.max() <= 2e6
    assert 60e3 < np.mean(sizes) < 140e3


def test_video_rate():
    src = make_source(BY_NAME["VideoStreaming"], np.random.default_rng(0))
    bits = sum(f.remaining_bits for t in range(4000) for f in generate_arrivals(src, t))
    assert bits / 4.0 == pytest.approx(512e3, rel=0.02)


def test_gaming_jitter_stays_inside_period():
    src = make_source(BY_NAME["Gaming"], np.random.default_rng(9))
    ttis = [t for t in range(4000) for _ in generate_arrivals(src, t)]
    assert len(ttis) == 100
    assert np.all(np.diff(ttis) > 0)


def test_arrivals_reproducible_and_independent():
    def trace(seed):
        src = make_source(BY_NAME["Gaming"], np.random.default_rng(seed))
        return [t for t in range(2000) if generate_arrivals(src, t)]
    assert trace(3) == trace(3)
    assert trace(3) != trace(4)


def test_negative_tti_rejected():
    with pytest.raises(ValueError):
        generate_arrivals(make_source(BY_NAME["FTP"], None), -1)


def test_overrides_apply():
    src = make_source(BY_NAME["VoIP"], np.random.default_rng(0), {"voip": {"period_ms": 10.0}})
    ttis = [t for t in range(100) if generate_arrivals(src, t)]
    assert set(np.diff(ttis)) == {10}


def test_unknown_override_rejected():
    from crosslearn.model import ConfigError
    with pytest.raises(ConfigError):
        traffic.validate_traffic_override("voip", "codec")


@given(st.lists(st.integers(0, 5000), max_size=30))
def test_flow_never_negative(requests):
    flow = FlowState(10_000.0, 0)
    for i, bits in enumerate(requests):
        got = flow.serve(bits, i)
        assert 0 <= got <= bits
        assert flow.remaining_bits >= 0
    assert sum(b for _, b in flow.served_bits_history) == 10_000.0 - flow.remaining_bits
