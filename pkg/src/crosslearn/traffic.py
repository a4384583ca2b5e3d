"""NGMN-style traffic mix and per-class packet generators.

TTI duration is fixed at 1 ms, so every time parameter below in ms is also a
count of TTIs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TTI_SECONDS = 1e-3

FTP = "FTP"
HTTP = "HTTP"
VIDEO = "VideoStreaming"
VOIP = "VoIP"
GAMING = "Gaming"


@dataclass(frozen=True)
class TrafficClass:
    name: str
    key: str  # config-file key
    category: str
    share: float
    delay_tolerant: bool
    delay_budget: float = math.inf  # ms


CLASSES = (
    TrafficClass(FTP, "ftp", "best-effort", 0.10, True),
    TrafficClass(HTTP, "http", "interactive", 0.20, True),
    TrafficClass(VIDEO, "video", "streaming", 0.20, False, 100.0),
    TrafficClass(VOIP, "voip", "real-time", 0.30, False, 50.0),
    TrafficClass(GAMING, "gaming", "interactive-real-time", 0.20, False, 60.0),
)
BY_NAME = {c.name: c for c in CLASSES}
BY_KEY = {c.key: c for c in CLASSES}

DEFAULT_PARAMS = {
    "ftp": {"file_bytes": 2e6},
    "http": {"page_mean_bytes": 100e3, "page_sigma": 1.0, "page_min_bytes": 5e3,
             "page_max_bytes": 2e6, "reading_mean_ms": 5000.0},
    "video": {"rate_bps": 512e3, "chunk_ms": 40.0, "budget_ms": 100.0},
    "voip": {"period_ms": 20.0, "packet_bytes": 160.0, "budget_ms": 50.0},
    "gaming": {"period_ms": 40.0, "packet_bytes": 200.0, "budget_ms": 60.0,
               "jitter_median_ms": 2.0, "jitter_sigma": 0.5},
}


def validate_traffic_override(cls_key: str, param: str):
    from .model import ConfigError

    if cls_key not in DEFAULT_PARAMS:
        raise ConfigError(f"unknown traffic class {cls_key!r}")
    if param not in DEFAULT_PARAMS[cls_key]:
        raise ConfigError(f"unknown parameter {param!r} for traffic class {cls_key!r}")


def class_params(cls: TrafficClass, overrides: dict | None = None) -> dict:
    params = dict(DEFAULT_PARAMS[cls.key])
    if overrides:
        params.update(overrides.get(cls.key, {}))
    return params


def is_delay_tolerant(cls) -> bool:
    if isinstance(cls, str):
        cls = BY_NAME[cls]
    return cls.name in (FTP, HTTP)


def mix_counts(n_ue: int) -> dict:
    """Largest-remainder apportionment of ``n_ue`` over the class shares.

    Remainder ties go to the larger share, then to table order.
    """
    if n_ue < 1:
        raise ValueError("n_ue must be >= 1")
    quotas = [c.share * n_ue for c in CLASSES]
    counts = [math.floor(q + 1e-9) for q in quotas]
    order = sorted(range(len(CLASSES)),
                   key=lambda i: (-(quotas[i] - counts[i]), -CLASSES[i].share, i))
    for i in order[: n_ue - sum(counts)]:
        counts[i] += 1
    return {c.name: n for c, n in zip(CLASSES, counts)}


def assign_mix(n_ue: int, rng) -> list:
    """One traffic class per UE, class counts fixed by ``mix_counts``."""
    counts = mix_counts(n_ue)
    classes = [BY_NAME[name] for name, n in counts.items() for _ in range(n)]
    order = rng.permutation(n_ue)
    return [classes[i] for i in order]


@dataclass
class FlowState:
    remaining_bits: float
    arrival_tti: int
    deadline_tti: int | None = None
    size_bits: float = 0.0
    served_bits_history: list = field(default_factory=list)

    def __post_init__(self):
        if not self.size_bits:
            self.size_bits = self.remaining_bits

    def serve(self, bits: float, tti: int) -> float:
        bits = min(bits, self.remaining_bits)
        if bits > 0:
            self.remaining_bits -= bits
            self.served_bits_history.append((tti, bits))
        return bits


class PeriodicSource:
    """Fixed-size packets every ``period`` TTIs with an optional lognormal jitter."""

    def __init__(self, period, packet_bits, budget, rng, phase=0,
                 jitter_median=0.0, jitter_sigma=0.0):
        self.period = int(round(period))
        self.packet_bits = float(packet_bits)
        self.budget = int(round(budget))
        self.rng = rng
        self.jitter_median = jitter_median
        self.jitter_sigma = jitter_sigma
        self._nominal = int(phase)
        self._next = self._nominal + self._jitter()

    def _jitter(self):
        if self.jitter_median <= 0:
            return 0
        j = self.jitter_median * math.exp(self.jitter_sigma * self.rng.standard_normal())
        return min(int(round(j)), self.period - 1)

    def arrivals(self, tti, idle=True):
        out = []
        while self._next <= tti:
            out.append(FlowState(self.packet_bits, tti, tti + self.budget))
            self._nominal += self.period
            self._next = self._nominal + self._jitter()
        return out


class FtpSource:
    """Back-to-back files: a new file only once the previous one is done."""

    def __init__(self, file_bits):
        self.file_bits = float(file_bits)

    def arrivals(self, tti, idle=True):
        if idle:
            return [FlowState(self.file_bits, tti)]
        return []


class HttpSource:
    """Truncated-lognormal pages separated by exponential reading times.

    The first page is requested at TTI 0; the reading clock starts when a
    page has been fully delivered.
    """

    def __init__(self, rng, page_mean_bytes, page_sigma, page_min_bytes, page_max_bytes,
                 reading_mean_ms):
        self.rng = rng
        self.sigma = page_sigma
        self.mu = math.log(page_mean_bytes) - page_sigma ** 2 / 2
        self.lo, self.hi = page_min_bytes, page_max_bytes
        self.reading_mean = reading_mean_ms
        self._next_request = 0
        self._outstanding = False

    def _page_bits(self):
        for _ in range(1000):
            size = self.rng.lognormal(self.mu, self.sigma)
            if self.lo <= size <= self.hi:
                return 8.0 * size
        return 8.0 * min(max(size, self.lo), self.hi)

    def arrivals(self, tti, idle=True):
        if self._outstanding:
            if not idle:
                return []
            self._outstanding = False
            self._next_request = tti + int(round(self.rng.exponential(self.reading_mean)))
        if tti >= self._next_request:
            self._outstanding = True
            return [FlowState(self._page_bits(), tti)]
        return []


def make_source(cls: TrafficClass, rng, overrides=None):
    p = class_params(cls, overrides)
    if cls.name == FTP:
        return FtpSource(8.0 * p["file_bytes"])
    if cls.name == HTTP:
        return HttpSource(rng, p["page_mean_bytes"], p["page_sigma"], p["page_min_bytes"],
                          p["page_max_bytes"], p["reading_mean_ms"])
    if cls.name == VIDEO:
        period = p["chunk_ms"]
        bits = p["rate_bps"] * period * 1e-3
        return PeriodicSource(period, bits, p["budget_ms"], rng,
                              phase=rng.integers(int(period)))
    if cls.name == VOIP:
        return PeriodicSource(p["period_ms"], 8.0 * p["packet_bytes"], p["budget_ms"], rng,
                              phase=rng.integers(int(p["period_ms"])))
    if cls.name == GAMING:
        return PeriodicSource(p["period_ms"], 8.0 * p["packet_bytes"], p["budget_ms"], rng,
                              phase=rng.integers(int(p["period_ms"])),
                              jitter_median=p["jitter_median_ms"],
                              jitter_sigma=p["jitter_sigma"])
    raise ValueError(f"unknown traffic class {cls.name!r}")


def generate_arrivals(source, tti: int, idle: bool = True) -> list:
    """New flows of one UE's generator at ``tti``.

    ``idle`` tells gated generators (FTP, HTTP) that the UE's queue is empty.
    """
    if tti < 0:
        raise ValueError("tti must be >= 0")
    return source.arrivals(tti, idle)


def delay_budget(cls: TrafficClass, overrides=None) -> float:
    if cls.delay_tolerant:
        return math.inf
    return class_params(cls, overrides)["budget_ms"]
