"""Scenario configuration, action sets and topology construction."""

from __future__ import annotations

import dataclasses
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

LICENSED = "licensed"
UNLICENSED = "unlicensed"
BANDS = (LICENSED, UNLICENSED)

N_SECTORS = 3
SECTOR_WIDTH_DEG = 120.0
MAX_PLACEMENT_ATTEMPTS = 10_000


class ConfigError(ValueError):
    """Invalid scenario configuration."""


class PlacementError(RuntimeError):
    """Rejection sampling could not satisfy the placement constraints."""


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


def derive_rng(seed: int, label: str) -> np.random.Generator:
    """Independent stream for one subsystem, keyed by a fixed label.

    Adding a new label never perturbs the streams of existing ones.
    """
    key = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed), key]))


@dataclass(frozen=True)
class ScenarioConfig:
    num_small_cells: int = 2
    num_ues_per_sector: int = 30
    num_subbands_licensed: int = 4
    num_subbands_unlicensed: int = 2
    power_levels: int = 3
    bias_levels: int = 4
    bias_values: tuple = ()  # empty: 0, 3, 6, ... dB for bias_levels entries
    max_power: float = 30.0  # dBm, SCBS licensed
    macro_power: float = 46.0  # dBm
    bandwidth_licensed: float = 5e6
    bandwidth_unlicensed: float = 20e6
    tti_count: int = 500
    seed: int = 0
    speed: float = 3.0  # km/h

    # geometry
    sector_radius: float = 289.0
    min_mbs_scbs_distance: float = 75.0
    min_scbs_spacing: float = 75.0
    hotspot_radius: float = 40.0
    min_ue_distance: float = 35.0
    shadowing_std: float = 0.0

    # radio
    max_power_unlicensed: float = 23.0  # dBm
    noise_density: float = -174.0  # dBm/Hz
    noise_figure: float = 0.0
    sinr_cap_db: float = 30.0
    wifi_emax: float = 0.8
    wifi_gamma: float = 0.05
    wifi_cs_threshold: float = -82.0  # dBm
    wifi_background_contenders: int = 0

    # association
    load_threshold: int = 8
    rsrp_threshold: float = -72.0
    wifi_radius: float = 40.0
    reassociation_period: int = 50

    # scheduling
    ewma_factor: float = 0.05
    rate_floor: float = 1e3
    urgency_floor: float = 0.02

    # learning
    cellular_period: int = 10
    kappa0: float = 5.0
    kappa_tau: float = 100.0
    constant_kappa: bool = False
    power_price: float = 0.05
    exact_counterfactual: bool = False

    # metrics
    warmup_ttis: int = 50

    traffic: dict = field(default_factory=dict, compare=True, hash=False)

    def __post_init__(self):
        if len(self.bias_values) == 0 and self.bias_levels > 0:
            object.__setattr__(self, "bias_values", default_bias_values(self.bias_levels))
        object.__setattr__(self, "bias_values", tuple(float(b) for b in self.bias_values))
        self.validate()

    def validate(self):
        if self.num_small_cells < 0:
            raise ConfigError("num_small_cells must be >= 0")
        if self.num_ues_per_sector < 1:
            raise ConfigError("num_ues_per_sector must be >= 1")
        for name in ("power_levels", "num_subbands_licensed", "num_subbands_unlicensed",
                     "bias_levels", "cellular_period", "reassociation_period"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if len(self.bias_values) != self.bias_levels:
            raise ConfigError(
                f"bias_values has {len(self.bias_values)} entries, expected {self.bias_levels}")
        if any(b < 0 for b in self.bias_values):
            raise ConfigError("bias_values must be non-negative")
        if any(b1 <= b0 for b0, b1 in zip(self.bias_values, self.bias_values[1:])):
            raise ConfigError("bias_values must be strictly increasing")
        if not math.isfinite(self.max_power) or not math.isfinite(self.macro_power):
            raise ConfigError("transmit powers must be finite")
        if self.bandwidth_licensed <= 0 or self.bandwidth_unlicensed <= 0:
            raise ConfigError("bandwidths must be positive")
        if self.tti_count < 0:
            raise ConfigError("tti_count must be >= 0")
        if not 0.0 < self.ewma_factor <= 1.0:
            raise ConfigError("ewma_factor must lie in (0, 1]")
        if self.kappa0 <= 0 or self.kappa_tau <= 0:
            raise ConfigError("temperature parameters must be positive")
        if self.sector_radius <= self.min_mbs_scbs_distance:
            raise ConfigError("sector_radius must exceed min_mbs_scbs_distance")

    @property
    def max_power_mw(self) -> float:
        return float(dbm_to_mw(self.max_power))

    @property
    def max_power_unlicensed_mw(self) -> float:
        return float(dbm_to_mw(self.max_power_unlicensed))

    @property
    def num_scbs(self) -> int:
        return N_SECTORS * self.num_small_cells

    @property
    def num_ues(self) -> int:
        return N_SECTORS * self.num_ues_per_sector

    @property
    def hotspot_ues_per_scbs(self) -> int:
        if self.num_small_cells == 0:
            return 0
        # floor((2/3) * N_UE / K) in integer arithmetic
        return (2 * self.num_ues_per_sector) // (3 * self.num_small_cells)

    def replace(self, **changes) -> "ScenarioConfig":
        if "bias_levels" in changes and "bias_values" not in changes:
            changes["bias_values"] = default_bias_values(changes["bias_levels"])
        return dataclasses.replace(self, **changes)


def default_bias_values(levels: int) -> tuple:
    """0, 3, 6, ... dB; gives {0, 3, 6, 9} for four levels."""
    return tuple(3.0 * i for i in range(levels))


_FIELD_TYPES = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _coerce(name: str, raw: str):
    default = _FIELD_TYPES[name].default
    if name == "bias_values":
        return tuple(float(v) for v in raw.replace(",", " ").split())
    if isinstance(default, bool):
        lowered = raw.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        try:
            value = float(raw)
        except ValueError as exc:
            raise ConfigError(f"{name}: expected an integer, got {raw!r}") from exc
        if value != int(value):
            raise ConfigError(f"{name}: expected an integer, got {raw!r}")
        return int(value)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name}: expected a number, got {raw!r}") from exc


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse ``key=value`` lines. ``#`` starts a comment; unknown keys are an error.

    Keys of the form ``traffic.<class>.<param>`` override traffic generator
    parameters; they are checked against the traffic module's parameter table.
    """
    from .traffic import validate_traffic_override

    values = {}
    traffic = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key.startswith("traffic."):
            parts = key.split(".")
            if len(parts) != 3:
                raise ConfigError(f"line {lineno}: malformed traffic key {key!r}")
            cls, param = parts[1], parts[2]
            try:
                value = float(raw)
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: {key} expects a number") from exc
            validate_traffic_override(cls, param)
            traffic.setdefault(cls, {})[param] = value
            continue
        if key not in _FIELD_TYPES or key == "traffic":
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    if "bias_levels" in values and "bias_values" not in values:
        values["bias_values"] = default_bias_values(values["bias_levels"])
    base = base or ScenarioConfig()
    merged = dict(base.traffic)
    for cls, params in traffic.items():
        merged[cls] = {**merged.get(cls, {}), **params}
    values["traffic"] = merged
    return dataclasses.replace(base, **values)


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    return parse_config(Path(path).read_text(), base)


def dump_config(config: ScenarioConfig) -> str:
    lines = []
    for f in dataclasses.fields(config):
        if f.name == "traffic":
            continue
        value = getattr(config, f.name)
        if f.name == "bias_values":
            value = ",".join(repr(v) for v in value)
        lines.append(f"{f.name}={value}")
    for cls in sorted(config.traffic):
        for param in sorted(config.traffic[cls]):
            lines.append(f"traffic.{cls}.{param}={config.traffic[cls][param]!r}")
    return "\n".join(lines) + "\n"


# --- actions -------------------------------------------------------------


def power_of_level(level: int, num_levels: int, p_max: float) -> float:
    """Linear power grid: level ``l`` of ``L`` transmits ``l * p_max / L``."""
    if not 1 <= level <= num_levels:
        raise IndexError(f"power level {level} outside 1..{num_levels}")
    return level * p_max / num_levels


@dataclass(frozen=True)
class Action:
    power_level: int  # 1-based
    subband: int  # 1-based
    bias: int  # 1-based; always 1 on the unlicensed band
    transmit_power: float  # mW


class ActionSet:
    """All (power, subband, bias) combinations of one SCBS on one band."""

    def __init__(self, actions, band, bias_values=(0.0,)):
        self.actions = tuple(actions)
        self.band = band
        self.bias_values = tuple(bias_values)
        self.powers = np.array([a.transmit_power for a in self.actions])
        self.subbands = np.array([a.subband - 1 for a in self.actions], dtype=int)
        self.biases_db = np.array([self.bias_values[a.bias - 1] for a in self.actions])

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, index):
        return self.actions[index]

    def __iter__(self):
        return iter(self.actions)


def enumerate_actions(config: ScenarioConfig, band: str) -> ActionSet:
    if band == LICENSED:
        n_sub, p_max, biases = (config.num_subbands_licensed, config.max_power_mw,
                                config.bias_values)
    elif band == UNLICENSED:
        n_sub, p_max, biases = (config.num_subbands_unlicensed,
                                config.max_power_unlicensed_mw, (0.0,))
    else:
        raise ValueError(f"unknown band {band!r}")
    actions = [
        Action(level, s, b, power_of_level(level, config.power_levels, p_max))
        for s in range(1, n_sub + 1)
        for b in range(1, len(biases) + 1)
        for level in range(1, config.power_levels + 1)
    ]
    return ActionSet(actions, band, biases)


# --- topology ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Topology:
    mbs_position: np.ndarray
    sector_bearings: np.ndarray  # degrees
    scbs_positions: np.ndarray  # (n_scbs, 2)
    scbs_sector: np.ndarray
    ue_positions: np.ndarray  # (n_ue, 2)
    ue_sector: np.ndarray
    ue_home: np.ndarray  # SCBS index of hotspot UEs, -1 otherwise

    @property
    def num_scbs(self):
        return len(self.scbs_positions)

    @property
    def num_ues(self):
        return len(self.ue_positions)

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name))
                   for f in dataclasses.fields(self))


def sector_bearings() -> np.ndarray:
    return np.arange(N_SECTORS) * SECTOR_WIDTH_DEG


def _point_in_sector(rng, bearing, r_min, r_max):
    # area-uniform over the annular sector
    u = rng.uniform(r_min ** 2, r_max ** 2)
    r = math.sqrt(u)
    theta = math.radians(bearing + rng.uniform(-SECTOR_WIDTH_DEG / 2, SECTOR_WIDTH_DEG / 2))
    return np.array([r * math.cos(theta), r * math.sin(theta)])


def _point_in_disk(rng, center, radius):
    r = radius * math.sqrt(rng.uniform(0.0, 1.0))
    theta = rng.uniform(0.0, 2 * math.pi)
    return center + np.array([r * math.cos(theta), r * math.sin(theta)])


def build_scenario(config: ScenarioConfig) -> Topology:
    """Drop SCBSs and UEs in the three-sector macrocell.

    Per sector: ``K`` SCBSs uniformly at least ``min_mbs_scbs_distance`` from
    the MBS, ``floor(2/3 * N_UE / K)`` hotspot UEs within ``hotspot_radius``
    of each SCBS and the remainder uniformly over the sector.
    """
    rng = derive_rng(config.seed, "topology")
    bearings = sector_bearings()
    k, n_ue = config.num_small_cells, config.num_ues_per_sector
    n_hot = config.hotspot_ues_per_scbs

    scbs, scbs_sector = [], []
    ues, ue_sector, ue_home = [], [], []
    for sector, bearing in enumerate(bearings):
        placed = []
        for _ in range(k):
            for _attempt in range(MAX_PLACEMENT_ATTEMPTS):
                p = _point_in_sector(rng, bearing, config.min_mbs_scbs_distance,
                                     config.sector_radius)
                if all(np.hypot(*(p - q)) >= config.min_scbs_spacing for q in placed):
                    break
            else:
                raise PlacementError(
                    f"could not place {k} SCBSs in sector {sector} after "
                    f"{MAX_PLACEMENT_ATTEMPTS} attempts")
            placed.append(p)
        base = len(scbs)
        scbs.extend(placed)
        scbs_sector.extend([sector] * k)
        for j, p in enumerate(placed):
            for _ in range(n_hot):
                ues.append(_point_in_disk(rng, p, config.hotspot_radius))
                ue_sector.append(sector)
                ue_home.append(base + j)
        for _ in range(n_ue - k * n_hot):
            ues.append(_point_in_sector(rng, bearing, config.min_ue_distance,
                                        config.sector_radius))
            ue_sector.append(sector)
            ue_home.append(-1)

    return Topology(
        mbs_position=np.zeros(2),
        sector_bearings=bearings,
        scbs_positions=np.array(scbs, dtype=float).reshape(-1, 2),
        scbs_sector=np.array(scbs_sector, dtype=int),
        ue_positions=np.array(ues, dtype=float).reshape(-1, 2),
        ue_sector=np.array(ue_sector, dtype=int),
        ue_home=np.array(ue_home, dtype=int),
    )
