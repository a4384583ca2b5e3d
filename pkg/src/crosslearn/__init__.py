"""Cross-system learning for dual-mode small cells over licensed and WiFi bands."""

from .association import PolicyKind, apply_policy
from .engine import RunSummary, Simulation, SimulationResult, TtiMetrics, run_simulation
from .learning import RegretLearner
from .model import ConfigError, ScenarioConfig, build_scenario, enumerate_actions, load_config

__all__ = [
    "ConfigError",
    "PolicyKind",
    "RegretLearner",
    "RunSummary",
    "ScenarioConfig",
    "Simulation",
    "SimulationResult",
    "TtiMetrics",
    "apply_policy",
    "build_scenario",
    "enumerate_actions",
    "load_config",
    "run_simulation",
]
