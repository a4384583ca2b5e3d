"""Named batches of runs reproducing the comparison experiments."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .model import ConfigError, ScenarioConfig

FIG3_TTIS = 2000
FIG5_LOADS = (30, 60, 90, 120)
FIG6_SMALL_CELLS = (2, 4, 6)


@dataclass(frozen=True)
class RunSpec:
    label: str
    config: ScenarioConfig
    policy: str
    scheduler: str
    learner: str


def _fig3(base):
    # small scenario: every licensed action is evaluated on the epoch's slots
    cfg = base.replace(num_small_cells=2, num_ues_per_sector=10, bandwidth_licensed=1.4e6,
                       tti_count=max(base.tti_count, FIG3_TTIS), exact_counterfactual=True)
    return [RunSpec(f"fig3-{lrn}", cfg, "proposed", "ps", lrn)
            for lrn in ("cross", "independent")]


def _fig4(base):
    cfg = base.replace(num_small_cells=2, num_ues_per_sector=30)
    runs = []
    for variant, scheduler, learner in (("random", "pf", "random"), ("learned", "ps", "cross")):
        for policy in ("macro-only", "hetnet", "hetnet-wifi-load", "hetnet-wifi-coverage"):
            runs.append(RunSpec(f"fig4-{variant}-{policy}", cfg, policy, scheduler, learner))
    return runs


def _fig5(base):
    # the proactive scheduler comes with WiFi steering; PF and EDF stay licensed-only
    pairing = {"edf": "hetnet", "pf": "hetnet", "ps": "proposed"}
    runs = []
    for scheduler in ("edf", "pf", "ps"):
        for n in FIG5_LOADS:
            cfg = base.replace(num_small_cells=2, num_ues_per_sector=n)
            runs.append(RunSpec(f"fig5-{scheduler}-{n}", cfg, pairing[scheduler], scheduler,
                                "cross"))
    return runs


def _fig6(base):
    runs = []
    for k in FIG6_SMALL_CELLS:
        cfg = base.replace(num_small_cells=k)
        for policy in ("macro-only", "hetnet", "hetnet-wifi-load"):
            learner = "random" if policy == "macro-only" else "cross"
            runs.append(RunSpec(f"fig6-k{k}-{policy}", cfg, policy, "pf", learner))
    return runs


PRESETS = {"fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6}


def preset(name, base: ScenarioConfig | None = None, seed: int | None = None) -> list:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    base = base or ScenarioConfig()
    if seed is not None:
        base = base.replace(seed=seed)
    return PRESETS[name](base)


def execute(spec: RunSpec, record_decisions=True):
    from .engine import run_simulation

    return run_simulation(spec.config, spec.policy, spec.scheduler, spec.learner,
                          record_decisions)


def run_batch(specs, workers=1, record_decisions=True) -> list:
    """Run ``specs`` serially or in a process pool; results keep input order."""
    specs = list(specs)
    if workers <= 1 or len(specs) <= 1:
        return [execute(s, record_decisions) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, specs, [record_decisions] * len(specs)))
