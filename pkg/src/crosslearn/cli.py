"""``simulate`` command-line entry point."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .association import PolicyKind
from .engine import LEARNERS, SimulationError
from .model import ConfigError, PlacementError, ScenarioConfig, load_config
from .output import write_run
from .presets import PRESETS, RunSpec, preset, run_batch
from .scheduling import SCHEDULERS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Simulate a macrocell underlaid with dual-mode small cells.")
    p.add_argument("--config", type=Path, help="key=value scenario file")
    what = p.add_mutually_exclusive_group()
    what.add_argument("--preset", choices=sorted(PRESETS))
    what.add_argument("--policy", choices=[k.value for k in PolicyKind])
    what.add_argument("--list-presets", action="store_true")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="pf")
    p.add_argument("--learner", choices=LEARNERS, default="cross")
    p.add_argument("--ttis", type=int, help="override tti_count")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--out", type=Path, default=Path("out"))
    p.add_argument("--workers", type=int, default=1, help="parallel runs for presets")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list_presets:
        for name in sorted(PRESETS):
            runs = preset(name)
            print(f"{name}: {len(runs)} runs")
            for spec in runs:
                print(f"  {spec.label}")
        return 0
    try:
        base = load_config(args.config) if args.config else ScenarioConfig()
        overrides = {}
        if args.ttis is not None:
            overrides["tti_count"] = args.ttis
        if args.seed is not None:
            overrides["seed"] = args.seed
        base = base.replace(**overrides)
        base.validate()
        if args.preset:
            specs = preset(args.preset, base)
            if args.ttis is not None:
                specs = [RunSpec(s.label, s.config.replace(tti_count=args.ttis), s.policy,
                                 s.scheduler, s.learner) for s in specs]
        else:
            policy = args.policy or PolicyKind.PROPOSED.value
            specs = [RunSpec(f"{policy}-{args.scheduler}-{args.learner}", base, policy,
                             args.scheduler, args.learner)]
        results = run_batch(specs, workers=args.workers, record_decisions=False)
    except (ConfigError, PlacementError, SimulationError, OSError) as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return 2
    for spec, result in zip(specs, results):
        out = write_run(result, args.out / spec.label)
        s = result.summary
        print(f"{spec.label}: cell={s.cell_throughput:.4g} bit/s "
              f"edge={s.cell_edge_throughput:.4g} bit/s median={s.median_throughput:.4g} "
              f"bit/s convergence_epoch={s.convergence_epoch} -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
