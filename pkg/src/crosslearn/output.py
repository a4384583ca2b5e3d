"""CSV emission of run results and recomputation of summaries from disk."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .engine import SimulationResult, cell_bits_rows, summarize
from .model import LICENSED, dump_config, load_config

TTI_METRICS = "tti_metrics.csv"
UE_SUMMARY = "ue_summary.csv"
RUN_SUMMARY = "run_summary.csv"
CONFIG = "scenario.cfg"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def _rows_with_learning(result: SimulationResult):
    n_macro = result.n_macro
    small = result.policy.uses_small_cells and result.config.num_small_cells > 0
    wifi = result.policy.uses_wifi and small
    for m in result.metrics:
        by_key = {}
        for tti, st, band, bits in cell_bits_rows([m], n_macro, small, wifi):
            col = 0 if band == LICENSED else 1
            regret = change = 0.0
            contenders = 0
            if st >= n_macro:
                k = st - n_macro
                regret = m.regret_l1[k, col]
                change = m.strategy_l1_change[k, col]
                contenders = m.wifi_contenders[k] if col == 1 else 0
            by_key[(st, band)] = (tti, st, band, bits, regret, change, contenders)
        yield from by_key.values()


def write_run(result: SimulationResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / TTI_METRICS, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["tti", "station", "band", "bits", "regret_l1", "strategy_l1_change",
                    "wifi_contenders"])
        for tti, st, band, bits, regret, change, cont in _rows_with_learning(result):
            w.writerow([tti, st, band, fmt(float(bits)), fmt(float(regret)),
                        fmt(float(change)), fmt(int(cont))])
    with open(out / UE_SUMMARY, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["ue", "class", "avg_throughput_bps", "dropped"])
        for i, cls in enumerate(result.ue_classes):
            w.writerow([i, cls.name, fmt(float(result.ue_throughput[i])),
                        fmt(int(result.counters.dropped_packets[i]))])
    s = result.summary
    with open(out / RUN_SUMMARY, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["cell_throughput", "cell_edge", "median", "convergence_epoch",
                    "oscillations"])
        w.writerow([fmt(s.cell_throughput), fmt(s.cell_edge_throughput),
                    fmt(s.median_throughput), fmt(s.convergence_epoch),
                    fmt(s.total_oscillations)])
    (out / CONFIG).write_text(dump_config(result.config))
    return out


def read_summary(out_dir):
    """Recompute the run summary from the CSV files of one run directory."""
    out = Path(out_dir)
    config = load_config(out / CONFIG)
    with open(out / UE_SUMMARY, newline="") as f:
        thr = np.array([float(r["avg_throughput_bps"]) for r in csv.DictReader(f)])
    with open(out / TTI_METRICS, newline="") as f:
        rows = [(int(r["tti"]), int(r["station"]), r["band"], float(r["bits"]))
                for r in csv.DictReader(f)]
    with open(out / RUN_SUMMARY, newline="") as f:
        run = next(csv.DictReader(f))
    conv = int(run["convergence_epoch"]) if run["convergence_epoch"] else None
    window = config.warmup_ttis if config.tti_count > config.warmup_ttis else 0
    summary = summarize(thr, rows, window, config.tti_count, conv,
                        [int(run["oscillations"])])
    return summary
