"""Per-subband UE selection: proportional fair, EDF and the proactive scheduler.

Each scheduler takes parallel arrays describing the candidate UEs of one
station on one subband and returns the chosen UE id, or ``None`` when there
is nobody to serve. Flows without a deadline carry ``deadline = inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RATE_FLOOR = 1e3
URGENCY_FLOOR = 0.02
EWMA_FACTOR = 0.05


def _as_arrays(*arrays):
    return [np.asarray(a, dtype=float) for a in arrays]


def pf_schedule(ues, rates, avg_rate, rate_floor=RATE_FLOOR):
    """Argmax of instantaneous over average rate."""
    ues = np.asarray(ues)
    if ues.size == 0:
        return None
    rates, avg_rate = _as_arrays(rates, avg_rate)
    metric = rates / np.maximum(avg_rate, rate_floor)
    return int(ues[np.lexsort((ues, -metric))[0]])


def edf_schedule(ues, deadlines, rates, avg_rate, rate_floor=RATE_FLOOR):
    """Earliest deadline first; PF among deadline-free flows when none has one."""
    ues = np.asarray(ues)
    if ues.size == 0:
        return None
    deadlines = np.asarray(deadlines, dtype=float)
    timed = np.isfinite(deadlines)
    if not timed.any():
        return pf_schedule(ues, rates, avg_rate, rate_floor)
    return int(ues[np.lexsort((ues, np.where(timed, deadlines, np.inf)))[0]])


def proactive_metric(ues, remaining, avg_rate, deadlines, budgets, now,
                     rate_floor=RATE_FLOOR, urgency_floor=URGENCY_FLOOR):
    """Completion-time rank fraction weighted by deadline urgency.

    UEs are ranked by ``remaining / avg_rate`` (ascending); the metric of the
    UE at position ``pos`` out of ``N`` is ``pos / N`` times its urgency, where
    urgency is 1 for deadline-free flows and the remaining fraction of the
    delay budget (floored at ``urgency_floor``) otherwise.

    Returns ``(D, tau)``.
    """
    ues = np.asarray(ues)
    remaining, avg_rate, deadlines, budgets = _as_arrays(remaining, avg_rate, deadlines, budgets)
    tau = remaining / np.maximum(avg_rate, rate_floor)
    order = np.lexsort((ues, tau))
    pos = np.empty(len(ues))
    pos[order] = np.arange(1, len(ues) + 1)
    timed = np.isfinite(deadlines)
    with np.errstate(invalid="ignore"):
        slack = np.where(timed, (deadlines - now) / np.where(timed, budgets, 1.0), 1.0)
    urgency = np.where(timed, np.maximum(urgency_floor, slack), 1.0)
    return pos / len(ues) * urgency, tau


def proactive_schedule(ues, remaining, avg_rate, deadlines, budgets, now,
                       rate_floor=RATE_FLOOR, urgency_floor=URGENCY_FLOOR):
    """Argmin of the proactive metric; ties by smaller completion time, then UE id."""
    ues = np.asarray(ues)
    if ues.size == 0:
        return None
    d, tau = proactive_metric(ues, remaining, avg_rate, deadlines, budgets, now,
                              rate_floor, urgency_floor)
    return int(ues[np.lexsort((ues, tau, d))[0]])


@dataclass
class SchedulerState:
    avg_rate: np.ndarray
    ewma_factor: float = EWMA_FACTOR

    @classmethod
    def zeros(cls, n_ue, ewma_factor=EWMA_FACTOR):
        return cls(np.zeros(n_ue), ewma_factor)


def update_avg_rate(state: SchedulerState, served_bits, tti_seconds=1e-3) -> SchedulerState:
    """EWMA of the served rate; unscheduled UEs count as served at rate zero."""
    a = state.ewma_factor
    served_rate = np.asarray(served_bits, dtype=float) / tti_seconds
    state.avg_rate = (1.0 - a) * state.avg_rate + a * served_rate
    return state


SCHEDULERS = ("pf", "edf", "ps")


def select(kind, ues, rates, remaining, avg_rate, deadlines, budgets, now,
           rate_floor=RATE_FLOOR, urgency_floor=URGENCY_FLOOR):
    """Dispatch to the named scheduler."""
    if kind == "pf":
        return pf_schedule(ues, rates, avg_rate, rate_floor)
    if kind == "edf":
        return edf_schedule(ues, deadlines, rates, avg_rate, rate_floor)
    if kind == "ps":
        return proactive_schedule(ues, remaining, avg_rate, deadlines, budgets, now,
                                  rate_floor, urgency_floor)
    raise ValueError(f"unknown scheduler {kind!r}")
