"""Independent reference computations used by the tests."""

import numpy as np


def entropy_objective(P, regrets, kappa):
    """sum_a p_a r_a^+ + H(p) / kappa for each row of ``P``."""
    r_plus = np.maximum(np.asarray(regrets, dtype=float), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(P > 0, P * np.log(P), 0.0)
    return P @ r_plus - plogp.sum(axis=1) / kappa


def _lattice(center, half, step):
    d = len(center)
    axes = []
    for c in center[:-1]:
        lo, hi = max(0.0, c - half), min(1.0, c + half)
        axes.append(np.round(np.arange(lo, hi + step / 2, step) / step) * step)
    free = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d - 1, -1).T
    last = 1.0 - free.sum(axis=1)
    keep = last >= -1e-12
    return np.column_stack([free[keep], np.clip(last[keep], 0.0, None)])


def simplex_grid_max(regrets, kappa, steps=(0.05, 0.01, 1e-3), width=3):
    """Grid search over the probability simplex, refined around the incumbent.

    The first level covers the whole simplex; each further level searches a
    window of ``width`` steps either side of the best point so far.
    """
    d = len(regrets)
    best = np.full(d, 1.0 / d)
    half = 1.0
    value = -np.inf
    for step in steps:
        P = _lattice(best, half, step)
        f = entropy_objective(P, regrets, kappa)
        i = int(np.argmax(f))
        best, value = P[i], f[i]
        half = width * step
    return value, best


def batch_regret(estimate_trace, realized_trace):
    """Plain average of (estimate vector - realised utility) over a trace."""
    E = np.asarray(estimate_trace, dtype=float)
    u = np.asarray(realized_trace, dtype=float)
    return (E - u[:, None]).sum(axis=0) / len(u)


def rank_percentile(sample, p):
    """Percentile by linear interpolation between order statistics."""
    x = sorted(float(v) for v in sample)
    n = len(x)
    h = (n - 1) * p / 100.0
    lo = int(h)
    hi = min(lo + 1, n - 1)
    return x[lo] + (h - lo) * (x[hi] - x[lo])
