"""Regret-based strategy learning for dual-mode small cells.

Each SCBS runs one learner per band. A learner keeps, for every action, a
running utility estimate and a time-averaged regret

    r_a(t) = (1/t) * sum_{n<=t} [u_hat_a(n) - u(n)]

and plays the Boltzmann-Gibbs distribution of the positive regrets,

    pi_a = exp(kappa * r_a^+) / sum_b exp(kappa * r_b^+),

which maximises ``sum_a pi_a r_a^+ + H(pi) / kappa`` over the simplex and
therefore keeps every action in play.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .model import LICENSED, UNLICENSED

U_MIN, U_MAX = -1.0, 1.0


class ClockError(RuntimeError):
    """Learner clocks were driven out of order."""


def boltzmann_gibbs(r_plus, kappa):
    r_plus = np.asarray(r_plus, dtype=float)
    if r_plus.size == 0:
        raise ValueError("empty regret vector")
    if not np.all(np.isfinite(r_plus)) or not np.isfinite(kappa):
        raise ValueError("non-finite input")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    z = kappa * r_plus
    w = np.exp(z - z.max())
    return w / w.sum()


def solve_behavioral_rule(regrets, kappa):
    """Entropy-regularised response to the positive part of ``regrets``."""
    return boltzmann_gibbs(np.maximum(0.0, np.asarray(regrets, dtype=float)), kappa)


def behavioral_objective(pi, regrets, kappa):
    """``sum pi r^+ + H(pi)/kappa``, the quantity the Gibbs rule maximises."""
    pi = np.asarray(pi, dtype=float)
    r_plus = np.maximum(0.0, np.asarray(regrets, dtype=float))
    nz = pi > 0
    entropy = -np.sum(pi[nz] * np.log(pi[nz]))
    return float(pi @ r_plus + entropy / kappa)


def update_regrets(regrets, t, estimates, realized):
    """One step of the running-average regret recursion.

    ``t`` is the number of updates already folded into ``regrets``.
    """
    regrets = np.asarray(regrets, dtype=float)
    return (t * regrets + (np.asarray(estimates, dtype=float) - realized)) / (t + 1)


def estimate_utilities(estimates, counts, action, utility):
    """Decreasing-step average of the chosen action's observed utility."""
    estimates = np.array(estimates, dtype=float)
    counts = np.array(counts, dtype=int)
    counts[action] += 1
    estimates[action] += (utility - estimates[action]) / counts[action]
    return estimates, counts


def sample_action(strategy, rng) -> int:
    """Inverse-CDF draw; ``rng`` is a Generator, RandomState, seed or None."""
    if isinstance(rng, np.random.Generator):
        u = rng.random()
    else:
        u = check_random_state(rng).random_sample()
    cdf = np.cumsum(strategy)
    return int(min(np.searchsorted(cdf, u * cdf[-1], side="right"), len(cdf) - 1))


def temperature(t, kappa0=5.0, kappa_tau=100.0, constant=False):
    return kappa0 if constant else kappa0 * (1.0 + t / kappa_tau)


def scbs_utility(served_bits, epoch_seconds, cap_bps):
    """Concave throughput utility of one SCBS on one band, clipped to [0, 1].

    ``sum_i log2(1 + throughput_i / cap)``: a single UE served at the band's
    capacity scores 1, and spreading a fixed rate over more UEs scores higher.
    """
    bits = np.asarray(served_bits, dtype=float)
    if bits.size == 0 or epoch_seconds <= 0:
        return 0.0
    thr = bits[bits > 0] / epoch_seconds
    return float(min(1.0, np.sum(np.log2(1.0 + thr / cap_bps))))


class RegretLearner(BaseEstimator):
    """Online learner over a finite action set, fitted one observation at a time.

    Parameters
    ----------
    n_actions : int
    kappa0, kappa_tau : float
        Temperature schedule ``kappa(t) = kappa0 * (1 + t / kappa_tau)``.
    constant_kappa : bool
        Keep ``kappa = kappa0`` throughout.
    """

    def __init__(self, n_actions=1, kappa0=5.0, kappa_tau=100.0, constant_kappa=False):
        self.n_actions = n_actions
        self.kappa0 = kappa0
        self.kappa_tau = kappa_tau
        self.constant_kappa = constant_kappa

    def _initialize(self):
        n = int(self.n_actions)
        if n < 1:
            raise ValueError("n_actions must be >= 1")
        self.strategy_ = np.full(n, 1.0 / n)
        self.regrets_ = np.zeros(n)
        self.utility_estimates_ = np.zeros(n)
        self.counts_ = np.zeros(n, dtype=int)
        self.t_ = 0

    def fit(self, actions, utilities):
        """Replay a whole trace of (action, realised utility) pairs from scratch."""
        self._initialize()
        actions = check_array(np.asarray(actions).reshape(-1, 1), dtype=int).ravel()
        utilities = check_array(np.asarray(utilities).reshape(-1, 1)).ravel()
        for a, u in zip(actions, utilities):
            self.partial_fit(a, u)
        return self

    def partial_fit(self, action, utility, counterfactual=None):
        """Fold in one observation and refresh the strategy.

        ``counterfactual``, when given, holds the utility every action would
        have earned this step and replaces the running estimates in the regret.
        """
        if not hasattr(self, "strategy_"):
            self._initialize()
        action = int(action)
        if not 0 <= action < self.n_actions:
            raise IndexError(f"action {action} outside 0..{self.n_actions - 1}")
        utility = float(np.clip(utility, U_MIN, U_MAX))
        self.utility_estimates_, self.counts_ = estimate_utilities(
            self.utility_estimates_, self.counts_, action, utility)
        if counterfactual is None:
            reference = self.utility_estimates_
        else:
            reference = np.clip(np.asarray(counterfactual, dtype=float), U_MIN, U_MAX)
        self.regrets_ = update_regrets(self.regrets_, self.t_, reference, utility)
        self.t_ += 1
        self.strategy_ = solve_behavioral_rule(self.regrets_, self.kappa_)
        return self

    @property
    def kappa_(self):
        return temperature(getattr(self, "t_", 0), self.kappa0, self.kappa_tau,
                           self.constant_kappa)

    def predict_proba(self):
        check_is_fitted(self, "strategy_")
        return self.strategy_

    def sample(self, rng=None) -> int:
        if not hasattr(self, "strategy_"):
            self._initialize()
        return sample_action(self.strategy_, rng)

    def expected(self, values):
        """Expectation of a per-action quantity under the current strategy."""
        return float(self.predict_proba() @ np.asarray(values, dtype=float))

    def positive_regret_l1(self):
        return float(np.sum(np.maximum(self.regrets_, 0.0)))


class FixedLearner(RegretLearner):
    """Plays one action forever; stands in for the random-subband benchmarks."""

    def __init__(self, n_actions=1, action=0):
        super().__init__(n_actions=n_actions)
        self.action = action

    def _initialize(self):
        super()._initialize()
        self.strategy_ = np.zeros(int(self.n_actions))
        self.strategy_[self.action] = 1.0

    def partial_fit(self, action, utility, counterfactual=None):
        if not hasattr(self, "strategy_"):
            self._initialize()
        self.t_ += 1
        return self

    def sample(self, rng=None) -> int:
        return int(self.action)


@dataclass
class Feedback:
    chosen_action: int
    realized_utility: float
    band: str = LICENSED


@dataclass
class BandObservation:
    """What one band of one SCBS served since its learner's last update."""

    action: int
    served_bits: np.ndarray  # per UE
    epoch_seconds: float
    cap_bps: float
    power_fraction: float = 0.0  # transmit power / p_max of the played action
    power_price: float = 0.0
    counterfactual: np.ndarray | None = None

    def utility(self, mask=None):
        bits = self.served_bits if mask is None else self.served_bits[mask]
        return (scbs_utility(bits, self.epoch_seconds, self.cap_bps)
                - self.power_price * self.power_fraction)


@dataclass
class CrossSystemClock:
    """WiFi learners update every TTI, cellular learners every ``cellular_period``."""

    cellular_period: int = 10
    wifi_period: int = 1
    wifi_summary: float = 0.0
    wifi_carried: np.ndarray | None = None  # UEs WiFi served this epoch
    _wifi_sum: float = field(default=0.0, repr=False)
    _wifi_n: int = field(default=0, repr=False)
    last_tti: int = -1

    def __post_init__(self):
        if self.cellular_period < 1:
            raise ValueError("cellular_period must be >= 1")

    def tick(self, tti):
        if tti != self.last_tti + 1:
            raise ClockError(f"expected TTI {self.last_tti + 1}, got {tti}")
        self.last_tti = tti

    def cellular_due(self, tti) -> bool:
        return (tti + 1) % self.cellular_period == 0

    def record_wifi(self, utility, served_bits):
        self._wifi_sum += utility
        self._wifi_n += 1
        self.wifi_summary = self._wifi_sum / self._wifi_n
        carried = np.asarray(served_bits) > 0
        self.wifi_carried = carried if self.wifi_carried is None else self.wifi_carried | carried

    def reset_epoch(self):
        self._wifi_sum, self._wifi_n = 0.0, 0
        self.wifi_carried = None


def cross_system_step(cellular, wifi, clock, tti, cellular_obs, wifi_obs, coupled=True):
    """Advance one TTI of the two-timescale learner pair of one SCBS.

    The WiFi learner updates every TTI. At the end of each cellular epoch the
    cellular learner updates on a utility that excludes the UEs already
    carried on WiFi (the coupling); ``coupled=False`` keeps them in.
    ``cellular_obs`` accumulates the whole epoch and is only read when due.

    Returns ``(wifi_utility, cellular_utility or None)``.
    """
    clock.tick(tti)
    u_wifi = None
    if wifi is not None and wifi_obs is not None:
        u_wifi = wifi_obs.utility()
        wifi.partial_fit(wifi_obs.action, u_wifi, wifi_obs.counterfactual)
        clock.record_wifi(u_wifi, wifi_obs.served_bits)
    u_cell = None
    if clock.cellular_due(tti):
        mask = None
        if coupled and clock.wifi_carried is not None:
            mask = ~clock.wifi_carried
        u_cell = cellular_obs.utility(mask)
        cellular.partial_fit(cellular_obs.action, u_cell, cellular_obs.counterfactual)
        clock.reset_epoch()
    return u_wifi, u_cell


def independent_rl_step(cellular, wifi, tti, cellular_obs, wifi_obs):
    """Uncoordinated baseline: both learners update every TTI on total demand."""
    u_wifi = None
    if wifi is not None and wifi_obs is not None:
        u_wifi = wifi_obs.utility()
        wifi.partial_fit(wifi_obs.action, u_wifi, wifi_obs.counterfactual)
    u_cell = cellular_obs.utility()
    cellular.partial_fit(cellular_obs.action, u_cell, cellular_obs.counterfactual)
    return u_wifi, u_cell


LEARNER_KINDS = ("cross", "independent", "random")
BANDS = (LICENSED, UNLICENSED)
