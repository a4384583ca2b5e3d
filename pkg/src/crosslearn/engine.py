"""TTI-driven simulation loop, metrics and run summaries.

Phase order inside one TTI (fixed):

1. traffic arrivals and deadline drops;
2. association and RAT steering (on re-association TTIs or when a learned
   bias changed since the last one);
3. learner action sampling for the clocks that are due;
4. scheduling of one UE per owned subband per station;
5. radio evaluation and service of bits on both bands;
6. learner feedback and updates;
7. metrics snapshot.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import radio
from .association import CELLULAR, WIFI, NetworkState, PolicyKind, apply_policy
from .learning import (
    BandObservation,
    CrossSystemClock,
    FixedLearner,
    RegretLearner,
    cross_system_step,
    independent_rl_step,
)
from .model import (
    LICENSED,
    N_SECTORS,
    UNLICENSED,
    ConfigError,
    ScenarioConfig,
    build_scenario,
    dbm_to_mw,
    derive_rng,
    enumerate_actions,
)
from .scheduling import SCHEDULERS, SchedulerState, select, update_avg_rate
from .traffic import TTI_SECONDS, assign_mix, delay_budget, is_delay_tolerant, make_source

LEARNERS = ("cross", "independent", "random")
CONVERGENCE_THRESHOLD = 0.01
CONVERGENCE_WINDOW = 20


class SimulationError(RuntimeError):
    def __init__(self, tti, cause):
        super().__init__(f"simulation aborted at TTI {tti}: {cause}")
        self.tti = tti


@dataclass
class TtiMetrics:
    tti: int
    per_ue_bits: np.ndarray
    per_cell_bits: np.ndarray  # (n_station, 2): licensed, unlicensed
    wifi_contenders: np.ndarray  # (n_scbs,)
    dropped_packets: np.ndarray  # (n_ue,)
    regret_l1: np.ndarray  # (n_scbs, 2)
    strategy_l1_change: np.ndarray  # (n_scbs, 2)


@dataclass
class RunSummary:
    ue_throughput_cdf: "EmpiricalCDF"
    cell_throughput: float
    cell_edge_throughput: float
    median_throughput: float
    convergence_epoch: int | None
    oscillation_count: np.ndarray
    convergence_tti: int | None = None

    @property
    def total_oscillations(self) -> int:
        return int(np.sum(self.oscillation_count))


class EmpiricalCDF:
    """Sorted sample with linearly interpolated percentiles."""

    def __init__(self, values):
        values = np.sort(np.asarray(values, dtype=float))
        if values.size == 0:
            raise ValueError("empty sample")
        self.values = values

    def percentile(self, p):
        return float(np.percentile(self.values, p))

    def __len__(self):
        return len(self.values)


def compute_cdf(per_ue_throughputs) -> EmpiricalCDF:
    return EmpiricalCDF(per_ue_throughputs)


def round_sig(x, digits=9):
    """Round to the precision written to CSV, so summaries survive a round trip."""
    return float(f"{x:.{digits}g}")


@dataclass
class UeCounters:
    arrived: np.ndarray
    served: np.ndarray
    dropped_bits: np.ndarray
    dropped_packets: np.ndarray
    window_bits: np.ndarray
    window_active: np.ndarray
    total_active: np.ndarray
    wifi_bits: np.ndarray

    @classmethod
    def zeros(cls, n):
        z = lambda dtype=float: np.zeros(n, dtype=dtype)  # noqa: E731
        return cls(z(), z(), z(), z(int), z(), z(int), z(int), z())


@dataclass
class SimulationResult:
    config: ScenarioConfig
    policy: PolicyKind
    scheduler: str
    learner: str
    metrics: list
    summary: RunSummary
    ue_classes: list
    ue_throughput: np.ndarray
    counters: UeCounters
    decisions: list = field(default_factory=list)
    wifi_violations: int = 0
    epoch_changes: np.ndarray | None = None  # (n_epochs, n_scbs)
    serving: np.ndarray | None = None
    final_remaining: np.ndarray | None = None
    n_macro: int = N_SECTORS


class Simulation:
    """One run of the network under a policy, scheduler and learner kind."""

    def __init__(self, config: ScenarioConfig, policy="proposed", scheduler="pf",
                 learner="cross", record_decisions=True):
        try:
            self.policy = PolicyKind(policy)
        except ValueError:
            raise ConfigError(f"unknown policy {policy!r}") from None
        if scheduler not in SCHEDULERS:
            raise ConfigError(f"unknown scheduler {scheduler!r}")
        if learner not in LEARNERS:
            raise ConfigError(f"unknown learner {learner!r}")
        config.validate()
        self.config = cfg = config
        self.scheduler = scheduler
        self.learner_kind = learner
        self.record_decisions = record_decisions

        self.topology = topo = build_scenario(cfg)
        self.n_macro = N_SECTORS
        self.n_scbs = topo.num_scbs
        self.n_station = self.n_macro + self.n_scbs
        self.n_ue = topo.num_ues
        self.small_cells_on = self.policy.uses_small_cells and self.n_scbs > 0
        self.wifi_on = self.policy.uses_wifi and self.small_cells_on

        # traffic: every sector carries the exact class mix
        self.ue_classes = [None] * self.n_ue
        for sector in range(N_SECTORS):
            idx = np.flatnonzero(topo.ue_sector == sector)
            mix = assign_mix(len(idx), derive_rng(cfg.seed, f"traffic-mix/{sector}"))
            for i, cls in zip(idx, mix):
                self.ue_classes[i] = cls
        self.sources = [make_source(c, derive_rng(cfg.seed, f"traffic/{i}"), cfg.traffic)
                        for i, c in enumerate(self.ue_classes)]
        self.delay_tolerant = np.array([is_delay_tolerant(c) for c in self.ue_classes],
                                       dtype=bool)
        self.budget = np.array([delay_budget(c, cfg.traffic) for c in self.ue_classes])
        self.queues = [deque() for _ in range(self.n_ue)]
        self.remaining = np.zeros(self.n_ue)
        self.counters = UeCounters.zeros(self.n_ue)

        # geometry
        self.ue_positions = topo.ue_positions.copy()
        heading = derive_rng(cfg.seed, "mobility").uniform(0, 2 * math.pi, self.n_ue)
        self.velocity = (cfg.speed / 3.6) * np.column_stack([np.cos(heading), np.sin(heading)])
        shadow_rng = derive_rng(cfg.seed, "shadowing")
        self.shadowing = (shadow_rng.normal(0.0, cfg.shadowing_std, (self.n_ue, self.n_station))
                          if cfg.shadowing_std > 0 else np.zeros((self.n_ue, self.n_station)))
        self._update_geometry()

        scbs_d = np.hypot(*(topo.scbs_positions[:, None, :]
                            - topo.scbs_positions[None, :, :]).transpose(2, 0, 1))
        np.fill_diagonal(scbs_d, 1.0)
        self.scbs_coupling_db = -radio.pathloss(radio.SCBS_TO_UE, scbs_d) if self.n_scbs else \
            np.zeros((0, 0))

        # bands
        s_lic, s_unl = cfg.num_subbands_licensed, cfg.num_subbands_unlicensed
        self.w_lic = cfg.bandwidth_licensed / s_lic
        self.w_unl = cfg.bandwidth_unlicensed / s_unl
        self.noise_lic = radio.noise_power(self.w_lic, cfg.noise_density, cfg.noise_figure)
        self.noise_unl = radio.noise_power(self.w_unl, cfg.noise_density, cfg.noise_figure)
        self.cap_lic = radio.licensed_rate(1e300, self.w_lic, cfg.sinr_cap_db)
        self.cap_unl = radio.licensed_rate(1e300, self.w_unl, cfg.sinr_cap_db)
        self.macro_mw_per_subband = float(dbm_to_mw(cfg.macro_power)) / s_lic
        self.ref_dbm = np.concatenate([np.full(self.n_macro, cfg.macro_power),
                                       np.full(self.n_scbs, cfg.max_power)])

        # learners
        self.lic_actions = enumerate_actions(cfg, LICENSED)
        self.unl_actions = enumerate_actions(cfg, UNLICENSED)
        self.lic_learners, self.unl_learners, self.clocks = [], [], []
        self.learn_rngs = []
        for k in range(self.n_scbs):
            rng = derive_rng(cfg.seed, f"learning/{k}")
            self.learn_rngs.append(rng)
            if learner == "random":
                lic = self._random_action(rng, self.lic_actions)
                unl = self._random_action(rng, self.unl_actions)
                self.lic_learners.append(FixedLearner(len(self.lic_actions), lic))
                self.unl_learners.append(FixedLearner(len(self.unl_actions), unl))
            else:
                kw = dict(kappa0=cfg.kappa0, kappa_tau=cfg.kappa_tau,
                          constant_kappa=cfg.constant_kappa)
                self.lic_learners.append(RegretLearner(len(self.lic_actions), **kw))
                self.unl_learners.append(RegretLearner(len(self.unl_actions), **kw))
            self.clocks.append(CrossSystemClock(cfg.cellular_period))
        for lrn in self.lic_learners + self.unl_learners:
            lrn._initialize()
        self.lic_choice = np.array([lrn.sample(None) if learner == "random" else 0
                                    for lrn in self.lic_learners], dtype=int)
        self.unl_choice = np.array([lrn.sample(None) if learner == "random" else 0
                                    for lrn in self.unl_learners], dtype=int)
        self._prev_bias = None

        self.sched_state = SchedulerState.zeros(self.n_ue, cfg.ewma_factor)
        self.serving = np.zeros(self.n_ue, dtype=int)
        self.on_wifi = np.zeros(self.n_ue, dtype=bool)
        self.steer_unl = np.ones(self.n_scbs, dtype=bool)
        self._epoch_steer = np.zeros(self.n_scbs)
        self._epoch_lic_bits = np.zeros((self.n_scbs, self.n_ue))
        self._cf_records = [[] for _ in range(self.n_scbs)]
        self._epoch_start_strategy = [lrn.strategy_.copy() for lrn in self.lic_learners]
        self.epoch_changes = []
        self.epoch_bands = []

        self.metrics = []
        self.decisions = []
        self.wifi_violations = 0
        self.tti = 0

    # -- setup helpers -------------------------------------------------------

    @staticmethod
    def _random_action(rng, actions):
        """Random subband (and bias) at full power, drawn once."""
        top = max(a.power_level for a in actions)
        choices = [i for i, a in enumerate(actions) if a.power_level == top]
        return int(choices[rng.integers(len(choices))])

    def _update_geometry(self):
        cfg, topo = self.config, self.topology
        pos = self.ue_positions
        d_mbs = np.maximum(np.hypot(pos[:, 0], pos[:, 1]), 1e-3)
        angle = np.degrees(np.arctan2(pos[:, 1], pos[:, 0]))
        pl_macro = radio.pathloss(radio.MACRO_TO_UE, d_mbs)
        g_macro = (radio.sector_antenna_gain(angle[:, None] - topo.sector_bearings[None, :])
                   - pl_macro[:, None])
        if self.n_scbs:
            diff = pos[:, None, :] - topo.scbs_positions[None, :, :]
            self.d_scbs = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), 1e-3)
            g_scbs = -radio.pathloss(radio.SCBS_TO_UE, self.d_scbs)
        else:
            self.d_scbs = np.zeros((self.n_ue, 0))
            g_scbs = np.zeros((self.n_ue, 0))
        gain_db = np.concatenate([g_macro, g_scbs], axis=1) - self.shadowing
        self.gain_db = gain_db
        self.gain = 10.0 ** (gain_db / 10.0)
        self.rsrp = np.concatenate([cfg.macro_power + g_macro, cfg.max_power + g_scbs],
                                   axis=1) - self.shadowing
        self.unl_gain = 10.0 ** ((g_scbs - self.shadowing[:, self.n_macro:]) / 10.0)
        self.unl_rsrp = cfg.max_power_unlicensed + g_scbs - self.shadowing[:, self.n_macro:]

    def _move_ues(self, ttis):
        if self.config.speed > 0:
            self.ue_positions = self.ue_positions + self.velocity * ttis * TTI_SECONDS
            self._update_geometry()

    # -- phases ----------------------------------------------------------------

    def _arrivals(self, tti):
        c = self.counters
        dropped_now = np.zeros(self.n_ue, dtype=int)
        for i, (src, q) in enumerate(zip(self.sources, self.queues)):
            while q and q[0].deadline_tti is not None and q[0].deadline_tti <= tti:
                pkt = q.popleft()
                c.dropped_bits[i] += pkt.remaining_bits
                self.remaining[i] -= pkt.remaining_bits
                dropped_now[i] += 1
            for flow in src.arrivals(tti, idle=not q):
                flow.remaining_bits = flow.size_bits = float(round(flow.remaining_bits))
                q.append(flow)
                c.arrived[i] += flow.remaining_bits
                self.remaining[i] += flow.remaining_bits
        c.dropped_packets += dropped_now
        return dropped_now

    def _sample_actions(self, tti):
        if self.learner_kind == "random" or not self.small_cells_on:
            return
        epoch_start = tti % self.config.cellular_period == 0
        for k in range(self.n_scbs):
            rng = self.learn_rngs[k]
            if self.wifi_on:
                self.unl_choice[k] = self.unl_learners[k].sample(rng)
            if self.learner_kind == "independent" or epoch_start:
                self.lic_choice[k] = self.lic_learners[k].sample(rng)

    def _associate(self, tti):
        cfg = self.config
        bias = self.lic_actions.biases_db[self.lic_choice]
        periodic = tti % cfg.reassociation_period == 0
        if tti > 0 and periodic:
            self._move_ues(cfg.reassociation_period)
        if not (tti == 0 or periodic or
                (self.small_cells_on and not np.array_equal(bias, self._prev_bias))):
            return
        self._prev_bias = bias.copy()
        state = NetworkState(
            rsrp=self.rsrp if self.small_cells_on else self.rsrp[:, :self.n_macro],
            n_macro=self.n_macro,
            scbs_bias_db=bias if self.small_cells_on else np.zeros(0),
            ue_classes=self.ue_classes,
            unlicensed_rsrp=self.unl_rsrp,
            ue_scbs_distance=self.d_scbs,
            wifi_radius=cfg.wifi_radius,
            load_threshold=cfg.load_threshold,
            rsrp_threshold=cfg.rsrp_threshold,
        )
        policy = self.policy if self.small_cells_on else PolicyKind.MACRO_ONLY
        for d in apply_policy(policy, state):
            self.serving[d.ue] = d.serving_station
            rat = d.rat_per_flow[self.ue_classes[d.ue].name]
            self.on_wifi[d.ue] = rat == WIFI
            if self.record_decisions:
                self.decisions.append((tti, d.ue, self.ue_classes[d.ue].name,
                                       d.serving_station, rat))

    def _steering(self):
        """Band each SCBS sends its WiFi-eligible traffic to this TTI."""
        if not self.wifi_on:
            self.steer_unl[:] = False
            return
        if self.learner_kind != "independent":
            self.steer_unl[:] = True
            return
        # uncoordinated: whichever band's learner currently looks better
        for k in range(self.n_scbs):
            u_lic = self.lic_learners[k].utility_estimates_[self.lic_choice[k]]
            u_unl = self.unl_learners[k].utility_estimates_[self.unl_choice[k]]
            self.steer_unl[k] = u_unl >= u_lic

    def _licensed_power(self):
        s_lic = self.config.num_subbands_licensed
        power = np.zeros((self.n_station, s_lic))
        power[:self.n_macro, :] = self.macro_mw_per_subband
        if self.small_cells_on:
            rows = self.n_macro + np.arange(self.n_scbs)
            power[rows, self.lic_actions.subbands[self.lic_choice]] = \
                self.lic_actions.powers[self.lic_choice]
        return power

    def _serve(self, ue, bits, tti):
        q = self.queues[ue]
        served = 0.0
        while q and bits - served > 0:
            served += q[0].serve(bits - served, tti)
            if q[0].remaining_bits <= 0:
                q.popleft()
        self.remaining[ue] -= served
        return served

    def _licensed_service(self, tti, power, cellular_ok):
        cfg = self.config
        rx = self.gain[:, :, None] * power[None, :, :]  # (ue, station, subband)
        total = rx.sum(axis=1)
        signal = rx[np.arange(self.n_ue), self.serving, :]
        sinr = signal / (total - signal + self.noise_lic)
        rates = radio.licensed_rate(sinr, self.w_lic, cfg.sinr_cap_db)
        lic_bits = np.zeros(self.n_ue)
        station_bits = np.zeros(self.n_station)
        head_deadline = np.array([q[0].deadline_tti if q and q[0].deadline_tti is not None
                                  else np.inf for q in self.queues])
        eligible = cellular_ok & (self.remaining > 0)
        by_station = {}
        for ue in np.flatnonzero(eligible):
            by_station.setdefault(int(self.serving[ue]), []).append(ue)
        for station in sorted(by_station):
            cands = by_station[station]
            for s in np.flatnonzero(power[station] > 0):
                ues = np.array([u for u in cands if self.remaining[u] > 0], dtype=int)
                ues = ues[rates[ues, s] > 0] if ues.size else ues
                if ues.size == 0:
                    continue
                chosen = select(self.scheduler, ues, rates[ues, s], self.remaining[ues],
                                self.sched_state.avg_rate[ues], head_deadline[ues],
                                self.budget[ues], tti, cfg.rate_floor, cfg.urgency_floor)
                demand = self.remaining[chosen]
                capacity = math.floor(rates[chosen, s] * TTI_SECONDS)
                got = self._serve(chosen, min(demand, capacity), tti)
                lic_bits[chosen] += got
                station_bits[station] += got
                if station >= self.n_macro and cfg.exact_counterfactual:
                    k = station - self.n_macro
                    own = rx[chosen, station, :]
                    self._cf_records[k].append(
                        (chosen, demand, self.gain[chosen, station], total[chosen] - own))
        return lic_bits, station_bits

    def _wifi_service(self, tti, backlog):
        cfg = self.config
        wifi_bits = np.zeros(self.n_ue)
        contenders = np.zeros(self.n_scbs, dtype=int)
        if not self.wifi_on:
            return wifi_bits, contenders, np.zeros(self.n_scbs)
        scbs_of = self.serving - self.n_macro
        active = backlog & self.on_wifi & (scbs_of >= 0)
        active &= self.steer_unl[np.maximum(scbs_of, 0)]
        own = np.bincount(scbs_of[active], minlength=self.n_scbs)
        sub = self.unl_actions.subbands[self.unl_choice]
        p_unl = self.unl_actions.powers[self.unl_choice]
        # j is heard at k when its carrier exceeds the sensing threshold
        heard_dbm = 10 * np.log10(p_unl)[None, :] + self.scbs_coupling_db
        heard = (heard_dbm >= cfg.wifi_cs_threshold) & (sub[:, None] == sub[None, :])
        np.fill_diagonal(heard, False)
        contenders = own + heard.astype(int) @ own
        contenders = np.where(own > 0, contenders + cfg.wifi_background_contenders, 0)
        station_bits = np.zeros(self.n_scbs)
        for ue in np.flatnonzero(active):
            k = scbs_of[ue]
            snr = self.unl_gain[ue, k] * p_unl[k] / self.noise_unl
            capacity = radio.licensed_rate(snr, self.w_unl, cfg.sinr_cap_db)
            share = radio.wifi_share(contenders[k], capacity, cfg.wifi_emax, cfg.wifi_gamma)
            got = self._serve(ue, math.floor(share * TTI_SECONDS), tti)
            wifi_bits[ue] += got
            station_bits[k] += got
            if not self.delay_tolerant[ue]:
                self.wifi_violations += 1
        return wifi_bits, contenders, station_bits

    def _learn(self, tti, lic_bits, wifi_bits):
        cfg = self.config
        regret = np.zeros((self.n_scbs, 2))
        change = np.zeros((self.n_scbs, 2))
        if not self.small_cells_on:
            return regret, change
        scbs_of = self.serving - self.n_macro
        for k in range(self.n_scbs):
            mine = scbs_of == k
            self._epoch_lic_bits[k, mine] += lic_bits[mine]
        self._epoch_steer += self.steer_unl
        if self.learner_kind == "random":
            return regret, change

        independent = self.learner_kind == "independent"
        lic_epoch_s = TTI_SECONDS * (1 if independent else cfg.cellular_period)
        due = independent or (tti + 1) % cfg.cellular_period == 0
        for k in range(self.n_scbs):
            lic, unl = self.lic_learners[k], self.unl_learners[k]
            before = (lic.strategy_.copy(), unl.strategy_.copy())
            mine = scbs_of == k
            a_lic = self.lic_choice[k]
            cell_obs = BandObservation(
                a_lic, self._epoch_lic_bits[k], lic_epoch_s, self.cap_lic,
                self.lic_actions.powers[a_lic] / cfg.max_power_mw, cfg.power_price)
            if due and cfg.exact_counterfactual:
                cell_obs.counterfactual = self._counterfactual(k, lic_epoch_s)
            wifi_obs = None
            if self.wifi_on:
                a_unl = self.unl_choice[k]
                wifi_obs = BandObservation(
                    a_unl, np.where(mine, wifi_bits, 0.0), TTI_SECONDS, self.cap_unl,
                    self.unl_actions.powers[a_unl] / cfg.max_power_unlicensed_mw,
                    cfg.power_price)
            if independent:
                independent_rl_step(lic, unl if self.wifi_on else None, tti, cell_obs, wifi_obs)
            else:
                cross_system_step(lic, unl if self.wifi_on else None, self.clocks[k], tti,
                                  cell_obs, wifi_obs, coupled=True)
            regret[k] = lic.positive_regret_l1(), unl.positive_regret_l1()
            change[k] = (np.abs(lic.strategy_ - before[0]).sum(),
                         np.abs(unl.strategy_ - before[1]).sum())
        if due:
            self._epoch_lic_bits[:] = 0.0
            for rec in self._cf_records:
                rec.clear()
        return regret, change

    def _counterfactual(self, k, epoch_s):
        """Licensed utility of every action over the epoch's scheduled slots.

        Association is held fixed, so the bias component is not re-evaluated.
        """
        cfg = self.config
        acts = self.lic_actions
        price = cfg.power_price * acts.powers / cfg.max_power_mw
        records = self._cf_records[k]
        if not records:
            return -price
        ues, slot_of = np.unique([r[0] for r in records], return_inverse=True)
        demand = np.array([r[1] for r in records])
        gain = np.array([r[2] for r in records])
        interference = np.array([r[3] for r in records])  # (slot, subband)
        sinr = gain[:, None] * acts.powers[None, :] / (
            interference[:, acts.subbands] + self.noise_lic)
        rate = radio.licensed_rate(sinr, self.w_lic, cfg.sinr_cap_db)
        bits = np.minimum(demand[:, None], np.floor(rate * TTI_SECONDS))
        per_ue = np.zeros((len(ues), len(acts)))
        np.add.at(per_ue, slot_of, bits)
        thr = per_ue / epoch_s
        util = np.minimum(1.0, np.log2(1.0 + thr / self.cap_lic).sum(axis=0))
        return util - price

    def _close_epoch(self, tti):
        cfg = self.config
        if (tti + 1) % cfg.cellular_period != 0 or not self.small_cells_on:
            return
        changes = np.array([np.abs(lrn.strategy_ - start).sum()
                            for lrn, start in zip(self.lic_learners, self._epoch_start_strategy)])
        self._epoch_start_strategy = [lrn.strategy_.copy() for lrn in self.lic_learners]
        self.epoch_changes.append(changes)
        self.epoch_bands.append(np.where(self._epoch_steer * 2 >= cfg.cellular_period, 1, -1))
        self._epoch_steer = np.zeros(self.n_scbs)

    # -- public ----------------------------------------------------------------

    def run_tti(self, tti=None) -> TtiMetrics:
        tti = self.tti if tti is None else tti
        if tti != self.tti:
            raise SimulationError(tti, f"expected TTI {self.tti}")
        try:
            dropped = self._arrivals(tti)
            self._associate(tti)
            self._steering()
            self._sample_actions(tti)

            backlog = self.remaining > 0
            scbs_of = self.serving - self.n_macro
            wifi_only = self.on_wifi & (scbs_of >= 0)
            if self.learner_kind == "independent":
                cellular_ok = np.ones(self.n_ue, dtype=bool)
            else:
                cellular_ok = ~wifi_only
            power = self._licensed_power()
            lic_bits, lic_station = self._licensed_service(tti, power, cellular_ok)
            wifi_bits, contenders, unl_station = self._wifi_service(tti, backlog)

            regret, change = self._learn(tti, lic_bits, wifi_bits)
            self._close_epoch(tti)
        except (ValueError, IndexError, ArithmeticError) as exc:
            raise SimulationError(tti, exc) from exc

        per_ue = lic_bits + wifi_bits
        self.sched_state = update_avg_rate(self.sched_state, lic_bits, TTI_SECONDS)
        c = self.counters
        c.served += per_ue
        c.wifi_bits += wifi_bits
        c.total_active += backlog
        if tti >= self._window_start():
            c.window_bits += per_ue
            c.window_active += backlog
        cell = np.zeros((self.n_station, 2))
        cell[:, 0] = lic_station
        cell[self.n_macro:, 1] = unl_station
        m = TtiMetrics(tti, per_ue, cell, contenders, dropped, regret, change)
        self.metrics.append(m)
        self.tti += 1
        return m

    def _window_start(self):
        cfg = self.config
        return cfg.warmup_ttis if cfg.tti_count > cfg.warmup_ttis else 0

    def run(self) -> SimulationResult:
        for tti in range(self.config.tti_count):
            self.run_tti(tti)
        return self.result()

    def ue_throughputs(self):
        """Per-UE throughput over the active TTIs of the measurement window.

        A UE's rate is the bits it received divided by the time it had data
        waiting, so bursty and low-rate sources are measured by how fast they
        are served rather than by how much they asked for. UEs idle for the
        whole window fall back to their whole-run figure.
        """
        c = self.counters
        out = np.zeros(self.n_ue)
        for i in range(self.n_ue):
            if c.window_active[i] > 0:
                out[i] = c.window_bits[i] / (c.window_active[i] * TTI_SECONDS)
            elif c.total_active[i] > 0:
                out[i] = c.served[i] / (c.total_active[i] * TTI_SECONDS)
        return np.array([round_sig(x) for x in out])

    def result(self) -> SimulationResult:
        thr = self.ue_throughputs()
        changes = np.array(self.epoch_changes) if self.epoch_changes else np.zeros((0, self.n_scbs))
        bands = np.array(self.epoch_bands) if self.epoch_bands else np.zeros((0, self.n_scbs))
        summary = summarize(
            thr, cell_bits_rows(self.metrics, self.n_macro, self.small_cells_on, self.wifi_on),
            self._window_start(), self.config.tti_count,
            convergence_epoch(changes) if self.learner_kind != "random" else None,
            oscillations(bands))
        summary.convergence_tti = (None if summary.convergence_epoch is None
                                    else summary.convergence_epoch * self.config.cellular_period)
        return SimulationResult(
            self.config, self.policy, self.scheduler, self.learner_kind, self.metrics, summary,
            list(self.ue_classes), thr, self.counters, self.decisions, self.wifi_violations,
            changes, self.serving.copy(), self.remaining.copy(), self.n_macro)


def convergence_epoch(changes, threshold=CONVERGENCE_THRESHOLD, window=CONVERGENCE_WINDOW):
    """First epoch (1-based) from which the largest per-SCBS strategy change
    stays below ``threshold`` for ``window`` consecutive epochs."""
    changes = np.asarray(changes)
    if changes.size == 0:
        return None
    worst = changes.max(axis=1)
    run = 0
    for e, value in enumerate(worst):
        run = run + 1 if value < threshold else 0
        if run == window:
            return e - window + 2
    return None


def oscillations(bands):
    """Per-SCBS count of sign changes of the dominant-band indicator."""
    bands = np.asarray(bands)
    if bands.shape[0] < 2:
        return np.zeros(bands.shape[1] if bands.ndim == 2 else 0, dtype=int)
    return np.sum(bands[1:] != bands[:-1], axis=0).astype(int)


def cell_bits_rows(metrics, n_macro, small_cells_on=True, wifi_on=True):
    """``(tti, station, band, bits)`` rows in CSV order."""
    rows = []
    for m in metrics:
        for st in range(m.per_cell_bits.shape[0]):
            is_scbs = st >= n_macro
            if is_scbs and not small_cells_on:
                continue
            rows.append((m.tti, st, LICENSED, m.per_cell_bits[st, 0]))
            if is_scbs and wifi_on:
                rows.append((m.tti, st, UNLICENSED, m.per_cell_bits[st, 1]))
    return rows


def summarize(ue_throughput, rows, window_start, tti_count, conv_epoch, osc) -> RunSummary:
    """Run summary from per-UE throughputs and per-cell bit rows.

    Shared by the in-memory path and the CSV reader, so both agree exactly.
    """
    if tti_count == 0 or len(ue_throughput) == 0:
        cdf = EmpiricalCDF(np.zeros(max(len(ue_throughput), 1)))
        return RunSummary(cdf, 0.0, 0.0, 0.0, None, np.asarray(osc, dtype=int))
    cdf = compute_cdf(ue_throughput)
    total = 0.0
    for tti, _st, _band, bits in rows:
        if tti >= window_start:
            total += bits
    seconds = (tti_count - window_start) * TTI_SECONDS
    return RunSummary(cdf, total / seconds, cdf.percentile(5), cdf.percentile(50),
                      conv_epoch, np.asarray(osc, dtype=int))


def run_simulation(config, policy="proposed", scheduler="pf", learner="cross",
                   record_decisions=True) -> SimulationResult:
    return Simulation(config, policy, scheduler, learner, record_decisions).run()
