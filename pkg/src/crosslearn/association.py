"""UE attachment (biased RSRP) and per-flow RAT steering policies."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .traffic import is_delay_tolerant

CELLULAR = "cellular"
WIFI = "wifi"


class PolicyKind(str, enum.Enum):
    MACRO_ONLY = "macro-only"
    HETNET = "hetnet"
    HETNET_WIFI_LOAD = "hetnet-wifi-load"
    HETNET_WIFI_COVERAGE = "hetnet-wifi-coverage"
    PROPOSED = "proposed"

    @property
    def uses_small_cells(self) -> bool:
        return self is not PolicyKind.MACRO_ONLY

    @property
    def uses_wifi(self) -> bool:
        return self in (PolicyKind.HETNET_WIFI_LOAD, PolicyKind.HETNET_WIFI_COVERAGE,
                        PolicyKind.PROPOSED)

    @property
    def load_based(self) -> bool:
        return self in (PolicyKind.HETNET_WIFI_LOAD, PolicyKind.PROPOSED)


@dataclass
class AssociationDecision:
    ue: int
    serving_station: int
    rat_per_flow: dict = field(default_factory=dict)


def associate_cellular(rsrp_dbm, biases_db) -> int:
    """Station maximising RSRP + CRE bias; ties go to the lowest index."""
    score = np.asarray(rsrp_dbm, dtype=float) + np.asarray(biases_db, dtype=float)
    if score.size == 0 or not np.any(np.isfinite(score)):
        raise ValueError("no active station")
    return int(np.argmax(score))


def admit_wifi_load_based(flows, contenders: int, threshold: int) -> dict:
    """Delay-tolerant flows go to WiFi while the cell has room; the rest stay cellular.

    ``flows`` maps a flow id to its traffic class.
    """
    admit = contenders < threshold
    return {fid: WIFI if admit and is_delay_tolerant(cls) else CELLULAR
            for fid, cls in flows.items()}


def admit_wifi_coverage_based(flows, unlicensed_rsrp_dbm: float, rsrp_threshold: float) -> dict:
    admit = unlicensed_rsrp_dbm >= rsrp_threshold
    return {fid: WIFI if admit and is_delay_tolerant(cls) else CELLULAR
            for fid, cls in flows.items()}


@dataclass
class NetworkState:
    """Read-only snapshot consumed by :func:`apply_policy`.

    Stations ``0..n_macro-1`` are macro sectors, the rest are SCBSs in order.
    """

    rsrp: np.ndarray  # (n_ue, n_station) licensed RSRP, dBm
    n_macro: int
    scbs_bias_db: np.ndarray  # (n_scbs,)
    ue_classes: list
    unlicensed_rsrp: np.ndarray | None = None  # (n_ue, n_scbs), dBm
    ue_scbs_distance: np.ndarray | None = None  # (n_ue, n_scbs), m
    wifi_radius: float = 40.0
    load_threshold: int = 8
    rsrp_threshold: float = -72.0


def apply_policy(policy: PolicyKind, state: NetworkState) -> list:
    policy = PolicyKind(policy)
    n_ue = state.rsrp.shape[0]
    n_macro = state.n_macro
    if policy is PolicyKind.MACRO_ONLY:
        stations = state.rsrp[:, :n_macro]
        biases = np.zeros(n_macro)
    else:
        stations = state.rsrp
        biases = np.concatenate([np.zeros(n_macro), state.scbs_bias_db])

    load = np.zeros(len(state.scbs_bias_db), dtype=int)
    decisions = []
    for ue in range(n_ue):
        cls = state.ue_classes[ue]
        flows = {cls.name: cls}
        station = associate_cellular(stations[ue], biases)
        rats = {cls.name: CELLULAR}
        if policy.uses_wifi and station >= n_macro:
            k = station - n_macro
            if state.ue_scbs_distance[ue, k] <= state.wifi_radius:
                if policy.load_based:
                    rats = admit_wifi_load_based(flows, load[k], state.load_threshold)
                else:
                    rats = admit_wifi_coverage_based(flows, state.unlicensed_rsrp[ue, k],
                                                     state.rsrp_threshold)
                if rats[cls.name] == WIFI:
                    load[k] += 1
        decisions.append(AssociationDecision(ue, station, rats))
    return decisions
