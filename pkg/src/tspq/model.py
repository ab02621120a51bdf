"""System model: buffer configuration, state space, and transition rules.

The shared buffer of size N holds real-time (RT) and non-real-time (NRT)
packets. RT admissions are capped at R. Two independent exponential
servers drain the classes (mu for RT, mu1 for NRT). Two mechanisms:

* simple   -- NRT packets arrive at the full Poisson rate lambda; at a
              full buffer an arriving RT packet pushes out an NRT packet
              (if rt < R) and an arriving NRT packet pushes out an RT
              packet (if rt = R).
* combined -- same buffer rules plus threshold rate control on NRT
              arrivals: full rate below H, half rate in [H, L), zero at
              or above L, with L = N - R.

The state is (MMPP phase, rt count, nrt count). States and transitions
here are pure values; the ctmc module turns them into a generator matrix.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .mmpp import MmppParams


class Mechanism(enum.Enum):
    SIMPLE = "simple"
    COMBINED = "combined"


class TransitionKind(enum.Enum):
    RT_ARRIVAL_ADMIT = "rt_arrival_admit"
    RT_ARRIVAL_PUSHOUT = "rt_arrival_pushout"
    NRT_ARRIVAL_ADMIT = "nrt_arrival_admit"
    NRT_ARRIVAL_PUSHOUT = "nrt_arrival_pushout"
    RT_SERVICE = "rt_service"
    NRT_SERVICE = "nrt_service"
    PHASE_SWITCH = "phase_switch"


@dataclass(frozen=True)
class SystemConfig:
    """Full model instance.

    threshold_h and threshold_l are only meaningful for the combined
    mechanism; their invariants (R < H < L, L = N - R) are enforced only
    there.
    """

    capacity_n: int
    rt_cap_r: int
    threshold_h: int
    threshold_l: int
    lambda_nrt: float
    mmpp: MmppParams
    mu_rt: float
    mu_nrt: float
    mechanism: Mechanism

    def __post_init__(self):
        if self.capacity_n <= 0:
            raise ValueError("capacity_n must be a positive integer")
        if not 0 < self.rt_cap_r < self.capacity_n:
            raise ValueError("rt_cap_r must satisfy 0 < R < N")
        if self.lambda_nrt < 0:
            raise ValueError("lambda_nrt must be nonnegative")
        if self.mu_rt <= 0 or self.mu_nrt <= 0:
            raise ValueError("service rates mu_rt, mu_nrt must be positive")
        if self.mechanism is Mechanism.COMBINED:
            if not self.rt_cap_r < self.threshold_h < self.threshold_l:
                raise ValueError("thresholds must satisfy R < H < L")
            if self.threshold_l != self.capacity_n - self.rt_cap_r:
                raise ValueError("threshold_l must equal capacity_n - rt_cap_r")

    def max_nrt(self, rt: int) -> int:
        """Largest feasible NRT count given an RT count."""
        cap = self.capacity_n - rt
        if self.mechanism is Mechanism.COMBINED:
            return min(cap, self.threshold_l)
        return cap


@dataclass(frozen=True)
class SystemState:
    phase: int
    rt: int
    nrt: int

    @property
    def total(self) -> int:
        return self.rt + self.nrt


@dataclass(frozen=True)
class Transition:
    target: SystemState
    rate: float
    kind: TransitionKind


def is_feasible(config: SystemConfig, state: SystemState) -> bool:
    return (
        state.phase in (1, 2)
        and 0 <= state.rt <= config.rt_cap_r
        and 0 <= state.nrt <= config.max_nrt(state.rt)
    )


def enumerate_states(config: SystemConfig) -> list[SystemState]:
    """All feasible states in a fixed total order: phase-major, then rt, then nrt."""
    states = []
    for phase in (1, 2):
        for rt in range(config.rt_cap_r + 1):
            for nrt in range(config.max_nrt(rt) + 1):
                states.append(SystemState(phase, rt, nrt))
    return states


def nrt_arrival_rate(config: SystemConfig, state: SystemState) -> float:
    """State-dependent NRT arrival rate.

    Simple mechanism: always lambda. Combined mechanism: lambda below H,
    lambda/2 in the band [H, L), zero at or above L, judged on the total
    occupancy k = rt + nrt.
    """
    if config.mechanism is Mechanism.SIMPLE:
        return config.lambda_nrt
    k = state.total
    if k < config.threshold_h:
        return config.lambda_nrt
    if k < config.threshold_l:
        return config.lambda_nrt / 2.0
    return 0.0


def transitions(config: SystemConfig, state: SystemState) -> list[Transition]:
    """Outgoing labeled transitions of a state.

    Blocking (RT arrival at rt = R; NRT arrival at a full buffer with
    rt < R) produces no edge. Parallel edges to the same target keep
    their distinct labels; the generator builder sums them.
    """
    if not is_feasible(config, state):
        raise ValueError(f"infeasible state {state} for this configuration")

    phase, rt, nrt = state.phase, state.rt, state.nrt
    k = rt + nrt
    n = config.capacity_n
    out: list[Transition] = []

    other = 2 if phase == 1 else 1
    out.append(
        Transition(SystemState(other, rt, nrt), config.mmpp.switch_rate(phase), TransitionKind.PHASE_SWITCH)
    )

    lam_rt = config.mmpp.rate_in_phase(phase)
    if lam_rt > 0 and rt < config.rt_cap_r:
        if k < n:
            out.append(
                Transition(SystemState(phase, rt + 1, nrt), lam_rt, TransitionKind.RT_ARRIVAL_ADMIT)
            )
        elif nrt > 0:
            out.append(
                Transition(SystemState(phase, rt + 1, nrt - 1), lam_rt, TransitionKind.RT_ARRIVAL_PUSHOUT)
            )

    lam_nrt = nrt_arrival_rate(config, state)
    if lam_nrt > 0:
        if k < n:
            out.append(
                Transition(SystemState(phase, rt, nrt + 1), lam_nrt, TransitionKind.NRT_ARRIVAL_ADMIT)
            )
        elif rt == config.rt_cap_r:
            out.append(
                Transition(SystemState(phase, rt - 1, nrt + 1), lam_nrt, TransitionKind.NRT_ARRIVAL_PUSHOUT)
            )

    if rt > 0:
        out.append(Transition(SystemState(phase, rt - 1, nrt), config.mu_rt, TransitionKind.RT_SERVICE))
    if nrt > 0:
        out.append(Transition(SystemState(phase, rt, nrt - 1), config.mu_nrt, TransitionKind.NRT_SERVICE))

    return out
