"""Discrete-event simulation of both mechanisms.

Independent statistical oracle for the analytic pipeline: the same
admission / push-out / service / phase-switch rules, realized as a race
of exponential clocks. NRT arrivals are generated as a full-rate Poisson
candidate stream thinned against the current threshold band, which
realizes the state-dependent rate exactly and keeps runs with equal
seeds comparable across mechanisms.

RNG: PCG64, one independent stream per event type, spawned from a single
64-bit seed via numpy's SeedSequence. Runs are deterministic given
(config, seed).

Confidence intervals use batch means over a single long run after a
warmup period of min(a fixed fraction of the event budget, the time of
the first 10 * N departures).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .model import Mechanism, SystemConfig, SystemState

_INF = float("inf")


class SimBudgetError(ValueError):
    """Simulation budget too small to fill the requested batches."""


@dataclass(frozen=True)
class SimConfig:
    system: SystemConfig
    horizon_events: int
    seed: int
    batches: int = 20
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if self.horizon_events <= 0:
            raise SimBudgetError("horizon_events must be positive")
        if self.batches < 2:
            raise ValueError("batches must be at least 2")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ValueError("warmup_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class MetricEstimate:
    value: float
    half_width: float

    def covers(self, target: float) -> bool:
        return abs(target - self.value) <= self.half_width


@dataclass(frozen=True)
class SimEstimate:
    """Point estimates with 95% batch-means half-widths, plus the exact
    event ledger of the full run (warmup included in the counts)."""

    loss_rt: MetricEstimate
    loss_nrt: MetricEstimate
    mean_rt: MetricEstimate
    mean_nrt: MetricEstimate
    delay_rt: MetricEstimate
    delay_nrt: MetricEstimate
    delay_nrt_sojourn: MetricEstimate
    effective_lambda_nrt: MetricEstimate
    offered_rt: int
    blocked_rt: int
    pushed_out_rt: int
    accepted_rt: int
    served_rt: int
    offered_nrt: int
    blocked_nrt: int
    pushed_out_nrt: int
    accepted_nrt: int
    served_nrt: int
    events: int
    warmup_events: int
    elapsed_time: float
    warmup_time: float
    batches: int

    def metric(self, name: str) -> MetricEstimate:
        return getattr(self, name)


class _Stream:
    """Block-buffered scalar draws from one independent PCG64 stream."""

    __slots__ = ("_gen", "_buf", "_pos", "_uniform")
    _BLOCK = 1 << 14

    def __init__(self, seedseq, uniform: bool = False):
        self._gen = np.random.Generator(np.random.PCG64(seedseq))
        self._uniform = uniform
        self._buf = self._fill()
        self._pos = 0

    def _fill(self):
        if self._uniform:
            return self._gen.random(self._BLOCK).tolist()
        return self._gen.standard_exponential(self._BLOCK).tolist()

    def next(self) -> float:
        pos = self._pos
        if pos == self._BLOCK:
            self._buf = self._fill()
            pos = 0
        self._pos = pos + 1
        return self._buf[pos]


# indices into the per-batch tally rows collected by _simulate
_B_TIME = 0
_B_RT_AREA = 1
_B_NRT_AREA = 2
_B_OFFERED_RT = 3
_B_LOST_RT = 4
_B_SERVED_RT = 5
_B_OFFERED_NRT = 6
_B_LOST_NRT = 7
_B_SERVED_NRT = 8
_B_SOJOURN_SUM = 9
_B_EXITS_NRT = 10
_B_WIDTH = 11


def _simulate(sc: SimConfig, collect_states: bool):
    cfg = sc.system
    combined = cfg.mechanism is Mechanism.COMBINED
    n_cap = cfg.capacity_n
    r_cap = cfg.rt_cap_r
    h_thr = cfg.threshold_h
    l_thr = cfg.threshold_l
    lam_base = cfg.lambda_nrt
    lam1, lam2 = cfg.mmpp.lambda1, cfg.mmpp.lambda2
    sig1, sig2 = cfg.mmpp.sigma1, cfg.mmpp.sigma2
    mu_rt, mu_nrt = cfg.mu_rt, cfg.mu_nrt

    seeds = np.random.SeedSequence(sc.seed).spawn(6)
    e_phase = _Stream(seeds[0]).next
    e_rt_arr = _Stream(seeds[1]).next
    e_nrt_arr = _Stream(seeds[2]).next
    u_thin = _Stream(seeds[3], uniform=True).next
    e_rt_svc = _Stream(seeds[4]).next
    e_nrt_svc = _Stream(seeds[5]).next

    horizon = sc.horizon_events
    warm_ev_cap = int(sc.warmup_fraction * horizon)
    dep_target = 10 * n_cap
    in_warmup = warm_ev_cap > 0
    warmup_events = 0
    warmup_time = 0.0

    phase = 1
    rt = 0
    nrt = 0
    now = 0.0
    nrt_times: deque[float] = deque()

    lam_phase = lam1
    sig_phase = sig1
    t_phase = e_phase() / sig_phase
    t_rt_arr = e_rt_arr() / lam_phase if lam_phase > 0 else _INF
    t_nrt_cand = e_nrt_arr() / lam_base if lam_base > 0 else _INF
    t_rt_svc = _INF
    t_nrt_svc = _INF

    # whole-run ledger (exact integers)
    offered_rt = blocked_rt = pushed_rt = admitted_rt = served_rt = 0
    offered_nrt = blocked_nrt = pushed_nrt = admitted_nrt = served_nrt = 0
    departures = 0

    # current-batch accumulators
    b = [0.0] * _B_WIDTH
    batch_rows: list[list[float]] = []
    boundaries: list[int] = []
    if not in_warmup:
        boundaries = _batch_boundaries(0, horizon, sc.batches)
    bound_pos = 0

    state_time: dict[tuple[int, int, int], float] = {} if collect_states else None

    for ev in range(1, horizon + 1):
        # next event: strict minimum with a fixed tie-breaking order
        t_next = t_phase
        which = 0
        if t_rt_arr < t_next:
            t_next = t_rt_arr
            which = 1
        if t_nrt_cand < t_next:
            t_next = t_nrt_cand
            which = 2
        if t_rt_svc < t_next:
            t_next = t_rt_svc
            which = 3
        if t_nrt_svc < t_next:
            t_next = t_nrt_svc
            which = 4

        dt = t_next - now
        b[_B_TIME] += dt
        b[_B_RT_AREA] += rt * dt
        b[_B_NRT_AREA] += nrt * dt
        if collect_states and not in_warmup:
            key = (phase, rt, nrt)
            state_time[key] = state_time.get(key, 0.0) + dt
        now = t_next

        if which == 0:
            if phase == 1:
                phase = 2
                lam_phase = lam2
                sig_phase = sig2
            else:
                phase = 1
                lam_phase = lam1
                sig_phase = sig1
            t_phase = now + e_phase() / sig_phase
            t_rt_arr = now + e_rt_arr() / lam_phase if lam_phase > 0 else _INF
        elif which == 1:
            offered_rt += 1
            b[_B_OFFERED_RT] += 1
            if rt < r_cap:
                if rt + nrt < n_cap:
                    rt += 1
                    admitted_rt += 1
                    if rt == 1:
                        t_rt_svc = now + e_rt_svc() / mu_rt
                else:
                    # full buffer: push out the newest NRT packet
                    nrt -= 1
                    rt += 1
                    admitted_rt += 1
                    pushed_nrt += 1
                    b[_B_LOST_NRT] += 1
                    b[_B_SOJOURN_SUM] += now - nrt_times.pop()
                    b[_B_EXITS_NRT] += 1
                    if nrt == 0:
                        t_nrt_svc = _INF
                    if rt == 1:
                        t_rt_svc = now + e_rt_svc() / mu_rt
            else:
                blocked_rt += 1
                b[_B_LOST_RT] += 1
            t_rt_arr = now + e_rt_arr() / lam_phase if lam_phase > 0 else _INF
        elif which == 2:
            t_nrt_cand = now + e_nrt_arr() / lam_base
            u = u_thin()
            if combined:
                k = rt + nrt
                if k < h_thr:
                    p = 1.0
                elif k < l_thr:
                    p = 0.5
                else:
                    p = 0.0
            else:
                p = 1.0
            if u < p:
                offered_nrt += 1
                b[_B_OFFERED_NRT] += 1
                if rt + nrt < n_cap:
                    nrt += 1
                    admitted_nrt += 1
                    nrt_times.append(now)
                    if nrt == 1:
                        t_nrt_svc = now + e_nrt_svc() / mu_nrt
                elif rt == r_cap:
                    # full buffer, RT at cap: push out the newest RT packet
                    rt -= 1
                    pushed_rt += 1
                    b[_B_LOST_RT] += 1
                    nrt += 1
                    admitted_nrt += 1
                    nrt_times.append(now)
                    if rt == 0:
                        t_rt_svc = _INF
                    if nrt == 1:
                        t_nrt_svc = now + e_nrt_svc() / mu_nrt
                else:
                    blocked_nrt += 1
                    b[_B_LOST_NRT] += 1
        elif which == 3:
            rt -= 1
            served_rt += 1
            departures += 1
            b[_B_SERVED_RT] += 1
            t_rt_svc = now + e_rt_svc() / mu_rt if rt > 0 else _INF
        else:
            nrt -= 1
            served_nrt += 1
            departures += 1
            b[_B_SERVED_NRT] += 1
            b[_B_SOJOURN_SUM] += now - nrt_times.popleft()
            b[_B_EXITS_NRT] += 1
            t_nrt_svc = now + e_nrt_svc() / mu_nrt if nrt > 0 else _INF

        if rt < 0 or nrt < 0 or rt > r_cap or rt + nrt > n_cap or (combined and nrt > l_thr):
            raise AssertionError(f"infeasible state reached: phase={phase} rt={rt} nrt={nrt}")

        if in_warmup:
            if ev >= warm_ev_cap or departures >= dep_target:
                in_warmup = False
                warmup_events = ev
                warmup_time = now
                boundaries = _batch_boundaries(ev, horizon, sc.batches)
                b = [0.0] * _B_WIDTH
        elif ev == boundaries[bound_pos]:
            batch_rows.append(b)
            b = [0.0] * _B_WIDTH
            bound_pos += 1

    if in_warmup or len(batch_rows) != sc.batches:
        raise SimBudgetError("simulation budget too small to fill requested batches")

    ledger = {
        "offered_rt": offered_rt,
        "blocked_rt": blocked_rt,
        "pushed_out_rt": pushed_rt,
        "accepted_rt": admitted_rt - pushed_rt,
        "served_rt": served_rt,
        "offered_nrt": offered_nrt,
        "blocked_nrt": blocked_nrt,
        "pushed_out_nrt": pushed_nrt,
        "accepted_nrt": admitted_nrt - pushed_nrt,
        "served_nrt": served_nrt,
    }
    return np.array(batch_rows), ledger, now, warmup_events, warmup_time, state_time


def _batch_boundaries(start_event: int, horizon: int, batches: int) -> list[int]:
    size = (horizon - start_event) // batches
    if size < 1:
        raise SimBudgetError("simulation budget too small to fill requested batches")
    bounds = [start_event + (i + 1) * size for i in range(batches)]
    bounds[-1] = horizon
    return bounds


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    mask = den > 0
    out[mask] = num[mask] / den[mask]
    return out


def _estimate(values: np.ndarray) -> MetricEstimate:
    n = len(values)
    mean = float(np.mean(values))
    if n < 2 or np.all(values == values[0]):
        return MetricEstimate(mean, 0.0)
    tq = float(_scipy_stats.t.ppf(0.975, n - 1))
    half = float(tq * np.std(values, ddof=1) / np.sqrt(n))
    return MetricEstimate(mean, half)


def run(sim_config: SimConfig) -> SimEstimate:
    """Run the simulation and estimate every analytic metric.

    Each batch yields one value per metric (ratio of batch tallies); the
    point estimate is the batch mean and the half-width a 95% Student-t
    interval over batches.
    """
    rows, ledger, elapsed, warm_ev, warm_t, _ = _simulate(sim_config, collect_states=False)
    time_b = rows[:, _B_TIME]
    lost_rt = rows[:, _B_LOST_RT]
    lost_nrt = rows[:, _B_LOST_NRT]
    total_area = rows[:, _B_RT_AREA] + rows[:, _B_NRT_AREA]
    return SimEstimate(
        loss_rt=_estimate(_ratio(lost_rt, rows[:, _B_OFFERED_RT])),
        loss_nrt=_estimate(_ratio(lost_nrt, rows[:, _B_OFFERED_NRT])),
        mean_rt=_estimate(rows[:, _B_RT_AREA] / time_b),
        mean_nrt=_estimate(rows[:, _B_NRT_AREA] / time_b),
        delay_rt=_estimate(_ratio(rows[:, _B_RT_AREA], rows[:, _B_SERVED_RT])),
        delay_nrt=_estimate(_ratio(total_area, rows[:, _B_SERVED_NRT])),
        delay_nrt_sojourn=_estimate(_ratio(rows[:, _B_SOJOURN_SUM], rows[:, _B_EXITS_NRT])),
        effective_lambda_nrt=_estimate(rows[:, _B_OFFERED_NRT] / time_b),
        events=sim_config.horizon_events,
        warmup_events=warm_ev,
        elapsed_time=elapsed,
        warmup_time=warm_t,
        batches=sim_config.batches,
        **ledger,
    )


def occupancy_histogram(sim_config: SimConfig) -> dict[SystemState, float]:
    """Time-weighted post-warmup state occupancy, normalized to sum to 1."""
    _, _, _, _, warm_t, state_time = _simulate(sim_config, collect_states=True)
    total = sum(state_time.values())
    if total <= 0:
        raise SimBudgetError("no post-warmup time accumulated")
    return {
        SystemState(phase, r, q): t / total for (phase, r, q), t in sorted(state_time.items())
    }
