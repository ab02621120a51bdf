"""Performance metrics from a stationary distribution.

All quantities are derived by PASTA rate accounting over the labeled
transition structure: per class, offered rate splits exactly into
blocked, pushed-out, and served mass, and every loss probability is a
lost-rate over an offered-rate. Little's law converts occupancies to
delays. This construction is the unique one satisfying the stationary
rate-conservation identities checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ctmc import StationaryDistribution
from .mmpp import mean_arrival_rate
from .model import Mechanism, SystemConfig, enumerate_states, nrt_arrival_rate


@dataclass(frozen=True)
class FlowRates:
    """Stationary packet-flow rates per class.

    offered = blocked + pushed_out + served for each class (pushed-out
    packets were admitted, then evicted by the other class). For the
    combined mechanism offered_nrt is the threshold-thinned rate, not the
    base lambda.
    """

    offered_rt: float
    blocked_rt: float
    pushed_out_rt: float
    served_rt: float
    offered_nrt: float
    blocked_nrt: float
    pushed_out_nrt: float
    served_nrt: float
    prob_rt_busy: float
    prob_nrt_busy: float

    @property
    def accepted_nrt(self) -> float:
        """Rate at which NRT packets enter the buffer."""
        return self.offered_nrt - self.blocked_nrt


@dataclass(frozen=True)
class PerformanceReport:
    """The analytic performance parameters of one solved configuration.

    delay_nrt is the published form with the total occupancy in the
    numerator; delay_nrt_sojourn is the per-class Little's-law variant
    (NRT occupancy over NRT admission rate), the one an event simulation
    measures as mean sojourn. Both are reported.

    When a class offers no traffic its loss and delay are undefined; the
    convention is 0.0 with the corresponding flag set.
    """

    mechanism: Mechanism
    loss_rt: float
    loss_nrt: float
    mean_rt: float
    mean_nrt: float
    delay_rt: float
    delay_nrt: float
    delay_nrt_sojourn: float
    effective_lambda_nrt: float
    no_rt_traffic: bool = False
    no_nrt_traffic: bool = False
    notes: tuple[str, ...] = field(default=())


class _StateView:
    """Vectorized per-state quantities aligned with the distribution order."""

    def __init__(self, dist: StationaryDistribution, config: SystemConfig):
        expected = enumerate_states(config)
        if len(expected) != len(dist.states) or tuple(expected) != dist.states:
            raise ValueError("distribution state order does not match this configuration")
        self.pi = dist.probabilities
        self.rt = np.array([s.rt for s in dist.states])
        self.nrt = np.array([s.nrt for s in dist.states])
        self.total = self.rt + self.nrt
        lam = (config.mmpp.lambda1, config.mmpp.lambda2)
        self.lambda_phase = np.array([lam[s.phase - 1] for s in dist.states])
        self.lambda_nrt = np.array([nrt_arrival_rate(config, s) for s in dist.states])
        self.full = self.total == config.capacity_n
        self.at_cap = self.rt == config.rt_cap_r


def flow_rates(dist: StationaryDistribution, config: SystemConfig) -> FlowRates:
    v = _StateView(dist, config)
    pi = v.pi
    return FlowRates(
        offered_rt=mean_arrival_rate(config.mmpp),
        blocked_rt=float(np.dot(pi[v.at_cap], v.lambda_phase[v.at_cap])),
        pushed_out_rt=float(np.dot(pi[v.full & v.at_cap], v.lambda_nrt[v.full & v.at_cap])),
        served_rt=config.mu_rt * float(np.sum(pi[v.rt > 0])),
        offered_nrt=float(np.dot(pi, v.lambda_nrt)),
        blocked_nrt=float(np.dot(pi[v.full & ~v.at_cap], v.lambda_nrt[v.full & ~v.at_cap])),
        pushed_out_nrt=float(np.dot(pi[v.full & ~v.at_cap], v.lambda_phase[v.full & ~v.at_cap])),
        served_nrt=config.mu_nrt * float(np.sum(pi[v.nrt > 0])),
        prob_rt_busy=float(np.sum(pi[v.rt > 0])),
        prob_nrt_busy=float(np.sum(pi[v.nrt > 0])),
    )


def _nrt_offered_denominator(flows: FlowRates, config: SystemConfig) -> float:
    # Simple: the base Poisson rate. Combined: the threshold-thinned
    # offered rate, so the ratio stays a probability for every
    # parameterization.
    if config.mechanism is Mechanism.SIMPLE:
        return config.lambda_nrt
    return flows.offered_nrt


def rt_loss_probability(dist: StationaryDistribution, config: SystemConfig) -> float:
    """RT packets lost (blocked at the cap, or pushed out by admitted NRT
    arrivals at a full buffer) per offered RT packet. 0.0 when no RT
    traffic is offered."""
    flows = flow_rates(dist, config)
    if flows.offered_rt == 0:
        return 0.0
    return (flows.blocked_rt + flows.pushed_out_rt) / flows.offered_rt


def nrt_loss_probability(dist: StationaryDistribution, config: SystemConfig) -> float:
    """NRT packets lost (blocked at a full buffer, or pushed out by RT
    arrivals) per offered NRT packet. 0.0 when no NRT traffic is offered."""
    flows = flow_rates(dist, config)
    denom = _nrt_offered_denominator(flows, config)
    if denom == 0:
        return 0.0
    return (flows.blocked_nrt + flows.pushed_out_nrt) / denom


def mean_rt_count(dist: StationaryDistribution, config: SystemConfig) -> float:
    v = _StateView(dist, config)
    return float(np.dot(v.pi, v.rt))


def mean_nrt_count(dist: StationaryDistribution, config: SystemConfig) -> float:
    v = _StateView(dist, config)
    return float(np.dot(v.pi, v.nrt))


def rt_delay(dist: StationaryDistribution, config: SystemConfig) -> float:
    """Mean RT time in system by Little's law: N_RT over the surviving RT
    rate lambda_avg * (1 - loss)."""
    flows = flow_rates(dist, config)
    if flows.offered_rt == 0:
        return 0.0
    loss = (flows.blocked_rt + flows.pushed_out_rt) / flows.offered_rt
    return mean_rt_count(dist, config) / (flows.offered_rt * (1.0 - loss))


def nrt_delay(dist: StationaryDistribution, config: SystemConfig) -> float:
    """Published NRT delay form: total mean occupancy over the surviving
    NRT rate. See nrt_delay_sojourn for the per-class variant."""
    flows = flow_rates(dist, config)
    denom = _nrt_offered_denominator(flows, config)
    if denom == 0:
        return 0.0
    loss = (flows.blocked_nrt + flows.pushed_out_nrt) / denom
    numerator = mean_rt_count(dist, config) + mean_nrt_count(dist, config)
    return numerator / (denom * (1.0 - loss))


def nrt_delay_sojourn(dist: StationaryDistribution, config: SystemConfig) -> float:
    """Sojourn-consistent NRT delay: NRT occupancy over the NRT admission
    rate. By Little's law this equals the mean time an admitted NRT packet
    spends in the buffer (eviction counting as exit)."""
    flows = flow_rates(dist, config)
    if flows.accepted_nrt == 0:
        return 0.0
    return mean_nrt_count(dist, config) / flows.accepted_nrt


def effective_nrt_rate(dist: StationaryDistribution, config: SystemConfig) -> float:
    """State-averaged NRT arrival rate: lambda for the simple mechanism,
    the threshold-thinned average for the combined one."""
    if config.mechanism is Mechanism.SIMPLE:
        return config.lambda_nrt
    flows = flow_rates(dist, config)
    return flows.offered_nrt


_COMBINED_DENOMINATOR_NOTE = (
    "nrt loss normalized by the thinned offered rate (state-averaged), "
    "keeping the ratio a probability for every parameterization"
)


def performance_report(dist: StationaryDistribution, config: SystemConfig) -> PerformanceReport:
    flows = flow_rates(dist, config)
    no_rt = flows.offered_rt == 0
    no_nrt = _nrt_offered_denominator(flows, config) == 0
    notes: tuple[str, ...] = ()
    if config.mechanism is Mechanism.COMBINED:
        notes = (_COMBINED_DENOMINATOR_NOTE,)
    return PerformanceReport(
        mechanism=config.mechanism,
        loss_rt=rt_loss_probability(dist, config),
        loss_nrt=nrt_loss_probability(dist, config),
        mean_rt=mean_rt_count(dist, config),
        mean_nrt=mean_nrt_count(dist, config),
        delay_rt=rt_delay(dist, config),
        delay_nrt=nrt_delay(dist, config),
        delay_nrt_sojourn=nrt_delay_sojourn(dist, config),
        effective_lambda_nrt=effective_nrt_rate(dist, config),
        no_rt_traffic=no_rt,
        no_nrt_traffic=no_nrt,
        notes=notes,
    )
