"""Finite-buffer time-space priority queues with threshold NRT rate control.

Exact CTMC analysis (GTH elimination) and an independent discrete-event
simulation oracle for two buffer-management mechanisms sharing one queue
between bursty real-time (2-state MMPP) and non-real-time (Poisson)
traffic.
"""

from .configio import ConfigError, SweepSpec
from .ctmc import (
    GeneratorMatrix,
    ReducibleChainError,
    StationaryDistribution,
    build_generator,
    dump_generator,
    solve_stationary,
)
from .metrics import (
    FlowRates,
    PerformanceReport,
    effective_nrt_rate,
    flow_rates,
    mean_nrt_count,
    mean_rt_count,
    nrt_delay,
    nrt_delay_sojourn,
    nrt_loss_probability,
    performance_report,
    rt_delay,
    rt_loss_probability,
)
from .mmpp import MmppParams, mean_arrival_rate, phase_steady_state
from .model import (
    Mechanism,
    SystemConfig,
    SystemState,
    Transition,
    TransitionKind,
    enumerate_states,
    nrt_arrival_rate,
    transitions,
)
from .sim import MetricEstimate, SimBudgetError, SimConfig, SimEstimate, occupancy_histogram
from .sim import run as simulate

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "FlowRates",
    "GeneratorMatrix",
    "Mechanism",
    "MetricEstimate",
    "MmppParams",
    "PerformanceReport",
    "ReducibleChainError",
    "SimBudgetError",
    "SimConfig",
    "SimEstimate",
    "StationaryDistribution",
    "SweepSpec",
    "SystemConfig",
    "SystemState",
    "Transition",
    "TransitionKind",
    "build_generator",
    "dump_generator",
    "effective_nrt_rate",
    "enumerate_states",
    "flow_rates",
    "mean_arrival_rate",
    "mean_nrt_count",
    "mean_rt_count",
    "nrt_arrival_rate",
    "nrt_delay",
    "nrt_delay_sojourn",
    "nrt_loss_probability",
    "occupancy_histogram",
    "performance_report",
    "phase_steady_state",
    "rt_delay",
    "rt_loss_probability",
    "simulate",
    "solve_stationary",
    "transitions",
]
