"""State space and transition rules against brute-force oracles."""

import numpy as np
import pytest

from tspq.model import (
    Mechanism,
    SystemConfig,
    SystemState,
    TransitionKind,
    enumerate_states,
    nrt_arrival_rate,
    transitions,
)
from tspq.mmpp import MmppParams

from conftest import fig3_base, make_combined, make_simple, random_config


def brute_force_states(config):
    """Oracle: scan the full (phase, rt, nrt) box and keep feasible triples."""
    found = []
    for phase in (1, 2):
        for rt in range(config.capacity_n + 1):
            for nrt in range(config.capacity_n + 1):
                if rt > config.rt_cap_r or rt + nrt > config.capacity_n:
                    continue
                if config.mechanism is Mechanism.COMBINED and nrt > config.threshold_l:
                    continue
                found.append(SystemState(phase, rt, nrt))
    return found


def test_state_count_simple_large():
    config = fig3_base(Mechanism.SIMPLE)
    states = enumerate_states(config)
    assert len(states) == len(brute_force_states(config)) == 1712


def test_state_count_simple_tiny():
    config = make_simple(n=2, r=1)
    states = enumerate_states(config)
    assert len(states) == 10
    per_phase = {(s.rt, s.nrt) for s in states if s.phase == 1}
    assert per_phase == {(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)}


def test_state_count_combined_large():
    # brute-force enumeration gives 2 * 16 * 46 = 1472 here
    config = fig3_base(Mechanism.COMBINED)
    states = enumerate_states(config)
    assert len(states) == len(brute_force_states(config)) == 1472


def test_enumeration_order_and_uniqueness():
    rng = np.random.default_rng(5)
    for mech in Mechanism:
        for _ in range(5):
            config = random_config(rng, mech)
            states = enumerate_states(config)
            assert states == brute_force_states(config)
            assert len(set(states)) == len(states)
            assert states == enumerate_states(config)  # stable order


def test_config_invariants():
    with pytest.raises(ValueError):
        make_simple(n=2, r=2)  # R must be < N
    with pytest.raises(ValueError):
        make_combined(n=4, r=1, h=1)  # needs R < H
    with pytest.raises(ValueError):
        SystemConfig(4, 1, 2, 2, 1.0, MmppParams(1, 1, 1, 1), 1.0, 1.0, Mechanism.COMBINED)
    with pytest.raises(ValueError):
        # L != N - R
        SystemConfig(6, 1, 3, 4, 1.0, MmppParams(1, 1, 1, 1), 1.0, 1.0, Mechanism.COMBINED)


def test_nrt_arrival_rate_bands():
    config = SystemConfig(
        60, 15, 25, 45, 20.0, MmppParams(8, 5, 1, 1), 30.0, 20.0, Mechanism.COMBINED
    )
    assert nrt_arrival_rate(config, SystemState(1, 10, 10)) == 20.0  # k=20 < H
    assert nrt_arrival_rate(config, SystemState(2, 15, 15)) == 10.0  # H <= k=30 < L
    assert nrt_arrival_rate(config, SystemState(1, 15, 30)) == 0.0  # k=45 >= L
    simple = fig3_base(Mechanism.SIMPLE)
    for state in (SystemState(1, 0, 0), SystemState(2, 15, 45), SystemState(1, 5, 55)):
        assert nrt_arrival_rate(simple, state) == 20.0


def _edges(config, state):
    return {(t.kind, t.target): t.rate for t in transitions(config, state)}


def test_transitions_empty_state():
    config = make_simple(n=2, r=1, lam=3.0, lam1=2.0, lam2=2.0, sig1=1.0, sig2=1.0, mu=5.0, mu1=4.0)
    edges = _edges(config, SystemState(1, 0, 0))
    assert edges == {
        (TransitionKind.PHASE_SWITCH, SystemState(2, 0, 0)): 1.0,
        (TransitionKind.RT_ARRIVAL_ADMIT, SystemState(1, 1, 0)): 2.0,
        (TransitionKind.NRT_ARRIVAL_ADMIT, SystemState(1, 0, 1)): 3.0,
    }


def test_transitions_rt_pushes_out_nrt():
    config = make_simple(n=2, r=1)
    edges = _edges(config, SystemState(1, 0, 2))
    assert edges[(TransitionKind.RT_ARRIVAL_PUSHOUT, SystemState(1, 1, 1))] == 2.0
    kinds = {kind for kind, _ in edges}
    assert TransitionKind.NRT_ARRIVAL_ADMIT not in kinds
    assert TransitionKind.NRT_ARRIVAL_PUSHOUT not in kinds


def test_transitions_nrt_pushes_out_rt():
    config = make_simple(n=2, r=1, lam=3.0)
    edges = _edges(config, SystemState(1, 1, 1))
    assert edges[(TransitionKind.NRT_ARRIVAL_PUSHOUT, SystemState(1, 0, 2))] == 3.0
    kinds = {kind for kind, _ in edges}
    assert TransitionKind.RT_ARRIVAL_ADMIT not in kinds
    assert TransitionKind.RT_ARRIVAL_PUSHOUT not in kinds


def test_combined_full_states_have_no_nrt_edges():
    config = fig3_base(Mechanism.COMBINED)
    full = [s for s in enumerate_states(config) if s.total == config.capacity_n]
    assert full  # the state space does reach a full buffer
    for state in full:
        kinds = {t.kind for t in transitions(config, state)}
        assert TransitionKind.NRT_ARRIVAL_ADMIT not in kinds
        assert TransitionKind.NRT_ARRIVAL_PUSHOUT not in kinds


def test_infeasible_state_rejected():
    config = make_simple(n=2, r=1)
    with pytest.raises(ValueError):
        transitions(config, SystemState(1, 2, 0))
    with pytest.raises(ValueError):
        transitions(config, SystemState(1, 1, 2))


def test_transition_properties_random():
    rng = np.random.default_rng(77)
    for mech in Mechanism:
        for _ in range(8):
            config = random_config(rng, mech)
            states = enumerate_states(config)
            feasible = set(states)
            lam = (config.mmpp.lambda1, config.mmpp.lambda2)
            for state in states:
                edges = transitions(config, state)
                rt_arrival_mass = 0.0
                for tr in edges:
                    assert tr.rate > 0
                    assert tr.target != state
                    assert tr.target in feasible
                    if tr.kind in (TransitionKind.RT_ARRIVAL_ADMIT, TransitionKind.RT_ARRIVAL_PUSHOUT):
                        rt_arrival_mass += tr.rate
                    if mech is Mechanism.COMBINED:
                        assert tr.kind is not TransitionKind.NRT_ARRIVAL_PUSHOUT
                # admitted RT mass plus implicit blocking equals the phase rate
                lam_phase = lam[state.phase - 1]
                blocked = lam_phase if state.rt == config.rt_cap_r else 0.0
                assert rt_arrival_mass + blocked == pytest.approx(lam_phase, abs=1e-12)


def test_strong_connectivity_by_graph_search():
    rng = np.random.default_rng(31)
    configs = [make_simple(), make_combined(), fig3_base(Mechanism.SIMPLE), fig3_base(Mechanism.COMBINED)]
    configs += [random_config(rng, m) for m in Mechanism for _ in range(3)]
    for config in configs:
        states = enumerate_states(config)
        index = {s: i for i, s in enumerate(states)}
        n = len(states)
        forward = [[] for _ in range(n)]
        backward = [[] for _ in range(n)]
        for i, s in enumerate(states):
            for tr in transitions(config, s):
                j = index[tr.target]
                forward[i].append(j)
                backward[j].append(i)
        for adj in (forward, backward):
            seen = {0}
            stack = [0]
            while stack:
                for v in adj[stack.pop()]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            assert len(seen) == n
