"""Generator construction and GTH solve against the dense oracle."""

import numpy as np
import pytest

from tspq.ctmc import (
    GeneratorMatrix,
    ReducibleChainError,
    build_generator,
    dump_generator,
    solve_stationary,
)
from tspq.model import Mechanism, SystemState, enumerate_states

from conftest import dense_stationary, fig3_base, make_combined, make_simple, random_config


def test_tiny_generator_row():
    config = make_simple(n=2, r=1, lam=3.0, lam1=2.0, lam2=2.0, sig1=1.0, sig2=1.0)
    gen = build_generator(config)
    assert gen.dimension == 10
    i = gen.index[SystemState(1, 0, 0)]
    row = {j: rate for (src, j), rate in gen.entries.items() if src == i}
    assert row == {
        gen.index[SystemState(2, 0, 0)]: 1.0,
        gen.index[SystemState(1, 1, 0)]: 2.0,
        gen.index[SystemState(1, 0, 1)]: 3.0,
    }
    assert gen.diagonal[i] == -(1.0 + 2.0 + 3.0)


def test_rows_sum_to_zero():
    rng = np.random.default_rng(11)
    for mech in Mechanism:
        for _ in range(5):
            gen = build_generator(random_config(rng, mech))
            q = gen.dense()
            row_sums = np.abs(q.sum(axis=1))
            assert np.all(row_sums <= 1e-12 * np.maximum(np.abs(gen.diagonal), 1.0))
            off_diag = q - np.diag(np.diag(q))
            assert np.all(off_diag >= 0)
            assert np.all(np.diag(q) <= 0)


def test_combined_generator_has_no_nrt_pushout_entries():
    config = fig3_base(Mechanism.COMBINED)
    gen = build_generator(config)
    assert gen.dimension == 1472
    by_index = gen.states
    for (i, j) in gen.entries:
        src, dst = by_index[i], by_index[j]
        # an NRT push-out would move (rt, nrt) to (rt - 1, nrt + 1)
        assert not (dst.phase == src.phase and dst.rt == src.rt - 1 and dst.nrt == src.nrt + 1)


def test_two_state_birth_death_closed_form():
    states = (SystemState(1, 0, 0), SystemState(2, 0, 0))
    gen = GeneratorMatrix(
        states=states,
        index={states[0]: 0, states[1]: 1},
        entries={(0, 1): 1.0, (1, 0): 3.0},
        diagonal=np.array([-1.0, -3.0]),
    )
    dist = solve_stationary(gen)
    assert dist.probabilities == pytest.approx([0.75, 0.25], abs=1e-15)


def test_gth_matches_dense_solve_componentwise(tiny_simple):
    gen = build_generator(tiny_simple)
    dist = solve_stationary(gen)
    oracle = dense_stationary(gen)
    assert np.max(np.abs(dist.probabilities - oracle)) < 1e-12


def test_gth_matches_dense_on_random_configs():
    rng = np.random.default_rng(2024)
    for mech in Mechanism:
        for _ in range(6):
            config = random_config(rng, mech)
            gen = build_generator(config)
            assert gen.dimension <= 200
            dist = solve_stationary(gen)
            oracle = dense_stationary(gen)
            assert np.max(np.abs(dist.probabilities - oracle)) < 1e-10


def test_no_nrt_traffic_confines_mass_to_empty_nrt_slice():
    config = make_simple(lam=0.0)
    dist = solve_stationary(build_generator(config))
    for state, p in zip(dist.states, dist.probabilities):
        if state.nrt > 0:
            assert p == 0.0


def test_solution_is_deterministic():
    config = make_combined()
    a = solve_stationary(build_generator(config)).probabilities
    b = solve_stationary(build_generator(config)).probabilities
    assert np.array_equal(a, b)


def test_stationary_invariants():
    rng = np.random.default_rng(404)
    configs = [make_simple(), make_combined()] + [
        random_config(rng, m) for m in Mechanism for _ in range(3)
    ]
    for config in configs:
        gen = build_generator(config)
        dist = solve_stationary(gen)
        pi = dist.probabilities
        assert np.all(pi >= 0)
        assert abs(pi.sum() - 1.0) < 1e-10
        residual = np.max(np.abs(pi @ gen.dense()))
        assert residual <= 1e-9 * gen.max_rate()


def test_cut_balance_across_total_count():
    """Net probability flow across any total-occupancy cut is zero."""
    from tspq.model import transitions

    for config in (make_simple(n=6, r=2), make_combined(n=8, r=2, h=4), fig3_base(Mechanism.COMBINED)):
        gen = build_generator(config)
        dist = solve_stationary(gen)
        levels = {1, config.rt_cap_r}
        if config.mechanism is Mechanism.COMBINED:
            levels |= {config.threshold_h, config.threshold_l - 1}
        for c in levels:
            up = down = 0.0
            for state, p in zip(dist.states, dist.probabilities):
                for tr in transitions(config, state):
                    if state.total == c - 1 and tr.target.total == c:
                        up += p * tr.rate
                    elif state.total == c and tr.target.total == c - 1:
                        down += p * tr.rate
            assert up == pytest.approx(down, abs=1e-9 * gen.max_rate())


def test_reducible_generator_raises():
    states = tuple(SystemState(1, 0, k) for k in range(4))
    gen = GeneratorMatrix(
        states=states,
        index={s: i for i, s in enumerate(states)},
        entries={(0, 1): 1.0, (1, 0): 1.0, (2, 3): 1.0, (3, 2): 1.0},
        diagonal=np.array([-1.0, -1.0, -1.0, -1.0]),
    )
    with pytest.raises(ReducibleChainError):
        solve_stationary(gen)


def test_generator_dump_round_trip(tmp_path, tiny_simple):
    gen = build_generator(tiny_simple)
    path = tmp_path / "generator.txt"
    dump_generator(gen, path)
    rebuilt = np.zeros((gen.dimension, gen.dimension))
    for line in path.read_text().splitlines():
        if line.startswith("#"):
            continue
        i, j, rate = line.split()
        rebuilt[int(i), int(j)] = float(rate)
    assert np.array_equal(rebuilt, gen.dense())
