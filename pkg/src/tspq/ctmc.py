"""Generator matrix construction and exact stationary solve.

The stationary distribution is computed by GTH (Grassmann-Taksar-Heyman)
state elimination: a subtraction-free Gaussian elimination on the
off-diagonal rates, unconditionally stable for finite irreducible chains.
The hot loop is JIT-compiled with numba when available; a vectorized
numpy fallback covers environments without it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemConfig, SystemState, enumerate_states, transitions

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


class ReducibleChainError(RuntimeError):
    """Raised when elimination finds a pivot row with no remaining mass."""


@dataclass(frozen=True)
class GeneratorMatrix:
    """Sparse CTMC generator over the enumerated state order.

    entries maps (source index, target index) to the summed rate of all
    parallel transitions; diagonal holds the negated per-state exit rate,
    so every row sums to zero by construction.
    """

    states: tuple[SystemState, ...]
    index: dict[SystemState, int]
    entries: dict[tuple[int, int], float]
    diagonal: np.ndarray

    @property
    def dimension(self) -> int:
        return len(self.states)

    def dense(self) -> np.ndarray:
        """Dense generator Q with diagonal included."""
        q = np.zeros((self.dimension, self.dimension))
        for (i, j), rate in self.entries.items():
            q[i, j] = rate
        q[np.diag_indices(self.dimension)] = self.diagonal
        return q

    def max_rate(self) -> float:
        return float(np.max(np.abs(self.diagonal))) if self.dimension else 0.0


@dataclass(frozen=True)
class StationaryDistribution:
    probabilities: np.ndarray
    states: tuple[SystemState, ...]
    index: dict[SystemState, int]

    def probability_of(self, state: SystemState) -> float:
        return float(self.probabilities[self.index[state]])


def build_generator(config: SystemConfig) -> GeneratorMatrix:
    """Assemble the generator from the model's transition function.

    Parallel edges to the same target are summed. With traffic offered in
    both classes the transition graph must be strongly connected, which is
    verified by forward and backward reachability so that a policy-coding
    bug surfaces here rather than as a solver failure. With a silent class
    (zero arrival rate) part of the state space is legitimately
    unreachable; then only the backward check runs (every state drains to
    the empty state, so the closed class is unique and the stationary
    solve remains well posed).
    """
    states = tuple(enumerate_states(config))
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    entries: dict[tuple[int, int], float] = {}
    diagonal = np.zeros(n)
    forward: list[list[int]] = [[] for _ in range(n)]
    backward: list[list[int]] = [[] for _ in range(n)]

    for i, state in enumerate(states):
        exit_rate = 0.0
        for tr in transitions(config, state):
            j = index[tr.target]
            key = (i, j)
            if key in entries:
                entries[key] += tr.rate
            else:
                entries[key] = tr.rate
                forward[i].append(j)
                backward[j].append(i)
            exit_rate += tr.rate
        diagonal[i] = -exit_rate

    if _reachable_count(backward, n) != n:
        raise ReducibleChainError("some state cannot drain to the empty buffer")
    both_classes_active = config.lambda_nrt > 0 and (config.mmpp.lambda1 > 0 or config.mmpp.lambda2 > 0)
    if both_classes_active and _reachable_count(forward, n) != n:
        raise ReducibleChainError("transition graph is not strongly connected")

    return GeneratorMatrix(states=states, index=index, entries=entries, diagonal=diagonal)


def _reachable_count(adjacency: list[list[int]], n: int) -> int:
    seen = bytearray(n)
    seen[0] = 1
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = 1
                count += 1
                stack.append(v)
    return count


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _gth_eliminate_numba(a):  # pragma: no cover - exercised via solve_stationary
        n = a.shape[0]
        pivots = np.empty(n)
        for k in range(n - 1, 0, -1):
            s = 0.0
            for j in range(k):
                s += a[k, j]
            if s <= 0.0:
                return np.empty(0), False
            pivots[k] = s
            for i in range(k):
                f = a[i, k] / s
                if f > 0.0:
                    for j in range(k):
                        a[i, j] += f * a[k, j]
        x = np.empty(n)
        x[0] = 1.0
        for k in range(1, n):
            acc = 0.0
            for i in range(k):
                acc += x[i] * a[i, k]
            x[k] = acc / pivots[k]
        return x, True


def _gth_eliminate_numpy(a: np.ndarray):
    n = a.shape[0]
    pivots = np.empty(n)
    for k in range(n - 1, 0, -1):
        row = a[k, :k]
        s = float(row.sum())
        if s <= 0.0:
            return None, False
        pivots[k] = s
        # Rank-1 redistribution of state k's inflow mass; the diagonal
        # entries written here are never read again.
        a[:k, :k] += np.outer(a[:k, k] / s, row)
    x = np.empty(n)
    x[0] = 1.0
    for k in range(1, n):
        x[k] = float(np.dot(x[:k], a[:k, k])) / pivots[k]
    return x, True


def solve_stationary(gen: GeneratorMatrix) -> StationaryDistribution:
    """Exact stationary distribution via GTH state elimination.

    Works on the off-diagonal rates only (all adds and multiplies of
    nonnegative terms, no cancellation). Raises ReducibleChainError if a
    pivot row has no remaining mass, which cannot happen for a strongly
    connected generator.
    """
    n = gen.dimension
    if n == 0:
        raise ValueError("empty generator")
    a = np.zeros((n, n))
    for (i, j), rate in gen.entries.items():
        a[i, j] = rate

    if n == 1:
        return StationaryDistribution(np.ones(1), gen.states, gen.index)

    if _HAVE_NUMBA:
        x, ok = _gth_eliminate_numba(a)
    else:
        x, ok = _gth_eliminate_numpy(a)
    if not ok:
        raise ReducibleChainError("zero pivot during elimination: chain is reducible")

    pi = x / x.sum()
    return StationaryDistribution(pi, gen.states, gen.index)


def dump_generator(gen: GeneratorMatrix, path) -> None:
    """Text dump for external verification.

    A state-index legend followed by `source_index target_index rate`
    triples (diagonal included so row sums can be checked offline).
    """
    with open(path, "w") as fh:
        fh.write("# state legend: index phase rt nrt\n")
        for i, s in enumerate(gen.states):
            fh.write(f"# {i} {s.phase} {s.rt} {s.nrt}\n")
        fh.write("# entries: source_index target_index rate\n")
        for i in range(gen.dimension):
            fh.write(f"{i} {i} {float(gen.diagonal[i])!r}\n")
        for (i, j) in sorted(gen.entries):
            fh.write(f"{i} {j} {float(gen.entries[(i, j)])!r}\n")
