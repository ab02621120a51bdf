"""Two-state Markov modulated Poisson process (MMPP-2).

The real-time traffic source: Poisson arrivals whose rate alternates
between lambda1 and lambda2, driven by a two-state continuous-time Markov
chain with switch rates sigma1 (phase 1 -> 2) and sigma2 (phase 2 -> 1).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MmppParams:
    """Parameters of a 2-state MMPP.

    lambda1, lambda2: Poisson arrival rates in phase 1 and phase 2.
    sigma1: switch rate phase 1 -> 2; sigma2: switch rate phase 2 -> 1.
    Switch rates must be strictly positive so the modulating chain is
    irreducible.
    """

    lambda1: float
    lambda2: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("arrival rates lambda1, lambda2 must be nonnegative")
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("switch rates sigma1, sigma2 must be strictly positive")

    def rate_in_phase(self, phase: int) -> float:
        if phase == 1:
            return self.lambda1
        if phase == 2:
            return self.lambda2
        raise ValueError(f"phase must be 1 or 2, got {phase}")

    def switch_rate(self, phase: int) -> float:
        if phase == 1:
            return self.sigma1
        if phase == 2:
            return self.sigma2
        raise ValueError(f"phase must be 1 or 2, got {phase}")


def phase_steady_state(params: MmppParams) -> tuple[float, float]:
    """Stationary probabilities (pi1, pi2) of the modulating chain.

    For a two-state chain with rates sigma1 (1->2) and sigma2 (2->1) the
    stationary split is (sigma2, sigma1) / (sigma1 + sigma2).
    """
    total = params.sigma1 + params.sigma2
    return params.sigma2 / total, params.sigma1 / total


def mean_arrival_rate(params: MmppParams) -> float:
    """Long-run average arrival rate of the MMPP.

    Equals pi1 * lambda1 + pi2 * lambda2 =
    (sigma1 * lambda2 + sigma2 * lambda1) / (sigma1 + sigma2).
    """
    if params.lambda1 == params.lambda2:
        # degenerate MMPP is plain Poisson; keep the rate exact
        return params.lambda1
    return (params.sigma1 * params.lambda2 + params.sigma2 * params.lambda1) / (
        params.sigma1 + params.sigma2
    )
