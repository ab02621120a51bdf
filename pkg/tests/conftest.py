"""Shared fixtures and independent oracles for the test suite.

The dense stationary solve here is the oracle for the GTH path: it
replaces one balance equation with the normalization row and solves the
dense linear system, sharing no code with the package solver.
"""

import numpy as np
import pytest

from tspq.ctmc import GeneratorMatrix
from tspq.mmpp import MmppParams
from tspq.model import Mechanism, SystemConfig


def make_simple(n=2, r=1, lam=3.0, lam1=2.0, lam2=2.0, sig1=1.0, sig2=1.0, mu=5.0, mu1=4.0):
    return SystemConfig(
        capacity_n=n,
        rt_cap_r=r,
        threshold_h=0,
        threshold_l=0,
        lambda_nrt=lam,
        mmpp=MmppParams(lam1, lam2, sig1, sig2),
        mu_rt=mu,
        mu_nrt=mu1,
        mechanism=Mechanism.SIMPLE,
    )


def make_combined(n=4, r=1, h=2, lam=3.0, lam1=2.0, lam2=2.0, sig1=1.0, sig2=1.0, mu=5.0, mu1=4.0):
    return SystemConfig(
        capacity_n=n,
        rt_cap_r=r,
        threshold_h=h,
        threshold_l=n - r,
        lambda_nrt=lam,
        mmpp=MmppParams(lam1, lam2, sig1, sig2),
        mu_rt=mu,
        mu_nrt=mu1,
        mechanism=Mechanism.COMBINED,
    )


def fig3_base(mechanism: Mechanism) -> SystemConfig:
    return SystemConfig(
        capacity_n=60,
        rt_cap_r=15,
        threshold_h=25,
        threshold_l=45,
        lambda_nrt=20.0,
        mmpp=MmppParams(8.0, 5.0, 1.0, 1.0),
        mu_rt=30.0,
        mu_nrt=20.0,
        mechanism=mechanism,
    )


def dense_stationary(gen: GeneratorMatrix) -> np.ndarray:
    """Oracle: solve pi Q = 0 with one equation replaced by sum(pi) = 1."""
    q = gen.dense()
    a = q.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(gen.dimension)
    b[-1] = 1.0
    return np.linalg.solve(a, b)


def random_config(rng: np.random.Generator, mechanism: Mechanism, max_states=200) -> SystemConfig:
    """Random valid config with a bounded state space."""
    while True:
        n = int(rng.integers(3, 10))
        r = int(rng.integers(1, n))
        if mechanism is Mechanism.COMBINED:
            l = n - r
            if l - r < 2:
                continue
            h = int(rng.integers(r + 1, l))
        else:
            h, l = 0, 0
        if 2 * (r + 1) * (n + 1) > max_states:
            continue
        rates = rng.uniform(0.2, 9.0, size=7)
        return SystemConfig(
            capacity_n=n,
            rt_cap_r=r,
            threshold_h=h,
            threshold_l=l,
            lambda_nrt=float(rates[0]),
            mmpp=MmppParams(float(rates[1]), float(rates[2]), float(rates[3]), float(rates[4])),
            mu_rt=float(rates[5]),
            mu_nrt=float(rates[6]),
            mechanism=mechanism,
        )


@pytest.fixture
def tiny_simple():
    return make_simple()


@pytest.fixture
def tiny_combined():
    return make_combined()
