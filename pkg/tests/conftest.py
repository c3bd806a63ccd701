import numpy as np
import pytest

from sipdyn.model import Parameters

# reference parameter set used throughout (weak Allee, aggregation 0.5)
BASELINE = dict(a0=3, a1=0.4, a2=0.8, d0=0.4, d1=0.7, d2=0.3, d3=0.4, e0=0.9, K=4, L=-0.5, r=0.5)

# strong-growth set with small carrying capacity used for the finite-time
# extinction scenarios
EXTINCTION = dict(a0=3, a1=0.5, a2=0.35, d0=0.4, d1=0.6, d2=0.1, d3=0.5, e0=0.92, K=1.8, L=0.1, r=0.5)


@pytest.fixture
def base() -> Parameters:
    return Parameters(**BASELINE)


@pytest.fixture
def extinction_params() -> Parameters:
    return Parameters(**EXTINCTION)


def random_params(rng: np.random.Generator, bounded: bool = False) -> Parameters:
    """Random draw over a biologically sensible box.

    With bounded=True the conversion rates are dominated by the attack
    rates (d0 >= d2, d1 >= d3) and the Allee threshold is kept in the range
    where the total-population envelope bound applies with margin.
    """
    K = rng.uniform(1.5, 5.0)
    d2 = rng.uniform(0.05, 0.5)
    d3 = rng.uniform(0.05, 0.5)
    if bounded:
        d0 = d2 * (1.0 + rng.uniform(0.0, 2.0))
        d1 = d3 * (1.0 + rng.uniform(0.0, 2.0))
        L = rng.uniform(-0.25 * K, 0.75 * K)
    else:
        d0 = rng.uniform(0.05, 0.8)
        d1 = rng.uniform(0.05, 0.8)
        L = rng.uniform(-0.9 * K, 0.9 * K)
    return Parameters(
        a0=rng.uniform(0.5, 4.0),
        a1=rng.uniform(0.2, 1.0),
        a2=rng.uniform(0.2, 1.0),
        d0=d0,
        d1=d1,
        d2=d2,
        d3=d3,
        e0=rng.uniform(0.2, 1.2),
        K=K,
        L=L,
        r=rng.uniform(0.15, 0.85),
    )


def random_state(rng: np.random.Generator, K: float) -> tuple:
    return tuple(rng.uniform(0.05, K, size=3))
