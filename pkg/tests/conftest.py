import numpy as np
import pytest

from netgames import make_lq_game, make_network


def random_lq_game(rng, n_max=20, n_min=2, symmetric=False, gamma_range=(0.2, 0.8)):
    """Random LQ game with moderate coupling and action boxes containing 0.

    Entry scale 1.2/n keeps the gradient bound and smoothness constant
    small so certified gradient steps stay usable.
    """
    n = int(rng.integers(n_min, n_max + 1))
    mat = rng.uniform(-1.0, 1.0, size=(n, n)) * (1.2 / n)
    if symmetric:
        mat = np.triu(mat, 1)
        mat = mat + mat.T
    np.fill_diagonal(mat, 0.0)
    lo = -(0.4 + 0.6 * rng.random(n))
    hi = 0.4 + 0.6 * rng.random(n)
    beta = rng.uniform(-0.4, 0.4, size=n)
    gamma = float(rng.choice([-1.0, 1.0]) * rng.uniform(*gamma_range))
    return make_lq_game(make_network(mat), beta=beta, gamma=gamma,
                        bounds=np.column_stack([lo, hi]))


def random_assumption3_game(rng, n_max=20, n_min=2):
    """Random game satisfying the contraction assumption, nonzero biases."""
    n = int(rng.integers(n_min, n_max + 1))
    mask = rng.random((n, n)) < 0.6
    mat = rng.uniform(-1.0, 1.0, size=(n, n)) * mask / n
    np.fill_diagonal(mat, 0.0)
    gamma = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.45))
    slack = 1.0 - 2.0 * abs(gamma)
    beta = rng.uniform(0.1, 0.9, size=n) * slack * rng.choice([-1.0, 1.0], size=n)
    return make_lq_game(make_network(mat), beta=beta, gamma=gamma,
                        bounds=(-1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
