import itertools

import numpy as np
import pytest

from nashflow import GameTensor, bundled_game


def brute_force_payoff(game, player, x):
    """Expected payoff by explicit summation over pure profiles (independent of the library)."""
    counts = game.strategy_counts
    offsets = np.concatenate([[0], np.cumsum(counts)])
    total = 0.0
    for flat, s in enumerate(itertools.product(*(range(c) for c in counts))):
        weight = 1.0
        for r, j in enumerate(s):
            weight *= x[offsets[r] + j]
        total += game.payoffs[player, flat] * weight
    return total


def brute_force_regrets(game, x):
    counts = game.strategy_counts
    offsets = np.concatenate([[0], np.cumsum(counts)])
    z = []
    for i, m in enumerate(counts):
        base = brute_force_payoff(game, i, x)
        for j in range(m):
            y = np.array(x, dtype=float)
            y[offsets[i]:offsets[i + 1]] = 0.0
            y[offsets[i] + j] = 1.0
            z.append(brute_force_payoff(game, i, y) - base)
    return np.array(z)


def random_game(rng, counts, low=-1.0, high=1.0):
    counts = tuple(counts)
    return GameTensor(counts, rng.uniform(low, high, (len(counts), int(np.prod(counts)))))


def bimatrix(A, B):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    return GameTensor(A.shape, np.stack([A.ravel(), B.ravel()]))


@pytest.fixture(scope="session")
def rps():
    return bundled_game("rps3")


@pytest.fixture
def matching_pennies():
    A = [[1, -1], [-1, 1]]
    return bimatrix(A, -np.asarray(A))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
