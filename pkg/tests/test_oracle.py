import itertools

import numpy as np
import pytest

from nashflow import GameTensor, certify, enumerate_pure_ne, grid_regret_scan
from nashflow import two_player_support_enumeration
from nashflow.game import objective, regret_report, uniform_profile
from nashflow.oracle import OracleSizeError, simplex_grid

from conftest import bimatrix, brute_force_regrets, random_game


def test_certify_rps_uniform(rps):
    cert = certify(rps, uniform_profile((3, 3, 3)))
    assert cert.verdict
    np.testing.assert_allclose(cert.max_regret, 0.0, atol=1e-15)
    np.testing.assert_allclose(brute_force_regrets(rps, cert.profile), 0.0, atol=1e-15)


def test_certify_rps_all_rock(rps):
    x = np.tile([1.0, 0.0, 0.0], 3)
    cert = certify(rps, x)
    assert not cert.verdict
    assert cert.max_regret[0] == 2.0


def test_certify_rejects_infeasible_points(matching_pennies):
    cert = certify(matching_pennies, np.array([1.0, 1.0, 0.5, 0.5]))
    assert not cert.verdict
    assert cert.equality_violation == 1.0


def test_certificate_clamp_square_bound(rng):
    for _ in range(10):
        game = random_game(rng, (3, 2))
        x = np.concatenate([rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(2))])
        cert = certify(game, x)
        worst = max(0.0, cert.max_regret.max())
        assert cert.objective <= game.num_strategies * worst ** 2 + 1e-15


def test_rps_has_no_pure_equilibrium(rps):
    assert enumerate_pure_ne(rps) == []


def _pure_ne_by_definition(game):
    counts = game.strategy_counts
    found = []
    for s in itertools.product(*(range(c) for c in counts)):
        ok = True
        for i, m in enumerate(counts):
            for j in range(m):
                t = list(s)
                t[i] = j
                if game.pure_payoff(i, tuple(t)) > game.pure_payoff(i, s):
                    ok = False
        if ok:
            found.append(s)
    return found


def test_pure_enumeration_matches_definition(rng):
    for counts in [(2, 2), (3, 2, 2), (2, 2, 2, 2)]:
        for _ in range(5):
            game = GameTensor(counts, rng.integers(-2, 3, (len(counts), int(np.prod(counts)))))
            assert enumerate_pure_ne(game) == _pure_ne_by_definition(game)


def test_one_player_argmax():
    assert enumerate_pure_ne(GameTensor((2,), np.array([[1.0, 0.0]]))) == [(0,)]


def test_coordination_game_diagonals():
    game = bimatrix(np.eye(2), np.eye(2))
    assert enumerate_pure_ne(game) == [(0, 0), (1, 1)]


def test_support_enumeration_matching_pennies(matching_pennies):
    found = two_player_support_enumeration(matching_pennies)
    assert len(found) == 1
    x, y = found[0]
    np.testing.assert_allclose(x, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(y, [0.5, 0.5], atol=1e-12)


def test_support_enumeration_dominant_strategy_game():
    # prisoner's dilemma: defect strictly dominates
    A = np.array([[3, 0], [5, 1]])
    game = bimatrix(A, A.T)
    found = two_player_support_enumeration(game)
    assert len(found) == 1
    x, y = found[0]
    pure = enumerate_pure_ne(game)
    assert pure == [(1, 1)]
    np.testing.assert_array_equal(x, [0, 1])
    np.testing.assert_array_equal(y, [0, 1])


def test_support_enumeration_all_zero_game():
    game = bimatrix(np.zeros((2, 3)), np.zeros((2, 3)))
    found = two_player_support_enumeration(game)
    assert found
    for x, y in found:
        assert certify(game, np.concatenate([x, y])).verdict


def test_support_enumeration_results_certify(rng):
    for _ in range(10):
        game = random_game(rng, (3, 3))
        found = two_player_support_enumeration(game)
        assert found  # nondegenerate games have an odd number of equilibria
        assert len(found) % 2 == 1
        for x, y in found:
            profile = np.concatenate([x, y])
            assert objective(game, profile) <= 1e-12
            assert certify(game, profile).verdict


def test_support_enumeration_guards(rps):
    with pytest.raises(ValueError):
        two_player_support_enumeration(rps)
    big = bimatrix(np.zeros((6, 2)), np.zeros((6, 2)))
    with pytest.raises(OracleSizeError):
        two_player_support_enumeration(big)


def test_simplex_grid():
    grid = simplex_grid(3, 3)
    assert len(grid) == 10
    np.testing.assert_allclose(grid.sum(axis=1), 1.0)
    assert {tuple(np.round(p * 3).astype(int)) for p in grid} == {
        (a, b, 3 - a - b) for a in range(4) for b in range(4 - a)
    }


def test_grid_scan_finds_rps_equilibrium(rps):
    value, x = grid_regret_scan(rps, 3)
    assert value == pytest.approx(0.0, abs=1e-28)
    np.testing.assert_allclose(x, uniform_profile((3, 3, 3)), atol=1e-15)


def test_grid_resolution_one_scans_pure_profiles(rng):
    game = random_game(rng, (2, 3, 2))
    value, x = grid_regret_scan(game, 1)
    pure = [regret_report(game, np.concatenate([np.eye(m)[j] for m, j in zip((2, 3, 2), s)])).objective
            for s in itertools.product(range(2), range(3), range(2))]
    assert value == min(pure)
    assert set(np.unique(x)) <= {0.0, 1.0}
    assert value >= 0.0


def test_grid_guards(rps, monkeypatch):
    with pytest.raises(ValueError):
        grid_regret_scan(rps, 0)
    import nashflow.oracle as oracle_mod

    monkeypatch.setattr(oracle_mod, "ENUMERATION_LIMIT", 100)
    with pytest.raises(OracleSizeError):
        grid_regret_scan(rps, 3)
    with pytest.raises(OracleSizeError):
        enumerate_pure_ne(GameTensor((11, 10), np.zeros((2, 110))))
