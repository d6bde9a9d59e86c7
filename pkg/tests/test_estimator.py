import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from nashflow import NashSolver
from nashflow.io import dump_game
from nashflow.validation import check_game, check_profile


def test_params_round_trip():
    solver = NashSolver(swarm_size=4, random_state=3)
    params = solver.get_params()
    assert params["swarm_size"] == 4 and params["random_state"] == 3
    twin = clone(solver)
    assert twin.get_params() == params
    solver.set_params(c1=1.5)
    assert solver.c1 == 1.5


def test_fit_on_rps(rps):
    solver = NashSolver(random_state=42).fit(rps)
    assert solver.is_equilibrium_
    for block in solver.predict():
        np.testing.assert_allclose(block, 1 / 3, atol=1e-3)
    assert solver.score(rps) == -solver.objective_
    assert solver.n_iter_ == len(solver.history_)
    assert np.max(solver.regrets()) <= 1e-6


def test_fit_accepts_payoff_arrays(matching_pennies):
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    solver = NashSolver(random_state=0, swarm_size=3).fit([A, -A])
    assert solver.game_ == matching_pennies
    np.testing.assert_allclose(solver.profile_, 0.5, atol=1e-4)


def test_unfitted_raises():
    with pytest.raises(NotFittedError):
        NashSolver().predict()


def test_predict_rejects_other_game(rps, matching_pennies):
    solver = NashSolver(random_state=0, swarm_size=2).fit(matching_pennies)
    with pytest.raises(ValueError):
        solver.predict(rps)


def test_validation_helpers(rps):
    import json

    assert check_game(json.loads(dump_game(rps))) == rps
    with pytest.raises(ValueError):
        check_game([np.zeros((2, 2)), np.zeros((2, 3))])
    with pytest.raises(ValueError):
        check_game([np.zeros((2, 2))])
    with pytest.raises(TypeError):
        check_game(5)
    np.testing.assert_array_equal(check_profile(rps, [[1, 0, 0]] * 3), np.tile([1, 0, 0], 3))
    with pytest.raises(ValueError):
        check_profile(rps, np.zeros(8))
