import json

import numpy as np
import pytest

from nashflow import bundled_game, parse_game
from nashflow.cli import main
from nashflow.constraints import ConstraintGeometry, box_violation, equality_residual
from nashflow.game import objective
from nashflow.io import (
    GameFileError,
    dump_game,
    parse_profile,
    read_trace,
    trace_header,
)



def close(stored, recomputed, tol=1e-9):
    # far outside the simplex Q reaches 1e7, where 1e-9 absolute is below one ulp
    return abs(stored - recomputed) <= tol * max(1.0, abs(recomputed))


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("files")
    rps = d / "rps3.json"
    rps.write_text(dump_game(bundled_game("rps3")))
    mp = d / "mp.json"
    mp.write_text(json.dumps({
        "format_version": 1, "players": 2, "strategies": [2, 2],
        "payoffs": [[1, -1, -1, 1], [-1, 1, 1, -1]],
    }))
    uniform = d / "uniform.json"
    uniform.write_text(json.dumps({"strategies": [[1 / 3] * 3] * 3}))
    rock = d / "rock.json"
    rock.write_text(json.dumps({"strategies": [[1, 0, 0]] * 3}))
    short = d / "short.json"
    short.write_text(json.dumps({"profile": [0.5] * 8}))
    return {"dir": d, "rps": str(rps), "mp": str(mp), "uniform": str(uniform),
            "rock": str(rock), "short": str(short)}


def _doc(capsys):
    return json.loads(capsys.readouterr().out)


# ---- parsing ----------------------------------------------------------------

def test_bundled_rps_entries(rps):
    assert rps.num_players == 3 and rps.strategy_counts == (3, 3, 3)
    R, P = 0, 1
    assert rps.pure_payoff(0, (R, P, R)) == -1
    assert [rps.pure_payoff(i, (P, R, R)) for i in range(3)] == [2, -1, -1]
    assert rps.labels == (("R", "P", "S"),) * 3


def test_minimal_one_player_game():
    game = parse_game('{"format_version": 1, "players": 1, "strategies": [1], "payoffs": [[0]]}')
    assert game.num_players == 1 and game.num_strategies == 1


def test_length_mismatch_names_field():
    doc = {"players": 3, "strategies": [3, 3, 3], "payoffs": [[0] * 27, [0] * 26, [0] * 27]}
    with pytest.raises(GameFileError, match=r"payoffs\[1\].*27.*26"):
        parse_game(doc)


@pytest.mark.parametrize("doc, pattern", [
    ("{not json", "malformed"),
    ({"players": 2, "strategies": [2, 2]}, "payoffs"),
    ({"players": 2, "strategies": [2, 0], "payoffs": [[0] * 2] * 2}, r"strategies\[1\]"),
    ({"players": 1, "strategies": [2], "payoffs": [[0, "x"]]}, r"payoffs\[0\]\[1\]"),
    ({"players": 1, "strategies": [2], "payoffs": [[0, float("inf")]]}, "finite"),
    ({"format_version": 2, "players": 1, "strategies": [1], "payoffs": [[0]]}, "format_version"),
])
def test_parse_errors(doc, pattern):
    with pytest.raises(GameFileError, match=pattern):
        parse_game(doc)


def test_round_trip(rps, rng):
    assert parse_game(dump_game(rps)) == rps
    from conftest import random_game

    game = random_game(rng, (2, 3))
    assert parse_game(dump_game(game)) == game


def test_profile_formats(rps):
    flat = [1 / 3] * 9
    for doc in [{"strategies": [[1 / 3] * 3] * 3}, {"profile": flat}, flat]:
        np.testing.assert_array_equal(parse_profile(json.dumps(doc), rps), flat)
    with pytest.raises(GameFileError):
        parse_profile({"strategies": [[0.5, 0.5]] * 3}, rps)


# ---- commands ---------------------------------------------------------------

def test_solve_rps_seed_42(files, tmp_path, capsys):
    out = tmp_path / "result.json"
    status = main(["solve", files["rps"], "--seed", "42", "--result", str(out)])
    assert status == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 42
    assert doc["certificate"]["verdict"] is True
    np.testing.assert_allclose(doc["certificate"]["strategies"], np.full((3, 3), 1 / 3), atol=1e-3)
    assert doc["iterations"] == len(doc["history"])
    assert doc["faults"] == 0


def test_solve_missing_file(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.json"), "--seed", "1"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_solve_requires_seed(files):
    with pytest.raises(SystemExit) as info:
        main(["solve", files["rps"]])
    assert info.value.code == 2


def test_solve_zero_budget(files, capsys):
    assert main(["solve", files["rps"], "--seed", "1", "--max-iter", "0"]) == 1
    assert _doc(capsys)["history"] == []


def test_verify_commands(files, capsys):
    assert main(["verify", files["rps"], files["uniform"]]) == 0
    assert _doc(capsys)["certificate"]["verdict"] is True
    assert main(["verify", files["rps"], files["rock"]]) == 1
    assert _doc(capsys)["certificate"]["max_regret"][0] == 2.0
    assert main(["verify", files["rps"], files["short"]]) == 2


def test_oracle_commands(files, capsys):
    assert main(["oracle", files["rps"], "--mode", "pure"]) == 1
    captured = capsys.readouterr()
    assert "no pure NE" in captured.err
    assert json.loads(captured.out)["equilibria"] == []

    assert main(["oracle", files["mp"], "--mode", "support2"]) == 0
    (eq,) = _doc(capsys)["equilibria"]
    np.testing.assert_allclose(eq["strategies"], [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)

    assert main(["oracle", files["rps"], "--mode", "grid", "--resolution", "3"]) == 0
    doc = _doc(capsys)
    assert doc["objective"] == pytest.approx(0.0, abs=1e-28)
    np.testing.assert_allclose(doc["strategies"], np.full((3, 3), 1 / 3), atol=1e-15)

    # support enumeration on a 3-player game is an input error
    assert main(["oracle", files["rps"], "--mode", "support2"]) == 2


def test_bad_usage_exits_2(files):
    for argv in [[], ["frobnicate"], ["oracle", files["rps"], "--mode", "nope"]]:
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2


def test_ana_command_and_trace_recompute(files, tmp_path, capsys, rps):
    trace = tmp_path / "ana.csv"
    assert main(["ana", files["rps"], "--seed", "7", "--trace", str(trace),
                 "--trace-stride", "20"]) == 0
    doc = _doc(capsys)
    assert doc["converged"] and doc["entry_time"] is not None
    first = trace.read_text().splitlines()[0]
    assert first.startswith("# stride=20") and "float_format=.17g" in first
    header, rows = read_trace(trace)
    assert header == trace_header(9)
    geo = ConstraintGeometry.from_game(rps)
    for row in rows:
        x = row[1:10]
        assert close(row[10], objective(rps, x))
        assert close(row[11], box_violation(x))
        assert close(row[12], equality_residual(x, geo)[1])


def test_solve_traces_recompute(files, tmp_path, capsys, rps):
    tdir = tmp_path / "traces"
    status = main(["solve", files["rps"], "--seed", "3", "--swarm-size", "2",
                   "--trace-dir", str(tdir), "--result", str(tmp_path / "r.json")])
    assert status == 0
    paths = sorted(tdir.glob("particle_*.csv"))
    assert [p.name for p in paths] == ["particle_00.csv", "particle_01.csv"]
    for path in paths:
        _, rows = read_trace(path)
        assert np.all(np.diff(rows[:, 0]) > 0)
        for row in rows:
            assert close(row[10], objective(rps, row[1:10]))
