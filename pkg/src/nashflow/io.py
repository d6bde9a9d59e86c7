"""Game files, profile files, result documents and trace tables.

Game files are JSON documents::

    {
      "format_version": 1,
      "players": 2,
      "strategies": [2, 2],
      "labels": [["H", "T"], ["H", "T"]],      (optional)
      "payoffs": [[...], [...]]               (one flat list per player)
    }

Each payoff list is flattened with player 1's strategy index outermost and
player N's innermost.
"""

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .game import GameTensor, block_slices

__all__ = [
    "GameFileError",
    "FORMAT_VERSION",
    "parse_game",
    "load_game",
    "dump_game",
    "bundled_game",
    "parse_profile",
    "load_profile",
    "result_document",
    "dump_document",
    "trace_table",
    "write_traces",
    "read_trace",
]

FORMAT_VERSION = 1
FLOAT_FORMAT = ".17g"


class GameFileError(ValueError):
    """Malformed game or profile document."""


def _finite_number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise GameFileError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise GameFileError(f"{where}: payoff must be finite, got {value!r}")
    return float(value)


def _positive_int(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise GameFileError(f"{where}: expected a positive integer, got {value!r}")
    return value


def parse_game(document):
    """Build a ``GameTensor`` from JSON text or an already-decoded mapping."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GameFileError(f"malformed game document: {exc}") from exc
    if not isinstance(document, dict):
        raise GameFileError("game document must be a JSON object")
    version = document.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise GameFileError(f"format_version: unsupported version {version!r}")
    for key in ("players", "strategies", "payoffs"):
        if key not in document:
            raise GameFileError(f"{key}: missing field")
    players = _positive_int(document["players"], "players")
    strategies = document["strategies"]
    if not isinstance(strategies, list) or len(strategies) != players:
        raise GameFileError(f"strategies: expected a list of {players} counts")
    counts = [_positive_int(c, f"strategies[{i}]") for i, c in enumerate(strategies)]
    n_profiles = math.prod(counts)
    payoffs = document["payoffs"]
    if not isinstance(payoffs, list) or len(payoffs) != players:
        raise GameFileError(f"payoffs: expected {players} lists, one per player")
    table = np.empty((players, n_profiles))
    for i, row in enumerate(payoffs):
        if not isinstance(row, list) or len(row) != n_profiles:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise GameFileError(f"payoffs[{i}]: expected {n_profiles} entries, got {got}")
        for s, value in enumerate(row):
            table[i, s] = _finite_number(value, f"payoffs[{i}][{s}]")
    labels = document.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or [len(b) for b in labels] != counts:
            raise GameFileError("labels: must give one name per strategy of every player")
    return GameTensor(tuple(counts), table, labels)


def load_game(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFileError(f"cannot read game file {path}: {exc.strerror}") from exc
    return parse_game(text)


def bundled_game(name="rps3"):
    """Load a game shipped with the package (``rps3``: three-player rock-paper-scissors)."""
    text = resources.files("nashflow").joinpath("data", f"{name}.json").read_text()
    return parse_game(text)


def _number(v):
    v = float(v)
    return int(v) if v.is_integer() else v


def dump_game(game):
    doc = {
        "format_version": FORMAT_VERSION,
        "players": game.num_players,
        "strategies": list(game.strategy_counts),
    }
    if game.labels is not None:
        doc["labels"] = [list(b) for b in game.labels]
    doc["payoffs"] = [[_number(v) for v in row] for row in game.payoffs]
    return json.dumps(doc, indent=2) + "\n"


def parse_profile(document, game):
    """Read a candidate profile: ``{"strategies": [[...], ...]}``, ``{"profile": [...]}`` or a bare list."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise GameFileError(f"malformed profile document: {exc}") from exc
    if isinstance(document, dict):
        if "strategies" in document:
            document = document["strategies"]
        elif "profile" in document:
            document = document["profile"]
        else:
            raise GameFileError("profile document needs a 'strategies' or 'profile' field")
    if not isinstance(document, list):
        raise GameFileError("profile must be a list")
    if document and all(isinstance(b, list) for b in document):
        if [len(b) for b in document] != list(game.strategy_counts):
            raise GameFileError(
                f"strategies: block sizes {[len(b) for b in document]} "
                f"do not match the game's {list(game.strategy_counts)}"
            )
        flat = [v for b in document for v in b]
    else:
        flat = document
    if len(flat) != game.num_strategies:
        raise GameFileError(f"profile: expected {game.num_strategies} entries, got {len(flat)}")
    return np.array([_finite_number(v, f"profile[{k}]") for k, v in enumerate(flat)])


def load_profile(path, game):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise GameFileError(f"cannot read profile file {path}: {exc.strerror}") from exc
    return parse_profile(text, game)


def result_document(game, result, seed=None, settings=None):
    """Plain-data summary of a swarm run."""
    cert = result.certificate
    doc = {
        "format_version": FORMAT_VERSION,
        "seed": seed,
        "iterations": result.n_iter,
        "faults": result.n_faults,
        "unconverged_runs": result.n_unconverged,
        "history": [float(v) for v in result.history],
        "certificate": cert.to_dict(game),
    }
    if settings is not None:
        doc["settings"] = settings
    return doc


def dump_document(doc):
    # json writes floats with repr, which round-trips and is deterministic
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def trace_header(m):
    return ["time"] + [f"x_{k}" for k in range(1, m + 1)] + ["Q", "G", "H", "zeta", "dxnorm"]


def trace_table(traces, step_size):
    """Stack successive flow traces of one particle on a single time axis.

    Each later run starts one step after the previous run ended.
    """
    parts = []
    offset = 0.0
    for i, trace in enumerate(traces):
        rows = trace.samples.copy()
        if i > 0:
            offset += step_size
        rows[:, 0] += offset
        offset = rows[-1, 0]
        parts.append(rows)
    return np.vstack(parts) if parts else np.empty((0, 0))


def _format_rows(rows):
    return "\n".join(",".join(format(v, FLOAT_FORMAT) for v in row) for row in rows)


def write_trace(path, table, m, stride, step_size):
    lines = [
        f"# stride={stride} step_size={step_size!r} float_format={FLOAT_FORMAT}",
        ",".join(trace_header(m)),
    ]
    body = _format_rows(table)
    Path(path).write_text("\n".join(lines) + "\n" + (body + "\n" if body else ""))


def write_traces(directory, particle_traces, m, stride, step_size):
    """One CSV per particle, ``particle_00.csv`` and so on. Returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, traces in enumerate(particle_traces):
        path = directory / f"particle_{i:02d}.csv"
        write_trace(path, trace_table(traces, step_size), m, stride, step_size)
        paths.append(path)
    return paths


def read_trace(path):
    """Load a trace CSV as ``(header, rows)``."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    header = lines[0].strip().split(",")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, rows.reshape(-1, len(header))


def profile_blocks(game, x):
    return [np.asarray(x)[s].tolist() for s in block_slices(game.strategy_counts)]
