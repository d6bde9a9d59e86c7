"""Input coercion for the estimator-style API."""

from collections.abc import Mapping

import numpy as np

from .game import GameTensor

__all__ = ["check_game", "check_profile"]


def check_game(game):
    """Coerce ``game`` into a ``GameTensor``.

    Accepts a ``GameTensor``, a decoded game document (mapping with
    ``strategies`` and ``payoffs``) or a sequence of per-player payoff arrays
    that all share the shape ``(m_1, ..., m_N)``.
    """
    if isinstance(game, GameTensor):
        return game
    if isinstance(game, Mapping):
        from .io import parse_game

        return parse_game(dict(game))
    try:
        arrays = [np.asarray(a, dtype=float) for a in game]
    except TypeError:
        raise TypeError(f"cannot interpret {type(game).__name__} as a game") from None
    if not arrays:
        raise ValueError("a game needs at least one player")
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValueError(f"payoff arrays disagree in shape: {[a.shape for a in arrays]}")
    if len(shape) != len(arrays):
        raise ValueError(
            f"{len(arrays)} payoff arrays need {len(arrays)} axes each, got shape {shape}"
        )
    return GameTensor(shape, np.stack([a.ravel() for a in arrays]))


def check_profile(game, x):
    """Flatten a profile given as one vector or as per-player blocks, checking its length."""
    if isinstance(x, (list, tuple)) and x and all(np.ndim(b) == 1 for b in x):
        sizes = [len(b) for b in x]
        if sizes != list(game.strategy_counts):
            raise ValueError(f"block sizes {sizes} do not match {list(game.strategy_counts)}")
        x = np.concatenate([np.asarray(b, dtype=float) for b in x])
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != game.num_strategies:
        raise ValueError(f"profile must have {game.num_strategies} entries, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("profile contains non-finite values")
    return x
