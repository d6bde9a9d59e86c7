"""Finite N-player normal-form games: payoffs, regrets and the squared-regret objective.

Payoff tables are stored flat, row-major, with player 1's strategy index
outermost and player N's innermost, so profile ``(j_1, ..., j_N)`` lives at
``((j_1 * m_2 + j_2) * m_3 + ...)``.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GameTensor",
    "RegretReport",
    "expected_payoff",
    "partial_expected_payoff",
    "pure_strategy_payoffs",
    "regret_report",
    "objective",
    "objective_gradient",
    "block_slices",
    "split_profile",
    "uniform_profile",
]


@dataclass(frozen=True, eq=False)
class GameTensor:
    """Immutable payoff data for an N-player normal-form game.

    Parameters
    ----------
    strategy_counts : sequence of int
        Number of pure strategies per player.
    payoffs : array_like, shape (N, prod(strategy_counts))
        Flat payoff table for each player.
    labels : sequence of sequence of str, optional
        Strategy names per player.
    """

    strategy_counts: tuple
    payoffs: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        counts = tuple(int(c) for c in self.strategy_counts)
        if len(counts) < 1:
            raise ValueError("a game needs at least one player")
        if any(c < 1 for c in counts):
            raise ValueError(f"every player needs at least one strategy, got {counts}")
        n_profiles = int(np.prod(counts))
        payoffs = np.array(self.payoffs, dtype=float)
        if payoffs.ndim == 1 and len(counts) == 1:
            payoffs = payoffs[None, :]
        if payoffs.shape != (len(counts), n_profiles):
            raise ValueError(
                f"payoffs must have shape ({len(counts)}, {n_profiles}), got {payoffs.shape}"
            )
        if not np.all(np.isfinite(payoffs)):
            bad = np.argwhere(~np.isfinite(payoffs))[0]
            raise ValueError(f"non-finite payoff for player {bad[0]} at profile {bad[1]}")
        payoffs.setflags(write=False)
        labels = self.labels
        if labels is not None:
            labels = tuple(tuple(str(s) for s in block) for block in labels)
            if tuple(len(b) for b in labels) != counts:
                raise ValueError("labels must match strategy_counts")
        object.__setattr__(self, "strategy_counts", counts)
        object.__setattr__(self, "payoffs", payoffs)
        object.__setattr__(self, "labels", labels)

    @property
    def num_players(self):
        return len(self.strategy_counts)

    @property
    def num_strategies(self):
        """Total length m of a concatenated mixed profile."""
        return sum(self.strategy_counts)

    @property
    def num_profiles(self):
        return self.payoffs.shape[1]

    def payoff_tensor(self, player):
        """Payoffs of ``player`` reshaped to an array indexed by pure strategies."""
        return self.payoffs[player].reshape(self.strategy_counts)

    def flat_index(self, profile):
        """Flat table index of a pure profile given as strategy indices."""
        return int(np.ravel_multi_index(tuple(profile), self.strategy_counts))

    def pure_payoff(self, player, profile):
        return float(self.payoffs[player, self.flat_index(profile)])

    def __eq__(self, other):
        if not isinstance(other, GameTensor):
            return NotImplemented
        return (
            self.strategy_counts == other.strategy_counts
            and self.labels == other.labels
            and np.array_equal(self.payoffs, other.payoffs)
        )

    __hash__ = None


@dataclass(frozen=True)
class RegretReport:
    """Per-strategy regrets ``z``, clamped regrets ``q`` and ``objective = sum(q**2)``."""

    z: np.ndarray
    q: np.ndarray
    objective: float


def block_slices(strategy_counts):
    offsets = np.concatenate([[0], np.cumsum(strategy_counts)])
    return [slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]


def split_profile(game, x):
    return [x[s] for s in block_slices(game.strategy_counts)]


def uniform_profile(strategy_counts):
    return np.concatenate([np.full(c, 1.0 / c) for c in strategy_counts])


def _check_profile(game, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != game.num_strategies:
        raise ValueError(
            f"profile must be a vector of length {game.num_strategies}, got shape {x.shape}"
        )
    return x


def _check_player(game, player):
    if not 0 <= player < game.num_players:
        raise IndexError(f"player index {player} out of range for {game.num_players} players")


def _contract_except(tensor, blocks, keep):
    """Contract ``tensor`` with every block whose axis is not in ``keep``.

    Remaining axes keep their original relative order.
    """
    out = tensor
    # contract from the last axis so earlier axis numbers stay valid
    for axis in reversed(range(len(blocks))):
        if axis in keep:
            continue
        out = np.tensordot(out, blocks[axis], axes=([axis], [0]))
    return out


def pure_strategy_payoffs(game, player, x):
    """Vector of ``u^i(s_j^i, x^{-i})`` over the pure strategies j of ``player``."""
    x = _check_profile(game, x)
    _check_player(game, player)
    blocks = split_profile(game, x)
    return _contract_except(game.payoff_tensor(player), blocks, {player})


def partial_expected_payoff(game, player, strategy, x):
    """Expected payoff to ``player`` for pure ``strategy`` against the others' mixture."""
    values = pure_strategy_payoffs(game, player, x)
    if not 0 <= strategy < game.strategy_counts[player]:
        raise IndexError(
            f"strategy {strategy} out of range for player {player} "
            f"with {game.strategy_counts[player]} strategies"
        )
    return float(values[strategy])


def expected_payoff(game, player, x):
    """Multilinear expected payoff of ``player``; ``x`` need not be feasible."""
    x = _check_profile(game, x)
    blocks = split_profile(game, x)
    return float(blocks[player] @ pure_strategy_payoffs(game, player, x))


def regret_report(game, x):
    x = _check_profile(game, x)
    blocks = split_profile(game, x)
    z = []
    for i in range(game.num_players):
        values = pure_strategy_payoffs(game, i, x)
        z.append(values - blocks[i] @ values)
    z = np.concatenate(z)
    q = np.maximum(z, 0.0)
    return RegretReport(z=z, q=q, objective=float(q @ q))


def objective(game, x):
    return regret_report(game, x).objective


def objective_gradient(game, x):
    """Analytic gradient of the squared-regret objective.

    Uses ``d z_j^i / d x_k^i = -u^i(s_k^i, x^{-i})`` within a player's own block
    and the bilinear cross partials of the payoff tensor for other blocks.
    """
    x = _check_profile(game, x)
    counts = game.strategy_counts
    slices = block_slices(counts)
    blocks = split_profile(game, x)
    report = regret_report(game, x)
    grad = np.zeros_like(x)
    for i in range(game.num_players):
        q2 = 2.0 * report.q[slices[i]]
        total = q2.sum()
        if total == 0.0:
            continue
        values = pure_strategy_payoffs(game, i, x)
        grad[slices[i]] -= total * values
        # sum_l (2 q_il - x_il * total) * d u^i(s_l, x^{-i}) / d x^r
        weights = q2 - blocks[i] * total
        tensor = game.payoff_tensor(i)
        for r in range(game.num_players):
            if r == i:
                continue
            cross = _contract_except(tensor, blocks, {i, r})
            # remaining axes are (i, r) in ascending order
            if i < r:
                grad[slices[r]] += weights @ cross
            else:
                grad[slices[r]] += cross @ weights
    return grad
