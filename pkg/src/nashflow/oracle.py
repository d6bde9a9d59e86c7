"""Independent equilibrium checks and brute-force ground truth for small games."""

from dataclasses import dataclass
import itertools
import logging

import numpy as np

from .constraints import ConstraintGeometry, box_violation, equality_residual
from .game import block_slices, regret_report

__all__ = [
    "EquilibriumCertificate",
    "OracleSizeError",
    "certify",
    "enumerate_pure_ne",
    "two_player_support_enumeration",
    "simplex_grid",
    "grid_regret_scan",
]

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10_000_000


class OracleSizeError(ValueError):
    """The requested enumeration exceeds the size guard."""


@dataclass(frozen=True)
class EquilibriumCertificate:
    profile: np.ndarray
    objective: float
    max_regret: np.ndarray
    box_violation: float
    equality_violation: float
    verdict: bool
    tol_regret: float = 1e-6
    tol_feas: float = 1e-8

    def to_dict(self, game=None):
        blocks = self.profile.tolist()
        if game is not None:
            blocks = [self.profile[s].tolist() for s in block_slices(game.strategy_counts)]
        return {
            "verdict": bool(self.verdict),
            "objective": float(self.objective),
            "max_regret": [float(v) for v in self.max_regret],
            "box_violation": float(self.box_violation),
            "equality_violation": float(self.equality_violation),
            "tol_regret": self.tol_regret,
            "tol_feas": self.tol_feas,
            "strategies": blocks,
        }


def certify(game, x, tol_regret=1e-6, tol_feas=1e-8):
    """Check whether ``x`` is a Nash equilibrium to the given tolerances.

    Everything is recomputed from the payoff tables; nothing from a solver run
    is reused.
    """
    x = np.array(x, dtype=float)
    report = regret_report(game, x)
    geometry = ConstraintGeometry.from_game(game)
    G = box_violation(x)
    H = equality_residual(x, geometry)[1]
    max_regret = np.array([report.z[s].max() for s in geometry.slices])
    verdict = bool(G <= tol_feas and H <= tol_feas and max_regret.max() <= tol_regret)
    return EquilibriumCertificate(
        profile=x,
        objective=report.objective,
        max_regret=max_regret,
        box_violation=G,
        equality_violation=H,
        verdict=verdict,
        tol_regret=tol_regret,
        tol_feas=tol_feas,
    )


def _guard(size, what):
    if size > ENUMERATION_LIMIT:
        raise OracleSizeError(f"{what} has {size} points, above the limit of {ENUMERATION_LIMIT}")


def enumerate_pure_ne(game):
    """All pure profiles (as strategy-index tuples) with no strictly improving pure deviation."""
    counts = game.strategy_counts
    _guard(game.num_profiles, "pure profile space")
    tensors = [game.payoff_tensor(i) for i in range(game.num_players)]
    # best reply value of each player against every opponent profile
    best = [t.max(axis=i, keepdims=True) for i, t in enumerate(tensors)]
    found = []
    for s in itertools.product(*(range(c) for c in counts)):
        if all(tensors[i][s] >= best[i][s[:i] + (0,) + s[i + 1:]] for i in range(len(counts))):
            found.append(s)
    return found


def _indifference(matrix, rows, cols):
    """Mixture over ``cols`` making every strategy in ``rows`` earn the same value.

    Returns ``(mix, value)`` or None when the system is singular.
    """
    k = len(rows)
    system = np.zeros((k + 1, k + 1))
    system[:k, :k] = matrix[np.ix_(rows, cols)]
    system[:k, k] = -1.0
    system[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    if np.linalg.cond(system) > 1e12:
        return None
    sol = np.linalg.solve(system, rhs)
    return sol[:k], sol[k]


def two_player_support_enumeration(game, atol=1e-9):
    """All equilibria of a nondegenerate bimatrix game found by equal-size support pairs.

    Singular indifference systems are skipped (and counted in the log), so in
    degenerate games the result holds only the equilibria with well-posed
    supports.
    """
    if game.num_players != 2:
        raise ValueError(f"support enumeration needs a 2-player game, got {game.num_players}")
    m1, m2 = game.strategy_counts
    if max(m1, m2) > 5:
        raise OracleSizeError(f"support enumeration is limited to 5 strategies, got {m1}x{m2}")
    A = game.payoff_tensor(0)
    B = game.payoff_tensor(1)
    found = []
    skipped = 0
    for k in range(1, min(m1, m2) + 1):
        for I in itertools.combinations(range(m1), k):
            for J in itertools.combinations(range(m2), k):
                col = _indifference(A, list(I), list(J))
                row = _indifference(B.T, list(J), list(I))
                if col is None or row is None:
                    skipped += 1
                    continue
                (y_s, v1), (x_s, v2) = col, row
                if x_s.min() < -atol or y_s.min() < -atol:
                    continue
                x = np.zeros(m1)
                y = np.zeros(m2)
                x[list(I)] = np.clip(x_s, 0.0, None)
                y[list(J)] = np.clip(y_s, 0.0, None)
                x /= x.sum()
                y /= y.sum()
                if (A @ y).max() > v1 + atol or (x @ B).max() > v2 + atol:
                    continue
                if any(
                    np.abs(x - a).max() <= atol and np.abs(y - b).max() <= atol for a, b in found
                ):
                    continue
                found.append((x, y))
    if skipped:
        logger.info("support enumeration skipped %d degenerate support pairs", skipped)
    return found


def simplex_grid(m, resolution):
    """Points of the (m-1)-simplex whose coordinates are multiples of ``1/resolution``."""
    points = []
    for cuts in itertools.combinations(range(resolution + m - 1), m - 1):
        bounds = (-1,) + cuts + (resolution + m - 1,)
        points.append([(b - a - 1) / resolution for a, b in zip(bounds[:-1], bounds[1:])])
    return np.array(points)


def grid_regret_scan(game, resolution):
    """Minimum of the squared-regret objective over a product of simplex grids.

    Ties keep the first point in lexicographic grid order. Returns
    ``(objective, profile)``.
    """
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    grids = [simplex_grid(m, resolution) for m in game.strategy_counts]
    _guard(int(np.prod([len(g) for g in grids], dtype=float)), "grid")
    best_value, best_point = np.inf, None
    for combo in itertools.product(*grids):
        x = np.concatenate(combo)
        value = regret_report(game, x).objective
        if value < best_value:
            best_value, best_point = value, x
    return best_value, best_point
