"""Box and sum-to-one constraints of the mixed-strategy polytope, as penalties.

``G`` penalizes leaving the box ``[0, 1]^m`` and ``H`` is the norm of the
per-player sum residuals. Their sum ``epsilon`` drives the adaptive penalty
weight ``zeta``; ``gate`` switches objective descent off far outside the box.
"""

from dataclasses import dataclass

import numpy as np

from .game import block_slices

__all__ = [
    "ConstraintGeometry",
    "PenaltyState",
    "box_violation",
    "box_subgradient",
    "equality_residual",
    "equality_subgradient",
    "violation_signal",
    "gate",
    "zeta_rate",
    "project_to_simplex",
    "project_to_profiles",
]


@dataclass(frozen=True)
class ConstraintGeometry:
    """Block structure of ``h(x) = C x - d`` for a product of simplices."""

    strategy_counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "strategy_counts", tuple(int(c) for c in self.strategy_counts))

    @property
    def slices(self):
        return block_slices(self.strategy_counts)

    @property
    def block_matrix(self):
        """The block indicator matrix C, shape (N, m)."""
        C = np.zeros((len(self.strategy_counts), sum(self.strategy_counts)))
        for i, s in enumerate(self.slices):
            C[i, s] = 1.0
        return C

    @property
    def lambda_min(self):
        # C C^T = diag(m_i)
        return float(min(self.strategy_counts))

    @classmethod
    def from_game(cls, game):
        return cls(game.strategy_counts)


@dataclass
class PenaltyState:
    zeta: float = 0.0
    time: float = 0.0


def _blocks(x, geometry):
    if geometry is None:
        return [slice(0, len(x))]
    return geometry.slices


def box_violation(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(np.maximum(0.0, -x) + np.maximum(0.0, x - 1.0)))


def box_subgradient(x):
    """Entrywise selection from the subdifferential of the box penalty (0 at kinks)."""
    x = np.asarray(x, dtype=float)
    kappa = np.zeros_like(x)
    kappa[x < 0.0] = -1.0
    kappa[x > 1.0] = 1.0
    return kappa


def equality_residual(x, geometry=None):
    """Per-player residuals ``h`` (block sums minus one) and their norm ``H``.

    Without a geometry ``x`` is treated as a single block.
    """
    x = np.asarray(x, dtype=float)
    h = np.array([x[s].sum() - 1.0 for s in _blocks(x, geometry)])
    return h, float(np.linalg.norm(h))


def equality_subgradient(x, geometry=None):
    x = np.asarray(x, dtype=float)
    h, H = equality_residual(x, geometry)
    eta = np.zeros_like(x)
    if H == 0.0:
        return eta
    for hi, s in zip(h, _blocks(x, geometry)):
        eta[s] = hi / H
    return eta


def violation_signal(x, geometry=None):
    return box_violation(x) + equality_residual(x, geometry)[1]


def gate(g_value, nu=0.0):
    """Objective-descent switch: ``1 - nu`` while the box violation is at most 1, else 0."""
    if not 0.0 <= nu < 1.0:
        raise ValueError(f"nu must lie in [0, 1), got {nu}")
    if g_value < 0.0:
        raise ValueError(f"box violation must be nonnegative, got {g_value}")
    return 0.0 if g_value > 1.0 else 1.0 - nu


def zeta_rate(epsilon_value, tol=0.0):
    """Growth rate of the adaptive penalty weight: 1 while infeasible, else 0."""
    return 1 if epsilon_value > tol else 0


def project_to_simplex(v):
    """Euclidean projection of ``v`` onto the probability simplex."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    tau = css[rho] / (rho + 1)
    return np.maximum(v - tau, 0.0)


def project_to_profiles(x, geometry):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for s in geometry.slices:
        out[s] = project_to_simplex(x[s])
    return out
