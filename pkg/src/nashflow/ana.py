"""Adaptive neurodynamic flow on the squared-regret objective.

The flow descends the objective (gated off far outside the box) while an
adaptive penalty, whose weight ``zeta`` grows for as long as the state is
infeasible, drives the state into the product of simplices.

Time stepping is fixed-step. Away from the constraint set this is forward
Euler with the entrywise subgradient selections. When the proximal point of
the penalty lies inside the constraint set (the sliding regime on the
constraint boundary) that proximal point is taken instead, which keeps the
state exactly feasible rather than chattering around it.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import _kernels
from .constraints import (
    ConstraintGeometry,
    box_subgradient,
    box_violation,
    equality_residual,
    equality_subgradient,
    gate,
    zeta_rate,
)
from .game import objective_gradient, uniform_profile

__all__ = [
    "AnaSettings",
    "AnaState",
    "AnaTrace",
    "AnaResult",
    "IntegrationFault",
    "TRACE_COLUMNS",
    "rhs",
    "step",
    "run_to_critical",
]

logger = logging.getLogger(__name__)

_CHUNK = 200_000


class IntegrationFault(RuntimeError):
    """Raised when the flow produces non-finite values."""

    def __init__(self, message, state=None, trace=None):
        super().__init__(message)
        self.state = state
        self.trace = trace


@dataclass
class AnaSettings:
    step_size: float = 1e-3
    max_steps: int = 2_000_000
    stationarity_tol: float = 1e-6
    stationarity_window: int = 10
    feasibility_tol: float = 1e-10
    nu: float = 0.0
    trace_stride: int = 100

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.stationarity_tol <= 0 or self.feasibility_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.stationarity_window < 1:
            raise ValueError("stationarity_window must be at least 1")
        if self.trace_stride < 1:
            raise ValueError("trace_stride must be at least 1")
        if not 0.0 <= self.nu < 1.0:
            raise ValueError(f"nu must lie in [0, 1), got {self.nu}")


@dataclass
class AnaState:
    x: np.ndarray
    zeta: float = 0.0
    time: float = 0.0


TRACE_COLUMNS = ("time", "x", "Q", "G", "H", "zeta", "dxnorm")


@dataclass
class AnaTrace:
    """Sampled trajectory. ``samples`` has columns time, x_1..x_m, Q, G, H, zeta, dxnorm.

    The first row is the initial state, whose ``dxnorm`` is NaN.
    """

    samples: np.ndarray
    entry_time: float = None

    @property
    def time(self):
        return self.samples[:, 0]

    @property
    def x(self):
        return self.samples[:, 1:-5]

    @property
    def Q(self):
        return self.samples[:, -5]

    @property
    def G(self):
        return self.samples[:, -4]

    @property
    def H(self):
        return self.samples[:, -3]

    @property
    def zeta(self):
        return self.samples[:, -2]

    @property
    def dxnorm(self):
        return self.samples[:, -1]


@dataclass
class AnaResult:
    x: np.ndarray
    trace: AnaTrace
    converged: bool
    zeta: float
    steps: int
    kappa: np.ndarray = field(repr=False)
    eta: np.ndarray = field(repr=False)

    @property
    def theta(self):
        """Penalty weight at the end of the run."""
        return self.zeta


def rhs(game, state, nu=0.0, geometry=None):
    """Right-hand side of the flow with the entrywise subgradient selections.

    Returns ``(x_dot, zeta_dot)``.
    """
    geometry = geometry or ConstraintGeometry.from_game(game)
    x = np.asarray(state.x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise IntegrationFault("non-finite state", state=state)
    G = box_violation(x)
    H = equality_residual(x, geometry)[1]
    g = gate(G, nu)
    descent = g * objective_gradient(game, x) if g > 0 else np.zeros_like(x)
    zeta = state.zeta
    kappa = box_subgradient(x)
    eta = equality_subgradient(x, geometry)
    x_dot = -descent - zeta * (kappa + zeta * eta)
    return x_dot, zeta_rate(G + H)


def step(game, state, settings=None):
    """Advance ``state`` by one time step of ``settings.step_size``."""
    settings = settings or AnaSettings()
    tables = _kernels.index_tables(game)
    x = np.asarray(state.x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise IntegrationFault("non-finite state", state=state)
    x_new, zeta_new, _, _, _ = _kernels.advance(
        *tables, x, float(state.zeta), settings.step_size, settings.nu, settings.feasibility_tol
    )
    if not np.all(np.isfinite(x_new)):
        raise IntegrationFault("step produced non-finite values", state=state)
    return AnaState(x=x_new, zeta=zeta_new, time=state.time + settings.step_size)


def _initial_row(game, x0, tables):
    payoffs, prof_idx, block_of, offsets = tables
    G, _, H = _kernels.penalties(x0, offsets)
    Q = _kernels.objective_value(payoffs, prof_idx, block_of, offsets, x0)
    return np.concatenate([[0.0], x0, [Q, G, H, 0.0, np.nan]]), G + H


def run_to_critical(game, x0, settings=None):
    """Integrate from ``x0`` until a feasible stationary point or the step budget.

    A point counts as critical once the realized ``|x_dot|`` stays below
    ``stationarity_tol`` for ``stationarity_window`` consecutive feasible steps.

    Raises
    ------
    IntegrationFault
        If the state becomes non-finite; carries the last valid state and trace.
    """
    settings = settings or AnaSettings()
    x = np.array(x0, dtype=float)
    if x.shape != (game.num_strategies,):
        raise ValueError(f"x0 must have length {game.num_strategies}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    tables = _kernels.index_tables(game)
    first, eps0 = _initial_row(game, x, tables)
    chunks = [first[None, :]]
    h = settings.step_size
    entry_step = 0 if eps0 <= settings.feasibility_tol else -1
    zeta, done, consec = 0.0, 0, 0
    stride = settings.trace_stride
    width = game.num_strategies + 6
    kappa = eta = np.zeros_like(x)
    while True:
        n = min(_CHUNK, settings.max_steps - done)
        buf = np.empty((n // stride + 2, width))
        x, zeta, done, consec, entry_step, status, rows, kappa, eta = _kernels.run_chunk(
            *tables, x, zeta, done, n, settings.max_steps, h, settings.nu,
            settings.feasibility_tol, settings.stationarity_tol,
            settings.stationarity_window, consec, entry_step, stride, buf,
        )
        chunks.append(buf[:rows])
        if status == _kernels.FAULT:
            trace = AnaTrace(np.vstack(chunks), _entry_time(entry_step, h))
            # x holds the last finite state of the chunk
            raise IntegrationFault(
                f"non-finite state after {done} steps (t={done * h:g})",
                state=AnaState(x=x, zeta=zeta, time=done * h),
                trace=trace,
            )
        if status != _kernels.RUNNING:
            break
    trace = AnaTrace(np.vstack(chunks), _entry_time(entry_step, h))
    converged = status == _kernels.CONVERGED
    if not converged:
        logger.debug("flow stopped after %d steps without reaching a critical point", done)
    return AnaResult(
        x=x, trace=trace, converged=converged, zeta=zeta, steps=done, kappa=kappa, eta=eta
    )


def _entry_time(entry_step, h):
    return None if entry_step < 0 else entry_step * h


def reference_point(game):
    """Uniform profile: interior of the box and on every sum constraint."""
    return uniform_profile(game.strategy_counts)
