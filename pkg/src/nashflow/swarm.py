"""Particle-swarm multi-start around the neurodynamic flow.

Each outer iteration runs every particle's flow to a critical point, updates
personal and group bests by objective value, and re-seeds the particles with
the standard PSO velocity rule.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

from .ana import AnaSettings, IntegrationFault, run_to_critical
from .game import objective
from .oracle import certify

__all__ = ["SwarmSettings", "SwarmState", "AcnaResult", "inertia", "pso_update", "run_acna"]

logger = logging.getLogger(__name__)


@dataclass
class SwarmSettings:
    swarm_size: int = 10
    inertia_start: float = 0.9
    inertia_end: float = 0.4
    c1: float = 2.0
    c2: float = 2.0
    stall_tol: float = 0.1
    stall_limit: int = 100
    max_iter: int = 500
    global_tol: float = 1e-12
    init_range: tuple = (-10.0, 10.0)
    seed: int = None
    # "critical": PSO moves from the flow's output; "start": from the flow's input
    velocity_source: str = "critical"

    def __post_init__(self):
        if self.swarm_size < 1:
            raise ValueError("swarm_size must be at least 1")
        if self.max_iter < 0 or self.stall_limit < 0:
            raise ValueError("max_iter and stall_limit must be nonnegative")
        if self.stall_tol <= 0 or self.global_tol <= 0:
            raise ValueError("tolerances must be positive")
        lo, hi = self.init_range
        if not lo < hi:
            raise ValueError(f"init_range must be increasing, got {self.init_range}")
        if self.velocity_source not in ("critical", "start"):
            raise ValueError(f"unknown velocity_source {self.velocity_source!r}")


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    pbest: np.ndarray
    pbest_value: np.ndarray
    gbest: np.ndarray = None
    gbest_value: float = np.inf
    stall: int = 0
    iteration: int = 0


@dataclass
class AcnaResult:
    certificate: object
    history: list
    state: SwarmState
    n_iter: int
    n_faults: int
    n_unconverged: int
    traces: list = field(default=None, repr=False)


def inertia(k, settings):
    """Linearly decreasing inertia weight over the iteration budget."""
    if settings.max_iter == 0:
        return settings.inertia_start
    frac = 1.0 - k / settings.max_iter
    return settings.inertia_end + (settings.inertia_start - settings.inertia_end) * frac


def pso_update(state, settings, rngs, alpha=None):
    """Velocity and position update for every particle, in place.

    ``rngs`` holds one generator per particle; each draws its own scalar
    ``l1, l2``. Particles without a personal (or group) best skip that pull.
    """
    alpha = inertia(state.iteration, settings) if alpha is None else alpha
    for i, rng in enumerate(rngs):
        l1, l2 = rng.random(2)
        x = state.positions[i]
        v = alpha * state.velocities[i]
        if np.isfinite(state.pbest_value[i]):
            v = v + settings.c1 * l1 * (state.pbest[i] - x)
        if state.gbest is not None:
            v = v + settings.c2 * l2 * (state.gbest - x)
        state.velocities[i] = v
        state.positions[i] = x + v
    return state


def _best_index(values):
    # argmin returns the lowest index among ties
    return int(np.argmin(values))


def run_acna(game, settings=None, ana_settings=None, initial_positions=None,
             keep_traces=False, callback=None):
    """Search for a Nash equilibrium with a swarm of neurodynamic flows.

    Stops when the stall counter exceeds ``stall_limit``, after ``max_iter``
    outer iterations, or as soon as the group best objective drops to
    ``global_tol``.

    Parameters
    ----------
    initial_positions : array_like, shape (swarm_size, m), optional
        Starting points; drawn uniformly from ``init_range`` when omitted.
    callback : callable, optional
        Called as ``callback(k, gbest_value, stall)`` after each iteration.
    """
    settings = settings or SwarmSettings()
    ana_settings = ana_settings or AnaSettings()
    r, m = settings.swarm_size, game.num_strategies
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(settings.seed).spawn(r)]
    lo, hi = settings.init_range
    if initial_positions is None:
        positions = np.array([rng.uniform(lo, hi, m) for rng in rngs])
    else:
        positions = np.array(initial_positions, dtype=float)
        if positions.shape != (r, m):
            raise ValueError(f"initial_positions must have shape {(r, m)}, got {positions.shape}")
    # personal bests only ever hold flow outputs, so they start empty
    state = SwarmState(
        positions=positions,
        velocities=np.zeros((r, m)),
        pbest=positions.copy(),
        pbest_value=np.full(r, np.inf),
    )
    history = []
    traces = [[] for _ in range(r)] if keep_traces else None
    n_faults = n_unconverged = 0

    while state.stall <= settings.stall_limit and state.iteration < settings.max_iter:
        k = state.iteration
        critical = state.positions.copy()
        for i in range(r):
            try:
                result = run_to_critical(game, state.positions[i], ana_settings)
            except IntegrationFault as exc:
                n_faults += 1
                logger.warning("particle %d faulted at iteration %d: %s", i, k, exc)
                if keep_traces and exc.trace is not None:
                    traces[i].append(exc.trace)
                critical[i] = state.positions[i] = rngs[i].uniform(lo, hi, m)
                state.velocities[i] = 0.0
                continue
            if keep_traces:
                traces[i].append(result.trace)
            critical[i] = result.x
            if not result.converged:
                n_unconverged += 1
                continue
            value = objective(game, result.x)
            if state.pbest_value[i] > value:
                state.pbest[i] = result.x
                state.pbest_value[i] = value
        previous = state.gbest_value
        i_star = _best_index(state.pbest_value)
        if state.gbest_value > state.pbest_value[i_star]:
            state.gbest = state.pbest[i_star].copy()
            state.gbest_value = float(state.pbest_value[i_star])
        if abs(state.gbest_value - previous) <= settings.stall_tol:
            state.stall += 1
        else:
            state.stall = 0
        history.append(state.gbest_value)
        if callback is not None:
            callback(k, state.gbest_value, state.stall)
        if state.gbest_value <= settings.global_tol:
            state.iteration += 1
            break
        if settings.velocity_source == "critical":
            state.positions = critical
        pso_update(state, settings, rngs)
        state.iteration += 1

    if state.gbest is None:
        # no flow finished: fall back to the best raw starting point
        values = [objective(game, x) for x in state.positions]
        best = state.positions[_best_index(values)]
    else:
        best = state.gbest
    return AcnaResult(
        certificate=certify(game, best),
        history=history,
        state=state,
        n_iter=state.iteration,
        n_faults=n_faults,
        n_unconverged=n_unconverged,
        traces=traces,
    )
