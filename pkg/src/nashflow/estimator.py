"""Scikit-learn style front end to the swarm solver."""

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .ana import AnaSettings
from .game import regret_report, split_profile
from .swarm import SwarmSettings, run_acna
from .validation import check_game, check_profile

__all__ = ["NashSolver"]


class NashSolver(BaseEstimator):
    """Find a mixed Nash equilibrium with a swarm of adaptive neurodynamic flows.

    ``fit`` takes a game (``GameTensor``, game document mapping, or one payoff
    array per player) and stores the best equilibrium candidate.

    Parameters
    ----------
    swarm_size : int, default 10
    c1, c2 : float, default 2.0
        Cognitive and social PSO weights.
    stall_tol : float, default 0.1
        Group-best changes at or below this count as a stall.
    stall_limit : int, default 100
    max_iter : int, default 500
    global_tol : float, default 1e-12
        Stop as soon as the group-best objective is at or below this.
    init_range : tuple of float, default (-10, 10)
    velocity_source : {"critical", "start"}, default "critical"
    step_size, max_flow_steps, stationarity_tol, stationarity_window,
    feasibility_tol, nu, trace_stride
        Flow integration settings, see ``AnaSettings``.
    keep_traces : bool, default False
    random_state : int or None
        Master seed; per-particle streams are spawned from it.

    Attributes
    ----------
    profile_ : ndarray of shape (m,)
    strategies_ : list of ndarray
        ``profile_`` split per player.
    objective_ : float
    certificate_ : EquilibriumCertificate
    history_ : list of float
        Group-best objective after each outer iteration.
    n_iter_, n_faults_ : int
    traces_ : list or None
    """

    def __init__(self, swarm_size=10, c1=2.0, c2=2.0, stall_tol=0.1, stall_limit=100,
                 max_iter=500, global_tol=1e-12, init_range=(-10.0, 10.0),
                 velocity_source="critical", step_size=1e-3, max_flow_steps=2_000_000,
                 stationarity_tol=1e-6, stationarity_window=10, feasibility_tol=1e-10,
                 nu=0.0, trace_stride=100, keep_traces=False, random_state=None):
        self.swarm_size = swarm_size
        self.c1 = c1
        self.c2 = c2
        self.stall_tol = stall_tol
        self.stall_limit = stall_limit
        self.max_iter = max_iter
        self.global_tol = global_tol
        self.init_range = init_range
        self.velocity_source = velocity_source
        self.step_size = step_size
        self.max_flow_steps = max_flow_steps
        self.stationarity_tol = stationarity_tol
        self.stationarity_window = stationarity_window
        self.feasibility_tol = feasibility_tol
        self.nu = nu
        self.trace_stride = trace_stride
        self.keep_traces = keep_traces
        self.random_state = random_state

    def _settings(self):
        swarm = SwarmSettings(
            swarm_size=self.swarm_size, c1=self.c1, c2=self.c2, stall_tol=self.stall_tol,
            stall_limit=self.stall_limit, max_iter=self.max_iter, global_tol=self.global_tol,
            init_range=tuple(self.init_range), seed=self.random_state,
            velocity_source=self.velocity_source,
        )
        ana = AnaSettings(
            step_size=self.step_size, max_steps=self.max_flow_steps,
            stationarity_tol=self.stationarity_tol,
            stationarity_window=self.stationarity_window,
            feasibility_tol=self.feasibility_tol, nu=self.nu, trace_stride=self.trace_stride,
        )
        return swarm, ana

    def fit(self, game, y=None, initial_positions=None):
        game = check_game(game)
        swarm, ana = self._settings()
        result = run_acna(game, swarm, ana, initial_positions=initial_positions,
                          keep_traces=self.keep_traces)
        cert = result.certificate
        self.game_ = game
        self.profile_ = cert.profile
        self.strategies_ = split_profile(game, cert.profile)
        self.objective_ = cert.objective
        self.certificate_ = cert
        self.history_ = result.history
        self.n_iter_ = result.n_iter
        self.n_faults_ = result.n_faults
        self.traces_ = result.traces
        return self

    def predict(self, game=None):
        """Per-player mixed strategies of the fitted equilibrium."""
        check_is_fitted(self, "profile_")
        if game is not None and check_game(game) != self.game_:
            raise ValueError("predict only answers for the game passed to fit")
        return [b.copy() for b in self.strategies_]

    def regrets(self, x=None):
        """Per-strategy regrets at ``x`` (default: the fitted profile)."""
        check_is_fitted(self, "profile_")
        x = self.profile_ if x is None else check_profile(self.game_, x)
        return regret_report(self.game_, x).z

    def score(self, game, y=None):
        """Negative squared-regret objective of the fitted profile on ``game``."""
        check_is_fitted(self, "profile_")
        game = check_game(game)
        return -regret_report(game, check_profile(game, self.profile_)).objective

    @property
    def is_equilibrium_(self):
        check_is_fitted(self, "profile_")
        return bool(self.certificate_.verdict)
