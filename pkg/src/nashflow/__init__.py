"""Mixed Nash equilibria of N-player normal-form games via adaptive neurodynamic flows."""

from .ana import AnaSettings, AnaState, AnaTrace, IntegrationFault, rhs, run_to_critical, step
from .constraints import ConstraintGeometry
from .estimator import NashSolver
from .game import (
    GameTensor,
    RegretReport,
    expected_payoff,
    objective_gradient,
    partial_expected_payoff,
    regret_report,
)
from .io import bundled_game, load_game, parse_game
from .oracle import (
    EquilibriumCertificate,
    certify,
    enumerate_pure_ne,
    grid_regret_scan,
    two_player_support_enumeration,
)
from .swarm import SwarmSettings, pso_update, run_acna

__version__ = "0.1.0"
