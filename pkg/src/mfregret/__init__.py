"""Regrets, lifts and equilibria for finite mean field games."""
from .errors import CapacityError, ConfigError, InternalConsistencyError, InvalidInputError
from .evaluators import Evaluator
from .game import (GameSpec, dump_game, load_game, policy_dist, resolve_moduli, terminal_vector,
                   transition_dist)
from .lift import ErrorBudget, error_budget, lift_flow
from .meanfield import (MeanFieldFlow, check_mff, flow_terminal_xi, induced_kernel, marginal_flow,
                        mf_bellman, mf_policy_values, q_push)
from .mfe import SolveReport, best_response_flow, solve_mfe
from .moduli import Modulus
from .nplayer import PolicyProfile, np_expectation, np_regret, np_value_backward, un_from_v
from .regret import mf_regret, mf_regret_avar_direct
from .sim import concentration, empirical_gap, simulate
from .spaces import FiniteMetricSpace, bl_distance, covering_number_upper, r_bound, tv_distance

__version__ = "0.1.0"
