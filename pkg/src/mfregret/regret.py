"""Mean-field regrets of state-action flows."""
import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .evaluators import Evaluator, avar_breakpoints
from .meanfield import (action_values, flow_marginals_full, forward_states, induced_kernels,
                        mf_bellman, mf_policy_values, require_mff)

NEG_TOL = 1e-10


def clamp_regret(value, what="regret"):
    if value < -NEG_TOL:
        raise InternalConsistencyError(f"{what} is negative ({value:.3e}) beyond round-off")
    return max(0.0, float(value))


def terminal_values(game, flow):
    """V_M: the terminal function at the pushforward of psi_{T-1}."""
    xi = flow_marginals_full(game, flow)
    return xi, game.terminal.vector(xi[-1])


def mf_regret(game, evaluator, flow, mode="stepwise", kernels=None, details=False):
    """Stepwise or end mean field regret of a flow.

    ``kernels`` overrides the induced kernel (any version agreeing with the
    flow on positive-mass states gives the same value).
    """
    evaluator = evaluator or game.evaluator
    require_mff(game, flow)
    xi, VM = terminal_values(game, flow)
    pis = induced_kernels(flow) if kernels is None else np.asarray(kernels, dtype=float)
    w, _ = mf_bellman(game, evaluator, xi, VM)
    if mode == "stepwise":
        # state laws of the flow's own policy in the flow's environment
        laws = forward_states(game, pis, xi)
        total = 0.0
        terms = []
        for t in range(1, game.T):
            g = action_values(game, evaluator, t, xi[t - 1], w[t])
            gap = (pis[t - 1] * g).sum(axis=1) - w[t - 1]
            term = evaluator.Cbar ** t * float(laws[t - 1] @ gap)
            terms.append(term)
            total += term
        out = clamp_regret(total, "mean field regret")
        return (out, np.array(terms)) if details else out
    if mode == "end":
        v = mf_policy_values(game, evaluator, pis, xi, VM)
        out = clamp_regret(evaluator.initial(v[0], game.initial) - evaluator.initial(w[0], game.initial),
                           "end mean field regret")
        return (out, None) if details else out
    raise InvalidInputError(f"unknown regret mode '{mode}'")


def mf_regret_avar_direct(game, flow, kappa):
    """Stepwise regret under AVaR scoring, integrating against psi_t directly."""
    ev = Evaluator.avar(kappa) if kappa < 1.0 else Evaluator.expected_sum()
    require_mff(game, flow)
    xi, VM = terminal_values(game, flow)
    w, _ = mf_bellman(game, ev, xi, VM)
    total = 0.0
    for t in range(1, game.T):
        psi = flow.joints[t - 1]
        env = xi[t - 1]
        P = game.kernel(t, env)
        c = game.cost.table(t, env)
        tail = avar_breakpoints(w[t], P, kappa)
        total += (1.0 / kappa) ** t * (float((psi * (c + tail)).sum()) - float(env @ w[t - 1]))
    return clamp_regret(total, "mean field regret")
