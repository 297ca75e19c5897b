"""Mean-field operators: transitions, score operators, Bellman recursion, flows."""
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .evaluators import Evaluator, avar_breakpoints
from .game import ObliviousTable, Policy, _time_check
from .spaces import check_dist, check_joint, tv_distance

MFF_TOL = 1e-10
GROWTH_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeanFieldFlow:
    """State-action distributions psi_1..psi_{T-1}, stacked as (T-1, nX, nA)."""

    joints: np.ndarray

    def __post_init__(self):
        J = np.array(self.joints, dtype=float)
        if J.ndim != 3 or J.shape[0] < 1:
            raise InvalidInputError("joints must have shape (T-1, nX, nA)")
        for t in range(J.shape[0]):
            J[t] = check_joint(J[t], name=f"psi_{t + 1}")
        J.setflags(write=False)
        object.__setattr__(self, "joints", J)

    @property
    def T(self):
        return self.joints.shape[0] + 1

    @property
    def marginals(self):
        """State marginals xi_{psi_t}, shape (T-1, nX)."""
        return self.joints.sum(axis=2)

    def __len__(self):
        return self.joints.shape[0]

    def __getitem__(self, i):
        return self.joints[i]


# ---- transition operators ------------------------------------------------------

def q_push(game, t, x, xi, lam):
    """Q^lambda_{t,x,xi} = sum_a lambda(a) P_t(x, xi, a)."""
    _time_check(t, game.T)
    lam = check_dist(lam, game.nA, "lambda")
    return lam @ game.kernel(t, xi)[x]


def push(game, t, xi_env, joint):
    """Pushforward of a state-action law through P_t(., xi_env, .)."""
    P = game.kernel(t, xi_env)
    return np.einsum("xa,xay->y", joint, P)


def kernels_along(game, policy, xi_flow):
    """Policy tables evaluated along an environment flow, shape (T-1, nX, nA)."""
    if isinstance(policy, Policy):
        return np.stack([policy.probs(t, xi_flow[t - 1]) for t in range(1, game.T)])
    K = np.asarray(policy, dtype=float)
    if K.shape != (game.T - 1, game.nX, game.nA):
        raise InvalidInputError(f"kernel table must have shape {(game.T - 1, game.nX, game.nA)}")
    return K


def marginal_flow(game, policy):
    """Forward roll of the state law with the environment fed back, (T, nX)."""
    xi = np.empty((game.T, game.nX))
    xi[0] = game.initial
    for t in range(1, game.T):
        pi = policy.probs(t, xi[t - 1]) if isinstance(policy, Policy) else np.asarray(policy)[t - 1]
        xi[t] = push(game, t, xi[t - 1], xi[t - 1][:, None] * pi)
    return xi


def roll_flow(game, policy):
    """Mean field flow generated by one policy with feedback."""
    xi = game.initial
    joints = []
    for t in range(1, game.T):
        pi = policy.probs(t, xi) if isinstance(policy, Policy) else np.asarray(policy)[t - 1]
        psi = xi[:, None] * pi
        joints.append(psi)
        xi = push(game, t, xi, psi)
    return MeanFieldFlow(np.array(joints))


def flow_marginals_full(game, flow):
    """xi_{psi_1}, ..., xi_{psi_{T-1}} followed by the terminal pushforward."""
    return np.vstack([flow.marginals, flow_terminal_xi(game, flow)[None, :]])


def flow_terminal_xi(game, flow):
    T = game.T
    _check_flow_shape(game, flow)
    psi = flow.joints[T - 2]
    return push(game, T - 1, psi.sum(axis=1), psi)


def _check_flow_shape(game, flow):
    if flow.joints.shape != (game.T - 1, game.nX, game.nA):
        raise InvalidInputError(
            f"flow has shape {flow.joints.shape}, expected {(game.T - 1, game.nX, game.nA)}")


def check_mff(game, flow):
    """Residuals of the mean-field-flow identities.

    Entry 0 is the TV gap between xi_{psi_1} and the initial law; entry t
    (t >= 1) is the TV gap between xi_{psi_{t+1}} and the pushforward of
    psi_t.  A flow is a mean field flow iff all entries vanish.
    """
    _check_flow_shape(game, flow)
    marg = flow.marginals
    res = np.empty(game.T - 1)
    res[0] = tv_distance(marg[0], game.initial)
    for t in range(1, game.T - 1):
        res[t] = tv_distance(marg[t], push(game, t, marg[t - 1], flow.joints[t - 1]))
    return res


def require_mff(game, flow, tol=1e-8):
    res = check_mff(game, flow)
    bad = np.nonzero(res > tol)[0]
    if bad.size:
        k = int(bad[0])
        where = "initial marginal" if k == 0 else f"step {k} -> {k + 1}"
        raise InvalidInputError(f"not a mean field flow: residual {res[k]:.3e} at {where}")
    return res


def induced_kernel(joint):
    """Conditional action law given the state; uniform on zero-mass states."""
    psi = check_joint(joint)
    mass = psi.sum(axis=1)
    out = np.full(psi.shape, 1.0 / psi.shape[1])
    pos = mass > 0
    out[pos] = psi[pos] / mass[pos, None]
    return out


def induced_kernels(flow):
    return np.stack([induced_kernel(p) for p in flow.joints])


def induced_policy(flow):
    return ObliviousTable(induced_kernels(flow))


# ---- score operators ---------------------------------------------------------------

def action_values(game, evaluator, t, xi, v):
    """g[x, a] = c_t(x, xi, a) + risk of v under P_t(x, xi, a)."""
    P = game.kernel(t, xi)
    return game.cost.table(t, xi) + evaluator.risk(np.asarray(v, dtype=float), P)


def _growth_check(v_next, v_now, C0, C1):
    bound = C0 + C1 * float(np.max(np.abs(v_next)))
    if float(np.max(np.abs(v_now))) > bound + GROWTH_TOL * max(1.0, bound):
        raise InternalConsistencyError("value growth exceeds C0 + C1 |v|")


def mf_policy_values(game, evaluator, policy, xi_flow, terminal):
    """Backward recursion v_t = S^{pi_t}_{t, xi_t} v_{t+1}; returns (T, nX)."""
    evaluator = evaluator or game.evaluator
    xi_flow = np.asarray(xi_flow, dtype=float)
    if xi_flow.shape[0] < game.T - 1:
        raise InvalidInputError("xi_flow must cover steps 1..T-1")
    K = kernels_along(game, policy, xi_flow)
    C0 = game.cost_bound()
    V = np.empty((game.T, game.nX))
    V[-1] = terminal
    for t in range(game.T - 1, 0, -1):
        g = action_values(game, evaluator, t, xi_flow[t - 1], V[t])
        V[t - 1] = (K[t - 1] * g).sum(axis=1)
        _growth_check(V[t], V[t - 1], C0, evaluator.C1)
    return V


def mf_bellman(game, evaluator, xi_flow, terminal):
    """Optimal values and the greedy oblivious policy (lowest index on ties)."""
    evaluator = evaluator or game.evaluator
    xi_flow = np.asarray(xi_flow, dtype=float)
    if xi_flow.shape[0] < game.T - 1:
        raise InvalidInputError("xi_flow must cover steps 1..T-1")
    C0 = game.cost_bound()
    V = np.empty((game.T, game.nX))
    V[-1] = terminal
    table = np.zeros((game.T - 1, game.nX, game.nA))
    for t in range(game.T - 1, 0, -1):
        g = action_values(game, evaluator, t, xi_flow[t - 1], V[t])
        best = np.argmin(g, axis=1)
        V[t - 1] = g[np.arange(game.nX), best]
        table[t - 1, np.arange(game.nX), best] = 1.0
        _growth_check(V[t], V[t - 1], C0, evaluator.C1)
    return V, ObliviousTable(table)


def growth_bound(game, evaluator, r, z):
    """C(r, z) = C0 * sum_{k=1}^{r} C1^(k-1) + C1^r * z."""
    C0, C1 = game.C0, (evaluator or game.evaluator).C1
    return C0 * sum(C1 ** (k - 1) for k in range(1, r + 1)) + C1 ** r * z


def forward_states(game, kernels, xi_flow):
    """State laws of a single agent using ``kernels`` in the environment
    ``xi_flow`` (no feedback), starting from the initial law; (T, nX)."""
    out = np.empty((game.T, game.nX))
    out[0] = game.initial
    for t in range(1, game.T):
        out[t] = push(game, t, xi_flow[t - 1], out[t - 1][:, None] * kernels[t - 1])
    return out


__all__ = [
    "MeanFieldFlow", "Evaluator", "q_push", "push", "marginal_flow", "roll_flow",
    "mf_policy_values", "mf_bellman", "induced_kernel", "induced_kernels", "induced_policy",
    "flow_terminal_xi", "flow_marginals_full", "check_mff", "require_mff", "action_values",
    "growth_bound", "forward_states", "avar_breakpoints",
]
