"""Damped best-response search for mean field equilibria, certified by regret."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, InvalidInputError
from .game import ObliviousTable
from .meanfield import (MFF_TOL, MeanFieldFlow, action_values, check_mff, induced_kernels,
                        mf_bellman, require_mff, roll_flow)
from .regret import mf_regret, terminal_values

ARGMIN_TOL = 1e-12


def best_response_kernels(game, evaluator, flow):
    """Bellman-optimal kernels against the flow's environment.

    Where the flow's own induced kernel already puts all its mass on
    minimising actions it is kept; elsewhere the lowest-index minimiser is
    used.  Both choices are supported on the argmin sets.
    """
    evaluator = evaluator or game.evaluator
    require_mff(game, flow)
    xi, VM = terminal_values(game, flow)
    w, greedy = mf_bellman(game, evaluator, xi, VM)
    own = induced_kernels(flow)
    out = greedy.table.copy()
    for t in range(1, game.T):
        g = action_values(game, evaluator, t, xi[t - 1], w[t])
        slack = g - g.min(axis=1, keepdims=True)
        optimal = slack <= ARGMIN_TOL * max(1.0, float(np.abs(g).max()))
        keep = np.all(optimal | (own[t - 1] == 0), axis=1)
        out[t - 1, keep] = own[t - 1, keep]
    return out


def best_response_flow(game, evaluator, flow):
    """Flow generated by the best-response kernels with population feedback."""
    K = best_response_kernels(game, evaluator, flow)
    return roll_flow(game, ObliviousTable(K))


@dataclass(frozen=True, eq=False)
class SolveReport:
    flow: MeanFieldFlow
    mfr: float
    iterations: int
    damping: float
    restarts_used: int
    converged: bool
    seed: int = 0
    tol: float = 0.0
    restart: int = 0
    tie_break: str = "lowest_index"
    history: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "mfr": self.mfr, "iterations": self.iterations, "damping": self.damping,
            "restarts_used": self.restarts_used, "converged": self.converged, "seed": self.seed,
            "tol": self.tol, "restart": self.restart, "tie_break": self.tie_break,
            "history": list(self.history), "joints": self.flow.joints.tolist(),
        }


def _initial_kernels(game, rng, restart):
    shape = (game.T - 1, game.nX, game.nA)
    if restart == 0:
        return np.full(shape, 1.0 / game.nA)
    return rng.dirichlet(np.ones(game.nA), size=shape[:2])


def _run(game, evaluator, tol, max_iter, damping, seed, restart):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(restart,))))
    flow = roll_flow(game, ObliviousTable(_initial_kernels(game, rng, restart)))
    mfr = mf_regret(game, evaluator, flow)
    best = (mfr, flow, 0)
    history = [mfr]
    it = 0
    while mfr > tol and it < max_iter:
        it += 1
        br = best_response_flow(game, evaluator, flow)
        br_mfr = mf_regret(game, evaluator, br)
        if br_mfr <= tol:
            flow, mfr = br, br_mfr
        else:
            mixed = (1.0 - damping) * flow.joints + damping * br.joints
            # re-project onto mean field flows by rolling the mixed kernels forward
            flow = roll_flow(game, ObliviousTable(induced_kernels(MeanFieldFlow(mixed))))
            if np.any(check_mff(game, flow) > MFF_TOL):
                raise InternalConsistencyError("rebuilt iterate is not a mean field flow")
            mfr = mf_regret(game, evaluator, flow)
        history.append(mfr)
        if mfr < best[0]:
            best = (mfr, flow, it)
    return best[1], it, mfr <= tol, history


def solve_mfe(game, evaluator=None, tol=1e-6, max_iter=500, damping=0.2, restarts=1, seed=0):
    """Search for a flow with mean field regret at most ``tol``.

    Restart 0 starts from the uniform policy, later restarts from seeded
    random oblivious policies.  Restarts stop at the first certified flow;
    otherwise the best flow is reported, ordered by (regret, restart).
    """
    evaluator = evaluator or game.evaluator
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    if not 0 < damping <= 1:
        raise InvalidInputError("damping must lie in (0, 1]")
    if max_iter < 0 or restarts < 1:
        raise InvalidInputError("max_iter must be >= 0 and restarts >= 1")
    results = []
    for k in range(restarts):
        flow, its, ok, hist = _run(game, evaluator, tol, max_iter, damping, seed, k)
        results.append((mf_regret(game, evaluator, flow), k, flow, its, ok, hist))
        if ok:
            break
    mfr, k, flow, its, ok, hist = min(results, key=lambda r: (r[0], r[1]))
    fresh = mf_regret(game, evaluator, flow)
    return SolveReport(flow, fresh, its, damping, len(results), fresh <= tol, seed, tol, k,
                       history=tuple(hist))
