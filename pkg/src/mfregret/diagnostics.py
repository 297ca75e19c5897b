"""Sampled audits of declared moduli and evaluator properties."""
import numpy as np

from .evaluators import Evaluator
from .game import resolve_moduli
from .meanfield import action_values
from .spaces import bl_distance, tv_distance

TOL = 1e-9


def _random_dist(rng, n):
    if rng.random() < 0.2:
        return np.eye(n)[rng.integers(n)]
    return rng.dirichlet(np.full(n, 0.7))


def _record(out, name, lhs, rhs):
    rec = out.setdefault(name, {"checked": 0, "violations": 0, "max_excess": -np.inf})
    rec["checked"] += 1
    excess = lhs - rhs
    rec["max_excess"] = max(rec["max_excess"], float(excess))
    if excess > TOL:
        rec["violations"] += 1


def audit_game(game, evaluator=None, samples=1000, seed=0, policies=None):
    """Check transition, policy, terminal and score-operator moduli on random draws."""
    ev = evaluator or game.evaluator
    if policies is None:
        policies = list(game.profile) if game.profile else ([game.policy] if game.policy else [])
    mod = resolve_moduli(game, ev, policies)
    rng = np.random.Generator(np.random.Philox(seed))
    X, A = game.states, game.actions
    out = {}
    Vmax = max(1.0, game.terminal_bound())
    for _ in range(samples):
        t = int(rng.integers(1, game.T))
        x = int(rng.integers(game.nX))
        a, b = (int(i) for i in rng.integers(game.nA, size=2))
        xi, xi2 = _random_dist(rng, game.nX), _random_dist(rng, game.nX)
        d_xi = bl_distance(X, xi, xi2)
        P, P2 = game.kernel(t, xi), game.kernel(t, xi2)
        if not mod.eta.is_infinite:
            _record(out, "eta_population", tv_distance(P[x, a], P2[x, a]), mod.eta(d_xi))
            _record(out, "eta_action", tv_distance(P[x, a], P[x, b]), mod.eta(A.metric[a, b]))
        if not mod.iota.is_infinite:
            diff = np.abs(game.terminal.vector(xi) - game.terminal.vector(xi2)).max()
            _record(out, "iota", diff, mod.iota(d_xi))
        for k, pol in enumerate(policies):
            if not mod.theta.is_infinite:
                lhs = bl_distance(A, pol.probs(t, xi)[x], pol.probs(t, xi2)[x])
                _record(out, "theta", lhs, mod.theta(d_xi))
        if not mod.zeta.is_infinite:
            v = rng.uniform(-Vmax, Vmax, game.nX)
            lam, lam2 = _random_dist(rng, game.nA), _random_dist(rng, game.nA)
            g1 = action_values(game, ev, t, xi, v)[x] @ lam
            g2 = action_values(game, ev, t, xi2, v)[x] @ lam2
            scale = mod.C0 + mod.C1 * np.abs(v).max()
            _record(out, "zeta", abs(g1 - g2), scale * (mod.zeta(d_xi) + mod.zeta(bl_distance(A, lam, lam2))))
    for name, rec in audit_evaluator(ev, game.nX, samples, seed).items():
        out[name] = rec
    return out


def audit_evaluator(evaluator, n=3, samples=10_000, seed=0, n_actions=3):
    """Monotonicity, the 1/kappa contraction and convexity in the action law.

    Each sample draws a cost row, next-state laws per action and two value
    vectors; the score of a mixed action is sum_a lam(a) (c(a) + risk(v; P_a)).
    """
    rng = np.random.Generator(np.random.Philox(seed + 1))
    ev = evaluator
    out = {}
    gammas = (0.25, 0.5, 0.75)
    for _ in range(samples):
        P = rng.dirichlet(np.full(n, 0.6), size=n_actions)
        c = rng.uniform(-1, 1, n_actions)
        v = rng.uniform(-2, 2, n)
        vh = v - rng.uniform(0, 1, n) * (rng.random(n) < 0.7)
        vr = rng.uniform(-2, 2, n)
        lam = rng.dirichlet(np.ones(n_actions))
        lam2 = rng.dirichlet(np.ones(n_actions))
        score = lambda l, u: float(l @ (c + ev.risk(u, P)))
        # monotone: vh <= v pointwise
        _record(out, "monotone", score(lam, vh), score(lam, v))
        Q = lam @ P
        _record(out, "contraction", abs(score(lam, v) - score(lam, vr)), ev.Cbar * float(Q @ np.abs(v - vr)))
        gma = gammas[rng.integers(3)]
        mix = gma * lam + (1 - gma) * lam2
        _record(out, "convexity", score(mix, v), gma * score(lam, v) + (1 - gma) * score(lam2, v))
    return out
