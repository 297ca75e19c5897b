"""Seeded Monte Carlo simulation of the N-player dynamics.

Random streams are Philox generators keyed by
``SeedSequence(seed, spawn_key=(rep, t, kind))`` with kind 0 for initial
states, 1 for actions, 2 for transitions and 3 for concentration draws.
Within a stream, player n consumes the n-th uniform, so results do not
depend on how replications are scheduled.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidInputError
from .game import Policy, resolve_moduli
from .lift import error_budget, lift_flow
from .nplayer import PolicyProfile
from .spaces import bl_distance, check_dist, r_bound

INITIAL, ACTION, TRANSITION, DRAW = 0, 1, 2, 3


def stream(seed, rep, t, kind):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(rep, t, kind))))


def _sample_rows(probs, u):
    """Inverse-CDF draw from each row of ``probs`` using uniforms ``u``."""
    cdf = np.cumsum(probs, axis=1)
    idx = (u[:, None] >= cdf).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


@dataclass(frozen=True, eq=False)
class SimResult:
    counts: np.ndarray  # (reps, T-1, nX, nA) state-action counts
    state_counts: np.ndarray  # (reps, T, nX)
    bl: np.ndarray  # (reps, T-1) BL distance of empirical joints to the reference flow
    state_bl: np.ndarray  # (reps, T) BL distance of empirical states to the reference marginals
    seed: int
    N: int
    reps: int

    @property
    def joints(self):
        return self.counts / self.N

    @property
    def mean(self):
        return self.bl.mean(axis=0)

    @property
    def se(self):
        if self.reps < 2:
            return np.zeros(self.bl.shape[1])
        return self.bl.std(axis=0, ddof=1) / math.sqrt(self.reps)

    @property
    def state_mean(self):
        return self.state_bl.mean(axis=0)


def _as_profile(profile, N):
    if isinstance(profile, Policy):
        return PolicyProfile.homogeneous(profile, N)
    if profile.N != N:
        raise InvalidInputError(f"profile has {profile.N} players, expected {N}")
    return profile


def simulate(game, profile, N, reps, seed=0, reference=None):
    """Simulate ``reps`` independent plays of the N-player game.

    ``reference`` is the flow the empirical joints are compared with; by
    default the lifted flow of the profile.
    """
    if N < 1 or reps < 1:
        raise InvalidInputError("N and reps must be positive")
    profile = _as_profile(profile, N)
    nX, nA, T = game.nX, game.nA, game.T
    ref = reference if reference is not None else lift_flow(game, profile)
    ref_marg = np.vstack([ref.marginals, _terminal_marginal(game, ref)[None, :]])
    XA = game.states.product(game.actions)
    groups = {}
    for n, p in enumerate(profile.policies):
        groups.setdefault(id(p), (p, []))[1].append(n)
    groups = [(p, np.array(ix)) for p, ix in groups.values()]

    counts = np.zeros((reps, T - 1, nX, nA), dtype=np.int64)
    scounts = np.zeros((reps, T, nX), dtype=np.int64)
    bl = np.zeros((reps, T - 1))
    sbl = np.zeros((reps, T))
    cache = {}

    def dist(space, emp, target, key):
        k = (key, emp.tobytes())
        if k not in cache:
            cache[k] = bl_distance(space, emp / N, target)
        return cache[k]

    for r in range(reps):
        x = _sample_rows(np.broadcast_to(game.initial, (N, nX)), stream(seed, r, 0, INITIAL).random(N))
        for t in range(1, T):
            c = np.bincount(x, minlength=nX)
            scounts[r, t - 1] = c
            sbl[r, t - 1] = dist(game.states, c, ref_marg[t - 1], ("x", t))
            xi = c / N
            ua = stream(seed, r, t, ACTION).random(N)
            a = np.empty(N, dtype=np.int64)
            for p, ix in groups:
                a[ix] = _sample_rows(p.probs(t, xi)[x[ix]], ua[ix])
            ja = np.bincount(x * nA + a, minlength=nX * nA)
            counts[r, t - 1] = ja.reshape(nX, nA)
            bl[r, t - 1] = dist(XA, ja, ref.joints[t - 1].ravel(), ("xa", t))
            P = game.kernel(t, xi)
            x = _sample_rows(P[x, a], stream(seed, r, t, TRANSITION).random(N))
        c = np.bincount(x, minlength=nX)
        scounts[r, T - 1] = c
        sbl[r, T - 1] = dist(game.states, c, ref_marg[T - 1], ("x", T))
    return SimResult(counts, scounts, bl, sbl, seed, N, reps)


def _terminal_marginal(game, flow):
    from .meanfield import flow_terminal_xi

    return flow_terminal_xi(game, flow)


@dataclass(frozen=True)
class ConcentrationResult:
    estimate: float
    se: float
    bound: float
    j: int
    N: int
    reps: int


def concentration(space, mu_list, reps, seed=0, j_max=12):
    """Monte Carlo estimate of E|empirical - average law|_BL and its bound.

    Independent draws Y^n ~ mu^n; players sharing a law are drawn jointly
    as one multinomial count, which has the same distribution.
    """
    if reps < 100:
        raise InvalidInputError("concentration needs at least 100 replications")
    mus = [check_dist(m, space.size, "mu") for m in mu_list]
    N = len(mus)
    if N < 1:
        raise InvalidInputError("mu_list must be nonempty")
    groups = {}
    for m in mus:
        groups.setdefault(m.tobytes(), [m, 0])[1] += 1
    groups = list(groups.values())
    mean = sum(m * k for m, k in groups) / N
    vals = np.empty(reps)
    cache = {}
    for r in range(reps):
        rng = stream(seed, r, 0, DRAW)
        c = sum(rng.multinomial(k, m) for m, k in groups)
        key = c.tobytes()
        if key not in cache:
            cache[key] = bl_distance(space, c / N, mean)
        vals[r] = cache[key]
    bound, j = r_bound(N, space, j_max=j_max, return_j=True)
    return ConcentrationResult(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(reps)), bound, j, N, reps)


@dataclass(frozen=True)
class GapResult:
    estimate: np.ndarray
    se: np.ndarray
    bound: np.ndarray


def empirical_gap(game, profile, N, reps, seed=0, evaluator=None, j_max=12):
    """Expected BL gap between empirical state-action measures and the lift.

    The bound is 2 theta(e_t) + 1.5 e_t + r_{X x A}(N) - r_X(N), with
    infinity when the profile's modulus is infinite.
    """
    profile = _as_profile(profile, N)
    res = simulate(game, profile, N, reps, seed)
    budget = error_budget(game, evaluator, N, profile=profile, j_max=j_max)
    mod = resolve_moduli(game, evaluator, list(profile.policies))
    XA = game.states.product(game.actions)
    r_xa = r_bound(N, XA, j_max=j_max)
    bounds = []
    for t in range(1, game.T):
        e = budget.e[t - 1]
        b = 2.0 * mod.theta(e) + 1.5 * e + r_xa - budget.r
        bounds.append(b)
    return GapResult(res.mean, res.se, np.array(bounds))
