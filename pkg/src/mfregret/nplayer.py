"""Exact N-player operators on the dense product space X^N.

Player 1 is the most significant digit of the row-major state index.  The
population measure seen by every player is the empirical measure of the
full state vector, so kernels, costs and policies are evaluated once per
distinct count vector.
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import CapacityError, InternalConsistencyError, InvalidInputError
from .evaluators import avar_sorted
from .game import Policy
from .regret import clamp_regret

MAX_STATES = 2_000_000
MAX_AVAR_WORK = 2e9


@dataclass(frozen=True)
class PolicyProfile:
    """Policies of players 1..N (heterogeneous allowed)."""

    policies: tuple

    def __post_init__(self):
        pols = tuple(self.policies)
        if not pols:
            raise InvalidInputError("a profile needs at least one player")
        for p in pols:
            if not isinstance(p, Policy):
                raise InvalidInputError("profile entries must be policies")
        object.__setattr__(self, "policies", pols)

    @classmethod
    def homogeneous(cls, policy, N):
        if N < 1:
            raise InvalidInputError("N must be positive")
        return cls((policy,) * N)

    @property
    def N(self):
        return len(self.policies)

    def __len__(self):
        return len(self.policies)

    def __getitem__(self, i):
        return self.policies[i]

    def permuted(self, n):
        """Profile seen from player n (1-based): (p^n, p^1, ..., p^N without p^n)."""
        if not 1 <= n <= self.N:
            raise InvalidInputError(f"player {n} outside 1..{self.N}")
        rest = self.policies[:n - 1] + self.policies[n:]
        return PolicyProfile((self.policies[n - 1],) + rest)

    def groups(self):
        """Distinct policies (by identity) with their multiplicities, in first-seen order."""
        out = []
        for p in self.policies:
            for g in out:
                if g[0] is p:
                    g[1] += 1
                    break
            else:
                out.append([p, 1])
        return [(p, k) for p, k in out]


def _capacity(nX, N):
    S = nX ** N
    if S > MAX_STATES:
        raise CapacityError(f"|X|^N = {nX}^{N} = {S} exceeds the dense limit {MAX_STATES}")
    return S


def product_digits(nX, N):
    S = _capacity(nX, N)
    idx = np.arange(S)
    return np.stack([(idx // nX ** (N - 1 - n)) % nX for n in range(N)], axis=1)


def un_from_v(game, N):
    """U^N(x) = V(x^1, empirical measure of x), as a dense vector."""
    if N < 1:
        raise InvalidInputError("N must be positive")
    nX = game.nX
    digits = product_digits(nX, N)
    counts = np.stack([(digits == y).sum(axis=1) for y in range(nX)], axis=1)
    classes, inv = np.unique(counts, axis=0, return_inverse=True)
    inv = inv.ravel()
    V = np.stack([game.terminal.vector(c / N) for c in classes])
    return V[inv, digits[:, 0]]


class NPlayerModel:
    """Per-step data of an N-player game under a fixed profile."""

    def __init__(self, game, profile, evaluator=None):
        if isinstance(profile, Policy):
            raise InvalidInputError("pass a PolicyProfile, not a single policy")
        self.game = game
        self.profile = profile
        self.evaluator = evaluator or game.evaluator
        self.N = profile.N
        nX, nA, N = game.nX, game.nA, self.N
        self.digits = product_digits(nX, N)
        self.S = self.digits.shape[0]
        counts = np.stack([(self.digits == y).sum(axis=1) for y in range(nX)], axis=1)
        classes, inv = np.unique(counts, axis=0, return_inverse=True)
        self.cls = inv.ravel()
        self.xis = classes / N
        # per player position, which distinct policy it uses
        uniq = []
        self.pid = np.empty(N, dtype=int)
        for n, p in enumerate(profile.policies):
            for k, q in enumerate(uniq):
                if q is p:
                    self.pid[n] = k
                    break
            else:
                uniq.append(p)
                self.pid[n] = len(uniq) - 1
        self.policies = uniq
        self._step = {}

    def step(self, t):
        """Arrays for step t: player-1 rows, other players' mixed rows, costs."""
        if t in self._step:
            return self._step[t]
        g, N = self.game, self.N
        nX, nA = g.nX, g.nA
        K = len(self.xis)
        kern = np.stack([g.kernel(t, xi) for xi in self.xis])  # (K, nX, nA, nX)
        cost = np.stack([g.cost.table(t, xi) for xi in self.xis])  # (K, nX, nA)
        pol = np.stack([np.stack([p.probs(t, xi) for xi in self.xis]) for p in self.policies])  # (nP, K, nX, nA)
        c, d = self.cls, self.digits
        lam = pol[self.pid[None, :], c[:, None], d]  # (S, N, nA)
        Pn = kern[c[:, None], d]  # (S, N, nA, nX)
        R = np.einsum("sna,snay->sny", lam, Pn)  # mixed next-state rows
        data = {
            "lam": lam,
            "P": Pn,
            "R": R,
            "c1": cost[c, d[:, 0]],  # (S, nA)
        }
        self._step[t] = data
        return data

    def action_values(self, t, u):
        """A[s, a1]: player 1's score for each own action, others fixed."""
        st = self.step(t)
        nX = self.game.nX
        ev = self.evaluator
        if ev.is_linear:
            W = _kernels.contract_others(u, st["R"], self.N, nX)  # (S, nX)
            cont = np.einsum("say,sy->sa", st["P"][:, 0], W)
        else:
            work = float(self.S) ** 2 * self.game.nA ** self.N
            if work > MAX_AVAR_WORK:
                raise CapacityError(f"AVaR profile enumeration needs ~{work:.2e} operations")
            cont = _kernels.avar_profiles(u, self.digits, st["P"][:, 0], st["P"], st["lam"], ev.kappa)
        return st["c1"] + cont

    def policy_step(self, t, u):
        A = self.action_values(t, u)
        return (self.step(t)["lam"][:, 0] * A).sum(axis=1)

    def bellman_step(self, t, u):
        return self.action_values(t, u).min(axis=1)

    def backward(self, UN, mode):
        """Values for t = 1..T as a (T, S) array."""
        T = self.game.T
        out = np.empty((T, self.S))
        out[-1] = UN
        step = self.policy_step if mode == "policy" else self.bellman_step
        C0 = self.game.cost_bound()
        for t in range(T - 1, 0, -1):
            out[t - 1] = step(t, out[t])
            bound = C0 + self.evaluator.C1 * np.abs(out[t]).max()
            if np.abs(out[t - 1]).max() > bound + 1e-9 * max(1.0, bound):
                raise InternalConsistencyError("value growth exceeds C0 + C1 |u|")
        return out

    @cached_property
    def laws(self):
        """Joint laws of X_1..X_T under the profile, (T, S)."""
        T = self.game.T
        mu = np.empty((T, self.S))
        xi0 = self.game.initial
        mu[0] = np.prod(xi0[self.digits], axis=1)
        for t in range(1, T):
            mu[t] = _kernels.forward_law(mu[t - 1], self.step(t)["R"], self.digits)
        return mu

    def initial(self, f):
        mu = self.laws[0]
        if self.evaluator.is_linear:
            return float(mu @ f)
        return avar_sorted(f, mu, self.evaluator.kappa)


def np_value_backward(game, evaluator, profile, UN, mode="policy"):
    if mode not in ("policy", "bellman"):
        raise InvalidInputError(f"unknown mode '{mode}'")
    return NPlayerModel(game, profile, evaluator).backward(np.asarray(UN, dtype=float), mode)


def np_expectation(game, profile, t, f):
    """Expectation of f(X_t) under the profile's joint dynamics."""
    if not 1 <= t <= game.T:
        raise InvalidInputError(f"time {t} outside 1..{game.T}")
    model = NPlayerModel(game, profile)
    f = np.asarray(f, dtype=float)
    if f.shape != (model.S,):
        raise InvalidInputError(f"f must have length {model.S}")
    return float(model.laws[t - 1] @ f)


def np_regret_all(game, evaluator, profile, player=1):
    """Stepwise, end and actual regret of one player, sharing the passes."""
    evaluator = evaluator or game.evaluator
    prof = profile.permuted(player) if player != 1 else profile
    model = NPlayerModel(game, prof, evaluator)
    UN = un_from_v(game, prof.N)
    w = model.backward(UN, "bellman")
    pol = model.backward(UN, "policy")
    T = game.T
    stepwise = 0.0
    actual = 0.0
    for t in range(1, T):
        one = model.policy_step(t, w[t])
        mu = model.laws[t - 1]
        stepwise += evaluator.Cbar ** t * float(mu @ (one - w[t - 1]))
        actual += evaluator.Cbar ** t * float(mu @ (pol[t - 1] - w[t - 1]))
    end = model.initial(pol[0]) - model.initial(w[0])
    return {
        "stepwise": clamp_regret(stepwise),
        "end": clamp_regret(end),
        "actual": clamp_regret(actual),
    }


def np_regret(game, evaluator, profile, player=1, mode="stepwise"):
    if mode not in ("stepwise", "end", "actual"):
        raise InvalidInputError(f"unknown regret mode '{mode}'")
    return np_regret_all(game, evaluator, profile, player)[mode]


def average_regret(game, evaluator, profile, mode="stepwise"):
    """Mean regret over players; identical policies share one evaluation."""
    N = profile.N
    cache = {}
    total = 0.0
    for n in range(1, N + 1):
        key = id(profile[n - 1])
        if key not in cache:
            cache[key] = np_regret(game, evaluator, profile, n, mode)
        total += cache[key]
    return total / N
