"""Independent reference computations used to derive frozen test values.

Nothing here calls the package's solvers; each oracle works from the raw
game tables by enumeration.
"""
import itertools

import numpy as np
from scipy.stats import binom


def bl_vertex_enumeration(metric, p, q, L=1.0):
    """L times the BL distance, by enumerating vertices of {|h| <= 1, h_i - h_j <= d_ij}."""
    d = np.asarray(metric, dtype=float)
    n = len(p)
    rows, rhs = [], []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1
        rows += [e, -e]
        rhs += [1.0, 1.0]
    for i, j in itertools.permutations(range(n), 2):
        e = np.zeros(n)
        e[i], e[j] = 1, -1
        rows.append(e)
        rhs.append(d[i, j])
    G, hb = np.array(rows), np.array(rhs)
    w = np.asarray(p, dtype=float) - np.asarray(q, dtype=float)
    best = 0.0
    for idx in itertools.combinations(range(len(G)), n):
        sub = G[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        h = np.linalg.solve(sub, hb[list(idx)])
        if np.all(G @ h <= hb + 1e-9):
            best = max(best, abs(w @ h))
    return L * 0.5 * best


def _state_profiles(nX, N):
    return list(itertools.product(range(nX), repeat=N))


def _emp(x, nX):
    return np.bincount(np.asarray(x), minlength=nX) / len(x)


def player_one_cost(game, profile_tables, deviation):
    """Exact expected total cost of player 1 by enumerating all paths.

    profile_tables[n][t-1] is an (nX, nA) function of (state, xi) given as a
    callable probs(t, xi); deviation maps (t, joint state tuple) to an action
    index, or is None for player 1's own policy.
    """
    nX, nA, T = game.nX, game.nA, game.T
    N = len(profile_tables)
    law = {}
    for x in _state_profiles(nX, N):
        law[x] = float(np.prod([game.initial[y] for y in x]))
    total = 0.0
    for t in range(1, T):
        new = {}
        for x, m in law.items():
            if m == 0:
                continue
            xi = _emp(x, nX)
            P = game.kernel(t, xi)
            c = game.cost.table(t, xi)
            rows = [profile_tables[n](t, xi)[x[n]] for n in range(N)]
            if deviation is not None:
                rows[0] = np.eye(nA)[deviation[(t, x)]]
            for acts in itertools.product(range(nA), repeat=N):
                pa = float(np.prod([rows[n][acts[n]] for n in range(N)]))
                if pa == 0:
                    continue
                total += m * pa * c[x[0], acts[0]]
                for y in _state_profiles(nX, N):
                    py = float(np.prod([P[x[n], acts[n], y[n]] for n in range(N)]))
                    if py:
                        new[y] = new.get(y, 0.0) + m * pa * py
        law = new
    for x, m in law.items():
        total += m * game.terminal.vector(_emp(x, nX))[x[0]]
    return total


def brute_force_regret(game, profile):
    """Own cost minus the best deterministic Markov deviation of player 1."""
    probs = [p.probs for p in profile.policies]
    nX, nA, N, T = game.nX, game.nA, len(probs), game.T
    keys = [(t, x) for t in range(1, T) for x in _state_profiles(nX, N)]
    own = player_one_cost(game, probs, None)
    best = np.inf
    for choice in itertools.product(range(nA), repeat=len(keys)):
        best = min(best, player_one_cost(game, probs, dict(zip(keys, choice))))
    return own - best


def binomial_two_point_bl(N):
    """E BL(empirical, uniform) on two points at distance >= 2, exactly."""
    k = np.arange(N + 1)
    return float(np.sum(binom.pmf(k, N, 0.5) * np.abs(k / N - 0.5)))


def single_agent_dp(game):
    """Backward induction for a population-independent game; lowest index on ties."""
    T, nX, nA = game.T, game.nX, game.nA
    xi = game.initial
    v = game.terminal.vector(xi)
    tables = np.zeros((T - 1, nX, nA))
    for t in range(T - 1, 0, -1):
        q = game.cost.table(t, xi) + game.kernel(t, xi) @ v
        best = q.min(axis=1, keepdims=True)
        a = np.argmax(q <= best + 1e-12, axis=1)
        tables[t - 1, np.arange(nX), a] = 1.0
        v = best[:, 0]
    m = game.initial.copy()
    joints = []
    for t in range(1, T):
        psi = m[:, None] * tables[t - 1]
        joints.append(psi)
        m = np.einsum("xa,xay->y", psi, game.kernel(t, xi))
    return np.array(joints)
