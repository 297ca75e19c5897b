"""Acceptance criteria 1-8, each timed after a JIT warm-up.

Run with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``;
each criterion prints one PASS/FAIL line.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mfregret.diagnostics import audit_evaluator  # noqa: E402
from mfregret.evaluators import Evaluator  # noqa: E402
from mfregret.game import load_game  # noqa: E402
from mfregret.lift import error_budget, induced_profile, lift_flow  # noqa: E402
from mfregret.meanfield import mf_bellman, roll_flow  # noqa: E402
from mfregret.mfe import solve_mfe  # noqa: E402
from mfregret.moduli import Modulus  # noqa: E402
from mfregret.nplayer import PolicyProfile, average_regret, np_regret, np_regret_all  # noqa: E402
from mfregret.regret import mf_regret, mf_regret_avar_direct, terminal_values  # noqa: E402
from mfregret.sim import concentration  # noqa: E402
from mfregret.spaces import FiniteMetricSpace, bl_distance  # noqa: E402

from conftest import random_game, random_policy  # noqa: E402
from oracles import bl_vertex_enumeration, brute_force_regret, single_agent_dp  # noqa: E402


def warm_up():
    g = load_game("crowd")
    for N in (1, 2):
        prof = PolicyProfile.homogeneous(g.policy, N)
        np_regret_all(g, None, prof)
        np_regret_all(g, Evaluator.avar(0.5), prof)
    solve_mfe(g, max_iter=2)
    concentration(FiniteMetricSpace.line(2), [np.array([0.5, 0.5])] * 2, 100)


def criterion_1():
    g = load_game("no_one_get_it")
    worst_player, mfrs, moves = 0.0, [], True
    for N in (2, 4, 8):
        prof = PolicyProfile.homogeneous(g.policy, N)
        # the profile is homogeneous, but check every seat anyway
        worst_player = max(worst_player, max(np_regret(g, None, prof, n) for n in range(1, N + 1)))
        flow = lift_flow(g, prof)
        mfrs.append(mf_regret(g, None, flow))
        xi, VM = terminal_values(g, flow)
        _, greedy = mf_bellman(g, None, xi, VM)
        moves &= bool(np.array_equal(greedy.table[0][0], [0.0, 1.0]))
    ok = worst_player <= 1e-12 and all(abs(m - 1) <= 1e-9 for m in mfrs) and moves
    return ok, f"max player regret {worst_player:.1e}, MFR {mfrs}, moves to state 1: {moves}"


def criterion_2():
    rng = np.random.default_rng(2024)
    worst_gap, worst_order = 0.0, 0.0
    for _ in range(50):
        nX, nA = (int(rng.integers(1, 4)) for _ in range(2))
        T = int(rng.integers(2, 5))
        N = int(rng.integers(1, 4))
        g = random_game(rng, nX=nX, nA=nA, T=T, affine=bool(rng.integers(0, 2)))
        prof = PolicyProfile(tuple(random_policy(rng, T, nX, nA) for _ in range(N)))
        r = np_regret_all(g, None, prof)
        worst_gap = max(worst_gap, abs(r["end"] - r["stepwise"]))
        worst_order = max(worst_order, r["stepwise"] - r["actual"], r["actual"] - T * r["stepwise"])
    ok = worst_gap <= 1e-9 and worst_order <= 1e-9
    return ok, f"max |end - stepwise| {worst_gap:.1e}, max sandwich excess {worst_order:.1e}"


def criterion_3():
    g = load_game("crowd")
    gaps, budgets = {}, {}
    for N in (2, 4, 8):
        prof = PolicyProfile.homogeneous(g.policy, N)
        avg = average_regret(g, None, prof)
        mfr = mf_regret(g, None, lift_flow(g, prof))
        gaps[N] = abs(avg - mfr)
        budgets[N] = error_budget(g, None, N, profile=prof).E
    ok = all(gaps[N] <= budgets[N] for N in gaps) and gaps[8] < gaps[2]
    detail = ", ".join(f"N={N}: gap {gaps[N]:.4f} <= E {budgets[N]:.3g}" for N in gaps)
    return ok, detail


def _solver_games():
    games = [load_game("crowd"), load_game("chain"), load_game("single_state")]
    for seed in (11, 12):
        games.append(random_game(np.random.default_rng(seed), nX=2, nA=2, T=3))
    return games


def criterion_4():
    worst_excess, worst_lift, n = -np.inf, 0.0, 0
    for g in _solver_games():
        flow = solve_mfe(g, tol=1e-9, max_iter=200).flow
        mfr = mf_regret(g, None, flow)
        for N in (2, 4, 8):
            prof = induced_profile(flow, N)
            worst_lift = max(worst_lift, float(np.abs(lift_flow(g, prof).joints - flow.joints).max()))
            E = error_budget(g, None, N, theta_override=Modulus.zero(), profile=prof).E
            for i in range(1, N + 1):
                worst_excess = max(worst_excess, abs(np_regret(g, None, prof, i) - mfr) - E)
            n += 1
    ok = worst_excess <= 0 and worst_lift <= 1e-12
    return ok, f"{n} (flow, N) pairs, max |R_n - MFR| - E {worst_excess:.3g}, lift error {worst_lift:.1e}"


def criterion_5():
    S = FiniteMetricSpace.line(4)
    mu = np.array([0.1, 0.2, 0.3, 0.4])
    ests, ok = [], True
    for N in (10, 100, 1000, 10000):
        c = concentration(S, [mu] * N, 1000, seed=N)
        ok &= c.estimate <= c.bound + 3 * c.se
        ests.append(c.estimate)
    ok &= all(b < a for a, b in zip(ests, ests[1:]))
    two = concentration(FiniteMetricSpace.discrete(2, scale=2), [np.array([0.5, 0.5])] * 2, 1000, seed=2)
    ok &= abs(two.estimate - 0.25) <= 3 * two.se
    return bool(ok), f"estimates {[round(e, 5) for e in ests]}, two-point {two.estimate:.4f} +- {two.se:.4f}"


def criterion_6():
    g = load_game("chain")
    rep = solve_mfe(g, tol=1e-9)
    XA = g.states.product(g.actions)
    bl = max(bl_distance(XA, a.ravel(), b.ravel()) for a, b in zip(rep.flow.joints, single_agent_dp(g)))
    ok = rep.converged and rep.iterations <= 2 and bl <= 1e-9
    ok &= rep.mfr == mf_regret(g, None, rep.flow)
    crowd = load_game("crowd")
    rc = solve_mfe(crowd, tol=1e-6, max_iter=500)
    recheck = mf_regret(crowd, None, rc.flow)
    ok &= rc.converged and rc.iterations <= 500 and recheck <= 1e-6 and recheck == rc.mfr
    return bool(ok), (f"chain: {rep.iterations} iterations, BL {bl:.1e}; "
                      f"crowd: MFR {recheck:.2e} after {rc.iterations} iterations")


def criterion_7():
    worst = 0.0
    for kappa in (0.1, 0.35, 0.7, 1.0):
        res = audit_evaluator(Evaluator.avar(kappa), samples=10_000, seed=int(kappa * 100))
        for r in res.values():
            worst = max(worst, r["max_excess"])
    rng = np.random.default_rng(7)
    diff = 0.0
    for i in range(20):
        kappa = float(rng.uniform(0.1, 1.0))
        nX, nA, T = int(rng.integers(1, 4)), int(rng.integers(1, 4)), int(rng.integers(2, 5))
        g = random_game(rng, nX=nX, nA=nA, T=T, affine=i % 2 == 0)
        flow = roll_flow(g, random_policy(rng, T, nX, nA))
        diff = max(diff, abs(mf_regret_avar_direct(g, flow, kappa) - mf_regret(g, Evaluator.avar(kappa), flow)))
    ok = worst <= 1e-9 and diff <= 1e-9
    return ok, f"max assumption excess {worst:.1e}, direct vs generic MFR {diff:.1e}"


def criterion_8():
    rng = np.random.default_rng(8)
    regret_diff = 0.0
    for i in range(10):
        g = random_game(rng, nX=2, nA=2, T=2, affine=i % 2 == 0)
        prof = PolicyProfile((random_policy(rng, 2, 2, 2), random_policy(rng, 2, 2, 2)))
        regret_diff = max(regret_diff, abs(np_regret(g, None, prof) - brute_force_regret(g, prof)))
    bl_diff = 0.0
    for m in (1, 2, 3, 4):
        for _ in range(10):
            pts = rng.uniform(0, 2, size=(m, 2))
            d = np.abs(pts[:, None] - pts[None]).sum(axis=2)
            S = FiniteMetricSpace(tuple(f"p{k}" for k in range(m)), d)
            p, q = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(m))
            L = float(rng.choice([1.0, 0.5, 2.0]))
            bl_diff = max(bl_diff, abs(bl_distance(S, p, q, L) - bl_vertex_enumeration(d, p, q, L)))
    ok = regret_diff <= 1e-12 and bl_diff <= 1e-9
    return ok, f"regret vs enumeration {regret_diff:.1e}, BL vs vertex enumeration {bl_diff:.1e}"


CRITERIA = [
    (1, "counterexample reproduction", criterion_1, 1.0),
    (2, "expected-sum regret identity", criterion_2, 30.0),
    (3, "N-player vs mean field sandwich", criterion_3, 60.0),
    (4, "induced profiles of solver flows", criterion_4, 60.0),
    (5, "empirical measure concentration", criterion_5, 60.0),
    (6, "equilibrium solver", criterion_6, 30.0),
    (7, "evaluator assumptions", criterion_7, 30.0),
    (8, "oracles", criterion_8, 10.0),
]


def run_criterion(fn, limit):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    passed = bool(ok) and elapsed < limit
    return passed, f"{detail}; {elapsed:.2f}s (limit {limit:g}s)"


@pytest.fixture(scope="module", autouse=True)
def _warm():
    warm_up()


@pytest.mark.parametrize("num,name,fn,limit", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, name, fn, limit, capsys):
    passed, detail = run_criterion(fn, limit)
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {num} ({name}): {detail}")
    assert passed, detail


if __name__ == "__main__":
    warm_up()
    results = []
    for num, name, fn, limit in CRITERIA:
        passed, detail = run_criterion(fn, limit)
        results.append(passed)
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {num} ({name}): {detail}")
    sys.exit(0 if all(results) else 1)
