import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfregret.diagnostics import audit_evaluator
from mfregret.errors import InvalidInputError
from mfregret.evaluators import Evaluator, avar_breakpoints, avar_sorted
from mfregret.moduli import L_threshold, Modulus, dominating, minimize_over_L

seeds = st.integers(0, 2**32 - 1)
kappas = st.floats(0.05, 1.0)


def test_avar_frozen_example():
    # tail of mass 0.3: 0.2 at 10 and 0.1 at 4 -> (2 + 0.4) / 0.3
    v = np.array([0.0, 4.0, 10.0])
    p = np.array([0.5, 0.3, 0.2])
    assert avar_sorted(v, p, 0.3) == pytest.approx(8.0, abs=1e-12)
    assert avar_breakpoints(v, p, 0.3) == pytest.approx(8.0, abs=1e-12)
    assert avar_sorted(v, p, 1.0) == pytest.approx(p @ v)


@settings(max_examples=200, deadline=None)
@given(seeds, kappas)
def test_avar_two_methods_agree(seed, kappa):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    v = rng.normal(size=n)
    p = rng.dirichlet(np.ones(n))
    if n > 1 and rng.random() < 0.3:
        p[0] = 0.0
        p /= p.sum()
    assert avar_breakpoints(v, p, kappa) == pytest.approx(avar_sorted(v, p, kappa), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds, kappas)
def test_avar_between_mean_and_max(seed, kappa):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4)
    p = rng.dirichlet(np.ones(4))
    a = avar_sorted(v, p, kappa)
    assert p @ v - 1e-12 <= a <= v[p > 0].max() + 1e-12


def test_avar_batched_risk():
    ev = Evaluator.avar(0.4)
    rng = np.random.default_rng(0)
    v = rng.normal(size=3)
    P = rng.dirichlet(np.ones(3), size=(2, 5))
    batched = ev.risk(v, P)
    assert batched.shape == (2, 5)
    for i in range(2):
        for j in range(5):
            assert batched[i, j] == pytest.approx(avar_sorted(v, P[i, j], 0.4), abs=1e-12)


def test_evaluator_constants():
    assert Evaluator().Cbar == 1.0 and Evaluator().C1 == 1.0
    assert Evaluator.avar(0.25).Cbar == 4.0
    assert Evaluator.avar(1.0).is_linear
    with pytest.raises(InvalidInputError):
        Evaluator.avar(0.0)
    with pytest.raises(InvalidInputError):
        Evaluator("median")


@pytest.mark.parametrize("kappa", [0.1, 0.5, 1.0])
def test_evaluator_audits(kappa):
    res = audit_evaluator(Evaluator.avar(kappa), samples=2000, seed=int(kappa * 10))
    for name, r in res.items():
        assert r["violations"] == 0, (name, r)


def test_expected_sum_is_affine_in_lambda():
    res = audit_evaluator(Evaluator(), samples=2000, seed=1)
    assert res["convexity"]["max_excess"] <= 1e-12


# moduli ---------------------------------------------------------------------------

def test_modulus_forms():
    assert Modulus.zero()(0.3) == 0
    assert Modulus.linear(2, cap=1)(0.3) == pytest.approx(0.6)
    assert Modulus.linear(2, cap=1)(0.9) == 1.0
    assert Modulus("power", K=1.0, alpha=0.5)(0.25) == pytest.approx(0.5)
    assert Modulus.infinite()(1e-9) == math.inf
    assert Modulus.infinite()(0.0) == 0.0
    s = Modulus("sum", parts=(Modulus.linear(1), Modulus("power", K=1, alpha=0.5)))
    assert s(0.04) == pytest.approx(0.24)
    with pytest.raises(InvalidInputError):
        Modulus("linear", K=-1)
    with pytest.raises(InvalidInputError):
        Modulus.linear(1)(-0.1)


@pytest.mark.parametrize("m", [Modulus.linear(3, cap=2), Modulus("power", K=2, alpha=0.3, cap=5),
                               Modulus("inf_over_L", parts=(Modulus.linear(1.5, cap=1),))])
def test_modulus_concave_shape(m):
    xs = np.linspace(0, 3, 31)
    vals = [m(x) for x in xs]
    assert vals[0] == 0
    assert all(b >= a - 1e-9 for a, b in zip(vals, vals[1:]))
    for a in xs[::3]:
        for b in xs[::3]:
            assert m(a + b) <= m(a) + m(b) + 1e-9


def test_modulus_round_trip():
    for m in (Modulus.zero(), Modulus.linear(2, cap=1), Modulus("power", K=2, alpha=0.3),
              Modulus("inf_over_L", parts=(Modulus.linear(1),)), Modulus.infinite()):
        assert Modulus.from_dict(m.to_dict()) == m


def test_dominating():
    assert dominating([Modulus.linear(1), Modulus.linear(3, cap=2)]) == Modulus.linear(3)
    assert dominating([Modulus.linear(1, cap=1), Modulus.linear(3, cap=2)]) == Modulus.linear(3, cap=2)
    assert dominating([Modulus.zero()]).is_zero
    assert dominating([Modulus.linear(1), Modulus.infinite()]).is_infinite


@pytest.mark.parametrize("K", [0.1, 1.0, 4.0])
@pytest.mark.parametrize("slope", [1e-4, 0.01, 0.5])
def test_minimize_over_L_closed_form(K, slope):
    # base K*l: minimise slope*L + 2K/L over L > L0, L0 the root of L = 1 + 2K/L
    L0 = (1 + math.sqrt(1 + 8 * K)) / 2
    Lstar = math.sqrt(2 * K / slope)
    want = 2 * math.sqrt(2 * K * slope) if Lstar >= L0 else slope * L0 + 2 * K / L0
    base = Modulus.linear(K)
    assert L_threshold(base) == pytest.approx(L0, rel=1e-12)
    assert minimize_over_L(slope, base) == pytest.approx(want, rel=1e-9)


def test_minimize_over_L_edge_cases():
    assert minimize_over_L(0.0, Modulus.linear(1)) == 0.0
    assert minimize_over_L(math.inf, Modulus.linear(1)) == math.inf
    assert minimize_over_L(0.1, Modulus.infinite()) == math.inf
    # zero base: L can go to 1 and the value is the slope
    assert minimize_over_L(0.1, Modulus.zero()) == pytest.approx(0.1, rel=1e-9)
