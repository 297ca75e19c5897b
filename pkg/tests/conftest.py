"""Shared helpers: random small games and profiles."""
import numpy as np
import pytest

from mfregret.evaluators import Evaluator
from mfregret.game import (CostFamily, GameSpec, ObliviousTable, TableAffine, TerminalFamily,
                           XiIndependent)
from mfregret.spaces import FiniteMetricSpace


def rand_rows(rng, shape):
    return rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])


def random_game(rng, nX=2, nA=2, T=3, affine=True, evaluator=None, policy=True):
    """A game with xi-affine kernels, costs and terminal values in [0, 1]."""
    X = FiniteMetricSpace.discrete(nX)
    A = FiniteMetricSpace.discrete(nA)
    xi0 = rng.dirichlet(np.ones(nX))
    if affine:
        tr = TableAffine(rand_rows(rng, (T - 1, nX, nA, nX)), rand_rows(rng, (T - 1, nX, nA, nX)),
                         0.0, rng.uniform(0, 1, nX))
        cost = CostFamily(rng.uniform(0, 0.5, (T - 1, nX, nA)), rng.uniform(0, 0.5, (T - 1, nX, nA, nX)))
        term = TerminalFamily(rng.uniform(0, 0.5, nX), rng.uniform(0, 0.5, (nX, nX)))
    else:
        tr = XiIndependent(rand_rows(rng, (T - 1, nX, nA, nX)))
        cost = CostFamily(rng.uniform(0, 1, (T - 1, nX, nA)))
        term = TerminalFamily(rng.uniform(0, 1, nX))
    pol = random_policy(rng, T, nX, nA) if policy else None
    return GameSpec(T, X, A, xi0, tr, cost, term, evaluator=evaluator or Evaluator(), policy=pol)


def random_policy(rng, T, nX, nA):
    return ObliviousTable(rand_rows(rng, (T - 1, nX, nA)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
