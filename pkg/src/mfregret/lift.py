"""Lifting N-player profiles to mean field flows, and the error budgets."""
from dataclasses import asdict, dataclass, field
import math

import numpy as np

from .errors import InvalidInputError
from .game import Policy, resolve_moduli
from .meanfield import MeanFieldFlow, push
from .moduli import GOLDEN_ITERS, L_MAX, Modulus, minimize_over_L
from .nplayer import PolicyProfile
from .spaces import r_bound


def lift_flow(game, profile):
    """Average flow of the profile's players in the averaged environment.

    Each player's own state law is propagated with its policy evaluated at
    the current population average; the joint at step t averages
    m^n_t x pi^n_t(., xi_t).  Identical policies share one propagation.
    """
    if isinstance(profile, Policy):
        profile = PolicyProfile((profile,))
    groups = profile.groups()
    N = profile.N
    weights = np.array([k / N for _, k in groups])
    laws = [game.initial.copy() for _ in groups]
    joints = []
    for t in range(1, game.T):
        xi = sum(w * m for w, m in zip(weights, laws))
        parts = [m[:, None] * p.probs(t, xi) for (p, _), m in zip(groups, laws)]
        joints.append(sum(w * psi for w, psi in zip(weights, parts)))
        laws = [push(game, t, xi, psi) for psi in parts]
    return MeanFieldFlow(np.array(joints))


def induced_profile(flow, N):
    """Homogeneous profile of the flow's induced (oblivious) kernels."""
    from .meanfield import induced_policy

    return PolicyProfile.homogeneous(induced_policy(flow), N)


@dataclass(frozen=True)
class ErrorBudget:
    N: int
    r: float
    r_j: int
    e: tuple
    E: float
    e_bold: tuple
    E_script: float
    settings: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["e"] = list(self.e)
        d["e_bold"] = list(self.e_bold)
        return d


def _growth(C0, C1, r, z):
    return C0 * sum(C1 ** (k - 1) for k in range(1, r + 1)) + C1 ** r * z


def e_sequence(T, N, r, eta, theta):
    """e_1 = r and e_t = 2 inf_L {sum_{s<t} (L theta + eta)(e_s) + eta(2/L)} + t/N + r."""
    e = [r]
    for t in range(2, T + 1):
        if any(math.isinf(x) for x in e):
            e.append(math.inf)
            continue
        slope = sum(theta(x) for x in e)
        shift = sum(eta(x) for x in e)
        inner = shift + minimize_over_L(slope, eta)
        e.append(2.0 * inner + t / N + r)
    return e


def e_bold_sequence(T, N, r, eta):
    e = [r]
    for t in range(2, T + 1):
        e.append(2.0 * sum(eta(x) for x in e) + t / N + r)
    return e


def big_E(T, e, mod, theta):
    """The N-player/mean-field regret gap budget built from e_1..e_T."""
    if any(math.isinf(x) for x in e):
        return math.inf
    C0, C1, Cb, Vn = mod.C0, mod.C1, mod.Cbar, mod.V_norm
    zeta, iota = mod.zeta, mod.iota
    c = lambda r: _growth(C0, C1, r, Vn)
    eT = e[T - 1]
    total = 0.0
    for t in range(1, T):
        inner = sum(Cb ** (r - t) * c(T - r) * zeta(e[r - 1]) for r in range(t, T))
        inner += Cb ** (T - t) * iota(eT)
        total += (T + 1 - t) * inner
    total *= 1.0 + Cb
    total += Cb * iota(eT)
    for t in range(1, T):
        et = e[t - 1]
        total += c(T - t) * (zeta(theta(et)) + zeta(et) + et)
    return total


def big_E_script(T, e_bold, mod):
    if any(math.isinf(x) for x in e_bold):
        return math.inf
    C0, C1, Cb, Vn = mod.C0, mod.C1, mod.Cbar, mod.V_norm
    c = lambda r: _growth(C0, C1, r, Vn)
    s = sum(Cb ** r * c(T - r) * mod.zeta(e_bold[r - 1]) for r in range(1, T))
    s += Cb ** T * mod.iota(e_bold[T - 1])
    return (T + 1) * s


def error_budget(game, evaluator=None, N=1, theta_override=None, profile=None, j_max=12, covering=None):
    """All budgets at population size N.

    ``theta_override`` replaces the policy modulus (pass ``Modulus.zero()``
    for the constructed-equilibrium budget); otherwise the modulus is taken
    from ``profile``, then from the game's declared modulus or policies.
    """
    if N < 1:
        raise InvalidInputError("N must be positive")
    policies = list(profile.policies) if profile is not None else None
    mod = resolve_moduli(game, evaluator, policies, theta_override)
    r, j = r_bound(N, game.states, covering=covering, j_max=j_max, return_j=True)
    T = game.T
    e = e_sequence(T, N, r, mod.eta, mod.theta)
    eb = e_bold_sequence(T, N, r, mod.eta)
    settings = {
        "j_grid": sorted(covering) if covering is not None else list(range(1, j_max + 1)),
        "L_max": L_MAX,
        "golden_iterations": GOLDEN_ITERS,
        "moduli": {k: getattr(mod, k).to_dict() for k in ("eta", "theta", "iota", "zeta")},
        "C0": mod.C0, "C1": mod.C1, "Cbar": mod.Cbar, "V_norm": mod.V_norm,
    }
    return ErrorBudget(N, r, j, tuple(e), big_E(T, e, mod, mod.theta), tuple(eb),
                       big_E_script(T, eb, mod), settings)
