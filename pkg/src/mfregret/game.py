"""Game definitions: spaces, horizon, dynamics, costs, policies, moduli.

Time steps run from 1 to T.  Transition, cost and policy tables are stored
with a leading axis of length T-1 (index t-1); configs may omit that axis
for time-homogeneous tables.  The population measure enters every built-in
family affinely, which makes bound checks exact at simplex vertices.
"""
from dataclasses import dataclass, field
import importlib
import json
import math
import re

import numpy as np

from .errors import ConfigError, InvalidInputError
from .evaluators import Evaluator
from .moduli import Modulus, dominating
from .spaces import FiniteMetricSpace, check_dist

ROW_TOL = 1e-12


def _arr(x, name, ndim=None):
    try:
        a = np.array(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"not a numeric array: {exc}", field=name) from None
    if ndim is not None and a.ndim not in ndim:
        raise ConfigError(f"expected {' or '.join(map(str, ndim))} dimensions, got {a.ndim}", field=name)
    if not np.all(np.isfinite(a)):
        raise ConfigError("entries must be finite", field=name)
    return a


def _timed(a, T, tail_shape, name):
    """Broadcast a table to shape (T-1, *tail_shape)."""
    tail_shape = tuple(tail_shape)
    if a.shape == tail_shape:
        return np.broadcast_to(a, (T - 1,) + tail_shape).copy()
    if a.shape == (T - 1,) + tail_shape:
        return a.copy()
    raise ConfigError(f"shape {a.shape} fits neither {tail_shape} nor {(T - 1,) + tail_shape}", field=name)


def _untimed(a):
    """Drop the time axis when every slice is identical (for serialisation)."""
    if a.shape[0] >= 1 and np.all(a == a[:1]):
        return a[0].tolist()
    return a.tolist()


def _check_rows(P, name):
    if np.any(P < -ROW_TOL):
        raise ConfigError("probability entries must be nonnegative", field=name)
    bad = np.abs(P.sum(axis=-1) - 1.0) > ROW_TOL * max(1, P.shape[-1])
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ConfigError(f"row {idx} sums to {P[idx].sum():.15g}, not 1", field=name)


def _resolve_plugin(ref, name):
    if not isinstance(ref, str) or ":" not in ref:
        raise ConfigError("plugin reference must look like 'module:function'", field=name)
    mod, fn = ref.split(":", 1)
    try:
        return getattr(importlib.import_module(mod), fn)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot import plugin '{ref}': {exc}", field=name) from None


def vertices(n):
    return np.eye(n)


def half_range_lip(rows, metric):
    """For each row h (a function on the points of ``metric``), the constant
    max(half-range, Lipschitz constant).  Then |sum h (p - q)| is at most
    2 * that constant * BL(p, q)."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    R = 0.5 * (rows.max(axis=-1) - rows.min(axis=-1))
    m = metric.shape[0]
    if m == 1:
        lip = np.zeros(rows.shape[0])
    else:
        diff = np.abs(rows[:, :, None] - rows[:, None, :])
        off = ~np.eye(m, dtype=bool)
        lip = (diff[:, off] / metric[off]).max(axis=-1)
    return np.maximum(R, lip)


def _time_check(t, T):
    if not (1 <= t <= T - 1):
        raise InvalidInputError(f"time {t} outside 1..{T - 1}")


# transitions -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class XiIndependent:
    P: np.ndarray  # (T-1, nX, nA, nX)
    kind = "xi_independent"

    def kernel(self, t, xi):
        return self.P[t - 1]

    def to_dict(self):
        return {"kind": self.kind, "P": _untimed(self.P)}


@dataclass(frozen=True, eq=False)
class TableAffine:
    """P = (1 - w) P0 + w P1 with w = clamp(c0 + sum_y c[y] xi(y), 0, 1)."""

    P0: np.ndarray
    P1: np.ndarray
    c0: float
    c: np.ndarray
    kind = "table_affine"

    def weight(self, xi):
        return float(np.clip(self.c0 + self.c @ np.asarray(xi, dtype=float), 0.0, 1.0))

    def kernel(self, t, xi):
        w = self.weight(xi)
        return (1.0 - w) * self.P0[t - 1] + w * self.P1[t - 1]

    def to_dict(self):
        return {"kind": self.kind, "P0": _untimed(self.P0), "P1": _untimed(self.P1),
                "c0": self.c0, "c": self.c.tolist()}


@dataclass(frozen=True, eq=False)
class PluginTransition:
    ref: str
    fn: object = field(repr=False)
    kind = "plugin"

    def kernel(self, t, xi):
        return np.asarray(self.fn(t, np.asarray(xi, dtype=float)), dtype=float)

    def to_dict(self):
        return {"kind": self.kind, "ref": self.ref}


# costs and terminal ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CostFamily:
    """c(t, x, xi, a) = base[t, x, a] + sum_y M[t, x, a, y] xi(y)."""

    base: np.ndarray
    M: np.ndarray = None
    ref: str = None
    fn: object = field(default=None, repr=False)

    def table(self, t, xi):
        if self.fn is not None:
            return np.asarray(self.fn(t, np.asarray(xi, dtype=float)), dtype=float)
        c = self.base[t - 1]
        if self.M is not None:
            c = c + self.M[t - 1] @ np.asarray(xi, dtype=float)
        return c

    def to_dict(self):
        if self.ref is not None:
            return {"kind": "plugin", "ref": self.ref}
        if self.M is None:
            return {"kind": "table", "base": _untimed(self.base)}
        return {"kind": "table_affine", "base": _untimed(self.base), "M": _untimed(self.M)}


@dataclass(frozen=True, eq=False)
class TerminalFamily:
    """V(x, xi) = V0[x] + sum_y M[x, y] xi(y)."""

    V0: np.ndarray
    M: np.ndarray = None
    ref: str = None
    fn: object = field(default=None, repr=False)

    def vector(self, xi):
        if self.fn is not None:
            return np.asarray(self.fn(np.asarray(xi, dtype=float)), dtype=float)
        v = self.V0.copy()
        if self.M is not None:
            v = v + self.M @ np.asarray(xi, dtype=float)
        return v

    def to_dict(self):
        if self.ref is not None:
            return {"kind": "plugin", "ref": self.ref}
        if self.M is None and not np.any(self.V0):
            return {"kind": "zero"}
        d = {"kind": "affine", "V0": self.V0.tolist()}
        if self.M is not None:
            d["M"] = self.M.tolist()
        return d


# policies --------------------------------------------------------------------

class Policy:
    """Symmetric Markov action kernel pi_t(x, xi); ``probs`` returns (nX, nA)."""

    kind = None
    theta = None  # declared modulus, or None to derive

    def probs(self, t, xi):
        raise NotImplementedError

    @property
    def oblivious(self):
        return False


@dataclass(frozen=True, eq=False)
class ObliviousTable(Policy):
    table: np.ndarray  # (T-1, nX, nA)
    theta: Modulus = None
    kind = "oblivious_table"

    def probs(self, t, xi=None):
        return self.table[t - 1]

    @property
    def oblivious(self):
        return True

    def to_dict(self):
        d = {"kind": self.kind, "table": _untimed(self.table)}
        if self.theta is not None:
            d["theta"] = self.theta.to_dict()
        return d


@dataclass(frozen=True, eq=False)
class LogitMeanField(Policy):
    """pi_t(x, xi)(a) proportional to exp(beta*phi[x, a] + rho*sum_y M[a, y] xi(y))."""

    beta: float
    phi: np.ndarray  # (nX, nA)
    rho: float
    M: np.ndarray  # (nA, nX)
    theta: Modulus = None
    kind = "logit_meanfield"

    def probs(self, t, xi):
        s = self.beta * self.phi + self.rho * (self.M @ np.asarray(xi, dtype=float))[None, :]
        s = s - s.max(axis=1, keepdims=True)
        e = np.exp(s)
        return e / e.sum(axis=1, keepdims=True)

    def to_dict(self):
        d = {"kind": self.kind, "theta_coef": self.beta, "phi": self.phi.tolist(),
             "rho": self.rho, "M": self.M.tolist()}
        if self.theta is not None:
            d["theta"] = self.theta.to_dict()
        return d


@dataclass(frozen=True, eq=False)
class Threshold(Policy):
    """Switches between two tables when xi(state) exceeds tau.

    At step t the ``below`` table applies when xi(state[t]) <= tau[t],
    otherwise ``above``.  Discontinuous in xi, so its modulus is infinite.
    """

    state: np.ndarray  # (T-1,) int
    tau: np.ndarray  # (T-1,)
    below: np.ndarray  # (T-1, nX, nA)
    above: np.ndarray
    kind = "threshold"

    @property
    def theta(self):
        return Modulus.infinite()

    def probs(self, t, xi):
        y = int(self.state[t - 1])
        if np.asarray(xi)[y] <= self.tau[t - 1]:
            return self.below[t - 1]
        return self.above[t - 1]

    def to_dict(self):
        return {"kind": self.kind, "state": _untimed(self.state.astype(float)),
                "tau": _untimed(self.tau), "below": _untimed(self.below), "above": _untimed(self.above)}


@dataclass(frozen=True, eq=False)
class PluginPolicy(Policy):
    ref: str
    fn: object = field(repr=False)
    theta: Modulus = None
    kind = "plugin"

    def probs(self, t, xi):
        return np.asarray(self.fn(t, np.asarray(xi, dtype=float)), dtype=float)

    def to_dict(self):
        d = {"kind": self.kind, "ref": self.ref}
        if self.theta is not None:
            d["theta"] = self.theta.to_dict()
        return d


# moduli spec -------------------------------------------------------------------

MODULUS_KEYS = ("eta", "theta", "iota", "zeta")
CONSTANT_KEYS = ("C0", "C1", "Cbar")


@dataclass(frozen=True)
class ModuliSpec:
    """Declared moduli and constants; None means derive from the families."""

    eta: Modulus = None
    theta: Modulus = None
    iota: Modulus = None
    zeta: Modulus = None
    C0: float = None
    C1: float = None
    Cbar: float = None

    def to_dict(self):
        d = {}
        for k in MODULUS_KEYS:
            if getattr(self, k) is not None:
                d[k] = getattr(self, k).to_dict()
        for k in CONSTANT_KEYS:
            if getattr(self, k) is not None:
                d[k] = getattr(self, k)
        return d


# the game ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GameSpec:
    T: int
    states: FiniteMetricSpace
    actions: FiniteMetricSpace
    initial: np.ndarray
    transition: object
    cost: CostFamily
    terminal: TerminalFamily
    moduli: ModuliSpec = field(default_factory=ModuliSpec)
    evaluator: Evaluator = field(default_factory=Evaluator)
    policy: Policy = None
    profile: tuple = None
    name: str = None

    @property
    def nX(self):
        return self.states.size

    @property
    def nA(self):
        return self.actions.size

    def kernel(self, t, xi):
        """Transition tensor P_t(x, xi, a)(y) with shape (nX, nA, nX)."""
        return self.transition.kernel(t, xi)

    def to_dict(self):
        d = {}
        if self.name is not None:
            d["name"] = self.name
        d.update({
            "horizon": self.T,
            "states": {"labels": list(self.states.labels), "metric": self.states.metric.tolist()},
            "actions": {"labels": list(self.actions.labels), "metric": self.actions.metric.tolist()},
            "initial": self.initial.tolist(),
            "transition": self.transition.to_dict(),
            "cost": self.cost.to_dict(),
            "terminal": self.terminal.to_dict(),
            "evaluator": self.evaluator.to_dict(),
        })
        md = self.moduli.to_dict()
        if md:
            d["moduli"] = md
        if self.policy is not None:
            d["policy"] = self.policy.to_dict()
        if self.profile is not None:
            d["profile"] = [p.to_dict() for p in self.profile]
        return d

    def __eq__(self, other):
        return isinstance(other, GameSpec) and self.to_dict() == other.to_dict()

    __hash__ = object.__hash__

    # ---- derived bounds -------------------------------------------------------

    @property
    def C0(self):
        """Sup of |c| over times, states, actions and the simplex."""
        if self.moduli.C0 is not None:
            return float(self.moduli.C0)
        return self.cost_bound()

    def cost_bound(self):
        return max(float(np.abs(self.cost.table(t, v)).max())
                   for t in range(1, self.T) for v in vertices(self.nX))

    def terminal_bound(self):
        """Sup norm of V over the simplex (attained at vertices)."""
        return max(float(np.abs(self.terminal.vector(v)).max()) for v in vertices(self.nX))


# derived moduli ------------------------------------------------------------------

def _tv_rows(P, Q):
    return 0.5 * np.abs(P - Q).sum(axis=-1)


def _action_lipschitz(P, action_metric):
    """max TV(P[..., a, :], P[..., b, :]) / d(a, b) over a != b."""
    nA = action_metric.shape[0]
    if nA == 1:
        return 0.0
    best = 0.0
    for a in range(nA):
        for b in range(a + 1, nA):
            best = max(best, float(_tv_rows(P[..., a, :], P[..., b, :]).max()) / action_metric[a, b])
    return best


def derive_eta(game):
    """Linear modulus for |P(x,xi,a) - P(x,xi',a')|_TV, capped at 1."""
    tr = game.transition
    dA = game.actions.metric
    if isinstance(tr, XiIndependent):
        return Modulus.linear(_action_lipschitz(tr.P, dA), cap=1.0)
    if isinstance(tr, TableAffine):
        K_xi = 2.0 * float(half_range_lip(tr.c, game.states.metric)[0]) * float(_tv_rows(tr.P0, tr.P1).max())
        K_act = max(_action_lipschitz(tr.P0, dA), _action_lipschitz(tr.P1, dA))
        return Modulus.linear(max(K_xi, K_act), cap=1.0)
    return None


def _cost_xi_constant(game):
    c = game.cost
    if c.fn is not None:
        return None
    if c.M is None:
        return 0.0
    rows = c.M.reshape(-1, game.nX)
    return 2.0 * float(half_range_lip(rows, game.states.metric).max())


def derive_iota(game):
    term = game.terminal
    if term.fn is not None:
        return None
    if term.M is None:
        return Modulus.zero()
    return Modulus.linear(2.0 * float(half_range_lip(term.M, game.states.metric).max()))


def derive_theta(policy, game):
    if policy is None:
        return None
    if policy.theta is not None:
        return policy.theta
    if isinstance(policy, ObliviousTable):
        return Modulus.zero()
    if isinstance(policy, LogitMeanField):
        K = 2.0 * abs(policy.rho) * float(half_range_lip(policy.M, game.states.metric).max())
        return Modulus.linear(K, cap=1.0)
    return None


def derive_zeta(game, evaluator, eta):
    """Linear modulus for the score operator's dependence on (xi, lambda).

    The lambda part uses TV <= max(1, 2/d_min) BL on the action space; the
    xi part combines the cost's affine dependence with the transition's
    modulus (scaled by 1/kappa under AVaR).  Capped at 2, which always holds.
    """
    kc = _cost_xi_constant(game)
    if kc is None or eta is None:
        return None
    if eta.is_infinite:
        return Modulus.infinite()
    dmin = game.actions.min_separation
    lam = 2.0 * max(1.0, 2.0 / dmin if dmin != math.inf else 0.0)
    C0 = game.C0
    xi_cost = kc / C0 if C0 > 0 else 0.0
    if eta.kind == "linear":
        K_eta = eta.K
    elif eta.is_zero:
        K_eta = 0.0
    else:
        return None
    return Modulus.linear(lam + xi_cost + 2.0 * K_eta * evaluator.Cbar / evaluator.C1, cap=2.0)


@dataclass(frozen=True)
class ResolvedModuli:
    eta: Modulus
    theta: Modulus
    iota: Modulus
    zeta: Modulus
    C0: float
    C1: float
    Cbar: float
    V_norm: float


def resolve_moduli(game, evaluator=None, policies=None, theta_override=None):
    """Declared moduli where given, derived ones otherwise.

    A modulus that can be neither declared nor derived (plugin families)
    resolves to the infinite marker, so budgets report infinity.
    """
    ev = evaluator or game.evaluator
    md = game.moduli
    inf = Modulus.infinite()
    eta = md.eta or derive_eta(game) or inf
    iota = md.iota or derive_iota(game) or inf
    zeta = md.zeta or derive_zeta(game, ev, eta) or inf
    if theta_override is not None:
        theta = theta_override
    elif md.theta is not None:
        theta = md.theta
    else:
        if policies is None:
            policies = list(game.profile) if game.profile else ([game.policy] if game.policy else [])
        if not policies:
            theta = inf
        else:
            thetas = [derive_theta(p, game) for p in policies]
            theta = inf if any(t is None for t in thetas) else dominating(thetas)
    C1 = md.C1 if md.C1 is not None else ev.C1
    Cbar = md.Cbar if md.Cbar is not None else ev.Cbar
    return ResolvedModuli(eta, theta, iota, zeta, game.C0, float(C1), float(Cbar), game.terminal_bound())


# loading -------------------------------------------------------------------------

def _space(d, name):
    if not isinstance(d, dict) or "labels" not in d:
        raise ConfigError("expected an object with 'labels' and 'metric'", field=name)
    labels = d["labels"]
    if not isinstance(labels, list):
        raise ConfigError("labels must be a list", field=f"{name}.labels")
    metric = d.get("metric")
    if metric is None:
        metric = (1.0 - np.eye(len(labels))).tolist()
    try:
        return FiniteMetricSpace(labels, _arr(metric, f"{name}.metric", (2,)))
    except InvalidInputError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), field=f"{name}.metric") from None


def _modulus(d, name):
    try:
        return Modulus.from_dict(d)
    except InvalidInputError as exc:
        raise ConfigError(str(exc), field=name) from None


def _policy(d, T, nX, nA, name):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("policy must be an object with a 'kind'", field=name)
    kind = d["kind"]
    theta = _modulus(d["theta"], f"{name}.theta") if "theta" in d else None
    if kind == "oblivious_table":
        table = _timed(_arr(d.get("table"), f"{name}.table", (2, 3)), T, (nX, nA), f"{name}.table")
        _check_rows(table, f"{name}.table")
        return ObliviousTable(table, theta)
    if kind == "logit_meanfield":
        phi = _arr(d.get("phi", np.zeros((nX, nA))), f"{name}.phi", (2,))
        M = _arr(d.get("M", np.zeros((nA, nX))), f"{name}.M", (2,))
        if phi.shape != (nX, nA):
            raise ConfigError(f"phi must be {nX}x{nA}", field=f"{name}.phi")
        if M.shape != (nA, nX):
            raise ConfigError(f"M must be {nA}x{nX}", field=f"{name}.M")
        return LogitMeanField(float(d.get("theta_coef", 1.0)), phi, float(d.get("rho", 0.0)), M, theta)
    if kind == "threshold":
        below = _timed(_arr(d.get("below"), f"{name}.below", (2, 3)), T, (nX, nA), f"{name}.below")
        above = _timed(_arr(d.get("above"), f"{name}.above", (2, 3)), T, (nX, nA), f"{name}.above")
        _check_rows(below, f"{name}.below")
        _check_rows(above, f"{name}.above")
        state = _timed(_arr(d.get("state", 0), f"{name}.state", (0, 1)), T, (), f"{name}.state").astype(int)
        tau = _timed(_arr(d.get("tau", 0.0), f"{name}.tau", (0, 1)), T, (), f"{name}.tau")
        if np.any(state < 0) or np.any(state >= nX):
            raise ConfigError("threshold state index out of range", field=f"{name}.state")
        return Threshold(state, tau, below, above)
    if kind == "plugin":
        return PluginPolicy(d.get("ref"), _resolve_plugin(d.get("ref"), f"{name}.ref"), theta)
    raise ConfigError(f"unknown policy kind '{kind}'", field=f"{name}.kind")


def game_from_dict(d):
    """Build and validate a GameSpec from a parsed config object."""
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    known = {"name", "horizon", "states", "actions", "initial", "transition", "cost",
             "terminal", "evaluator", "moduli", "policy", "profile"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", field=sorted(extra)[0])
    for key in ("horizon", "states", "actions", "initial", "transition", "cost"):
        if key not in d:
            raise ConfigError("missing required key", field=key)
    T = d["horizon"]
    if not isinstance(T, int) or isinstance(T, bool) or T < 2:
        raise ConfigError("horizon must be an integer >= 2", field="horizon")
    X = _space(d["states"], "states")
    A = _space(d["actions"], "actions")
    nX, nA = X.size, A.size
    try:
        xi0 = check_dist(_arr(d["initial"], "initial", (1,)), nX, "initial")
    except InvalidInputError as exc:
        raise ConfigError(str(exc).split("] ")[-1], field="initial") from None

    tr = d["transition"]
    if not isinstance(tr, dict) or "kind" not in tr:
        raise ConfigError("transition must be an object with a 'kind'", field="transition")
    shape = (nX, nA, nX)
    if tr["kind"] == "xi_independent":
        P = _timed(_arr(tr.get("P"), "transition.P", (3, 4)), T, shape, "transition.P")
        _check_rows(P, "transition.P")
        transition = XiIndependent(P)
    elif tr["kind"] == "table_affine":
        P0 = _timed(_arr(tr.get("P0"), "transition.P0", (3, 4)), T, shape, "transition.P0")
        P1 = _timed(_arr(tr.get("P1"), "transition.P1", (3, 4)), T, shape, "transition.P1")
        _check_rows(P0, "transition.P0")
        _check_rows(P1, "transition.P1")
        c = _arr(tr.get("c", np.zeros(nX)), "transition.c", (1,))
        if c.shape != (nX,):
            raise ConfigError(f"c must have length {nX}", field="transition.c")
        transition = TableAffine(P0, P1, float(tr.get("c0", 0.0)), c)
    elif tr["kind"] == "plugin":
        transition = PluginTransition(tr.get("ref"), _resolve_plugin(tr.get("ref"), "transition.ref"))
    else:
        raise ConfigError(f"unknown transition kind '{tr['kind']}'", field="transition.kind")

    co = d["cost"]
    if not isinstance(co, dict) or "kind" not in co:
        raise ConfigError("cost must be an object with a 'kind'", field="cost")
    if co["kind"] in ("table", "table_affine"):
        base = _timed(_arr(co.get("base"), "cost.base", (2, 3)), T, (nX, nA), "cost.base")
        M = None
        if co["kind"] == "table_affine":
            M = _timed(_arr(co.get("M"), "cost.M", (3, 4)), T, (nX, nA, nX), "cost.M")
        cost = CostFamily(base, M)
    elif co["kind"] == "plugin":
        cost = CostFamily(None, None, co.get("ref"), _resolve_plugin(co.get("ref"), "cost.ref"))
    else:
        raise ConfigError(f"unknown cost kind '{co['kind']}'", field="cost.kind")

    te = d.get("terminal", {"kind": "zero"})
    if not isinstance(te, dict) or "kind" not in te:
        raise ConfigError("terminal must be an object with a 'kind'", field="terminal")
    if te["kind"] == "zero":
        terminal = TerminalFamily(np.zeros(nX))
    elif te["kind"] == "affine":
        V0 = _arr(te.get("V0", np.zeros(nX)), "terminal.V0", (1,))
        if V0.shape != (nX,):
            raise ConfigError(f"V0 must have length {nX}", field="terminal.V0")
        M = None
        if "M" in te:
            M = _arr(te["M"], "terminal.M", (2,))
            if M.shape != (nX, nX):
                raise ConfigError(f"M must be {nX}x{nX}", field="terminal.M")
        terminal = TerminalFamily(V0, M)
    elif te["kind"] == "plugin":
        terminal = TerminalFamily(None, None, te.get("ref"), _resolve_plugin(te.get("ref"), "terminal.ref"))
    else:
        raise ConfigError(f"unknown terminal kind '{te['kind']}'", field="terminal.kind")

    try:
        evaluator = Evaluator.from_dict(d.get("evaluator"))
    except InvalidInputError as exc:
        raise ConfigError(str(exc), field="evaluator") from None

    mo = d.get("moduli", {})
    if not isinstance(mo, dict):
        raise ConfigError("moduli must be an object", field="moduli")
    extra = set(mo) - set(MODULUS_KEYS) - set(CONSTANT_KEYS)
    if extra:
        raise ConfigError(f"unknown moduli keys {sorted(extra)}", field="moduli")
    kw = {k: _modulus(mo[k], f"moduli.{k}") for k in MODULUS_KEYS if k in mo}
    for k in CONSTANT_KEYS:
        if k in mo:
            val = mo[k]
            if not isinstance(val, (int, float)) or val < 0:
                raise ConfigError("constant must be a nonnegative number", field=f"moduli.{k}")
            kw[k] = float(val)
    moduli = ModuliSpec(**kw)

    raw_policy = d.get("policy")
    greedy = isinstance(raw_policy, dict) and raw_policy.get("kind") == "greedy"
    policy = None
    if raw_policy is not None and not greedy:
        policy = _policy(raw_policy, T, nX, nA, "policy")
    profile = None
    if d.get("profile") is not None:
        if not isinstance(d["profile"], list) or not d["profile"]:
            raise ConfigError("profile must be a nonempty list of policies", field="profile")
        profile = tuple(_policy(p, T, nX, nA, f"profile[{i}]") for i, p in enumerate(d["profile"]))

    game = GameSpec(T, X, A, xi0, transition, cost, terminal, moduli, evaluator, policy, profile,
                    d.get("name"))
    validate_game(game)
    if greedy:
        extra = set(raw_policy) - {"kind"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}", field="policy")
        game = _with_greedy_policy(game)
    return game


def _with_greedy_policy(game):
    """Attach the Bellman-greedy policy along the uniform-policy flow.

    For population-independent games this is an optimal policy, so its
    homogeneous profile has zero regret.
    """
    from dataclasses import replace

    from .meanfield import mf_bellman, roll_flow
    from .regret import terminal_values

    uniform = ObliviousTable(np.full((game.T - 1, game.nX, game.nA), 1.0 / game.nA))
    xi, VM = terminal_values(game, roll_flow(game, uniform))
    _, pol = mf_bellman(game, game.evaluator, xi, VM)
    return replace(game, policy=pol)


def validate_game(game):
    """Eager checks of every invariant that can be verified exactly."""
    nX, nA, T = game.nX, game.nA, game.T
    probes = list(vertices(nX)) + [np.full(nX, 1.0 / nX)]
    for t in range(1, T):
        for xi in probes:
            P = game.kernel(t, xi)
            if P.shape != (nX, nA, nX):
                raise ConfigError(f"kernel at t={t} has shape {P.shape}", field="transition")
            _check_rows(P, "transition")
            c = game.cost.table(t, xi)
            if c.shape != (nX, nA) or not np.all(np.isfinite(c)):
                raise ConfigError(f"cost at t={t} must be a finite {nX}x{nA} table", field="cost")
            for pol, nm in _policies_named(game):
                pr = pol.probs(t, xi)
                if pr.shape != (nX, nA):
                    raise ConfigError(f"policy output at t={t} has shape {pr.shape}", field=nm)
                _check_rows(pr, nm)
    for xi in probes:
        v = game.terminal.vector(xi)
        if v.shape != (nX,) or not np.all(np.isfinite(v)):
            raise ConfigError(f"terminal must be a finite vector of length {nX}", field="terminal")
    if game.moduli.C0 is not None and game.cost_bound() > game.moduli.C0 + 1e-12:
        raise ConfigError(f"declared C0={game.moduli.C0} is below the cost bound {game.cost_bound()}",
                          field="moduli.C0")
    return game


def _policies_named(game):
    out = []
    if game.policy is not None:
        out.append((game.policy, "policy"))
    if game.profile:
        out.extend((p, f"profile[{i}]") for i, p in enumerate(game.profile))
    return out


def load_game(config_text):
    """Parse a JSON config, or a built-in game name, into a GameSpec."""
    from . import builtins

    text = config_text.strip()
    if text in builtins.BUILTINS:
        return game_from_dict(builtins.BUILTINS[text]())
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    try:
        return game_from_dict(d)
    except ConfigError as exc:
        if exc.line is not None or exc.field is None:
            raise
        line = _key_line(text, exc.field)
        msg = str(exc).split("] ", 1)[-1]
        raise ConfigError(msg, field=exc.field, line=line) from None


def _key_line(text, field):
    """Line of the first occurrence of the field's top-level key, if present."""
    key = '"' + re.split(r"[.\[]", field)[0] + '"'
    for i, line in enumerate(text.splitlines(), 1):
        if key in line:
            return i
    return None


def dump_game(game):
    return json.dumps(game.to_dict(), indent=1)


def transition_dist(game, t, x, xi, a):
    _time_check(t, game.T)
    xi = check_dist(xi, game.nX, "xi")
    return game.kernel(t, xi)[x, a].copy()


def policy_dist(policy, t, x, xi, T=None):
    if T is not None:
        _time_check(t, T)
    if t < 1:
        raise InvalidInputError(f"time {t} must be at least 1")
    try:
        return np.asarray(policy.probs(t, xi))[x].copy()
    except IndexError:
        raise InvalidInputError(f"time {t} outside the policy's horizon") from None


def terminal_vector(game, xi_T):
    xi_T = check_dist(xi_T, game.nX, "xi_T")
    return game.terminal.vector(xi_T)


def cost_table(game, t, xi):
    _time_check(t, game.T)
    return game.cost.table(t, xi)
