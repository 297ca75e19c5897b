"""Concave moduli of continuity with an optional ceiling.

Supported forms are ``zero``, ``linear`` (K*l), ``power`` (K*l**alpha),
``inf`` (infinite for every l > 0, used for discontinuous families),
``sum`` (a finite sum of other moduli) and ``inf_over_L``, which evaluates
``inf_{L > 1 + base(2/L)} { L*l + base(2/L) }`` for a base modulus.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InvalidInputError

KINDS = ("zero", "linear", "power", "inf", "sum", "inf_over_L")
L_MAX = 1e6
GOLDEN_ITERS = 200


@dataclass(frozen=True)
class Modulus:
    kind: str = "zero"
    K: float = 0.0
    alpha: float = 1.0
    cap: float = math.inf
    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown modulus kind '{self.kind}'")
        if self.K < 0 or not (0 < self.alpha <= 1) or self.cap < 0:
            raise InvalidInputError("modulus needs K >= 0, alpha in (0,1], cap >= 0")
        if self.kind == "inf_over_L" and len(self.parts) != 1:
            raise InvalidInputError("inf_over_L needs exactly one base modulus")

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def linear(cls, K, cap=math.inf):
        if K == 0:
            return cls("zero")
        return cls("linear", K=float(K), cap=float(cap))

    @classmethod
    def infinite(cls):
        return cls("inf")

    @property
    def is_zero(self):
        if self.kind == "sum":
            return all(p.is_zero for p in self.parts)
        return self.kind == "zero" or (self.kind in ("linear", "power") and self.K == 0) or self.cap == 0

    @property
    def is_infinite(self):
        if self.kind == "sum":
            return any(p.is_infinite for p in self.parts)
        return self.kind == "inf" and self.cap == math.inf

    def __call__(self, ell):
        ell = float(ell)
        if ell < 0:
            raise InvalidInputError("moduli are evaluated at nonnegative arguments")
        if ell == 0 or self.is_zero:
            return 0.0
        k = self.kind
        if k == "linear":
            val = self.K * ell if ell != math.inf else math.inf
        elif k == "power":
            val = self.K * ell ** self.alpha
        elif k == "inf":
            val = math.inf
        elif k == "sum":
            val = sum(p(ell) for p in self.parts)
        else:
            base = self.parts[0]
            val = ell_inf_over_L(ell, base) if ell != math.inf else math.inf
        return min(val, self.cap)

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind in ("linear", "power"):
            d["K"] = self.K
        if self.kind == "power":
            d["alpha"] = self.alpha
        if self.cap != math.inf:
            d["cap"] = self.cap
        if self.parts:
            d["parts"] = [p.to_dict() for p in self.parts]
        return d

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, (int, float)):
            return cls.linear(float(d))
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidInputError("modulus must be an object with a 'kind'")
        extra = set(d) - {"kind", "K", "alpha", "cap", "parts"}
        if extra:
            raise InvalidInputError(f"unknown modulus keys {sorted(extra)}")
        parts = tuple(cls.from_dict(p) for p in d.get("parts", ()))
        return cls(d["kind"], K=float(d.get("K", 0.0)), alpha=float(d.get("alpha", 1.0)),
                   cap=float(d.get("cap", math.inf)), parts=parts)


def dominating(moduli):
    """A single modulus bounding each of ``moduli`` pointwise."""
    moduli = [m for m in moduli if not m.is_zero]
    if not moduli:
        return Modulus.zero()
    if any(m.is_infinite for m in moduli):
        return Modulus.infinite()
    if len(moduli) == 1:
        return moduli[0]
    if all(m.kind == "linear" for m in moduli):
        return Modulus("linear", K=max(m.K for m in moduli), cap=max(m.cap for m in moduli))
    return Modulus("sum", parts=tuple(moduli))


def L_threshold(base):
    """Smallest L with L >= 1 + base(2/L); the admissible set is (L0, inf)."""
    g = lambda L: L - 1.0 - base(2.0 / L)
    lo, hi = 1.0, 2.0
    while g(hi) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    return hi


def minimize_over_L(slope, base, L_max=L_MAX, iters=GOLDEN_ITERS):
    """inf over L > 1 + base(2/L) of slope*L + base(2/L).

    With slope 0 the objective decreases to base(0+) = 0 as L grows, so the
    infimum is 0.  Otherwise a log grid brackets the minimum and a
    golden-section search refines it.
    """
    if slope == math.inf or base.is_infinite:
        return math.inf
    if slope < 0:
        raise InvalidInputError("slope must be nonnegative")
    if slope == 0:
        return 0.0
    L0 = L_threshold(base)
    if L0 == math.inf:
        return math.inf
    f = lambda L: slope * L + base(2.0 / L)
    hi_end = max(L_max, 2.0 * L0)
    grid = np.geomspace(L0, hi_end, 400)
    vals = np.array([f(L) for L in grid])
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return float(min(vals[k], fc, fd, f(L0)))


def ell_inf_over_L(ell, base):
    return minimize_over_L(ell, base)
