"""Score-operator families: expected total cost and average value at risk."""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Evaluator:
    """A one-step evaluation family.

    ``expected_sum`` scores an action by cost plus the expected continuation
    value.  ``avar`` replaces the expectation with the average value at risk
    at level ``kappa``, which makes the contraction constant ``1/kappa``.
    """

    kind: str = "expected_sum"
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in ("expected_sum", "avar"):
            raise InvalidInputError(f"unknown evaluator kind '{self.kind}'")
        if not (0.0 < self.kappa <= 1.0):
            raise InvalidInputError("kappa must lie in (0, 1]")
        if self.kind == "expected_sum" and self.kappa != 1.0:
            raise InvalidInputError("kappa only applies to the avar evaluator")

    @classmethod
    def expected_sum(cls):
        return cls("expected_sum")

    @classmethod
    def avar(cls, kappa):
        return cls("avar", float(kappa))

    @property
    def is_linear(self):
        return self.kind == "expected_sum" or self.kappa == 1.0

    @property
    def C1(self):
        return 1.0

    @property
    def Cbar(self):
        return 1.0 if self.kind == "expected_sum" else 1.0 / self.kappa

    def risk(self, values, probs):
        """Expectation or AVaR of ``values`` (last axis) under ``probs``.

        ``probs`` may carry leading batch axes; ``values`` broadcasts.
        """
        probs = np.asarray(probs, dtype=float)
        values = np.asarray(values, dtype=float)
        if self.is_linear:
            return (probs * values).sum(axis=-1)
        return avar_breakpoints(values, probs, self.kappa)

    def initial(self, values, xi0):
        """The initial functional applied to values under the initial law."""
        return float(self.risk(values, xi0))

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "avar":
            d["kappa"] = self.kappa
        return d

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        if not isinstance(d, dict) or "kind" not in d:
            raise InvalidInputError("evaluator must be an object with a 'kind'")
        extra = set(d) - {"kind", "kappa"}
        if extra:
            raise InvalidInputError(f"unknown evaluator keys {sorted(extra)}")
        if d["kind"] == "expected_sum":
            return cls()
        return cls(d["kind"], float(d.get("kappa", 1.0)))


def avar_breakpoints(values, probs, kappa):
    """AVaR_kappa via the minimum of the piecewise-linear objective.

    obj(q) = q + (1/kappa) * sum_i p_i (v_i - q)_+ is convex and piecewise
    linear with kinks at the atoms, so its minimum sits at one of them.
    """
    v = np.broadcast_to(np.asarray(values, dtype=float), np.shape(probs))
    p = np.asarray(probs, dtype=float)
    q = v[..., :, None]  # candidate breakpoints
    excess = np.clip(v[..., None, :] - q, 0.0, None)
    obj = q[..., 0] + (excess * p[..., None, :]).sum(axis=-1) / kappa
    # atoms with zero mass are still valid candidates: the objective is
    # defined for every real q
    return obj.min(axis=-1)


def avar_sorted(values, probs, kappa):
    """AVaR_kappa of a single discrete distribution by tail accumulation."""
    v = np.asarray(values, dtype=float)
    p = np.asarray(probs, dtype=float)
    order = np.argsort(-v, kind="stable")
    vs, ps = v[order], p[order]
    before = np.concatenate(([0.0], np.cumsum(ps)[:-1]))
    m = np.clip(kappa - before, 0.0, ps)
    return float((m * vs).sum() / kappa)
