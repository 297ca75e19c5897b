"""Finite metric spaces, probability vectors and the distances between them."""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .errors import CapacityError, InvalidInputError
from .simplex import solve_max

MASS_TOL = 1e-12
MAX_COVER_POINTS = 8


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Labelled points with a metric matrix, validated on construction."""

    labels: tuple
    metric: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        d = np.array(self.metric, dtype=float)
        m = len(labels)
        if m < 1:
            raise InvalidInputError("a metric space needs at least one point")
        if d.shape != (m, m):
            raise InvalidInputError(f"metric must be {m}x{m}, got {d.shape}")
        if len(set(labels)) != m:
            raise InvalidInputError("point labels must be distinct")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InvalidInputError("metric entries must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise InvalidInputError("metric must have a zero diagonal")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12):
            raise InvalidInputError("metric must be symmetric")
        off = d + np.eye(m)
        if m > 1 and np.any(off[~np.eye(m, dtype=bool)] <= 0):
            raise InvalidInputError("distinct points must be at positive distance")
        # d[i,k] <= d[i,j] + d[j,k] for every triple
        if np.any(d[:, None, :] > d[:, :, None] + d[None, :, :] + 1e-12):
            raise InvalidInputError("metric violates the triangle inequality")
        d.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "metric", d)

    @property
    def size(self):
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return (isinstance(other, FiniteMetricSpace) and self.labels == other.labels
                and np.array_equal(self.metric, other.metric))

    def __hash__(self):
        return hash((self.labels, self.metric.tobytes()))

    def index(self, label):
        return self.labels.index(str(label))

    @property
    def min_separation(self):
        if self.size == 1:
            return math.inf
        return float(np.min(self.metric[~np.eye(self.size, dtype=bool)]))

    def product(self, other):
        """Product space with the sum metric; points ordered row-major."""
        labels = [f"{a}|{b}" for a in self.labels for b in other.labels]
        d = (self.metric[:, None, :, None] + other.metric[None, :, None, :])
        n = self.size * other.size
        return FiniteMetricSpace(labels, d.reshape(n, n))

    @classmethod
    def discrete(cls, m, scale=1.0, prefix="x"):
        return cls([f"{prefix}{i}" for i in range(m)], scale * (1.0 - np.eye(m)))

    @classmethod
    def line(cls, m, step=1.0, prefix="x"):
        pos = step * np.arange(m)
        return cls([f"{prefix}{i}" for i in range(m)], np.abs(pos[:, None] - pos[None, :]))


def check_dist(p, size=None, name="distribution"):
    """Validate a probability vector and return it as a float array."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise InvalidInputError(f"{name} must be a vector")
    if size is not None and p.shape[0] != size:
        raise InvalidInputError(f"{name} has length {p.shape[0]}, expected {size}")
    if not np.all(np.isfinite(p)) or np.any(p < -MASS_TOL):
        raise InvalidInputError(f"{name} has negative or non-finite weights")
    if abs(p.sum() - 1.0) > MASS_TOL * max(1, p.size):
        raise InvalidInputError(f"{name} sums to {p.sum():.15g}, not 1")
    return np.clip(p, 0.0, None)


def check_joint(psi, shape=None, name="joint distribution"):
    psi = np.asarray(psi, dtype=float)
    if psi.ndim != 2 or (shape is not None and psi.shape != tuple(shape)):
        raise InvalidInputError(f"{name} has shape {psi.shape}, expected {shape}")
    check_dist(psi.ravel(), name=name)
    return np.clip(psi, 0.0, None)


def tv_distance(p, q):
    """Half the l1 distance between two probability vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise InvalidInputError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())


def bl_distance(space, p, q, L=1.0):
    """Bounded-Lipschitz distance, with the 1/2 normalisation.

    Solves ``max sum_i (p-q)_i h_i`` over ``|h| <= 1`` and 1-Lipschitz ``h``
    after the shift ``g = h + 1`` so the origin is feasible.  ``L`` scales
    the result, matching the L-BL norm.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    m = space.size
    if p.shape != (m,) or q.shape != (m,):
        raise InvalidInputError(f"distributions must have length {m}, got {p.shape} and {q.shape}")
    delta = p - q
    if m == 1 or not np.any(delta):
        return 0.0
    d = space.metric
    rows, rhs = [], []
    for i in range(m):
        r = np.zeros(m)
        r[i] = 1.0
        rows.append(r)
        rhs.append(2.0)
    for i in range(m):
        for j in range(m):
            if i != j and d[i, j] < 2.0:  # pairs at distance >= 2 cannot bind
                r = np.zeros(m)
                r[i], r[j] = 1.0, -1.0
                rows.append(r)
                rhs.append(d[i, j])
    val, _ = solve_max(delta, np.array(rows), np.array(rhs))
    return float(L) * min(1.0, max(0.0, 0.5 * val))


def _cell_bounds(j):
    centres = -1.0 + (np.arange(j) + 0.5) * (2.0 / j)
    return centres - 1.0 / j, centres + 1.0 / j


@lru_cache(maxsize=256)
def _cover_count(metric_bytes, m, j, node_limit):
    d = np.frombuffer(metric_bytes).reshape(m, m)
    lo, hi = _cell_bounds(j)
    lo = lo.tolist()
    hi = hi.tolist()
    dl = d.tolist()
    chosen = [0] * m
    nodes = 0

    # A box family intersects the 1-Lipschitz functions bounded by 1 iff
    # lo_a - hi_b <= d(a, b) for every ordered pair (difference constraints
    # over a metric only need pairwise checks).
    def dfs(i):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise CapacityError(
                f"covering enumeration exceeded {node_limit} nodes at j={j}; "
                "supply covering numbers externally")
        if i == m:
            return 1
        total = 0
        di = dl[i]
        for k in range(j):
            lk, hk = lo[k], hi[k]
            ok = True
            for b in range(i):
                kb = chosen[b]
                if lk - hi[kb] > di[b] or lo[kb] - hk > di[b]:
                    ok = False
                    break
            if ok:
                chosen[i] = k
                total += dfs(i + 1)
        return total

    return dfs(0)


def covering_number_upper(space, j, node_limit=5_000_000):
    """Upper bound on the number of 1/j-balls covering the BL unit ball.

    Counts grid cells of side 2/j whose closure meets the set of 1-Lipschitz
    functions bounded by 1.  Every such function lies within sup-distance 1/j
    of the centre of its cell, so the count never undercounts.
    """
    j = int(j)
    if j < 1:
        raise InvalidInputError("j must be a positive integer")
    if space.size > MAX_COVER_POINTS:
        raise CapacityError(
            f"covering enumeration supports at most {MAX_COVER_POINTS} points "
            f"(got {space.size}); supply covering numbers externally")
    return _cover_count(np.ascontiguousarray(space.metric).tobytes(), space.size, j, int(node_limit))


def cover_centres(space, j):
    """Enumerate the counted cell centres (small spaces only, for auditing)."""
    lo, hi = _cell_bounds(j)
    centres = 0.5 * (lo + hi)
    d = space.metric
    m = space.size
    out = []
    for idx in np.ndindex(*([j] * m)):
        idx = np.array(idx)
        l, h = lo[idx], hi[idx]
        if np.all(l[:, None] - h[None, :] <= d + 1e-15):
            out.append(centres[idx])
    return np.array(out).reshape(-1, m)


def r_bound(N, space=None, covering=None, j_max=12, return_j=False):
    """Concentration bound min_j 1/(2j) + sqrt(pi) n_j / sqrt(2N).

    ``covering`` may map j to a known covering number; otherwise counts come
    from ``covering_number_upper``.  Large j are skipped once enumeration
    becomes too expensive, which keeps the bound valid.
    """
    if N < 1:
        raise InvalidInputError("N must be positive")
    best, best_j = math.inf, None
    js = sorted(covering) if covering is not None else range(1, j_max + 1)
    for j in js:
        if covering is not None:
            n_j = covering[j]
        else:
            try:
                n_j = covering_number_upper(space, j)
            except CapacityError:
                break
        val = 0.5 / j + math.sqrt(math.pi) * n_j / math.sqrt(2.0 * N)
        if val < best:
            best, best_j = val, j
    return (best, best_j) if return_j else best
