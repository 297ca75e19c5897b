"""Hot loops over the product space X^N.

States are indexed row-major with player 1 as the most significant digit.
Each kernel has a numba version and a vectorised numpy version; the numba
one is used when ``NUMBA_ENABLED``.  Both sum in a fixed order per output
entry, so results do not depend on the thread schedule.
"""
import numpy as np

from ._accel import NUMBA_ENABLED, njit, prange

CHUNK_ELEMS = 1 << 22


# ---- contraction of players 2..N -------------------------------------------

@njit(parallel=True)
def _contract_nb(u, R, N, nX):
    S = u.shape[0]
    W = np.empty((S, nX))
    for s in prange(S):
        buf = u.copy()
        size = S
        for n in range(N - 1, 0, -1):
            size_new = size // nX
            for i in range(size_new):
                acc = 0.0
                for y in range(nX):
                    acc += buf[i * nX + y] * R[s, n, y]
                buf[i] = acc
            size = size_new
        for y in range(nX):
            W[s, y] = buf[y]
    return W


def _contract_np(u, R, N, nX):
    S = u.shape[0]
    W = np.empty((S, nX))
    B = max(1, CHUNK_ELEMS // S)
    for lo in range(0, S, B):
        hi = min(S, lo + B)
        buf = np.broadcast_to(u, (hi - lo, S))
        for n in range(N - 1, 0, -1):
            buf = buf.reshape(hi - lo, -1, nX)
            buf = np.einsum("bij,bj->bi", buf, R[lo:hi, n])
        W[lo:hi] = buf.reshape(hi - lo, nX)
    return W


def contract_others(u, R, N, nX):
    """W[s, y1] = sum over y2..yN of u(y) * prod_{n>=2} R[s, n, y_n]."""
    u = np.ascontiguousarray(u, dtype=float)
    R = np.ascontiguousarray(R, dtype=float)
    if NUMBA_ENABLED:
        return _contract_nb(u, R, N, nX)
    return _contract_np(u, R, N, nX)


# ---- forward propagation of the joint law ------------------------------------

@njit(parallel=True)
def _forward_nb(mu, R, digits):
    S, N = digits.shape
    out = np.empty(S)
    for y in prange(S):
        acc = 0.0
        for s in range(S):
            m = mu[s]
            if m == 0.0:
                continue
            p = m
            for n in range(N):
                p *= R[s, n, digits[y, n]]
                if p == 0.0:
                    break
            acc += p
        out[y] = acc
    return out


def _forward_np(mu, R, digits):
    S, N = digits.shape
    nX = R.shape[2]
    support = np.nonzero(mu)[0]
    out = np.zeros(S)
    B = max(1, CHUNK_ELEMS // S)
    for lo in range(0, support.size, B):
        idx = support[lo:lo + B]
        J = R[idx, 0]
        for n in range(1, N):
            J = (J[:, :, None] * R[idx, n][:, None, :]).reshape(idx.size, -1)
        out += mu[idx] @ J
    return out


def forward_law(mu, R, digits):
    """mu_next[y] = sum_s mu[s] * prod_n R[s, n, y_n]."""
    mu = np.ascontiguousarray(mu, dtype=float)
    R = np.ascontiguousarray(R, dtype=float)
    if NUMBA_ENABLED:
        return _forward_nb(mu, R, np.ascontiguousarray(digits))
    return _forward_np(mu, R, digits)


# ---- AVaR over action profiles --------------------------------------------------

@njit(parallel=True)
def _avar_profiles_nb(u_sorted, digits_sorted, P1, P, lam, kappa):
    S, N = digits_sorted.shape
    nA = P1.shape[1]
    n_prof = 1
    for _ in range(N - 1):
        n_prof *= nA
    out = np.zeros((S, nA))
    for s in prange(S):
        prof = np.zeros(N, dtype=np.int64)
        for a1 in range(nA):
            total = 0.0
            for k in range(n_prof):
                rem = k
                w = 1.0
                for n in range(N - 1, 0, -1):
                    prof[n] = rem % nA
                    rem //= nA
                    w *= lam[s, n, prof[n]]
                if w == 0.0:
                    continue
                cum = 0.0
                acc = 0.0
                for i in range(S):
                    p = P1[s, a1, digits_sorted[i, 0]]
                    for n in range(1, N):
                        if p == 0.0:
                            break
                        p *= P[s, n, prof[n], digits_sorted[i, n]]
                    if p > 0.0:
                        m = kappa - cum
                        if m > p:
                            m = p
                        if m > 0.0:
                            acc += m * u_sorted[i]
                        cum += p
                        if cum >= kappa:
                            break
                total += w * acc / kappa
            out[s, a1] = total
    return out


def _avar_profiles_np(u_sorted, digits_sorted, P1, P, lam, kappa):
    S, N = digits_sorted.shape
    nA = P1.shape[1]
    out = np.empty((S, nA))
    for s in range(S):
        J = P1[s][:, digits_sorted[:, 0]]  # (nA, S) in sorted order
        w = np.ones(1)
        for n in range(1, N):
            Pn = P[s, n][:, digits_sorted[:, n]]  # (nA, S)
            J = (J[:, None, :] * Pn[None, :, :]).reshape(-1, S)
            w = (w[:, None] * lam[s, n][None, :]).ravel()
        J = J.reshape(nA, -1, S)
        before = np.cumsum(J, axis=-1) - J
        m = np.clip(kappa - before, 0.0, J)
        vals = (m * u_sorted).sum(axis=-1) / kappa
        out[s] = vals @ w
    return out


def avar_profiles(u, digits, P1, P, lam, kappa):
    """Continuation AVaR for player 1 under each own action.

    out[s, a1] = sum over others' actions of prod_n lam[s, n, a_n] times
    AVaR_kappa of u under P1[s, a1] x prod_{n>=2} P[s, n, a_n].
    """
    order = np.argsort(-np.asarray(u), kind="stable")
    u_sorted = np.ascontiguousarray(np.asarray(u, dtype=float)[order])
    d_sorted = np.ascontiguousarray(digits[order])
    args = (u_sorted, d_sorted, np.ascontiguousarray(P1, dtype=float),
            np.ascontiguousarray(P, dtype=float), np.ascontiguousarray(lam, dtype=float), float(kappa))
    if NUMBA_ENABLED:
        return _avar_profiles_nb(*args)
    return _avar_profiles_np(*args)
