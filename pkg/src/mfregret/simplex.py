"""Dense tableau simplex for small LPs of the form

    maximize c @ x  subject to  A @ x <= b,  x >= 0,  with b >= 0.

The origin is feasible so a single phase suffices.  Bland's rule prevents
cycling; instances here have at most a few dozen rows.
"""
import numpy as np


class UnboundedError(ArithmeticError):
    pass


def solve_max(c, A, b, tol=1e-12, max_pivots=10_000):
    """Return ``(value, x)`` for the LP above."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < -tol):
        raise ValueError("solve_max needs b >= 0 (origin must be feasible)")

    # rows 0..m-1 constraints, row m objective (reduced costs, negated)
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = np.maximum(b, 0.0)
    tab[m, :n] = -c
    basis = list(range(n, n + m))

    for _ in range(max_pivots):
        obj = tab[m, :-1]
        entering = next((j for j in range(n + m) if obj[j] < -tol), None)
        if entering is None:
            break
        col = tab[:m, entering]
        pos = col > tol
        if not pos.any():
            raise UnboundedError("objective is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / col[pos]
        best = ratios.min()
        # Bland: among ties pick the row whose basic variable has lowest index
        cands = [i for i in range(m) if pos[i] and ratios[i] <= best + tol]
        leaving = min(cands, key=lambda i: basis[i])
        tab[leaving] /= tab[leaving, entering]
        for i in range(m + 1):
            if i != leaving and tab[i, entering] != 0.0:
                tab[i] -= tab[i, entering] * tab[leaving]
        basis[leaving] = entering
    else:
        raise RuntimeError("simplex pivot limit reached")

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = tab[i, -1]
    return float(tab[m, -1]), x[:n]
