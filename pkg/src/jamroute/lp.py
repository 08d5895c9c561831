"""Dense tableau simplex for ``max c.x  s.t.  A x <= b, x >= 0`` with ``b >= 0``.

Bland's rule picks the entering and leaving variables, so the method cannot
cycle on the heavily degenerate scheduling LPs. The slack basis is feasible
because ``b >= 0``, so no phase one is needed.
"""

from __future__ import annotations

import numpy as np

from .errors import LPError

PIVOT_TOL = 1e-12


def simplex_max(c, A, b, max_iter: int = 10_000):
    """Return ``(x, objective)`` at an optimal vertex."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float).reshape(-1, c.size)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise LPError(f"b has shape {b.shape}, expected ({m},)")
    if np.any(b < 0):
        raise LPError("simplex_max needs b >= 0 (origin must be feasible)")

    # rows: constraints; last row: reduced costs (negated objective)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    trace = []

    for it in range(max_iter):
        enter = next((j for j in range(n + m) if T[m, j] < -PIVOT_TOL), None)
        if enter is None:
            break
        col = T[:m, enter]
        rows = [i for i in range(m) if col[i] > PIVOT_TOL]
        if not rows:
            raise LPError(f"unbounded along variable {enter}", trace)
        ratios = [T[i, -1] / col[i] for i in rows]
        best = min(ratios)
        # Bland: among tied rows, leave with the smallest basic index
        leave = min((i for i, r in zip(rows, ratios) if r <= best + PIVOT_TOL),
                    key=lambda i: basis[i])
        trace.append((it, enter, basis[leave], float(T[m, -1])))
        T[leave] /= T[leave, enter]
        for i in range(m + 1):
            if i != leave and T[i, enter] != 0.0:
                T[i] -= T[i, enter] * T[leave]
        basis[leave] = enter
    else:
        raise LPError(f"no optimum after {max_iter} pivots", trace[-20:])

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    return x[:n], float(T[m, -1])
