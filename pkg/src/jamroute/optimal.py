"""Brute-force optimum: every simple path, exact outage, optimal power split.

For a fixed path the problem is::

    minimise sum(P_k)  subject to  g(P) = -log(1 - pi)

where ``g(P) = -sum_k log(success_k(P_k))`` is separable and decreasing in
every ``P_k``. Stationarity ``1 = lam * (-dg/dP_k)`` has a unique root in
each ``P_k`` for fixed ``lam`` (the right side falls monotonically in
``P_k``), and ``g(P(lam))`` falls monotonically in ``lam``, so two nested
bisections find the KKT point. Paths with the same hop count are solved
together as one array problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, NetworkInstance, log_success_exact
from .errors import ConvergenceError, DomainError, PathOverflowError
from .routing import OPTIMAL, RoutePlan, _check_pi, _path_arrays, plan_from_powers

INNER_RTOL = 1e-12
OUTER_ATOL = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class PathEnumConfig:
    max_hops: int | None = None  # None means N - 1
    max_paths: int = 10**6
    on_overflow: str = "error"  # or "truncate"

    def __post_init__(self):
        if self.max_hops is not None and self.max_hops < 1:
            raise DomainError("max_hops must be >= 1")
        if self.max_paths < 1:
            raise DomainError("max_paths must be >= 1")
        if self.on_overflow not in ("error", "truncate"):
            raise DomainError(f"unknown overflow policy {self.on_overflow!r}")


class PathSet(list):
    """List of paths with a flag telling whether enumeration was cut short."""

    truncated = False


def enumerate_paths(inst: NetworkInstance, cfg: PathEnumConfig | None = None) -> PathSet:
    """All simple source-destination paths, in lexicographic order."""
    cfg = cfg or PathEnumConfig()
    max_hops = cfg.max_hops if cfg.max_hops is not None else inst.n - 1
    s, d = inst.source, inst.dest
    relays = [v for v in range(inst.n) if v not in (s, d)]
    out = PathSet()
    candidates = sorted(relays + [d])
    stack = [s]
    used = {s}

    def visit(u) -> bool:
        hops = len(stack) - 1
        for v in candidates:
            if v in used or hops + 1 > max_hops:
                continue
            if v == d:
                if len(out) >= cfg.max_paths:
                    if cfg.on_overflow == "error":
                        raise PathOverflowError(
                            f"more than {cfg.max_paths} paths between {s} and {d}")
                    out.truncated = True
                    return False
                out.append(tuple(stack) + (d,))
                continue
            stack.append(v)
            used.add(v)
            ok = visit(v)
            stack.pop()
            used.discard(v)
            if not ok:
                return False
        return True

    visit(s)
    return out


def _neg_grad_times_p2(p, a_noise, a_jam, q):
    """``P**2 * (-dg/dP)`` for each link: noise term plus jammer terms."""
    out = a_noise.copy()
    if a_jam.shape[-1]:
        x = a_jam / p[..., None]
        if q == 1.0:
            out = out + (a_jam / (1.0 + x)).sum(axis=-1)
        else:
            out = out + (q * a_jam / ((1.0 + x) * (q + (1.0 - q) * (1.0 + x)))).sum(axis=-1)
    return out


def _powers_for_multiplier(lam, a_noise, a_jam, q):
    """Solve ``P**2 = lam * (P**2 * -dg/dP)`` per link by log-space bisection."""
    lam = lam[:, None]
    lo = np.sqrt(lam * a_noise)
    hi = np.sqrt(lam * (a_noise + q * a_jam.sum(axis=-1)))
    for _ in range(MAX_ITER):
        if np.all(hi <= lo * (1.0 + INNER_RTOL)):
            break
        mid = np.sqrt(lo * hi)
        too_low = mid * mid < lam * _neg_grad_times_p2(mid, a_noise, a_jam, q)
        lo = np.where(too_low, mid, lo)
        hi = np.where(too_low, hi, mid)
    else:
        raise ConvergenceError("inner power bisection did not converge")
    return np.sqrt(lo * hi)


def solve_kkt(d_alpha: np.ndarray, ratios: np.ndarray, pi: float,
              params: ChannelParams) -> tuple[np.ndarray, np.ndarray]:
    """Optimal powers for a batch of equal-length paths.

    ``d_alpha`` has shape (B, H), ``ratios`` shape (B, H, J). Returns powers
    (B, H) and multipliers (B,).
    """
    d_alpha = np.atleast_2d(np.asarray(d_alpha, dtype=float))
    ratios = np.asarray(ratios, dtype=float).reshape(d_alpha.shape + (-1,))
    c = -np.log1p(-_check_pi(pi))
    a_noise = params.gamma * params.n0 * d_alpha
    a_jam = params.gamma * d_alpha[..., None] * ratios
    q = params.q

    def constraint(lam):
        p = _powers_for_multiplier(lam, a_noise, a_jam, q)
        return -log_success_exact(p, d_alpha, ratios, params).sum(axis=-1), p

    # jammer-free multiplier as the starting point
    lam_lo = (np.sqrt(a_noise).sum(axis=-1) / c) ** 2
    lam_hi = lam_lo.copy()
    for _ in range(MAX_ITER):
        g, _ = constraint(lam_lo)
        bad = g < c
        if not bad.any():
            break
        lam_lo = np.where(bad, lam_lo / 4.0, lam_lo)
    else:
        raise ConvergenceError("could not bracket the multiplier from below")
    for _ in range(MAX_ITER):
        g, _ = constraint(lam_hi)
        bad = g > c
        if not bad.any():
            break
        lam_hi = np.where(bad, lam_hi * 4.0, lam_hi)
    else:
        raise ConvergenceError("could not bracket the multiplier from above")

    for _ in range(MAX_ITER):
        lam = np.sqrt(lam_lo * lam_hi)
        g, p = constraint(lam)
        if np.all(np.abs(g - c) <= 1e-12) or np.all(lam_hi <= lam_lo * (1 + 1e-14)):
            break
        low = g > c
        lam_lo = np.where(low, lam, lam_lo)
        lam_hi = np.where(low, lam_hi, lam)
    else:
        raise ConvergenceError("multiplier bisection hit the iteration cap")
    worst = float(np.max(np.abs(g - c)))
    if worst > OUTER_ATOL:
        raise ConvergenceError(f"constraint residual {worst:.3g} above {OUTER_ATOL}")
    return p, lam


def optimal_power_for_path(path, inst: NetworkInstance, pi: float) -> np.ndarray:
    """KKT-optimal powers for one path under the exact outage constraint."""
    if len(path) < 2 or path[0] != inst.source or path[-1] != inst.dest:
        raise DomainError("path must run from source to destination")
    d_alpha, ratios = _path_arrays(inst, list(path))
    p, _ = solve_kkt(d_alpha[None, :], ratios[None, ...], pi, inst.params)
    return p[0]


def path_cost_bounds(inst: NetworkInstance, paths, pi: float):
    """Jammer-free lower bound and exponential-bound upper bound on each path's cost."""
    params = inst.params
    c = -np.log1p(-_check_pi(pi))
    w_lo = np.sqrt(params.gamma * params.n0 * inst.dist_alpha)
    w_hi = np.sqrt(params.gamma * inst.dist_alpha * (params.n0 + inst.jamming)[None, :])
    lo = np.empty(len(paths))
    hi = np.empty(len(paths))
    for i, path in enumerate(paths):
        tx, rx = path[:-1], path[1:]
        lo[i] = w_lo[tx, rx].sum() ** 2 / c
        hi[i] = w_hi[tx, rx].sum() ** 2 / c
    return lo, hi


def brute_force_route(inst: NetworkInstance, pi: float, cfg: PathEnumConfig | None = None,
                      batch: int = 256) -> RoutePlan:
    """Globally cheapest path over all enumerated paths.

    The jammer-free cost never exceeds the exact cost, and the exponential
    bound never undercuts it, so paths whose lower bound already exceeds the
    best cost found are skipped without solving. The result is identical to
    solving every path.
    """
    pi = _check_pi(pi)
    paths = enumerate_paths(inst, cfg)
    lo, hi = path_cost_bounds(inst, paths, pi)
    incumbent = float(hi.min()) * (1 + 1e-9)
    order = sorted((i for i in range(len(paths)) if lo[i] <= incumbent),
                   key=lambda i: (lo[i], len(paths[i]), paths[i]))
    best = None  # (total, hops, path, powers)
    pos = 0
    while pos < len(order):
        bound = best[0] if best is not None else incumbent
        chunk = [i for i in order[pos:pos + batch] if lo[i] <= bound * (1 + 1e-12)]
        pos += batch
        if not chunk:
            break
        by_len: dict[int, list[int]] = {}
        for i in chunk:
            by_len.setdefault(len(paths[i]), []).append(i)
        for length, idx in sorted(by_len.items()):
            arrs = [_path_arrays(inst, list(paths[i])) for i in idx]
            d_alpha = np.stack([a[0] for a in arrs])
            ratios = np.stack([a[1] for a in arrs])
            powers, _ = solve_kkt(d_alpha, ratios, pi, inst.params)
            for i, p in zip(idx, powers):
                key = (float(p.sum()), len(paths[i]), paths[i])
                if best is None or key < best[:3]:
                    best = (*key, p)
    total, _, path, powers = best
    return plan_from_powers(inst, path, powers, OPTIMAL)
