"""Minimum-energy routing under jamming: MER, MER-EQ and MER-AP.

* MER ignores jammers when picking the route (link weight ``sqrt(d**alpha)``),
  keeps the jammer-free per-link outage split, and then raises each link's
  power until that outage is met with the jammers present.
* MER-EQ gives every link of an h-hop path the same outage
  ``1 - (1 - pi)**(1/h)`` and finds the cheapest h-hop path for every h on a
  layered copy of the network.
* MER-AP bounds the link outage by an exponential. Under that bound the
  cheapest power split has a closed form, and the path cost becomes the square
  of an additive weight, so one shortest-path run is enough.

Shortest paths are Dijkstra with deterministic tie-breaking: lower cost, then
fewer hops, then the lexicographically smallest node sequence.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .channel import (
    PROB_MAX,
    PROB_MIN,
    LinkGeometry,
    NetworkInstance,
    log_success_exact,
    solve_required_powers,
)
from .errors import DomainError

MER = "MER"
MER_EQ = "MER-EQ"
MER_AP = "MER-AP"
OPTIMAL = "OPTIMAL"
ALGORITHMS = (MER, MER_EQ, MER_AP, OPTIMAL)


@dataclass(frozen=True)
class RoutePlan:
    algorithm: str
    nodes: tuple[int, ...]
    powers: tuple[float, ...]
    link_outages: tuple[float, ...]
    e2e_outage: float
    total_power: float

    @property
    def hops(self) -> int:
        return len(self.powers)

    @property
    def links(self) -> list[tuple[int, int]]:
        return list(zip(self.nodes[:-1], self.nodes[1:]))

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "nodes": list(self.nodes),
            "powers": list(self.powers),
            "link_outages": list(self.link_outages),
            "e2e_outage": self.e2e_outage,
            "total_power": self.total_power,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoutePlan":
        return cls(
            algorithm=data["algorithm"],
            nodes=tuple(int(v) for v in data["nodes"]),
            powers=tuple(float(v) for v in data["powers"]),
            link_outages=tuple(float(v) for v in data["link_outages"]),
            e2e_outage=float(data["e2e_outage"]),
            total_power=float(data["total_power"]),
        )


@dataclass(frozen=True)
class EpsilonBudget:
    eps: float
    pi: float


def _check_pi(pi: float) -> float:
    if not PROB_MIN <= pi <= PROB_MAX:
        raise DomainError(f"end-to-end outage target must be in (0, 1), got {pi}")
    return float(pi)


def epsilon_budget(pi: float, gamma: float) -> EpsilonBudget:
    """Budget ``eps`` for the sum of ``d**alpha (N0 + J) / P`` over a path."""
    pi = _check_pi(pi)
    if not gamma > 0:
        raise DomainError(f"SIR threshold must be > 0, got {gamma}")
    return EpsilonBudget(eps=-math.log1p(-pi) / gamma, pi=pi)


def end_to_end_outage(link_outages: Iterable[float]) -> float:
    p = np.asarray(list(link_outages), dtype=float)
    if np.any(p < 0) or np.any(p >= 1):
        raise DomainError("link outages must lie in [0, 1)")
    return float(-np.expm1(np.log1p(-p).sum()))


def per_hop_outage_equal(pi: float, h: int) -> float:
    pi = _check_pi(pi)
    if h < 1:
        raise DomainError(f"hop count must be >= 1, got {h}")
    return float(-math.expm1(math.log1p(-pi) / h))


def eer_total_power(total: float, pi: float) -> float:
    """Total power including end-to-end retransmissions."""
    return total / (1.0 - _check_pi(pi))


def merap_link_weight(geom: LinkGeometry, params) -> float:
    return math.sqrt(geom.d ** params.alpha * (params.n0 + geom.jam))


def allocate_powers_approx(weights: Sequence[float], budget: EpsilonBudget) -> np.ndarray:
    """Optimal powers under the exponential outage bound: ``P_i = w_i * sum(w) / eps``."""
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        raise DomainError("cannot allocate powers on an empty path")
    if np.any(w <= 0):
        raise DomainError("link weights must be > 0")
    if not budget.eps > 0:
        raise DomainError("budget must be > 0")
    return w * w.sum() / budget.eps


# -- shortest paths ---------------------------------------------------------


def dijkstra(source: Hashable, target: Hashable,
             neighbors: Callable[[Hashable], Iterable[Hashable]],
             weight: Callable[[Hashable, Hashable], float],
             label: Callable[[Hashable], int] = lambda v: v):
    """Cheapest path with ties broken by hop count, then by node labels.

    Returns ``(cost, [nodes...])`` or ``(inf, None)`` if unreachable.
    """
    counter = itertools.count()
    start = (0.0, 0, (label(source),))
    best = {source: start}
    paths = {source: (source,)}
    heap = [(*start, next(counter), source)]
    done = set()
    while heap:
        cost, hops, labels, _, u = heapq.heappop(heap)
        if u in done or best[u] != (cost, hops, labels):
            continue
        done.add(u)
        if u == target:
            return cost, list(paths[u])
        for v in neighbors(u):
            if v in done:
                continue
            cand = (cost + weight(u, v), hops + 1, labels + (label(v),))
            if v not in best or cand < best[v]:
                best[v] = cand
                paths[v] = paths[u] + (v,)
                heapq.heappush(heap, (*cand, next(counter), v))
    return math.inf, None


def _complete_graph_path(inst: NetworkInstance, weights: np.ndarray) -> list[int]:
    n = inst.n
    dest = inst.dest
    nbrs = {u: [v for v in range(n) if v != u] for u in range(n)}
    # never relay through the destination
    _, path = dijkstra(inst.source, dest,
                       lambda u: () if u == dest else nbrs[u],
                       lambda u, v: weights[u, v])
    return path


def _path_arrays(inst: NetworkInstance, path: Sequence[int]):
    tx = np.asarray(path[:-1])
    rx = np.asarray(path[1:])
    return inst.dist_alpha[tx, rx], inst.jam_ratios[rx]


def plan_from_powers(inst: NetworkInstance, path: Sequence[int], powers,
                     algorithm: str) -> RoutePlan:
    """Wrap a path and its powers, evaluating exact link outages."""
    powers = np.asarray(powers, dtype=float)
    d_alpha, ratios = _path_arrays(inst, path)
    outages = -np.expm1(log_success_exact(powers, d_alpha, ratios, inst.params))
    return RoutePlan(
        algorithm=algorithm,
        nodes=tuple(int(v) for v in path),
        powers=tuple(float(p) for p in powers),
        link_outages=tuple(float(p) for p in outages),
        e2e_outage=end_to_end_outage(outages),
        total_power=float(powers.sum()),
    )


# -- MER-AP -----------------------------------------------------------------


def merap_weights(inst: NetworkInstance) -> np.ndarray:
    """Weight matrix ``sqrt(d_uv**alpha (N0 + J_v))`` for every ordered pair."""
    return np.sqrt(inst.dist_alpha * (inst.params.n0 + inst.jamming)[None, :])


def merap_route(inst: NetworkInstance, pi: float, tighten: bool = True) -> RoutePlan:
    budget = epsilon_budget(pi, inst.params.gamma)
    weights = merap_weights(inst)
    path = _complete_graph_path(inst, weights)
    w = np.array([weights[u, v] for u, v in zip(path[:-1], path[1:])])
    plan = plan_from_powers(inst, path, allocate_powers_approx(w, budget), MER_AP)
    if tighten:
        plan = heuristic_tighten(plan, pi, inst)
    return plan


def heuristic_tighten(plan: RoutePlan, pi: float, inst: NetworkInstance) -> RoutePlan:
    """Spend the slack left by the outage bound.

    Every link's success probability is scaled by ``delta**(1/H)`` with
    ``delta = (1 - pi) / (1 - p_sd)``, which makes the end-to-end outage hit
    ``pi`` exactly; powers are re-solved from the exact outage.
    """
    pi = _check_pi(pi)
    if plan.e2e_outage > pi + 1e-12:
        raise DomainError(f"plan outage {plan.e2e_outage} already exceeds target {pi}")
    if plan.e2e_outage >= pi:
        return plan
    log_delta = math.log1p(-pi) - math.log1p(-plan.e2e_outage)
    succ_log = np.log1p(-np.asarray(plan.link_outages)) + log_delta / plan.hops
    targets = -np.expm1(succ_log)
    d_alpha, ratios = _path_arrays(inst, plan.nodes)
    powers = solve_required_powers(targets, d_alpha, ratios, inst.params)
    return plan_from_powers(inst, plan.nodes, powers, plan.algorithm)


# -- MER (jamming-oblivious benchmark) --------------------------------------


def mer_route(inst: NetworkInstance, pi: float) -> RoutePlan:
    params = inst.params
    budget = epsilon_budget(pi, params.gamma)
    weights = np.sqrt(inst.dist_alpha)
    path = _complete_graph_path(inst, weights)
    d_alpha, ratios = _path_arrays(inst, path)
    w = np.sqrt(d_alpha)
    # jammer-free optimum: P_k = N0 w_k sum(w) / eps
    free_powers = params.n0 * w * w.sum() / budget.eps
    targets = -np.expm1(-params.gamma * params.n0 * d_alpha / free_powers)
    powers = solve_required_powers(targets, d_alpha, ratios, params)
    return plan_from_powers(inst, path, powers, MER)


# -- MER-EQ -----------------------------------------------------------------


@dataclass(frozen=True)
class ExpandedGraph:
    """Layered copy of the network; node ``(u, h)`` is reachable in exactly h hops.

    The source is ``(S, 0)``. Edges go from layer h to layer h+1 only.
    """

    source: int
    dest: int
    n: int
    nodes: tuple[tuple[int, int], ...]
    adjacency: dict

    def successors(self, node):
        return self.adjacency.get(node, ())

    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values())


def expand_network(inst: NetworkInstance) -> ExpandedGraph:
    n, s, d = inst.n, inst.source, inst.dest
    others = [u for u in range(n) if u != s]
    nodes = [(s, 0)] + [(u, h) for u in others for h in range(1, n)]
    adjacency: dict = {(s, 0): tuple((u, 1) for u in others)}
    for u in others:
        if u == d:
            continue
        targets = [v for v in others if v != u]
        for h in range(1, n - 1):
            adjacency[(u, h)] = tuple((v, h + 1) for v in targets)
    return ExpandedGraph(s, d, n, tuple(nodes), adjacency)


def _pair_arrays(inst: NetworkInstance):
    n = inst.n
    tx, rx = np.nonzero(~np.eye(n, dtype=bool))
    return tx, rx, inst.dist_alpha[tx, rx], inst.jam_ratios[rx]


def mereq_route(inst: NetworkInstance, pi: float, graph: ExpandedGraph | None = None) -> RoutePlan:
    """Equal per-link outage; best over hop counts h = 1..N-1.

    For each h every physical link's cost is the power needed for outage
    ``eps(h)``; all links of one h are solved in a single vectorised call.
    """
    pi = _check_pi(pi)
    graph = graph or expand_network(inst)
    n = inst.n
    tx, rx, d_alpha, ratios = _pair_arrays(inst)
    best = None
    for h in range(1, n):
        eps_h = per_hop_outage_equal(pi, h)
        cost = np.zeros((n, n))
        cost[tx, rx] = solve_required_powers(np.full(tx.shape, eps_h), d_alpha, ratios,
                                             inst.params)

        def layered(node, h=h):
            return graph.successors(node) if node[1] < h else ()

        total, xpath = dijkstra(graph.nodes[0], (inst.dest, h), layered,
                                lambda a, b, c=cost: c[a[0], b[0]],
                                label=lambda node: node[0])
        if xpath is None:
            continue
        path = [node[0] for node in xpath]
        if len(set(path)) != len(path):
            # a walk that revisits a node is never cheaper than its loop-free
            # shortcut at fewer hops; skip it to keep plans simple paths
            continue
        if best is None or total < best[0]:
            best = (total, path, cost)
    total, path, cost = best
    powers = [cost[u, v] for u, v in zip(path[:-1], path[1:])]
    return plan_from_powers(inst, path, powers, MER_EQ)


def route(inst: NetworkInstance, pi: float, algorithm: str, **kwargs) -> RoutePlan:
    """Dispatch by algorithm tag (case-insensitive, dashes optional)."""
    key = algorithm.upper().replace("_", "-")
    if key in ("MERAP", MER_AP):
        return merap_route(inst, pi, **kwargs)
    if key in ("MEREQ", MER_EQ):
        return mereq_route(inst, pi)
    if key == MER:
        return mer_route(inst, pi)
    if key == OPTIMAL:
        from .optimal import brute_force_route

        return brute_force_route(inst, pi, **kwargs)
    raise DomainError(f"unknown algorithm {algorithm!r}")


def with_endpoints(inst: NetworkInstance, source: int, dest: int) -> NetworkInstance:
    return replace(inst, source=source, dest=dest)
