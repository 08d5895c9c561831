"""Builders and independent oracles shared by the test modules."""

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from jamroute.channel import ChannelParams, Jammer, LinkGeometry, NetworkInstance, Node
from jamroute.experiments import random_flows
from jamroute.netgen import GenSpec, generate_instance
from jamroute.routing import RoutePlan, epsilon_budget, merap_route, with_endpoints
from jamroute.scheduling import FlowSet, TransmissionSet


def make_instance(nodes, jammers=(), source=0, dest=None, **params):
    """Instance from bare coordinate tuples; jammers are (x, y, power)."""
    return NetworkInstance(
        nodes=tuple(Node(i, float(x), float(y)) for i, (x, y) in enumerate(nodes)),
        jammers=tuple(Jammer(float(x), float(y), float(p)) for x, y, p in jammers),
        params=ChannelParams(**params),
        source=source,
        dest=len(nodes) - 1 if dest is None else dest,
    )


def geom_for(d, terms, params):
    jam = params.q * sum(p / djk ** params.alpha for p, djk in terms)
    return LinkGeometry(d, jam)


def mc_outage(rng, p_tx, d, terms, params, samples=1_000_000):
    """Empirical Pr[SIR < gamma] with Rayleigh fading and on/off jammers."""
    h = rng.exponential(size=samples)
    signal = p_tx * h / d ** params.alpha
    interference = np.full(samples, params.n0)
    for pj, djk in terms:
        g = rng.exponential(size=samples)
        on = rng.random(samples) < params.q
        interference += on * pj * g / djk ** params.alpha
    hits = signal / interference < params.gamma
    est = hits.mean()
    return est, math.sqrt(max(est * (1 - est), 1e-300) / samples)


def count_paths_recursive(n, s, d, max_hops=None):
    """Second, independent count of simple s-d paths in the complete graph."""
    max_hops = n - 1 if max_hops is None else max_hops

    def walk(u, seen, hops):
        total = 0
        for v in range(n):
            if v in seen or hops + 1 > max_hops:
                continue
            total += 1 if v == d else walk(v, seen | {v}, hops + 1)
        return total

    return walk(s, {s}, 0)


def expanded_paths(graph, h):
    """Every S -> D(h) path in the expanded graph by plain DFS."""
    out = []
    stack = [(graph.nodes[0], [graph.nodes[0]])]
    while stack:
        node, path = stack.pop()
        if node == (graph.dest, h):
            out.append(path)
            continue
        if node[1] >= h:
            continue
        for nxt in graph.successors(node):
            stack.append((nxt, path + [nxt]))
    return out


def constraint_value(powers, inst, path):
    """-log(success) summed over the path, written out term by term (complex-safe)."""
    p = inst.params
    total = 0
    for k, (u, v) in enumerate(zip(path[:-1], path[1:])):
        da = inst.distances[u, v] ** p.alpha
        total = total + p.gamma * p.n0 * da / powers[k]
        for j in inst.jammers:
            djk = math.hypot(j.x - inst.nodes[v].x, j.y - inst.nodes[v].y)
            x = p.gamma * (j.power / djk ** p.alpha) * da / powers[k]
            total = total - np.log(p.q / (1 + x) + 1 - p.q)
    return total


def grid_min_two_links(inst, path, pi, lo, hi, size=2000):
    c = -math.log1p(-pi)
    g1 = np.logspace(math.log10(lo[0]), math.log10(hi[0]), size)
    g2 = np.logspace(math.log10(lo[1]), math.log10(hi[1]), size)
    P1, P2 = np.meshgrid(g1, g2, indexing="ij")
    g = constraint_value([P1, P2], inst, path)
    total = np.where(g <= c, P1 + P2, np.inf)
    i, j = np.unravel_index(np.argmin(total), total.shape)
    return total[i, j], (g1[i], g2[j]), (g1[1] / g1[0], g2[1] / g2[0])


def fake_route(nodes, algorithm="MER-AP"):
    h = len(nodes) - 1
    return RoutePlan(algorithm, tuple(nodes), (1.0,) * h, (0.01,) * h, 1 - 0.99 ** h, float(h))


def exhaustive_maximal_sets(links):
    """Every node-exclusive set that no further link can join."""
    links = sorted(links)
    ok = []
    for r in range(1, len(links) + 1):
        for combo in itertools.combinations(links, r):
            nodes = [v for l in combo for v in l]
            if len(nodes) == len(set(nodes)):
                ok.append(frozenset(combo))
    return {s for s in ok if not any(s < t for t in ok)}


def flowset_instance(seed, flows=5, algo=merap_route, n=10, nj=20, pi=0.2):
    inst = generate_instance(GenSpec(n=n, nj=nj, seed=seed))
    pairs = random_flows(n, flows, seed)
    routes = tuple(algo(with_endpoints(inst, s, d), pi) for s, d in pairs)
    return inst, FlowSet(tuple(pairs), routes, 1.0)


def lp_oracle(flowset, sets, weights=None):
    """Same LP through scipy; with ``weights`` fixed only the rates are free."""
    links = flowset.links()
    nf, ns = len(flowset.routes), len(sets)
    A = np.zeros((len(links), nf + ns))
    for r, link in enumerate(links):
        for i, route in enumerate(flowset.routes):
            A[r, i] = link in route.links
        for m, s in enumerate(sets):
            A[r, nf + m] = -flowset.lam * (link in s)
    c = np.concatenate([-np.ones(nf), np.zeros(ns)])
    if weights is None:
        res = linprog(c, A_ub=A, b_ub=np.zeros(len(links)),
                      A_eq=np.concatenate([np.zeros(nf), np.ones(ns)])[None, :], b_eq=[1.0],
                      bounds=[(0, None)] * (nf + ns), method="highs")
        return -res.fun
    cap = -A[:, nf:] @ np.asarray(weights)
    res = linprog(-np.ones(nf), A_ub=A[:, :nf], b_ub=cap, bounds=[(0, None)] * nf,
                  method="highs")
    return -res.fun


def two_link_grid_optimum(inst, path, pi):
    """Cheapest feasible point of a 2000x2000 log grid, then a zoomed second grid.

    The box runs from half the jammer-free optimum to the bound-based total.
    """
    d_alpha = np.array([inst.dist_alpha[u, v] for u, v in zip(path[:-1], path[1:])])
    eps = epsilon_budget(pi, inst.params.gamma).eps
    free = inst.params.n0 * np.sqrt(d_alpha) * np.sqrt(d_alpha).sum() / eps
    upper = merap_route(inst, pi, tighten=False).total_power
    best, (b1, b2), step = grid_min_two_links(inst, path, pi, free / 2, [upper, upper])
    zoomed, _, _ = grid_min_two_links(inst, path, pi,
                                      [b1 / step[0] ** 3, b2 / step[1] ** 3],
                                      [b1 * step[0] ** 3, b2 * step[1] ** 3])
    return min(best, zoomed)


def weight_grid_optimum(fs, sets, step=0.05, rounds=6, points=21):
    """LP value maximised over a grid on the 3-set weight simplex, zoomed repeatedly.

    For fixed weights the rates are solved by scipy, so the schedule side is
    searched without any simplex of ours. Fewer sets are padded with empty
    ones, which carry no capacity.
    """
    assert 1 <= len(sets) <= 3
    sets = list(sets) + [TransmissionSet(())] * (3 - len(sets))
    best, arg = -np.inf, None
    k = int(round(1 / step))
    for i in range(k + 1):
        for j in range(k + 1 - i):
            w = (i * step, j * step, 1 - (i + j) * step)
            v = lp_oracle(fs, sets, w)
            if v > best:
                best, arg = v, w
    half = step
    for _ in range(rounds):
        center = arg
        for a in np.linspace(center[0] - half, center[0] + half, points):
            for b in np.linspace(center[1] - half, center[1] + half, points):
                w = (a, b, 1 - a - b)
                if min(w) < 0:
                    continue
                v = lp_oracle(fs, sets, w)
                if v > best:
                    best, arg = v, w
        half /= 8
    return best
