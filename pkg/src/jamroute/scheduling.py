"""Transmission sets, the max-throughput LP and energy per bit.

A link is a directed ``(tx, rx)`` pair of node ids. Links are schedulable
together when no node is busy twice (half-duplex, node-exclusive). The
optional ``InterferenceRule`` adds a physical check: concurrent
transmitters act as extra Rayleigh-faded interferers, and every link in a
set must keep its success probability within a factor ``1 - margin`` of the
interference-free value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .channel import NetworkInstance
from .errors import DomainError
from .lp import simplex_max
from .netgen import derive_seed, make_rng
from .routing import RoutePlan

Link = tuple[int, int]


@dataclass(frozen=True)
class TransmissionSet:
    links: tuple[Link, ...]
    maximal: bool = True

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(sorted(tuple(l) for l in self.links)))

    def __contains__(self, link) -> bool:
        return tuple(link) in self.links

    def __len__(self) -> int:
        return len(self.links)


@dataclass(frozen=True)
class FlowSet:
    flows: tuple[tuple[int, int], ...]
    routes: tuple[RoutePlan, ...]
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("link capacity must be > 0")
        if len(self.flows) != len(self.routes):
            raise DomainError("one route per flow is required")
        if len({r.algorithm for r in self.routes}) > 1:
            raise DomainError("all routes must come from the same algorithm")

    def links(self) -> list[Link]:
        seen = {}
        for r in self.routes:
            for l in r.links:
                seen.setdefault(l, None)
        return list(seen)

    @property
    def total_power(self) -> float:
        return float(sum(r.total_power for r in self.routes))


@dataclass(frozen=True)
class Schedule:
    sets: tuple[TransmissionSet, ...]
    weights: tuple[float, ...]


@dataclass(frozen=True)
class ThroughputResult:
    rates: tuple[float, ...]
    schedule: Schedule
    total: float

    def to_dict(self) -> dict:
        return {
            "rates": list(self.rates),
            "total": self.total,
            "schedule": [
                {"links": [list(l) for l in s.links], "weight": w}
                for s, w in zip(self.schedule.sets, self.schedule.weights)
            ],
        }


class InterferenceRule:
    """Reject sets in which concurrent transmissions cost a link too much success."""

    def __init__(self, inst: NetworkInstance, powers: dict, margin: float = 0.1):
        if not 0 < margin < 1:
            raise DomainError("margin must be in (0, 1)")
        self.inst = inst
        self.powers = dict(powers)
        self.margin = margin

    @classmethod
    def from_routes(cls, inst: NetworkInstance, routes: Iterable[RoutePlan], margin=0.1):
        powers: dict = {}
        for r in routes:
            for l, p in zip(r.links, r.powers):
                powers[l] = max(powers.get(l, 0.0), p)
        return cls(inst, powers, margin)

    def degradation(self, links: Sequence[Link]) -> dict:
        """Success multiplier each link suffers from the other links in the set."""
        gamma = self.inst.params.gamma
        alpha = self.inst.params.alpha
        dist = self.inst.distances
        out = {}
        for k in links:
            signal = self.powers[k] / self.inst.dist_alpha[k]
            factor = 1.0
            for i in links:
                if i == k:
                    continue
                interf = self.powers[i] / dist[i[0], k[1]] ** alpha
                factor /= 1.0 + gamma * interf / signal
            out[k] = factor
        return out

    def __call__(self, links: Sequence[Link]) -> bool:
        return all(f >= 1.0 - self.margin for f in self.degradation(links).values())


def schedulable(existing, candidate: Link, rule: InterferenceRule | None = None) -> bool:
    links = existing.links if isinstance(existing, TransmissionSet) else tuple(existing)
    busy = {v for l in links for v in l}
    if candidate[0] in busy or candidate[1] in busy:
        return False
    if rule is not None:
        return rule(list(links) + [tuple(candidate)])
    return True


def grow_transmission_set(order: Sequence[Link], rule: InterferenceRule | None = None):
    """One pass of greedy growth over links in the given order."""
    chosen: list[Link] = []
    for l in order:
        if schedulable(chosen, l, rule):
            chosen.append(l)
    return chosen


def is_maximal(tset, links: Iterable[Link], rule: InterferenceRule | None = None) -> bool:
    members = set(tset.links if isinstance(tset, TransmissionSet) else tset)
    return not any(schedulable(members, l, rule) for l in links if tuple(l) not in members)


def maximal_transmission_sets(links: Iterable[Link], trials: int = 200, seed: int = 0,
                              rule: InterferenceRule | None = None) -> list[TransmissionSet]:
    """Sample maximal sets by random greedy growth; deduplicated and sorted."""
    if trials < 1:
        raise DomainError("need at least one trial")
    links = sorted({tuple(l) for l in links})
    found = set()
    for t in range(trials):
        rng = make_rng(derive_seed(seed, t))
        order = [links[i] for i in rng.permutation(len(links))]
        chosen = grow_transmission_set(order, rule)
        found.add(tuple(sorted(chosen)))
    sets = [TransmissionSet(s) for s in sorted(found)]
    for s in sets:
        assert is_maximal(s, links, rule), s
    return sets


def max_throughput(flowset: FlowSet, sets: Sequence[TransmissionSet]) -> ThroughputResult:
    """Maximise total flow rate over schedules mixing the given sets.

    ``sum_alpha <= 1`` replaces the equality: raising any weight only adds
    capacity, so leftover time is handed to the first set afterwards.
    """
    nf, ns = len(flowset.flows), len(sets)
    if ns == 0:
        return ThroughputResult(tuple([0.0] * nf), Schedule((), ()), 0.0)
    links = flowset.links()
    A = np.zeros((len(links) + 1, nf + ns))
    for r, link in enumerate(links):
        for i, route in enumerate(flowset.routes):
            if link in route.links:
                A[r, i] = 1.0
        for m, s in enumerate(sets):
            if link in s:
                A[r, nf + m] = -flowset.lam
    A[-1, nf:] = 1.0
    b = np.zeros(len(links) + 1)
    b[-1] = 1.0
    c = np.concatenate([np.ones(nf), np.zeros(ns)])
    x, total = simplex_max(c, A, b)
    rates = np.clip(x[:nf], 0.0, None)
    weights = np.clip(x[nf:], 0.0, None)
    weights[0] += max(0.0, 1.0 - weights.sum())
    weights /= weights.sum()
    return ThroughputResult(tuple(float(v) for v in rates),
                            Schedule(tuple(sets), tuple(float(w) for w in weights)),
                            float(rates.sum()))


def energy_per_bit(total_power: float, throughput: float) -> float:
    if not throughput > 0:
        raise DomainError("energy per bit needs a positive throughput")
    return total_power / throughput
