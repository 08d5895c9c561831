"""Link physics: geometry, aggregate jamming, link outage and power inversion.

Fading is Rayleigh with unit mean power on every channel, so the
probability that a link fails averaged over fading has a closed form. The
functions below come in two flavours: scalar functions with the public
signatures used throughout the package, and array versions
(``log_success_exact``, ``solve_required_powers``) that evaluate many links
at once and that the routing code relies on for speed.

All quantities are dimensionless linear units; noise power ``n0 = 1`` is the
usual reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, SingularityError

PROB_MIN = 1e-12
PROB_MAX = 1.0 - 1e-12

# Bisection settings for power inversion.
POWER_RTOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class ChannelParams:
    """Channel constants shared by every link of a network."""

    alpha: float = 2.0
    n0: float = 1.0
    gamma: float = 1.0
    q: float = 1.0

    def __post_init__(self):
        if not self.alpha >= 1:
            raise DomainError(f"path-loss exponent must be >= 1, got {self.alpha}")
        if not self.n0 > 0:
            raise DomainError(f"noise power must be > 0, got {self.n0}")
        if not self.gamma > 0:
            raise DomainError(f"SIR threshold must be > 0, got {self.gamma}")
        if not 0 <= self.q <= 1:
            raise DomainError(f"jammer ON-probability must be in [0, 1], got {self.q}")


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Jammer:
    x: float
    y: float
    power: float

    def __post_init__(self):
        if not self.power > 0:
            raise DomainError(f"jammer power must be > 0, got {self.power}")

    @property
    def pos(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class LinkGeometry:
    """Transmitter-receiver distance and expected jamming power at the receiver."""

    d: float
    jam: float = 0.0

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError(f"link distance must be > 0, got {self.d}")
        if not self.jam >= 0:
            raise DomainError(f"jamming power must be >= 0, got {self.jam}")


@dataclass(frozen=True)
class NetworkInstance:
    """Immutable world state: nodes, jammers, channel constants and endpoints.

    Every ordered pair of distinct nodes is a candidate link. Derived arrays
    (distances, per-receiver jamming) are computed lazily and cached.
    """

    nodes: tuple[Node, ...]
    jammers: tuple[Jammer, ...]
    params: ChannelParams
    source: int
    dest: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "jammers", tuple(self.jammers))
        n = len(self.nodes)
        if n < 2:
            raise DomainError("a network needs at least two nodes")
        if [nd.id for nd in self.nodes] != list(range(n)):
            raise DomainError("node ids must be dense 0..N-1 in order")
        for end in (self.source, self.dest):
            if not 0 <= end < n:
                raise DomainError(f"endpoint {end} is not a valid node id")
        if self.source == self.dest:
            raise DomainError("source and destination must differ")
        dist = self.distances
        off = ~np.eye(n, dtype=bool)
        if np.any(dist[off] <= 0):
            raise SingularityError("two nodes share a position")
        if self.jammers and np.any(self.jammer_distances <= 0):
            raise SingularityError("a jammer coincides with a node")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @cached_property
    def positions(self) -> np.ndarray:
        return np.array([[nd.x, nd.y] for nd in self.nodes], dtype=float).reshape(-1, 2)

    @cached_property
    def jammer_positions(self) -> np.ndarray:
        return np.array([[j.x, j.y] for j in self.jammers], dtype=float).reshape(-1, 2)

    @cached_property
    def jammer_powers(self) -> np.ndarray:
        return np.array([j.power for j in self.jammers], dtype=float)

    @cached_property
    def distances(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    @cached_property
    def dist_alpha(self) -> np.ndarray:
        """``d_uv ** alpha`` for every ordered node pair (zero diagonal)."""
        return self.distances ** self.params.alpha

    @cached_property
    def jammer_distances(self) -> np.ndarray:
        """Shape (N, J): distance from every jammer to every node."""
        diff = self.positions[:, None, :] - self.jammer_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])

    @cached_property
    def jam_ratios(self) -> np.ndarray:
        """Shape (N, J): mean received power ``P_j / d_jv**alpha`` (ignores q)."""
        return self.jammer_powers[None, :] / self.jammer_distances ** self.params.alpha

    @cached_property
    def jamming(self) -> np.ndarray:
        """Expected aggregate jamming at every node, scaled by q."""
        return self.params.q * self.jam_ratios.sum(axis=1)

    def link_geometry(self, u: int, v: int) -> LinkGeometry:
        return LinkGeometry(float(self.distances[u, v]), float(self.jamming[v]))

    def jammer_terms(self, v: int) -> list[tuple[float, float]]:
        return [(j.power, float(d)) for j, d in zip(self.jammers, self.jammer_distances[v])]


def _check_prob(p: float, what: str = "outage probability") -> float:
    if not PROB_MIN <= p <= PROB_MAX:
        raise DomainError(f"{what} must be in [{PROB_MIN}, 1-{PROB_MIN}], got {p}")
    return float(p)


def sir_threshold(rho: float) -> float:
    """SIR threshold for a target throughput of ``rho`` bits/s/Hz."""
    if rho < 0:
        raise DomainError(f"throughput must be >= 0, got {rho}")
    return 2.0 ** rho - 1.0


def aggregate_jamming(rx_pos, jammers: Iterable[Jammer], params: ChannelParams) -> float:
    total = 0.0
    for j in jammers:
        d = math.hypot(rx_pos[0] - j.x, rx_pos[1] - j.y)
        if d <= 0:
            raise SingularityError(f"receiver at {tuple(rx_pos)} coincides with a jammer")
        total += j.power / d ** params.alpha
    return params.q * total


def log_success_exact(power, d_alpha, ratios, params: ChannelParams) -> np.ndarray:
    """Log of the fading-averaged link success probability, vectorised.

    ``power`` and ``d_alpha`` broadcast to a common shape ``S``; ``ratios``
    has shape ``S + (J,)`` and holds ``P_j / d_jk**alpha`` for every jammer.
    """
    t = params.gamma * np.asarray(d_alpha, dtype=float) / np.asarray(power, dtype=float)
    out = -params.n0 * t
    ratios = np.asarray(ratios, dtype=float)
    if ratios.shape[-1]:
        x = t[..., None] * ratios
        if params.q == 1.0:
            out = out - np.log1p(x).sum(axis=-1)
        else:
            out = out + np.log1p(-params.q * x / (1.0 + x)).sum(axis=-1)
    return out


def _ratios_from_terms(jammer_terms, alpha: float) -> np.ndarray:
    terms = np.asarray(list(jammer_terms), dtype=float).reshape(-1, 2)
    if np.any(terms[:, 1] <= 0):
        raise SingularityError("jammer-receiver distance must be > 0")
    if np.any(terms[:, 0] <= 0):
        raise DomainError("jammer power must be > 0")
    return terms[:, 0] / terms[:, 1] ** alpha


def link_outage_exact(p_tx: float, geom_d: float,
                      jammer_terms: Sequence[tuple[float, float]],
                      params: ChannelParams) -> float:
    """Exact outage of one link; ``jammer_terms`` holds ``(P_j, d_jk)`` pairs."""
    if not p_tx > 0:
        raise DomainError(f"transmit power must be > 0, got {p_tx}")
    if not geom_d > 0:
        raise DomainError(f"link distance must be > 0, got {geom_d}")
    ratios = _ratios_from_terms(jammer_terms, params.alpha)
    ls = log_success_exact(p_tx, geom_d ** params.alpha, ratios, params)
    return float(-np.expm1(ls))


def link_outage_approx(p_tx: float, geom: LinkGeometry, params: ChannelParams) -> float:
    """Exponential upper bound on the link outage (uses only mean jamming)."""
    if not p_tx > 0:
        raise DomainError(f"transmit power must be > 0, got {p_tx}")
    return -math.expm1(-params.gamma * geom.d ** params.alpha * (params.n0 + geom.jam) / p_tx)


def required_power_approx(target_outage: float, geom: LinkGeometry,
                          params: ChannelParams) -> float:
    target = _check_prob(target_outage)
    return params.gamma * geom.d ** params.alpha * (params.n0 + geom.jam) / -math.log1p(-target)


def solve_required_powers(targets, d_alpha, ratios, params: ChannelParams,
                          rtol: float = POWER_RTOL) -> np.ndarray:
    """Invert the exact outage for many links at once by bracketed bisection.

    The lower bracket is the jammer-free closed form; the upper bracket is
    doubled until the outage drops below target. Bisection runs on the
    geometric midpoint, so the stopping rule is a relative width.
    """
    targets = np.asarray(targets, dtype=float)
    if np.any(targets < PROB_MIN) or np.any(targets > PROB_MAX):
        raise DomainError("target outage outside the supported range")
    d_alpha = np.broadcast_to(np.asarray(d_alpha, dtype=float), targets.shape)
    ratios = np.asarray(ratios, dtype=float)
    goal = np.log1p(-targets)
    lo = params.gamma * params.n0 * d_alpha / -goal
    if ratios.shape[-1] == 0 or params.q == 0.0:
        return lo

    hi = lo.copy()
    short = np.ones(targets.shape, dtype=bool)
    for _ in range(MAX_ITER):
        hi = np.where(short, 2.0 * hi, hi)
        short = log_success_exact(hi, d_alpha, ratios, params) < goal
        if not short.any():
            break
    else:
        raise ConvergenceError("could not bracket the required power")

    for _ in range(MAX_ITER):
        if np.all(hi <= lo * (1.0 + rtol)):
            break
        mid = np.sqrt(lo * hi)
        low_side = log_success_exact(mid, d_alpha, ratios, params) < goal
        lo = np.where(low_side, mid, lo)
        hi = np.where(low_side, hi, mid)
    else:
        raise ConvergenceError("power bisection hit the iteration cap")
    return np.sqrt(lo * hi)


def required_power_exact(target_outage: float, geom_d: float,
                         jammer_terms: Sequence[tuple[float, float]],
                         params: ChannelParams, rtol: float = POWER_RTOL) -> float:
    """Transmit power at which ``link_outage_exact`` equals ``target_outage``."""
    target = _check_prob(target_outage)
    if not geom_d > 0:
        raise DomainError(f"link distance must be > 0, got {geom_d}")
    ratios = _ratios_from_terms(jammer_terms, params.alpha)
    p = solve_required_powers(np.array(target), geom_d ** params.alpha, ratios, params, rtol)
    return float(p)
