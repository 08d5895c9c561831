"""Random network generation and the JSON instance format.

Random streams use numpy's PCG64. A realization seed is derived from a base
seed and any number of integer keys with ``numpy.random.SeedSequence``, which
hashes its entropy words, so ``derive_seed(base, i)`` gives independent and
platform-independent streams for every realization index ``i``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelParams, Jammer, NetworkInstance, Node
from .errors import DomainError, InstanceFormatError

MIN_SEPARATION = 1e-9


def derive_seed(base_seed: int, *keys: int) -> int:
    """Mix ``base_seed`` with integer keys into a new 64-bit seed."""
    ss = np.random.SeedSequence([int(base_seed) & (2**64 - 1), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class GenSpec:
    n: int = 20
    nj: int = 20
    side: float = 10.0
    pj: float = 1.0
    params: ChannelParams = field(default_factory=ChannelParams)
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"need at least two nodes, got n={self.n}")
        if self.nj < 0:
            raise DomainError(f"jammer count must be >= 0, got {self.nj}")
        if not self.side > 0:
            raise DomainError(f"side must be > 0, got {self.side}")
        if not self.pj > 0:
            raise DomainError(f"jammer power must be > 0, got {self.pj}")


def _nearest(points: np.ndarray, target, exclude=None) -> int:
    d = np.hypot(points[:, 0] - target[0], points[:, 1] - target[1])
    if exclude is not None:
        d[exclude] = np.inf
    # argmin returns the first (lowest-id) minimiser
    return int(np.argmin(d))


def generate_instance(spec: GenSpec) -> NetworkInstance:
    """Place nodes then jammers uniformly on ``[0, side]^2``.

    Nodes are drawn first, so instances that differ only in jammer count
    share node positions for the same seed. A point closer than
    ``MIN_SEPARATION`` to an earlier point is redrawn.
    """
    rng = make_rng(spec.seed)
    nodes = rng.uniform(0.0, spec.side, size=(spec.n, 2))
    for i in range(1, spec.n):
        while np.min(np.hypot(*(nodes[:i] - nodes[i]).T)) < MIN_SEPARATION:
            nodes[i] = rng.uniform(0.0, spec.side, size=2)
    jams = rng.uniform(0.0, spec.side, size=(spec.nj, 2))
    for k in range(spec.nj):
        while np.min(np.hypot(*(nodes - jams[k]).T)) < MIN_SEPARATION:
            jams[k] = rng.uniform(0.0, spec.side, size=2)

    source = _nearest(nodes, (0.0, 0.0))
    dest = _nearest(nodes, (spec.side, spec.side), exclude=source)
    return NetworkInstance(
        nodes=tuple(Node(i, float(x), float(y)) for i, (x, y) in enumerate(nodes)),
        jammers=tuple(Jammer(float(x), float(y), float(spec.pj)) for x, y in jams),
        params=spec.params,
        source=source,
        dest=dest,
    )


def instance_to_dict(inst: NetworkInstance) -> dict:
    p = inst.params
    return {
        "params": {"alpha": p.alpha, "n0": p.n0, "gamma": p.gamma, "q": p.q},
        "nodes": [{"id": nd.id, "x": nd.x, "y": nd.y} for nd in inst.nodes],
        "jammers": [{"x": j.x, "y": j.y, "power": j.power} for j in inst.jammers],
        "source": inst.source,
        "dest": inst.dest,
    }


def _require(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise InstanceFormatError(f"{where}: missing required key {key!r}")
    return obj[key]


def instance_from_dict(data: dict, where: str = "<instance>") -> NetworkInstance:
    try:
        praw = _require(data, "params", where)
        params = ChannelParams(
            alpha=float(_require(praw, "alpha", where + ".params")),
            n0=float(_require(praw, "n0", where + ".params")),
            gamma=float(_require(praw, "gamma", where + ".params")),
            q=float(_require(praw, "q", where + ".params")),
        )
        nodes = tuple(
            Node(int(_require(nd, "id", f"{where}.nodes[{i}]")),
                 float(_require(nd, "x", f"{where}.nodes[{i}]")),
                 float(_require(nd, "y", f"{where}.nodes[{i}]")))
            for i, nd in enumerate(_require(data, "nodes", where))
        )
        jammers = tuple(
            Jammer(float(_require(j, "x", f"{where}.jammers[{i}]")),
                   float(_require(j, "y", f"{where}.jammers[{i}]")),
                   float(_require(j, "power", f"{where}.jammers[{i}]")))
            for i, j in enumerate(_require(data, "jammers", where))
        )
        return NetworkInstance(nodes, jammers, params,
                               int(_require(data, "source", where)),
                               int(_require(data, "dest", where)))
    except InstanceFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{where}: {exc}") from exc


def save_instance(inst: NetworkInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path) -> NetworkInstance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if exc.lineno <= len(text.splitlines()) else ""
        raise InstanceFormatError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {line}") from exc
    return instance_from_dict(data, where=str(path))
