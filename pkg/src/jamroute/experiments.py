"""Experiment harness: parameter sweeps, cost histograms and throughput studies.

Realization ``i`` of every sweep point uses ``derive_seed(base_seed, i)``.
Every algorithm at every sweep point therefore sees the same placement for a
given ``i``, which makes energy saved a paired statistic. Jammer count
sweeps share node positions too, because nodes are drawn first.

Set ``JAMROUTE_WORKERS`` to run realizations in a process pool; results
are gathered in index order, so the output does not depend on it.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Sequence

import numpy as np

from .channel import ChannelParams, NetworkInstance
from .errors import ConvergenceError, DomainError, InstanceFormatError, LPError
from .netgen import GenSpec, derive_seed, generate_instance, make_rng
from .optimal import brute_force_route
from .routing import (
    MER,
    MER_AP,
    MER_EQ,
    OPTIMAL,
    RoutePlan,
    mer_route,
    merap_route,
    mereq_route,
    with_endpoints,
)
from .scheduling import (
    FlowSet,
    InterferenceRule,
    energy_per_bit,
    max_throughput,
    maximal_transmission_sets,
)

AXES = {
    "jammer_count": "nj",
    "jammer_power": "pj",
    "area_side": "side",
    "outage_target": "pi",
    "q": "q",
    "flow_count": "flows",
    "alpha": "alpha",
}
WORKERS_ENV = "JAMROUTE_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    axis: str = "jammer_count"
    values: tuple = (20,)
    n: int = 20
    nj: int = 20
    side: float = 10.0
    pj: float = 1.0
    alpha: float = 2.0
    n0: float = 1.0
    gamma: float = 1.0
    q: float = 1.0
    pi: float = 0.1
    realizations: int = 100
    base_seed: int = 0
    algorithms: tuple = (MER_EQ, MER_AP)
    tighten: bool = True
    optimal_max_n: int = 10
    # throughput study
    flows: int = 5
    lam: float = 1.0
    trials: int = 200
    schedule_rule: str = "node"  # "node" or "interference"
    margin: float = 0.1
    # histograms
    bins: int = 20

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.axis not in AXES:
            raise DomainError(f"unknown sweep axis {self.axis!r}; choose from {sorted(AXES)}")
        if not self.values:
            raise DomainError("sweep needs at least one axis value")
        if self.realizations < 1:
            raise DomainError("realizations must be >= 1")
        unknown = set(self.algorithms) - {MER, MER_EQ, MER_AP, OPTIMAL}
        if unknown:
            raise DomainError(f"unknown algorithms {sorted(unknown)}")
        if self.schedule_rule not in ("node", "interference"):
            raise DomainError(f"unknown schedule rule {self.schedule_rule!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        extra = set(data) - names
        if extra:
            raise InstanceFormatError(f"unknown config keys {sorted(extra)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InstanceFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["values"] = list(self.values)
        d["algorithms"] = list(self.algorithms)
        return d

    def at(self, value) -> "ExperimentConfig":
        """Copy with the sweep axis set to ``value``."""
        key = AXES[self.axis]
        cast = int if key in ("nj", "flows") else float
        return replace(self, **{key: cast(value)})

    def params(self) -> ChannelParams:
        return ChannelParams(alpha=self.alpha, n0=self.n0, gamma=self.gamma, q=self.q)

    def gen_spec(self, realization: int) -> GenSpec:
        return GenSpec(n=self.n, nj=self.nj, side=self.side, pj=self.pj,
                       params=self.params(), seed=derive_seed(self.base_seed, realization))


# Ready-made sweeps; any field can be overridden.
PRESETS = {
    "small_optimal": dict(axis="outage_target", values=[0.05, 0.1, 0.2], n=8, nj=8, alpha=2.0,
                 realizations=50, algorithms=[MER_EQ, MER_AP, OPTIMAL]),
    "jammer_count": dict(axis="jammer_count", values=[10, 20, 30, 40, 50]),
    "jammer_power": dict(axis="jammer_power", values=[1, 2, 5, 10]),
    "area_side": dict(axis="area_side", values=[1, 2, 4, 6, 8, 10]),
    "outage_target": dict(axis="outage_target", values=[0.05, 0.1, 0.2, 0.3, 0.4]),
    "hist_alpha3": dict(axis="jammer_count", values=[50], alpha=3.0, realizations=1000,
                         algorithms=[MER, MER_AP, MER_EQ]),
    "hist_alpha4": dict(axis="jammer_count", values=[30], alpha=4.0, realizations=1000,
                      algorithms=[MER, MER_AP, MER_EQ]),
    "flow_count": dict(axis="flow_count", values=[1, 2, 3, 4, 5], n=10, nj=20, pi=0.2,
                  alpha=4.0, realizations=50, algorithms=[MER_AP, MER],
                  schedule_rule="interference"),
    "flow_outage": dict(axis="outage_target", values=[0.1, 0.2, 0.3], n=10, nj=20, flows=5,
                  alpha=4.0, realizations=50, algorithms=[MER_AP, MER],
                  schedule_rule="interference"),
    "duty_cycle": dict(axis="jammer_count", values=[10, 20, 30, 40, 50], q=0.3,
                  algorithms=[MER_AP]),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    return ExperimentConfig.from_dict({**PRESETS[name], **overrides})


@dataclass
class ResultTable:
    columns: list
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"columns": self.columns, "rows": self.rows}, indent=2) + "\n"

    def select(self, **match) -> list:
        return [r for r in self.rows if all(r[k] == v for k, v in match.items())]


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def energy_saved(cost_benchmark: float, cost_alg: float) -> float:
    """Percentage of the benchmark's power that the algorithm saves."""
    if not cost_benchmark > 0:
        raise DomainError("benchmark cost must be > 0")
    return 100.0 * (cost_benchmark - cost_alg) / cost_benchmark


def db_gap(cost_alg: float, cost_opt: float) -> float:
    return 10.0 * math.log10(cost_alg / cost_opt)


def cost_histogram(costs: Sequence[float], edges: Sequence[float]) -> np.ndarray:
    """Counts per bin ``[e_i, e_{i+1})``; values outside the edges are not counted."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise DomainError("bin edges must be strictly increasing")
    idx = np.searchsorted(edges, np.asarray(costs, dtype=float), side="right") - 1
    idx = idx[(idx >= 0) & (idx < edges.size - 1)]
    return np.bincount(idx, minlength=edges.size - 1)


def log_bin_edges(costs: Sequence[float], bins: int) -> np.ndarray:
    """Log-spaced edges covering every cost (right edge nudged past the max)."""
    costs = np.asarray(costs, dtype=float)
    lo, hi = np.log10(costs.min()), np.log10(costs.max())
    if hi <= lo:
        hi = lo + 1.0
    edges = np.logspace(lo, hi, bins + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf) * (1 + 1e-12)
    edges[0] = min(edges[0], costs.min())
    return edges


def check_outage_contract(plan: RoutePlan, pi: float) -> None:
    if plan.algorithm == MER_AP:
        ok = plan.e2e_outage <= pi + 1e-9
    else:
        ok = abs(plan.e2e_outage - pi) <= 1e-9 if plan.algorithm != OPTIMAL else \
            abs(plan.e2e_outage - pi) <= 1e-8
    if not ok:
        raise AssertionError(
            f"{plan.algorithm} plan outage {plan.e2e_outage!r} breaks target {pi!r}")


def run_algorithm(inst: NetworkInstance, pi: float, algorithm: str, tighten: bool = True):
    if algorithm == MER:
        return mer_route(inst, pi)
    if algorithm == MER_AP:
        return merap_route(inst, pi, tighten=tighten)
    if algorithm == MER_EQ:
        return mereq_route(inst, pi)
    if algorithm == OPTIMAL:
        return brute_force_route(inst, pi)
    raise DomainError(f"unknown algorithm {algorithm!r}")


def _sweep_algorithms(cfg: ExperimentConfig) -> list:
    algs = [a for a in cfg.algorithms if a != MER]
    if OPTIMAL in algs and cfg.n > cfg.optimal_max_n:
        algs.remove(OPTIMAL)
    return [MER] + sorted(algs)


_RECOVERABLE = (ConvergenceError, LPError, DomainError)


def _realization_costs(args):
    cfg, i = args
    inst = generate_instance(cfg.gen_spec(i))
    out = {}
    for alg in _sweep_algorithms(cfg):
        try:
            plan = run_algorithm(inst, cfg.pi, alg, cfg.tighten)
        except _RECOVERABLE:
            out[alg] = None
            continue
        check_outage_contract(plan, cfg.pi)
        out[alg] = plan.total_power
    return out


def _map(fn, tasks):
    workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _mean_std(values):
    if not values:
        return math.nan, math.nan
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def collect_costs(cfg: ExperimentConfig) -> dict:
    """Total power per (axis value, algorithm), one entry per realization (None on failure)."""
    tasks = [(cfg.at(v), i) for v in cfg.values for i in range(cfg.realizations)]
    results = _map(_realization_costs, tasks)
    out = {}
    for (sub, _), res in zip(tasks, results):
        value = getattr(sub, AXES[cfg.axis])
        for alg, cost in res.items():
            out.setdefault((value, alg), []).append(cost)
    return out


SWEEP_COLUMNS = ["axis", "value", "algorithm", "mean_total_power", "std_total_power",
                 "mean_energy_saved", "mean_paired_saving", "std_paired_saving",
                 "realizations", "failures"]


def average_energy_saved(bench: Sequence, own: Sequence) -> float:
    """Saving of the average energy over realizations where both runs succeeded.

    This is a ratio of means, so a few badly jammed placements, where the
    benchmark spends orders of magnitude more, dominate it.
    """
    pairs = [(b, c) for b, c in zip(bench, own) if b is not None and c is not None]
    if not pairs:
        return math.nan
    b, c = np.asarray(pairs, dtype=float).T
    return energy_saved(float(b.mean()), float(c.mean()))


def run_sweep(cfg: ExperimentConfig) -> ResultTable:
    """One row per (axis value, algorithm), MER always included as the benchmark.

    ``mean_energy_saved`` is the saving on the average energy; the mean and
    spread of per-realization savings are reported next to it.
    """
    costs = collect_costs(cfg)
    table = ResultTable(list(SWEEP_COLUMNS))
    for value in sorted({v for v, _ in costs}):
        bench = costs[(value, MER)]
        for alg in sorted(a for v, a in costs if v == value):
            own = costs[(value, alg)]
            ok = [c for c in own if c is not None]
            saved = [energy_saved(b, c) for b, c in zip(bench, own)
                     if b is not None and c is not None]
            mp, sp = _mean_std(ok)
            ms, ss = _mean_std(saved)
            table.rows.append({
                "axis": cfg.axis, "value": value, "algorithm": alg,
                "mean_total_power": mp, "std_total_power": sp,
                "mean_energy_saved": average_energy_saved(bench, own),
                "mean_paired_saving": ms, "std_paired_saving": ss,
                "realizations": len(ok), "failures": len(own) - len(ok),
            })
    return table


HIST_COLUMNS = ["algorithm", "bin_lo", "bin_hi", "count"]


def run_histograms(cfg: ExperimentConfig) -> ResultTable:
    """Histogram of total cost per algorithm at the first axis value."""
    costs = collect_costs(replace(cfg, values=cfg.values[:1]))
    table = ResultTable(list(HIST_COLUMNS))
    for (_, alg), vals in sorted(costs.items(), key=lambda kv: kv[0][1]):
        ok = [c for c in vals if c is not None]
        if not ok:
            continue
        edges = log_bin_edges(ok, cfg.bins)
        for lo, hi, cnt in zip(edges[:-1], edges[1:], cost_histogram(ok, edges)):
            table.rows.append({"algorithm": alg, "bin_lo": float(lo), "bin_hi": float(hi),
                               "count": int(cnt)})
    return table


def coefficient_of_variation(costs) -> float:
    arr = np.asarray([c for c in costs if c is not None], dtype=float)
    return float(arr.std(ddof=1) / arr.mean())


def random_flows(inst_n: int, count: int, seed: int) -> list:
    """Distinct ordered (source, dest) pairs drawn uniformly without replacement."""
    pairs = [(s, d) for s in range(inst_n) for d in range(inst_n) if s != d]
    rng = make_rng(seed)
    return [pairs[i] for i in rng.permutation(len(pairs))[:count]]


def _throughput_realization(args):
    cfg, i, max_flows = args
    inst = generate_instance(cfg.gen_spec(i))
    pairs = random_flows(inst.n, max_flows, derive_seed(cfg.base_seed, i, 1))
    out = {}
    for alg in cfg.algorithms:
        try:
            routes = [run_algorithm(with_endpoints(inst, s, d), cfg.pi, alg, cfg.tighten)
                      for s, d in pairs[:cfg.flows]]
            for r in routes:
                check_outage_contract(r, cfg.pi)
            fs = FlowSet(tuple(pairs[:cfg.flows]), tuple(routes), cfg.lam)
            rule = None
            if cfg.schedule_rule == "interference":
                rule = InterferenceRule.from_routes(inst, routes, cfg.margin)
            sets = maximal_transmission_sets(fs.links(), cfg.trials,
                                             derive_seed(cfg.base_seed, i, 2), rule)
            res = max_throughput(fs, sets)
            epb = energy_per_bit(fs.total_power, res.total) if res.total > 0 else math.inf
            out[alg] = (res.total, epb)
        except _RECOVERABLE:
            out[alg] = None
    return out


THROUGHPUT_COLUMNS = ["axis", "value", "algorithm", "mean_throughput", "std_throughput",
                      "mean_energy_per_bit", "std_energy_per_bit", "realizations", "failures"]


def collect_throughput(cfg: ExperimentConfig) -> dict:
    max_flows = max(int(v) for v in cfg.values) if cfg.axis == "flow_count" else cfg.flows
    tasks = [(cfg.at(v), i, max_flows) for v in cfg.values for i in range(cfg.realizations)]
    results = _map(_throughput_realization, tasks)
    out = {}
    for (sub, _, _), res in zip(tasks, results):
        value = getattr(sub, AXES[cfg.axis])
        for alg, r in res.items():
            out.setdefault((value, alg), []).append(r)
    return out


def run_throughput_study(cfg: ExperimentConfig) -> ResultTable:
    data = collect_throughput(cfg)
    table = ResultTable(list(THROUGHPUT_COLUMNS))
    for (value, alg) in sorted(data):
        vals = data[(value, alg)]
        ok = [v for v in vals if v is not None]
        mt, st = _mean_std([v[0] for v in ok])
        me, se = _mean_std([v[1] for v in ok])
        table.rows.append({
            "axis": cfg.axis, "value": value, "algorithm": alg,
            "mean_throughput": mt, "std_throughput": st,
            "mean_energy_per_bit": me, "std_energy_per_bit": se,
            "realizations": len(ok), "failures": len(vals) - len(ok),
        })
    return table
