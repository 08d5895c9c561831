import json
import math

import numpy as np
import pytest

from jamroute.errors import DomainError, InstanceFormatError
from jamroute.experiments import (
    PRESETS,
    SWEEP_COLUMNS,
    ExperimentConfig,
    average_energy_saved,
    check_outage_contract,
    coefficient_of_variation,
    collect_costs,
    cost_histogram,
    db_gap,
    energy_saved,
    log_bin_edges,
    preset,
    random_flows,
    run_histograms,
    run_sweep,
    run_throughput_study,
)
from jamroute.routing import RoutePlan


def test_energy_saved_examples():
    assert energy_saved(200, 50) == 75.0
    assert energy_saved(3.3, 3.3) == 0.0
    with pytest.raises(DomainError):
        energy_saved(0, 1)


def test_average_energy_saved_is_ratio_of_means():
    # one bad placement dominates: per-instance mean would be (50 + 0) / 2 = 25
    bench = [1000.0, 10.0, None]
    own = [500.0, 10.0, 3.0]
    assert average_energy_saved(bench, own) == pytest.approx(100 * 500 / 1010)
    assert math.isnan(average_energy_saved([None], [1.0]))


def test_db_gap():
    assert db_gap(10.0, 1.0) == pytest.approx(10.0)
    assert db_gap(2.0, 2.0) == 0.0


def test_cost_histogram_examples():
    assert list(cost_histogram([1, 2, 3], [0, 2, 4])) == [1, 2]
    assert list(cost_histogram([], [0, 1, 2])) == [0, 0]
    # right-open: a value on the last edge is outside
    assert list(cost_histogram([4.0, -1.0], [0, 2, 4])) == [0, 0]
    with pytest.raises(DomainError):
        cost_histogram([1], [0, 0, 1])


def test_log_bin_edges_cover_all_costs():
    rng = np.random.default_rng(0)
    costs = 10 ** rng.uniform(0, 6, size=500)
    edges = log_bin_edges(costs, 20)
    assert cost_histogram(costs, edges).sum() == costs.size
    assert np.all(np.diff(edges) > 0)


def test_config_round_trip_and_validation(tmp_path):
    cfg = ExperimentConfig(axis="jammer_power", values=[1, 2], realizations=3)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.from_json(path) == cfg
    with pytest.raises(InstanceFormatError):
        ExperimentConfig.from_dict({"axis": "q", "values": [0.5], "bogus": 1})
    for bad in ({"axis": "wind"}, {"values": []}, {"realizations": 0},
                {"algorithms": ["FASTEST"]}, {"schedule_rule": "csma"}):
        with pytest.raises(DomainError):
            ExperimentConfig(**bad)
    path.write_text("{ not json")
    with pytest.raises(InstanceFormatError, match=":1:"):
        ExperimentConfig.from_json(path)


def test_presets_load():
    for name in PRESETS:
        cfg = preset(name)
        assert cfg.realizations >= 1
    assert preset("small_optimal").n == 8 and preset("small_optimal", realizations=2).realizations == 2
    assert preset("hist_alpha3").alpha == 3.0 and preset("hist_alpha4").alpha == 4.0


def test_at_casts_axis_values():
    cfg = ExperimentConfig(axis="jammer_count", values=[5])
    assert cfg.at(7).nj == 7 and isinstance(cfg.at(7.0).nj, int)
    assert ExperimentConfig(axis="outage_target", values=[0.3]).at(0.3).pi == 0.3


def test_no_jammers_no_saving():
    table = run_sweep(ExperimentConfig(axis="jammer_count", values=[0], n=12,
                                       realizations=10, algorithms=["MER-AP"]))
    (row,) = table.select(algorithm="MER-AP")
    assert row["mean_energy_saved"] == pytest.approx(0.0, abs=1e-8)
    assert row["mean_paired_saving"] == pytest.approx(0.0, abs=1e-8)


def test_sweep_table_shape_and_order():
    cfg = ExperimentConfig(axis="jammer_count", values=[10, 4], n=8, realizations=4,
                           algorithms=["MER-EQ", "MER-AP", "OPTIMAL"])
    table = run_sweep(cfg)
    assert table.columns == SWEEP_COLUMNS
    keys = [(r["value"], r["algorithm"]) for r in table.rows]
    assert keys == sorted(keys)
    assert {r["algorithm"] for r in table.rows} == {"MER", "MER-AP", "MER-EQ", "OPTIMAL"}
    assert all(r["realizations"] == 4 and r["failures"] == 0 for r in table.rows)
    for v in (4, 10):
        mer = table.select(value=v, algorithm="MER")[0]
        assert mer["mean_energy_saved"] == 0.0
        opt = table.select(value=v, algorithm="OPTIMAL")[0]
        assert opt["mean_total_power"] <= table.select(value=v, algorithm="MER-AP")[0][
            "mean_total_power"]
    csv = table.to_csv().splitlines()
    assert csv[0] == ",".join(SWEEP_COLUMNS) and len(csv) == 1 + len(table.rows)
    assert json.loads(table.to_json())["rows"] == table.rows


def test_optimal_dropped_for_large_networks():
    costs = collect_costs(ExperimentConfig(n=12, nj=4, realizations=1,
                                           algorithms=["OPTIMAL", "MER-AP"]))
    assert {alg for _, alg in costs} == {"MER", "MER-AP"}


def test_sweep_is_reproducible(monkeypatch):
    cfg = ExperimentConfig(axis="q", values=[0.2, 1.0], n=10, realizations=6, base_seed=42)
    first = run_sweep(cfg).to_csv()
    assert run_sweep(cfg).to_csv() == first
    monkeypatch.setenv("JAMROUTE_WORKERS", "2")
    assert run_sweep(cfg).to_csv() == first


def test_outage_contract_check():
    ok = RoutePlan("MER", (0, 1), (1.0,), (0.1,), 0.1, 1.0)
    check_outage_contract(ok, 0.1)
    with pytest.raises(AssertionError):
        check_outage_contract(RoutePlan("MER", (0, 1), (1.0,), (0.05,), 0.05, 1.0), 0.1)
    check_outage_contract(RoutePlan("MER-AP", (0, 1), (1.0,), (0.05,), 0.05, 1.0), 0.1)
    with pytest.raises(AssertionError):
        check_outage_contract(RoutePlan("MER-AP", (0, 1), (1.0,), (0.2,), 0.2, 1.0), 0.1)


def test_saving_falls_as_outage_target_grows():
    table = run_sweep(preset("outage_target", algorithms=["MER-AP"]))
    saved = [r["mean_energy_saved"] for r in table.select(algorithm="MER-AP")]
    assert len(saved) == 5
    assert all(a > b for a, b in zip(saved, saved[1:]))


def test_histograms():
    cfg = preset("hist_alpha3", realizations=50, algorithms=["MER-AP"])
    table = run_histograms(cfg)
    for alg in ("MER", "MER-AP"):
        rows = table.select(algorithm=alg)
        assert len(rows) == cfg.bins
        assert sum(r["count"] for r in rows) == 50
        assert all(r["bin_lo"] < r["bin_hi"] for r in rows)


def test_mer_costs_scatter_more_than_merap():
    costs = collect_costs(preset("hist_alpha3", algorithms=["MER-AP"]))
    assert coefficient_of_variation(costs[(50, "MER")]) > \
        coefficient_of_variation(costs[(50, "MER-AP")])


def test_random_flows():
    flows = random_flows(10, 5, 3)
    assert len(flows) == len(set(flows)) == 5
    assert all(s != d and 0 <= s < 10 and 0 <= d < 10 for s, d in flows)
    assert random_flows(10, 5, 3) == flows
    assert random_flows(2, 3, 0) in ([(0, 1), (1, 0)], [(1, 0), (0, 1)])


def test_throughput_two_node_network():
    cfg = ExperimentConfig(axis="flow_count", values=[1], n=2, nj=3, realizations=5,
                           algorithms=["MER-AP", "MER"], lam=1.5)
    table = run_throughput_study(cfg)
    for r in table.rows:
        assert r["mean_throughput"] == pytest.approx(1.5, abs=1e-12)
        assert r["failures"] == 0


def test_energy_per_bit_falls_with_outage_target():
    table = run_throughput_study(preset("flow_outage", realizations=20))
    for alg in ("MER", "MER-AP"):
        epb = [r["mean_energy_per_bit"] for r in table.select(algorithm=alg)]
        assert all(a > b for a, b in zip(epb, epb[1:]))
