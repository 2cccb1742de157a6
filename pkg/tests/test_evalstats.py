import csv
import json

import numpy as np
import pytest

from cpsu_distill.distill import IterationRecord, filter_episodes
from cpsu_distill.evalstats import (
    boxplot_stats,
    evaluate_policy,
    evaluate_summary,
    export_report,
    histogram,
    iqr_bounds,
    quartiles,
    summarize,
    summarize_logs,
)
from cpsu_distill.evalstats.report import FINAL_GROUP, ITERATION0_GROUP, ORACLE_GROUP
from cpsu_distill.exceptions import EmptyDatasetError
from cpsu_distill.policies import ConstantPolicy
from cpsu_distill.sim import SimConfig


def _record(iteration=0, returns=((1.0, 2.0), (3.0, 4.5))):
    return IterationRecord(
        iteration=iteration,
        eval_seed=11,
        tree_seeds=[5, 6],
        mean_returns=[sum(r) / len(r) for r in returns],
        episode_returns=[list(r) for r in returns],
        param_counts=[13, 21],
        best_tree_id=1,
        samples_added=40,
        dataset_size_before=100,
        dataset_size_after=140,
    )


def test_quartiles_interpolate_linearly():
    assert quartiles([1, 2, 3, 4]) == (1.75, 2.5, 3.25)


def test_summary_of_constant_values():
    summary = summarize([4.0] * 6)
    assert summary.std == 0.0
    assert summary.iqr == 0.0
    assert summary.min == summary.max == summary.median == 4.0


def test_summary_of_single_value():
    summary = summarize([7.5])
    assert summary.n == 1
    assert summary.std == 0.0
    assert (summary.q1, summary.median, summary.q3) == (7.5, 7.5, 7.5)


def test_summary_is_order_independent():
    values = list(np.random.default_rng(2).normal(100, 30, size=25))
    assert summarize(values) == summarize(values[::-1]) == summarize(sorted(values))


def test_summary_uses_sample_std():
    summary = summarize([1.0, 2.0, 3.0, 4.0])
    assert summary.mean == 2.5
    assert summary.std == pytest.approx(np.std([1, 2, 3, 4], ddof=1))


def test_summary_zenith_metrics():
    summary = summarize(
        [10.0, 20.0, 30.0],
        first_zenith_steps=[100, None, 300],
        zenith_step_counts=[5, 0, 7],
        returns_without_bonus=[1.0, 2.0, 3.0],
    )
    assert summary.first_zenith_mean == 200.0
    assert summary.first_zenith_median == 200.0
    assert summary.zenith_episodes == 2
    assert summary.zenith_steps_mean == 4.0
    assert summary.return_without_bonus_mean == 2.0


def test_summary_without_any_zenith():
    summary = summarize([1.0, 2.0], first_zenith_steps=[None, None])
    assert summary.first_zenith_mean is None
    assert summary.first_zenith_median is None


def test_summary_rejects_empty():
    with pytest.raises(ValueError):
        summarize([])


def test_summarize_logs(log_factory):
    logs = [log_factory(10.0, zenith_steps=3), log_factory(20.0)]
    summary = summarize_logs(logs)
    assert summary.mean == 15.0
    assert summary.first_zenith_mean == 1.0
    assert summary.zenith_episodes == 1


def test_histogram_counts_every_value():
    values = np.random.default_rng(0).normal(size=300)
    spec = histogram(values)
    assert spec.n == 300
    assert spec.value_range == (values.min(), values.max())
    assert all(b > a for a, b in zip(spec.edges, spec.edges[1:]))


def test_histogram_of_constant_values():
    spec = histogram([3.0] * 10)
    assert spec.n == 10


def test_histogram_with_fixed_width():
    spec = histogram([0.0, 1.0, 2.0, 9.5], bin_width=2.5)
    assert spec.edges == (0.0, 2.5, 5.0, 7.5, 10.0)
    assert spec.counts == (3, 0, 0, 1)


def test_boxplot_outliers_match_filter(log_factory):
    returns = [0.0, 10.0, 10.5, 11.0, 10.0, 9.5, 10.0, 100.0]
    stats = boxplot_stats("oracle", returns)
    assert stats.outliers == (0.0, 100.0)
    assert stats.n == 8
    logs = [log_factory(r, zenith_steps=1) for r in returns]
    rejected = [log.total_return for log in filter_episodes(logs).rejected_outlier]
    assert sorted(rejected) == list(stats.outliers)
    low, high = iqr_bounds(returns)
    assert low <= stats.q1 <= stats.q3 <= high


def test_export_report_writes_all_files(tmp_path):
    records = [_record(0), _record(1, returns=((5.0, 6.0), (7.0, 9.0)))]
    summaries = {"final_best": summarize([7.0, 9.0])}
    paths = export_report(
        records,
        summaries,
        tmp_path,
        histograms={"return": [1.0, 2.0, 2.5, 8.0]},
        boxplot_groups={
            ORACLE_GROUP: [1.0, 2.0, 3.0],
            ITERATION0_GROUP: [3.0, 4.5],
            FINAL_GROUP: [7.0, 9.0],
        },
    )
    assert sorted(p.name for p in paths) == [
        "boxplot.csv",
        "histogram_return.csv",
        "iterations.csv",
        "summary.json",
    ]
    with open(tmp_path / "boxplot.csv", newline="") as f:
        groups = [row["group"] for row in csv.DictReader(f)]
    assert groups == [ORACLE_GROUP, ITERATION0_GROUP, FINAL_GROUP]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["final_best"]["mean"] == 8.0


def test_iterations_csv_reparses_exactly(tmp_path):
    returns = ((0.1 + 0.2, 1 / 3), (2 / 7, 1e-300))
    export_report([_record(0, returns=returns)], {}, tmp_path)
    with open(tmp_path / "iterations.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    assert [float(rows[0]["return_0"]), float(rows[0]["return_1"])] == list(returns[0])
    assert [float(rows[1]["return_0"]), float(rows[1]["return_1"])] == list(returns[1])
    assert float(rows[1]["mean_return"]) == (2 / 7 + 1e-300) / 2
    assert [row["is_best"] for row in rows] == ["0", "1"]
    assert rows[1]["params"] == "21"


def test_export_report_rejects_empty_records(tmp_path):
    out = tmp_path / "report"
    with pytest.raises(EmptyDatasetError):
        export_report([], {}, out)
    assert not out.exists()


def test_export_report_rejects_empty_group_before_writing(tmp_path):
    out = tmp_path / "report"
    with pytest.raises(EmptyDatasetError):
        export_report([_record()], {}, out, boxplot_groups={FINAL_GROUP: []})
    assert not out.exists()


def test_evaluate_noop_policy():
    logs = evaluate_policy(ConstantPolicy(), SimConfig(max_steps=100), n=3, seed=0)
    assert [log.total_return for log in logs] == [0.0, 0.0, 0.0]


def test_evaluation_is_seeded(energy_oracle):
    config = SimConfig(max_steps=80, sensor_noise_std=(0.01, 0.01, 0.0, 0.0))
    first, summary = evaluate_summary(energy_oracle, config, n=2, seed=3)
    second, _ = evaluate_summary(energy_oracle, config, n=2, seed=3)
    assert [log.actions for log in first] == [log.actions for log in second]
    assert summary.n == 2


def test_evaluate_rejects_zero_episodes():
    with pytest.raises(ValueError):
        evaluate_policy(ConstantPolicy(), None, n=0, seed=0)
