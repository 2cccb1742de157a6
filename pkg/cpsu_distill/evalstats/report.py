"""CSV and JSON data behind the histogram, iteration and boxplot figures."""

from __future__ import annotations

import csv
import io
import json
import logging
import typing as t
from pathlib import Path

from cpsu_distill.evalstats.summary import (
    BoxplotStats,
    EvalSummary,
    HistogramSpec,
    boxplot_stats,
    histogram,
    summarize,
)
from cpsu_distill.exceptions import EmptyDatasetError, OutputError

logger = logging.getLogger(__name__)

ORACLE_GROUP = "oracle"
ITERATION0_GROUP = "iteration_0_best"
FINAL_GROUP = "final_best"


def _value(v: t.Any) -> t.Any:
    # repr keeps every float digit so re-parsed values compare equal
    return repr(float(v)) if isinstance(v, float) else v


def _record_dict(record: t.Any) -> dict:
    return record.to_dict() if hasattr(record, "to_dict") else dict(record)


def _csv_text(header: t.Sequence[str], rows: t.Iterable[t.Sequence[t.Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_value(v) for v in row])
    return buffer.getvalue()


def iterations_csv(records: t.Sequence[t.Any]) -> str:
    """One row per trained tree: its mean and per-episode evaluation returns."""
    records = [_record_dict(r) for r in records]
    n_episodes = max(len(returns) for r in records for returns in r["episode_returns"])
    header = ["iteration", "tree_id", "seed", "params", "is_best", "mean_return"] + [
        f"return_{i}" for i in range(n_episodes)
    ]
    rows = []
    for r in records:
        for j, returns in enumerate(r["episode_returns"]):
            rows.append(
                [
                    r["iteration"],
                    j,
                    r["tree_seeds"][j],
                    r["param_counts"][j],
                    int(j == r["best_tree_id"]),
                    r["mean_returns"][j],
                ]
                + list(returns)
                + [""] * (n_episodes - len(returns))
            )
    return _csv_text(header, rows)


def histogram_csv(spec: HistogramSpec) -> str:
    rows = [
        (spec.edges[i], spec.edges[i + 1], count) for i, count in enumerate(spec.counts)
    ]
    return _csv_text(["bin_left", "bin_right", "count"], rows)


def boxplot_csv(stats: t.Sequence[BoxplotStats]) -> str:
    rows = [
        (
            s.group,
            s.n,
            s.min,
            s.q1,
            s.median,
            s.q3,
            s.max,
            ";".join(repr(v) for v in s.outliers),
        )
        for s in stats
    ]
    return _csv_text(["group", "n", "min", "q1", "median", "q3", "max", "outliers"], rows)


def export_report(
    records: t.Sequence[t.Any],
    summaries: t.Mapping[str, EvalSummary],
    out_dir: str | Path,
    histograms: t.Optional[t.Mapping[str, t.Sequence[float]]] = None,
    boxplot_groups: t.Optional[t.Mapping[str, t.Sequence[float]]] = None,
) -> t.List[Path]:
    """Writes iterations.csv, summary.json, histogram_<name>.csv and boxplot.csv.

    Every file is rendered in memory before the first one is written, so invalid input
    leaves no partial report behind.

    Args:
        records: iteration records (or their dict form).
        summaries: named evaluation summaries.
        out_dir: target directory, created if needed.
        histograms: named value lists, binned with Freedman-Diaconis edges.
        boxplot_groups: named return lists, in output order.

    Returns:
        Paths of the written files.

    Raises:
        EmptyDatasetError: no records, or an empty histogram or boxplot group.
        OutputError: a file could not be written.
    """
    if not records:
        raise EmptyDatasetError("no iteration records to report")
    files: t.Dict[str, str] = {"iterations.csv": iterations_csv(records)}
    files["summary.json"] = (
        json.dumps({name: s.to_dict() for name, s in summaries.items()}, indent=1) + "\n"
    )
    for name, values in (histograms or {}).items():
        if len(values) == 0:
            raise EmptyDatasetError(f"histogram {name!r} has no values")
        files[f"histogram_{name}.csv"] = histogram_csv(histogram(values))
    if boxplot_groups:
        for name, values in boxplot_groups.items():
            if len(values) == 0:
                raise EmptyDatasetError(f"boxplot group {name!r} has no values")
        files["boxplot.csv"] = boxplot_csv(
            [boxplot_stats(name, values) for name, values in boxplot_groups.items()]
        )

    out_dir = Path(out_dir)
    written = []
    for name, text in files.items():
        path = out_dir / name
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        except OSError as e:
            raise OutputError(e.strerror or str(e), path)
        written.append(path)
    logger.info("wrote %d report files to %s", len(written), out_dir)
    return written


def report_from_manifest(manifest: dict, out_dir: str | Path) -> t.List[Path]:
    """Full report of a distillation run from its manifest.

    Boxplot groups: every oracle base episode (rejected ones included), the best tree of
    iteration 0 and the best tree overall, each on its evaluation episodes.
    """
    base = manifest["base"]
    records = manifest["iterations"]
    if not records:
        raise EmptyDatasetError("manifest holds no iterations")
    first = records[0]
    best = manifest["best"]
    iteration0_returns = first["episode_returns"][first["best_tree_id"]]

    summaries = {
        ORACLE_GROUP: summarize(
            base["returns"],
            first_zenith_steps=base["first_zenith_steps"],
            zenith_step_counts=base["zenith_step_counts"],
            returns_without_bonus=base["returns_without_bonus"],
        ),
        ITERATION0_GROUP: summarize(iteration0_returns),
        FINAL_GROUP: summarize(best["episode_returns"]),
    }
    histograms = {
        "return": base["returns"],
        "return_without_bonus": base["returns_without_bonus"],
        "zenith_steps": base["zenith_step_counts"],
    }
    first_zenith = [s for s in base["first_zenith_steps"] if s is not None]
    if first_zenith:
        histograms["first_zenith"] = first_zenith
    boxplot_groups = {
        ORACLE_GROUP: base["returns"],
        ITERATION0_GROUP: iteration0_returns,
        FINAL_GROUP: best["episode_returns"],
    }
    return export_report(records, summaries, out_dir, histograms, boxplot_groups)
