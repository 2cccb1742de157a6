from __future__ import annotations

import csv
import dataclasses
import logging
import typing as t
from pathlib import Path

from cpsu_distill.distill.iterative import DistillConfig, run_distillation
from cpsu_distill.policies.base import Policy
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.trees.pruning import prune_argmax
from cpsu_distill.trees.tree import count_nodes, count_params

logger = logging.getLogger(__name__)

SWEEP_HEADER = [
    "depth",
    "best_iteration",
    "mean_return",
    "decisions",
    "leaves",
    "params",
    "pruned_decisions",
    "pruned_leaves",
    "pruned_params",
]


@dataclasses.dataclass(frozen=True)
class SweepPoint:
    """Best tree of one distillation run at a given depth, before and after pruning."""

    depth: int
    best_iteration: int
    mean_return: float
    decisions: int
    leaves: int
    params: int
    pruned_decisions: int
    pruned_leaves: int
    pruned_params: int

    def as_row(self) -> t.List[t.Any]:
        return [
            repr(v) if isinstance(v, float) else v
            for v in dataclasses.astuple(self)
        ]


def run_depth_sweep(
    config: DistillConfig,
    depths: t.Sequence[int],
    oracle: Policy,
    sim_config: SimConfig | None = None,
    threads: int = 1,
) -> t.List[SweepPoint]:
    """Repeats the distillation for each depth, in the given order."""
    points = []
    for depth in depths:
        result = run_distillation(
            dataclasses.replace(config, depth=depth), oracle, sim_config, threads=threads
        )
        pruned = prune_argmax(result.best_tree)
        decisions, leaves = count_nodes(result.best_tree)
        pruned_decisions, pruned_leaves = count_nodes(pruned)
        point = SweepPoint(
            depth=depth,
            best_iteration=result.best_iteration,
            mean_return=result.best_record.best_mean_return,
            decisions=decisions,
            leaves=leaves,
            params=count_params(result.best_tree),
            pruned_decisions=pruned_decisions,
            pruned_leaves=pruned_leaves,
            pruned_params=count_params(pruned),
        )
        logger.info("depth %d: %s", depth, point)
        points.append(point)
    return points


def write_sweep_csv(points: t.Sequence[SweepPoint], filepath: str | Path) -> Path:
    filepath = Path(filepath)
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_HEADER)
        for point in points:
            writer.writerow(point.as_row())
    return filepath
