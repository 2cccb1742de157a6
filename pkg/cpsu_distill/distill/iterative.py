"""Iterative distillation: train trees, evaluate them, relabel the best tree's states."""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
import logging
import typing as t
from pathlib import Path

import numpy as np

from cpsu_distill.distill.episodes import EpisodeLog, collect_base, run_episodes
from cpsu_distill.distill.filtering import FilterResult, build_base_set, filter_episodes
from cpsu_distill.distill.samples import Sample, SampleSet, iteration_provenance
from cpsu_distill.exceptions import ConfigError
from cpsu_distill.policies.base import Policy
from cpsu_distill.sim.config import SimConfig
from cpsu_distill.sim.environment import CartPoleSwingUp
from cpsu_distill.sim.state import Observation
from cpsu_distill.trees.pruning import prune_argmax
from cpsu_distill.trees.serialization import save_tree
from cpsu_distill.trees.training import MAX_DEPTH, TreeHyperParams, train_tree
from cpsu_distill.trees.tree import ObliqueTree, count_params

logger = logging.getLogger(__name__)

# seed streams derived from the master seed
_BASE_STREAM = 0
_EVAL_STREAM = 1
_TREE_STREAM = 2

MANIFEST_NAME = "manifest.json"


def derive_seed(master_seed: int, *keys: int) -> int:
    """Independent 32-bit seed for a (stream, index, ...) key under the master seed."""
    return int(np.random.SeedSequence([master_seed, *keys]).generate_state(1)[0])


@dataclasses.dataclass(frozen=True)
class DistillConfig:
    """Parameters of the distillation loop.

    Attributes:
        n_trees: trees trained per iteration (N_T).
        depth: depth limit of every tree (d).
        eval_episodes: evaluation episodes per tree (n_e).
        iterations: number of train/evaluate/relabel rounds.
        cutoff: only the first ``cutoff`` steps of an episode become samples (t_c).
        base_episodes: oracle episodes collected for the base samples.
        master_seed: every seed of the run is derived from it.
        hyper: split search and stopping parameters of the trees.
    """

    n_trees: int = 10
    depth: int = 10
    eval_episodes: int = 5
    iterations: int = 10
    cutoff: int = 350
    base_episodes: int = 100
    master_seed: int = 0
    hyper: TreeHyperParams = dataclasses.field(default_factory=TreeHyperParams)

    def __post_init__(self) -> None:
        for name in ("n_trees", "eval_episodes", "iterations", "cutoff", "base_episodes"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ConfigError(f"depth must lie in 1..{MAX_DEPTH}, got {self.depth}")
        if isinstance(self.hyper, dict):
            object.__setattr__(self, "hyper", TreeHyperParams.from_dict(self.hyper))

    def check_against(self, sim_config: SimConfig) -> None:
        if self.cutoff > sim_config.max_steps:
            raise ConfigError(
                f"cutoff {self.cutoff} exceeds the episode length {sim_config.max_steps}"
            )

    @classmethod
    def from_dict(cls, document: dict) -> "DistillConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(document) - names)
        if unknown:
            raise ConfigError(f"unknown distill option(s): {', '.join(unknown)}")
        try:
            return cls(**document)
        except TypeError as e:
            raise ConfigError(f"invalid distill config: {e}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass
class IterationRecord:
    """Outcome of one iteration.

    Attributes:
        iteration: 0-based index.
        eval_seed: seed of the evaluation episodes, shared by all trees of the iteration.
        tree_seeds: training seed of each tree.
        mean_returns: mean evaluation return of each tree.
        episode_returns: per-episode evaluation returns of each tree.
        param_counts: parameter count of each tree after argmax pruning.
        best_tree_id: index of the best tree (highest mean, then fewer parameters,
            then lower seed).
        samples_added: relabelled samples appended after this iteration.
        dataset_size_before: samples the trees were trained on.
        dataset_size_after: dataset size after appending.
    """

    iteration: int
    eval_seed: int
    tree_seeds: t.List[int]
    mean_returns: t.List[float]
    episode_returns: t.List[t.List[float]]
    param_counts: t.List[int]
    best_tree_id: int
    samples_added: int
    dataset_size_before: int
    dataset_size_after: int
    tree_paths: t.List[str] = dataclasses.field(default_factory=list)

    @property
    def best_mean_return(self) -> float:
        return self.mean_returns[self.best_tree_id]

    @property
    def min_mean_return(self) -> float:
        return min(self.mean_returns)

    @property
    def median_mean_return(self) -> float:
        return float(np.median(np.sort(self.mean_returns)))

    @property
    def max_mean_return(self) -> float:
        return max(self.mean_returns)

    def to_dict(self) -> dict:
        document = dataclasses.asdict(self)
        document.update(
            min_mean_return=self.min_mean_return,
            median_mean_return=self.median_mean_return,
            max_mean_return=self.max_mean_return,
        )
        return document


@dataclasses.dataclass
class DistillResult:
    """Everything a distillation run produced.

    Attributes:
        best_tree: best tree over all iterations (highest mean return, then fewer
            parameters, then earlier iteration).
        best_iteration: iteration of ``best_tree``.
        records: one record per iteration.
        base_logs: every oracle episode collected for the base samples.
        filtered: base episodes split into kept and rejected.
        dataset: final sample set.
        best_logs: evaluation episodes of each iteration's best tree.
        trees: every trained tree, per iteration.
    """

    best_tree: ObliqueTree
    best_iteration: int
    records: t.List[IterationRecord]
    base_logs: t.List[EpisodeLog]
    filtered: FilterResult
    dataset: SampleSet
    best_logs: t.List[t.List[EpisodeLog]]
    trees: t.List[t.List[ObliqueTree]]

    @property
    def best_record(self) -> IterationRecord:
        return self.records[self.best_iteration]


def relabel(states: t.Iterable[Observation], oracle: Policy) -> t.List[Sample]:
    """One sample per state, labelled with the oracle's action, order preserved."""
    return [Sample.from_observation(state, oracle.act(state)) for state in states]


def select_best_tree(
    mean_returns: t.Sequence[float],
    param_counts: t.Sequence[int],
    seeds: t.Sequence[int],
) -> int:
    """Index of the highest mean return; ties go to fewer parameters, then lower seed."""
    return min(
        range(len(mean_returns)),
        key=lambda j: (-mean_returns[j], param_counts[j], seeds[j]),
    )


def _train_job(
    args: t.Tuple[np.ndarray, np.ndarray, int, int, TreeHyperParams, dict]
) -> ObliqueTree:
    features, labels, depth, seed, hyper, metadata = args
    return train_tree(features, labels, depth, seed, hyper, metadata)


def _evaluate_job(args: t.Tuple[ObliqueTree, SimConfig, int, int]) -> t.List[EpisodeLog]:
    tree, sim_config, n, seed = args
    return run_episodes(tree, CartPoleSwingUp(sim_config), n, seed)


class _SerialExecutor(object):
    def map(self, fn, iterable):
        return map(fn, iterable)

    def shutdown(self) -> None:
        pass


def _executor(threads: int):
    if threads > 1:
        return concurrent.futures.ProcessPoolExecutor(max_workers=threads)
    return _SerialExecutor()


def run_distillation(
    config: DistillConfig,
    oracle: Policy,
    sim_config: SimConfig | None = None,
    threads: int = 1,
) -> DistillResult:
    """Runs the full distillation loop.

    The oracle's base episodes are filtered and truncated into the base samples. Each
    iteration then trains ``n_trees`` trees on all samples so far, evaluates every tree
    on the same seeded episodes, and appends the best tree's first ``cutoff`` states of
    each evaluation episode, relabelled by the oracle. Tree and evaluation seeds are
    fixed in advance, so results do not depend on ``threads``.

    Args:
        config: loop parameters.
        oracle: policy that labels states.
        sim_config: simulator used for base collection and evaluation.
        threads: worker processes for training and evaluation; 1 runs in-process.

    Raises:
        EmptyDatasetError: filtering rejected every base episode.
    """
    sim_config = sim_config if sim_config is not None else SimConfig()
    config.check_against(sim_config)
    master = config.master_seed

    base_logs = collect_base(
        oracle,
        CartPoleSwingUp(sim_config),
        config.base_episodes,
        derive_seed(master, _BASE_STREAM),
    )
    filtered = filter_episodes(base_logs)
    dataset = build_base_set(filtered.kept, config.cutoff)
    logger.info("base set: %d samples from %d episodes", len(dataset), len(filtered.kept))

    records: t.List[IterationRecord] = []
    best_logs: t.List[t.List[EpisodeLog]] = []
    all_trees: t.List[t.List[ObliqueTree]] = []
    executor = _executor(threads)
    try:
        for k in range(config.iterations):
            tree_seeds = [derive_seed(master, _TREE_STREAM, k, j) for j in range(config.n_trees)]
            size_before = len(dataset)
            features, labels = dataset.features, dataset.labels
            trees = list(
                executor.map(
                    _train_job,
                    [
                        (features, labels, config.depth, seed, config.hyper, {"iteration": k})
                        for seed in tree_seeds
                    ],
                )
            )
            eval_seed = derive_seed(master, _EVAL_STREAM, k)
            logs_per_tree = list(
                executor.map(
                    _evaluate_job,
                    [(tree, sim_config, config.eval_episodes, eval_seed) for tree in trees],
                )
            )
            episode_returns = [[log.total_return for log in logs] for logs in logs_per_tree]
            mean_returns = [sum(returns) / len(returns) for returns in episode_returns]
            param_counts = [count_params(prune_argmax(tree)) for tree in trees]
            best = select_best_tree(mean_returns, param_counts, tree_seeds)

            states = [
                observation
                for log in logs_per_tree[best]
                for observation in log.observations[: config.cutoff]
            ]
            added = dataset.extend(relabel(states, oracle), iteration_provenance(k))

            record = IterationRecord(
                iteration=k,
                eval_seed=eval_seed,
                tree_seeds=tree_seeds,
                mean_returns=mean_returns,
                episode_returns=episode_returns,
                param_counts=param_counts,
                best_tree_id=best,
                samples_added=added,
                dataset_size_before=size_before,
                dataset_size_after=len(dataset),
            )
            records.append(record)
            best_logs.append(logs_per_tree[best])
            all_trees.append(trees)
            logger.info(
                "iteration %d: best tree %d mean return %.2f (min %.2f, median %.2f, max %.2f), "
                "dataset %d -> %d",
                k,
                best,
                record.best_mean_return,
                record.min_mean_return,
                record.median_mean_return,
                record.max_mean_return,
                size_before,
                len(dataset),
            )
    finally:
        executor.shutdown()

    best_iteration = min(
        range(len(records)),
        key=lambda k: (
            -records[k].best_mean_return,
            records[k].param_counts[records[k].best_tree_id],
            k,
        ),
    )
    best_tree = all_trees[best_iteration][records[best_iteration].best_tree_id]
    logger.info(
        "best tree overall: iteration %d, mean return %.2f",
        best_iteration,
        records[best_iteration].best_mean_return,
    )
    return DistillResult(
        best_tree=best_tree,
        best_iteration=best_iteration,
        records=records,
        base_logs=base_logs,
        filtered=filtered,
        dataset=dataset,
        best_logs=best_logs,
        trees=all_trees,
    )


def save_run(
    result: DistillResult,
    config: DistillConfig,
    sim_config: SimConfig,
    out_dir: str | Path,
    oracle_ref: str = "energy",
) -> Path:
    """Writes every tree, the best tree (plain and pruned), the samples and the manifest.

    Paths in the manifest are relative to ``out_dir`` and it holds no timestamps, so
    equal runs give byte-identical manifests.

    Returns:
        Path to the manifest.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for record, trees in zip(result.records, result.trees):
        iteration_dir = out_dir / "trees" / f"iteration_{record.iteration}"
        iteration_dir.mkdir(parents=True, exist_ok=True)
        record.tree_paths = []
        for j, tree in enumerate(trees):
            path = save_tree(tree, iteration_dir / f"tree_{j}.json")
            record.tree_paths.append(path.relative_to(out_dir).as_posix())

    save_tree(result.best_tree, out_dir / "best_tree.json")
    pruned = prune_argmax(result.best_tree)
    save_tree(pruned, out_dir / "best_tree_pruned.json")
    result.dataset.save(out_dir / "samples.csv")

    best_record = result.best_record
    manifest = {
        "oracle": oracle_ref,
        "config": config.to_dict(),
        "sim": sim_config.to_dict(),
        "base": {
            "episodes": len(result.base_logs),
            "rejected_no_zenith": len(result.filtered.rejected_no_zenith),
            "rejected_outlier": len(result.filtered.rejected_outlier),
            "kept": len(result.filtered.kept),
            "samples": result.records[0].dataset_size_before,
            "returns": [log.total_return for log in result.base_logs],
            "returns_without_bonus": [log.return_without_bonus for log in result.base_logs],
            "zenith_step_counts": [log.zenith_step_count for log in result.base_logs],
            "first_zenith_steps": [log.first_zenith_step for log in result.base_logs],
        },
        "iterations": [record.to_dict() for record in result.records],
        "best": {
            "iteration": result.best_iteration,
            "tree_id": best_record.best_tree_id,
            "mean_return": best_record.best_mean_return,
            "episode_returns": best_record.episode_returns[best_record.best_tree_id],
            "params": count_params(result.best_tree),
            "pruned_params": count_params(pruned),
            "path": "best_tree.json",
            "pruned_path": "best_tree_pruned.json",
        },
        "samples_path": "samples.csv",
        "final_dataset_size": len(result.dataset),
    }
    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1)
        f.write("\n")
    return manifest_path


def load_manifest(filepath: str | Path) -> dict:
    filepath = Path(filepath)
    if filepath.is_dir():
        filepath = filepath / MANIFEST_NAME
    if not filepath.exists():
        raise FileNotFoundError(filepath)
    with open(filepath, "r", encoding="utf-8") as f:
        return json.load(f)
