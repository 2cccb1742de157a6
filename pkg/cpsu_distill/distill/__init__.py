"""Init module."""

from .episodes import EpisodeLog, collect_base, episode_seeds, run_episode, run_episodes, save_trajectory
from .filtering import FilterResult, build_base_set, filter_episodes, truncate_and_extract
from .iterative import (
    DistillConfig,
    DistillResult,
    IterationRecord,
    derive_seed,
    load_manifest,
    relabel,
    run_distillation,
    save_run,
    select_best_tree,
)
from .samples import BASE_PROVENANCE, Sample, SampleSet, iteration_provenance
from .sweep import SweepPoint, run_depth_sweep, write_sweep_csv

__all__ = [
    "EpisodeLog",
    "collect_base",
    "episode_seeds",
    "run_episode",
    "run_episodes",
    "save_trajectory",
    "FilterResult",
    "filter_episodes",
    "truncate_and_extract",
    "build_base_set",
    "DistillConfig",
    "DistillResult",
    "IterationRecord",
    "derive_seed",
    "relabel",
    "run_distillation",
    "save_run",
    "load_manifest",
    "select_best_tree",
    "Sample",
    "SampleSet",
    "BASE_PROVENANCE",
    "iteration_provenance",
    "SweepPoint",
    "run_depth_sweep",
    "write_sweep_csv",
]
