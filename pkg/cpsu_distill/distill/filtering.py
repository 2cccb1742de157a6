from __future__ import annotations

import logging
import typing as t
import warnings

from cpsu_distill.distill.episodes import EpisodeLog
from cpsu_distill.distill.samples import BASE_PROVENANCE, Sample, SampleSet
from cpsu_distill.evalstats.summary import iqr_bounds
from cpsu_distill.exceptions import EmptyDatasetError

logger = logging.getLogger(__name__)


class FilterResult(t.NamedTuple):
    kept: t.List[EpisodeLog]
    rejected_no_zenith: t.List[EpisodeLog]
    rejected_outlier: t.List[EpisodeLog]


def filter_episodes(logs: t.Sequence[EpisodeLog]) -> FilterResult:
    """Drops episodes that never reached the zenith, then return outliers.

    Outliers lie outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] of the returns of the episodes
    that reached the zenith; the bounds are inclusive. Input order is preserved.

    Raises:
        EmptyDatasetError: no logs given, or every episode was rejected.
    """
    if not logs:
        raise EmptyDatasetError("no episodes to filter")
    with_zenith = [log for log in logs if log.zenith_step_count > 0]
    no_zenith = [log for log in logs if log.zenith_step_count == 0]
    if not with_zenith:
        raise EmptyDatasetError(
            f"all {len(logs)} episodes were rejected: the pendulum never reached the zenith"
        )

    low, high = iqr_bounds([log.total_return for log in with_zenith])
    if low == high:
        warnings.warn("returns have zero interquartile range, no outliers are rejected")
    kept = [log for log in with_zenith if low <= log.total_return <= high]
    outliers = [log for log in with_zenith if not low <= log.total_return <= high]
    logger.info(
        "filtered %d episodes: %d without zenith, %d outliers outside [%.2f, %.2f], %d kept",
        len(logs),
        len(no_zenith),
        len(outliers),
        low,
        high,
        len(kept),
    )
    return FilterResult(kept=kept, rejected_no_zenith=no_zenith, rejected_outlier=outliers)


def truncate_and_extract(log: EpisodeLog, t_c: int) -> t.List[Sample]:
    """(observation, action) samples of the first ``t_c`` steps of an episode."""
    if t_c < 1:
        raise ValueError(f"t_c must be >= 1, got {t_c}")
    return [
        Sample.from_observation(observation, action)
        for observation, action in zip(log.observations[:t_c], log.actions[:t_c])
    ]


def build_base_set(kept: t.Sequence[EpisodeLog], t_c: int) -> SampleSet:
    samples = SampleSet()
    for log in kept:
        samples.extend(truncate_and_extract(log, t_c), BASE_PROVENANCE)
    if len(samples) == 0:
        raise EmptyDatasetError("no base samples after filtering")
    return samples
