"""Return statistics shared by episode filtering, evaluation and reports.

Quantiles use linear interpolation between order statistics (numpy's default method)
everywhere, so the outlier rule of the filter and of the boxplots is the same function.
"""

from __future__ import annotations

import dataclasses
import math
import typing as t

import numpy as np

OUTLIER_FACTOR = 1.5


def _sorted_array(values: t.Iterable[float]) -> np.ndarray:
    array = np.sort(np.asarray(list(values), dtype=float))
    if array.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    return array


def quartiles(values: t.Iterable[float]) -> t.Tuple[float, float, float]:
    """(Q1, median, Q3) by linear interpolation."""
    q1, median, q3 = np.quantile(_sorted_array(values), [0.25, 0.5, 0.75])
    return float(q1), float(median), float(q3)


def iqr_bounds(
    values: t.Iterable[float], factor: float = OUTLIER_FACTOR
) -> t.Tuple[float, float]:
    """Inclusive inlier range [Q1 - factor * IQR, Q3 + factor * IQR]."""
    q1, _, q3 = quartiles(values)
    iqr = q3 - q1
    return q1 - factor * iqr, q3 + factor * iqr


def is_outlier(value: float, bounds: t.Tuple[float, float]) -> bool:
    low, high = bounds
    return not low <= value <= high


@dataclasses.dataclass(frozen=True)
class EvalSummary:
    """Statistics of a set of evaluation episodes.

    Zenith fields are ``None`` when no metric was supplied; the first-zenith fields
    only cover episodes that reached the zenith and are ``None`` if none did.
    """

    n: int
    mean: float
    std: float
    median: float
    q1: float
    q3: float
    min: float
    max: float
    first_zenith_mean: t.Optional[float] = None
    first_zenith_median: t.Optional[float] = None
    zenith_steps_mean: t.Optional[float] = None
    zenith_steps_median: t.Optional[float] = None
    zenith_episodes: t.Optional[int] = None
    return_without_bonus_mean: t.Optional[float] = None

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _mean(array: np.ndarray) -> float:
    return float(np.mean(array))


def summarize(
    returns: t.Iterable[float],
    first_zenith_steps: t.Optional[t.Iterable[t.Optional[int]]] = None,
    zenith_step_counts: t.Optional[t.Iterable[int]] = None,
    returns_without_bonus: t.Optional[t.Iterable[float]] = None,
) -> EvalSummary:
    """Summarizes episode returns and, optionally, zenith metrics.

    Inputs are sorted first, so the result does not depend on their order. The
    standard deviation uses n - 1 and is 0 for a single return.

    Args:
        returns: one return per episode.
        first_zenith_steps: first zenith step per episode, ``None`` if never reached.
        zenith_step_counts: steps spent in the zenith per episode.
        returns_without_bonus: returns without the zenith bonus.
    """
    values = _sorted_array(returns)
    q1, median, q3 = quartiles(values)
    std = float(np.std(values, ddof=1)) if values.size > 1 else 0.0

    first_mean = first_median = None
    if first_zenith_steps is not None:
        reached = [s for s in first_zenith_steps if s is not None]
        if reached:
            reached_array = np.sort(np.asarray(reached, dtype=float))
            first_mean = _mean(reached_array)
            first_median = float(np.median(reached_array))

    steps_mean = steps_median = zenith_episodes = None
    if zenith_step_counts is not None:
        counts = _sorted_array(zenith_step_counts)
        steps_mean = _mean(counts)
        steps_median = float(np.median(counts))
        zenith_episodes = int(np.count_nonzero(counts))

    without_bonus_mean = None
    if returns_without_bonus is not None:
        without_bonus_mean = _mean(_sorted_array(returns_without_bonus))

    return EvalSummary(
        n=int(values.size),
        mean=_mean(values),
        std=std,
        median=median,
        q1=q1,
        q3=q3,
        min=float(values[0]),
        max=float(values[-1]),
        first_zenith_mean=first_mean,
        first_zenith_median=first_median,
        zenith_steps_mean=steps_mean,
        zenith_steps_median=steps_median,
        zenith_episodes=zenith_episodes,
        return_without_bonus_mean=without_bonus_mean,
    )


def summarize_logs(logs: t.Sequence[t.Any]) -> EvalSummary:
    """Summary of episode logs (anything with the EpisodeLog metric properties)."""
    return summarize(
        [log.total_return for log in logs],
        first_zenith_steps=[log.first_zenith_step for log in logs],
        zenith_step_counts=[log.zenith_step_count for log in logs],
        returns_without_bonus=[log.return_without_bonus for log in logs],
    )


@dataclasses.dataclass(frozen=True)
class HistogramSpec:
    """Histogram over the value range.

    Attributes:
        edges: bin_count + 1 increasing edges from min to max.
        counts: values per bin; the last bin includes its right edge.
    """

    edges: t.Tuple[float, ...]
    counts: t.Tuple[int, ...]

    @property
    def bin_count(self) -> int:
        return len(self.counts)

    @property
    def value_range(self) -> t.Tuple[float, float]:
        return self.edges[0], self.edges[-1]

    @property
    def n(self) -> int:
        return sum(self.counts)


def histogram(
    values: t.Iterable[float],
    bins: int | str = "fd",
    bin_width: t.Optional[float] = None,
) -> HistogramSpec:
    """Bins values with Freedman-Diaconis edges unless a bin count or width is given."""
    array = _sorted_array(values)
    if bin_width is not None:
        if not bin_width > 0:
            raise ValueError("bin_width must be > 0")
        span = array[-1] - array[0]
        count = max(1, int(math.ceil(span / bin_width)))
        edges = array[0] + bin_width * np.arange(count + 1)
        if edges[-1] < array[-1]:
            edges = np.append(edges, edges[-1] + bin_width)
    else:
        edges = np.histogram_bin_edges(array, bins=bins)
    counts, edges = np.histogram(array, bins=edges)
    return HistogramSpec(
        edges=tuple(float(e) for e in edges), counts=tuple(int(c) for c in counts)
    )


@dataclasses.dataclass(frozen=True)
class BoxplotStats:
    """Five-number summary of a group plus its 1.5 IQR outliers."""

    group: str
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    outliers: t.Tuple[float, ...]


def boxplot_stats(group: str, values: t.Iterable[float]) -> BoxplotStats:
    array = _sorted_array(values)
    q1, median, q3 = quartiles(array)
    bounds = iqr_bounds(array)
    return BoxplotStats(
        group=group,
        n=int(array.size),
        min=float(array[0]),
        q1=q1,
        median=median,
        q3=q3,
        max=float(array[-1]),
        outliers=tuple(float(v) for v in array if is_outlier(v, bounds)),
    )
