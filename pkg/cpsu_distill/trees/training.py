"""Greedy top-down training of oblique trees with randomized-restart split search."""

from __future__ import annotations

import dataclasses
import logging
import math
import typing as t
import warnings

import numpy as np

from cpsu_distill.exceptions import ConfigError, EmptyDatasetError, NumericError
from cpsu_distill.sim.state import N_ACTIONS
from cpsu_distill.trees.nodes import N_FEATURES, LeafNode, Node, ObliqueNode, project
from cpsu_distill.trees.tree import ObliqueTree

logger = logging.getLogger(__name__)

MAX_DEPTH = 20


@dataclasses.dataclass(frozen=True)
class TreeHyperParams:
    """Split search and stopping parameters.

    Attributes:
        restarts: random restarts per split, the best one wins.
        init_jitter: std of the Gaussian noise added to the unit centroid direction.
        min_samples_split: nodes with fewer samples become leaves.
        laplace_alpha: additive smoothing of leaf label counts.
        local_search_passes: maximum sweeps of the coordinate search per restart.
        initial_step: first coordinate step on the unit weight vector.
        min_step: the search stops once the step is halved below this.
        search_subsample: the weight search runs on at most this many samples of a
            node; the threshold is always fitted on all of them. ``None`` uses every sample.
    """

    restarts: int = 10
    init_jitter: float = 0.1
    min_samples_split: int = 8
    laplace_alpha: float = 1.0
    local_search_passes: int = 12
    initial_step: float = 0.5
    min_step: float = 1.0 / 64.0
    search_subsample: t.Optional[int] = 4000

    def __post_init__(self) -> None:
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        if self.init_jitter < 0:
            raise ConfigError("init_jitter must be >= 0")
        if self.min_samples_split < 2:
            raise ConfigError("min_samples_split must be >= 2")
        if self.laplace_alpha < 0:
            raise ConfigError("laplace_alpha must be >= 0")
        if self.local_search_passes < 0:
            raise ConfigError("local_search_passes must be >= 0")
        if not 0 < self.min_step <= self.initial_step:
            raise ConfigError("need 0 < min_step <= initial_step")
        if self.search_subsample is not None and self.search_subsample < 2:
            raise ConfigError("search_subsample must be >= 2 or None")

    @classmethod
    def from_dict(cls, document: dict) -> "TreeHyperParams":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(document) - names)
        if unknown:
            raise ConfigError(f"unknown tree hyperparameter(s): {', '.join(unknown)}")
        return cls(**document)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class SplitResult:
    """Best hyperplane found for a node.

    Attributes:
        weights: unit-norm weight vector.
        threshold: samples with ``weights . x <= threshold`` go left.
        impurity: sample-weighted Gini impurity of the two children.
        parent_impurity: Gini impurity of the node itself.
        left_mask: which samples go left.
    """

    weights: np.ndarray
    threshold: float
    impurity: float
    parent_impurity: float
    left_mask: np.ndarray = dataclasses.field(repr=False)


class LabeledData(t.Protocol):
    features: np.ndarray
    labels: np.ndarray


def gini(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - np.sum(p * p))


def split_impurity(labels: np.ndarray, left_mask: np.ndarray) -> float:
    """Sample-weighted Gini impurity of a two-way partition."""
    n = len(labels)
    left = np.bincount(labels[left_mask], minlength=N_ACTIONS)
    right = np.bincount(labels[~left_mask], minlength=N_ACTIONS)
    return (left.sum() * gini(left) + right.sum() * gini(right)) / n


def best_threshold(
    projections: np.ndarray, onehot: np.ndarray
) -> t.Tuple[float, t.Optional[float]]:
    """Scans all midpoints between sorted distinct projections.

    Args:
        projections: one value per sample.
        onehot: (n, 3) label indicator matrix.

    Returns:
        (weighted Gini, threshold) of the best cut, or (inf, None) if all projections are equal.
    """
    n = len(projections)
    if n < 2:
        return math.inf, None
    order = np.argsort(projections, kind="stable")
    p = projections[order]
    distinct = p[1:] > p[:-1]
    if not np.any(distinct):
        return math.inf, None
    left_counts = np.cumsum(onehot[order], axis=0)[:-1]
    right_counts = left_counts[-1] + onehot[order[-1]] - left_counts
    n_left = np.arange(1, n, dtype=float)
    n_right = n - n_left
    left_sq = np.sum(left_counts * left_counts, axis=1) / n_left
    right_sq = np.sum(right_counts * right_counts, axis=1) / n_right
    # n_left * gini_left + n_right * gini_right, divided by n
    weighted = (n - left_sq - right_sq) / n
    weighted = np.where(distinct, weighted, np.inf)
    i = int(np.argmin(weighted))
    threshold = 0.5 * (p[i] + p[i + 1])
    if not p[i] <= threshold < p[i + 1]:
        threshold = p[i]
    return float(weighted[i]), float(threshold)


def _unit(vector: np.ndarray) -> t.Optional[np.ndarray]:
    norm = np.linalg.norm(vector)
    if not np.isfinite(norm) or norm == 0:
        return None
    return vector / norm


def _initial_weights(
    features: np.ndarray,
    labels: np.ndarray,
    classes: np.ndarray,
    rng: np.random.Generator,
    init_jitter: float,
) -> np.ndarray:
    a, b = rng.choice(classes, size=2, replace=False)
    direction = features[labels == b].mean(axis=0) - features[labels == a].mean(axis=0)
    jitter = rng.normal(size=N_FEATURES) * init_jitter
    unit = _unit(direction)
    if unit is None:
        unit = _unit(rng.normal(size=N_FEATURES))
    weights = _unit(unit + jitter)
    return weights if weights is not None else unit


def _local_search(
    features: np.ndarray,
    onehot: np.ndarray,
    weights: np.ndarray,
    hyper: TreeHyperParams,
) -> t.Tuple[np.ndarray, float]:
    """Coordinate search on the unit weight vector; thresholds are fitted exactly."""
    best_impurity, _ = best_threshold(project(features, weights), onehot)
    step = hyper.initial_step
    for _ in range(hyper.local_search_passes):
        if best_impurity == 0.0:
            break
        improved = False
        for j in range(N_FEATURES):
            for sign in (1.0, -1.0):
                candidate = weights.copy()
                candidate[j] += sign * step
                candidate = _unit(candidate)
                if candidate is None:
                    continue
                impurity, _ = best_threshold(project(features, candidate), onehot)
                if impurity < best_impurity - 1e-12:
                    weights, best_impurity = candidate, impurity
                    improved = True
        if not improved:
            step *= 0.5
            if step < hyper.min_step:
                break
    return weights, best_impurity


def fit_split(
    features: np.ndarray,
    labels: np.ndarray,
    seed: int,
    hyper: TreeHyperParams | None = None,
) -> t.Optional[SplitResult]:
    """Searches an oblique hyperplane minimizing the children's weighted Gini impurity.

    Every restart starts from the unit difference of two randomly chosen class
    centroids plus Gaussian jitter, then refines the weights by local search. Restarts
    draw from one seeded stream in order, so running more restarts only adds candidates.

    Returns:
        The best split, or ``None`` when no hyperplane strictly reduces the impurity
        (fewer than two labels present, identical features).
    """
    hyper = hyper or TreeHyperParams()
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if len(classes) < 2 or len(labels) < 2:
        return None

    rng = np.random.default_rng(seed)
    counts = np.bincount(labels, minlength=N_ACTIONS)
    parent = gini(counts)
    onehot = np.eye(N_ACTIONS)[labels]

    search_features, search_onehot, search_labels = features, onehot, labels
    if hyper.search_subsample is not None and len(labels) > hyper.search_subsample:
        pick = np.sort(rng.choice(len(labels), size=hyper.search_subsample, replace=False))
        search_features, search_onehot, search_labels = features[pick], onehot[pick], labels[pick]
    search_classes = np.unique(search_labels)
    if len(search_classes) < 2:
        search_features, search_onehot, search_labels = features, onehot, labels
        search_classes = classes

    best: t.Optional[t.Tuple[float, np.ndarray, float]] = None
    for _ in range(hyper.restarts):
        weights = _initial_weights(
            search_features, search_labels, search_classes, rng, hyper.init_jitter
        )
        weights, _ = _local_search(search_features, search_onehot, weights, hyper)
        impurity, threshold = best_threshold(project(features, weights), onehot)
        if threshold is None:
            continue
        if best is None or impurity < best[0]:
            best = (impurity, weights, threshold)

    if best is None:
        return None
    impurity, weights, threshold = best
    left_mask = project(features, weights) <= threshold
    if not impurity < parent - 1e-12 or left_mask.all() or not left_mask.any():
        return None
    return SplitResult(
        weights=weights,
        threshold=threshold,
        impurity=impurity,
        parent_impurity=parent,
        left_mask=left_mask,
    )


def train_tree(
    features: np.ndarray,
    labels: np.ndarray,
    depth: int,
    seed: int,
    hyper: TreeHyperParams | None = None,
    metadata: t.Optional[dict] = None,
) -> ObliqueTree:
    """Grows an oblique tree greedily from the root.

    A node becomes a leaf when it reaches ``depth``, is pure, holds fewer than
    ``min_samples_split`` samples, or no split reduces its impurity. Node seeds are
    drawn from ``seed`` in depth-first order, so the tree is a pure function of
    (features, labels, depth, seed, hyper).

    Raises:
        EmptyDatasetError: no samples.
        ConfigError: depth outside 1..20.
        NumericError: non-finite features.
    """
    hyper = hyper or TreeHyperParams()
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise EmptyDatasetError("cannot train a tree on an empty dataset")
    if features.shape != (len(labels), N_FEATURES):
        raise ValueError(f"features must have shape (n, 4), got {features.shape}")
    if not 1 <= depth <= MAX_DEPTH:
        raise ConfigError(f"depth must lie in 1..{MAX_DEPTH}, got {depth}")
    if not np.all(np.isfinite(features)):
        raise NumericError("training features contain non-finite values")
    if labels.min() < 0 or labels.max() >= N_ACTIONS:
        raise ValueError("labels must be action indices 0..2")

    rng = np.random.default_rng(seed)
    nodes: t.List[t.Optional[Node]] = []
    failed_splits = 0

    def grow(index_set: np.ndarray, level: int) -> int:
        nonlocal failed_splits
        index = len(nodes)
        nodes.append(None)
        node_labels = labels[index_set]
        counts = np.bincount(node_labels, minlength=N_ACTIONS)
        node_seed = int(rng.integers(2**63 - 1))
        leaf = LeafNode.from_counts(counts, alpha=hyper.laplace_alpha)

        if (
            level >= depth
            or len(index_set) < hyper.min_samples_split
            or np.count_nonzero(counts) < 2
        ):
            nodes[index] = leaf
            return index

        split = fit_split(features[index_set], node_labels, node_seed, hyper)
        if split is None:
            failed_splits += 1
            nodes[index] = leaf
            return index

        left = grow(index_set[split.left_mask], level + 1)
        right = grow(index_set[~split.left_mask], level + 1)
        nodes[index] = ObliqueNode(
            weights=tuple(float(w) for w in split.weights),
            threshold=split.threshold,
            left=left,
            right=right,
            n_samples=len(index_set),
        )
        return index

    grow(np.arange(len(labels)), 0)
    if failed_splits:
        warnings.warn(
            f"{failed_splits} node(s) with mixed labels became leaves: "
            "no hyperplane reduced their impurity"
        )
    tree = ObliqueTree(
        nodes=tuple(nodes),
        depth_limit=depth,
        seed=seed,
        metadata=dict(metadata or {}, dataset_size=len(labels)),
    )
    logger.debug("trained %r", tree)
    return tree


def train(
    dataset: LabeledData,
    depth: int,
    seed: int,
    hyper: TreeHyperParams | None = None,
    metadata: t.Optional[dict] = None,
) -> ObliqueTree:
    """Trains a tree on a labelled dataset such as a ``SampleSet``."""
    return train_tree(dataset.features, dataset.labels, depth, seed, hyper, metadata)


def accuracy(tree: ObliqueTree, features: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(tree.predict_batch(features) == np.asarray(labels)))
