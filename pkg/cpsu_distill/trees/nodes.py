from __future__ import annotations

import dataclasses
import typing as t

import numpy as np

from cpsu_distill.sim.state import N_ACTIONS, Action

N_FEATURES = 4


def project(features: np.ndarray, weights: t.Sequence[float]) -> np.ndarray:
    """Row-wise ``weights . x`` for a (n, 4) feature matrix.

    Summed term by term in a fixed order so that training, batch prediction and
    single-observation routing agree bit for bit.
    """
    w0, w1, w2, w3 = (float(w) for w in weights)
    return (
        features[:, 0] * w0 + features[:, 1] * w1 + features[:, 2] * w2 + features[:, 3] * w3
    )


def project_one(x: t.Sequence[float], weights: t.Sequence[float]) -> float:
    w0, w1, w2, w3 = (float(w) for w in weights)
    x0, x1, x2, x3 = (float(v) for v in x)
    return x0 * w0 + x1 * w1 + x2 * w2 + x3 * w3


@dataclasses.dataclass(frozen=True)
class ObliqueNode:
    """Decision node: go left iff ``weights . x <= threshold``.

    Attributes:
        weights: 4 feature weights, not all zero.
        threshold: hyperplane offset.
        left: index of the left child in the tree's node list.
        right: index of the right child.
        n_samples: training samples that reached this node.
    """

    weights: t.Tuple[float, float, float, float]
    threshold: float
    left: int
    right: int
    n_samples: int = 0

    def goes_left(self, x: t.Sequence[float]) -> bool:
        return project_one(x, self.weights) <= self.threshold


@dataclasses.dataclass(frozen=True)
class LeafNode:
    """Leaf holding a distribution over the three actions.

    Attributes:
        distribution: non-negative, sums to 1.
        n_samples: training samples that reached this leaf.
    """

    distribution: t.Tuple[float, float, float]
    n_samples: int = 0

    @property
    def predicted_action(self) -> Action:
        # np.argmax returns the first maximum: ties go to the lowest action index
        return Action(int(np.argmax(self.distribution)))

    @classmethod
    def from_counts(cls, counts: t.Sequence[float], alpha: float = 1.0) -> "LeafNode":
        """Laplace-smoothed empirical distribution of the label counts."""
        counts = np.asarray(counts, dtype=float)
        total = counts.sum() + alpha * N_ACTIONS
        distribution = (counts + alpha) / total
        return cls(
            distribution=tuple(float(p) for p in distribution),
            n_samples=int(round(counts.sum())),
        )

    @classmethod
    def one_hot(cls, action: Action | int, n_samples: int = 0) -> "LeafNode":
        distribution = [0.0] * N_ACTIONS
        distribution[int(action)] = 1.0
        return cls(distribution=tuple(distribution), n_samples=n_samples)


Node = t.Union[ObliqueNode, LeafNode]
