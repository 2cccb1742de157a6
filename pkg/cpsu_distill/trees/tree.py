from __future__ import annotations

import dataclasses
import functools
import typing as t

import numpy as np

from cpsu_distill.exceptions import NumericError
from cpsu_distill.sim.state import Action, Observation
from cpsu_distill.trees.nodes import LeafNode, Node, ObliqueNode, project

PARAMS_PER_DECISION = 5
PARAMS_PER_LEAF = 1


@dataclasses.dataclass(frozen=True)
class ObliqueTree:
    """Immutable oblique decision tree stored as a flat node list.

    Node 0 is the root; decision nodes reference their children by index. Trees built by
    this package list their nodes in depth-first preorder.

    Attributes:
        nodes: decision and leaf nodes.
        depth_limit: maximum root-to-leaf path length the tree was trained with.
        seed: training seed.
        metadata: free-form provenance, e.g. dataset size and iteration index.
    """

    nodes: t.Tuple[Node, ...]
    depth_limit: int
    seed: int = 0
    metadata: t.Dict[str, t.Any] = dataclasses.field(default_factory=dict, compare=False)

    @classmethod
    def single_leaf(cls, leaf: LeafNode, depth_limit: int = 1, seed: int = 0) -> "ObliqueTree":
        return cls(nodes=(leaf,), depth_limit=depth_limit, seed=seed)

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def act(self, observation: Observation) -> Action:
        return predict(self, observation)

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        return predict_batch(self, features)

    def count_nodes(self) -> t.Tuple[int, int]:
        return count_nodes(self)

    def count_params(self) -> int:
        return count_params(self)

    def depth(self) -> int:
        return tree_depth(self)

    @functools.cached_property
    def _arrays(self) -> t.Tuple[np.ndarray, ...]:
        n = len(self.nodes)
        weights = np.zeros((n, 4))
        thresholds = np.zeros(n)
        left = np.zeros(n, dtype=np.int64)
        right = np.zeros(n, dtype=np.int64)
        is_leaf = np.zeros(n, dtype=bool)
        actions = np.zeros(n, dtype=np.int64)
        for i, node in enumerate(self.nodes):
            if isinstance(node, LeafNode):
                is_leaf[i] = True
                actions[i] = int(node.predicted_action)
            else:
                weights[i] = node.weights
                thresholds[i] = node.threshold
                left[i] = node.left
                right[i] = node.right
        return weights, thresholds, left, right, is_leaf, actions

    def __repr__(self) -> str:
        decisions, leaves = count_nodes(self)
        return (
            f"ObliqueTree(depth_limit={self.depth_limit}, seed={self.seed}, "
            f"decisions={decisions}, leaves={leaves})"
        )


def find_leaf(tree: ObliqueTree, x: t.Sequence[float]) -> LeafNode:
    node = tree.root
    while isinstance(node, ObliqueNode):
        node = tree.nodes[node.left if node.goes_left(x) else node.right]
    return node


def predict(tree: ObliqueTree, observation: Observation | t.Sequence[float]) -> Action:
    """Routes the observation to a leaf and returns its argmax action.

    Raises:
        NumericError: on a non-finite observation.
    """
    x = (
        observation.as_array()
        if isinstance(observation, Observation)
        else np.asarray(observation, dtype=float)
    )
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite observation: {x}")
    return find_leaf(tree, x).predicted_action


def predict_batch(tree: ObliqueTree, features: np.ndarray) -> np.ndarray:
    """Actions for every row of a (n, 4) feature matrix, routed as :func:`predict` does."""
    features = np.asarray(features, dtype=float)
    weights, thresholds, left, right, is_leaf, actions = tree._arrays
    index = np.zeros(len(features), dtype=np.int64)
    active = ~is_leaf[index]
    while np.any(active):
        rows = np.flatnonzero(active)
        at = index[rows]
        goes_left = project_rows(features[rows], weights[at]) <= thresholds[at]
        index[rows] = np.where(goes_left, left[at], right[at])
        active = ~is_leaf[index]
    return actions[index]


def project_rows(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # same term order as nodes.project
    return (
        features[:, 0] * weights[:, 0]
        + features[:, 1] * weights[:, 1]
        + features[:, 2] * weights[:, 2]
        + features[:, 3] * weights[:, 3]
    )


def count_nodes(tree: ObliqueTree) -> t.Tuple[int, int]:
    """Returns (decision node count, leaf count)."""
    leaves = sum(1 for node in tree.nodes if isinstance(node, LeafNode))
    return len(tree.nodes) - leaves, leaves


def count_params(tree: ObliqueTree) -> int:
    """Decision nodes count 4 weights and a threshold, leaves count their action label."""
    decisions, leaves = count_nodes(tree)
    return decisions * PARAMS_PER_DECISION + leaves * PARAMS_PER_LEAF


def tree_depth(tree: ObliqueTree) -> int:
    """Longest root-to-leaf path, in edges. A single leaf has depth 0."""
    deepest = 0
    stack = [(0, 0)]
    while stack:
        index, depth = stack.pop()
        node = tree.nodes[index]
        if isinstance(node, ObliqueNode):
            stack.append((node.left, depth + 1))
            stack.append((node.right, depth + 1))
        else:
            deepest = max(deepest, depth)
    return deepest


def full_tree(
    depth: int,
    leaf_actions: t.Callable[[int], Action | int] | None = None,
    seed: int = 0,
) -> ObliqueTree:
    """Fully populated tree of the given depth with random hyperplanes.

    Args:
        depth: every leaf sits at this depth.
        leaf_actions: maps the k-th leaf (left to right) to its action; cycles through
            the three actions by default.
        seed: seeds the hyperplanes.
    """
    rng = np.random.default_rng(seed)
    leaf_actions = leaf_actions or (lambda k: k % 3)
    nodes: t.List[Node | None] = []
    leaf_counter = [0]

    def build(level: int) -> int:
        index = len(nodes)
        nodes.append(None)
        if level == depth:
            nodes[index] = LeafNode.one_hot(leaf_actions(leaf_counter[0]))
            leaf_counter[0] += 1
            return index
        weights = rng.normal(size=4)
        threshold = float(rng.normal())
        left = build(level + 1)
        right = build(level + 1)
        nodes[index] = ObliqueNode(
            weights=tuple(float(w) for w in weights),
            threshold=threshold,
            left=left,
            right=right,
        )
        return index

    build(0)
    return ObliqueTree(nodes=tuple(nodes), depth_limit=max(depth, 1), seed=seed)
