from __future__ import annotations

import logging
import typing as t

import numpy as np

from cpsu_distill.trees.nodes import LeafNode, Node, ObliqueNode
from cpsu_distill.trees.tree import ObliqueTree, count_nodes

logger = logging.getLogger(__name__)

# nested form used while pruning: a leaf, or (decision node, left subtree, right subtree)
_Subtree = t.Union[LeafNode, t.Tuple[ObliqueNode, "_Subtree", "_Subtree"]]


def _merge_leaves(a: LeafNode, b: LeafNode) -> LeafNode:
    """Sample-weighted mean of two leaves that predict the same action."""
    if a.n_samples + b.n_samples > 0:
        wa, wb = float(a.n_samples), float(b.n_samples)
    else:
        wa = wb = 1.0
    merged = (np.asarray(a.distribution) * wa + np.asarray(b.distribution) * wb) / (wa + wb)
    merged = merged / merged.sum()
    leaf = LeafNode(
        distribution=tuple(float(p) for p in merged),
        n_samples=a.n_samples + b.n_samples,
    )
    if leaf.predicted_action != a.predicted_action:
        # rounding broke an exact tie, keep the heavier leaf's distribution
        heavier = a if wa >= wb else b
        leaf = LeafNode(distribution=heavier.distribution, n_samples=leaf.n_samples)
    return leaf


def _collapse(tree: ObliqueTree, index: int) -> _Subtree:
    node = tree.nodes[index]
    if isinstance(node, LeafNode):
        return node
    left = _collapse(tree, node.left)
    right = _collapse(tree, node.right)
    if (
        isinstance(left, LeafNode)
        and isinstance(right, LeafNode)
        and left.predicted_action == right.predicted_action
    ):
        return _merge_leaves(left, right)
    return (node, left, right)


def _flatten(subtree: _Subtree, nodes: t.List[t.Optional[Node]]) -> int:
    index = len(nodes)
    nodes.append(None)
    if isinstance(subtree, LeafNode):
        nodes[index] = subtree
        return index
    node, left, right = subtree
    left_index = _flatten(left, nodes)
    right_index = _flatten(right, nodes)
    nodes[index] = ObliqueNode(
        weights=node.weights,
        threshold=node.threshold,
        left=left_index,
        right=right_index,
        n_samples=node.n_samples,
    )
    return index


def prune_argmax(tree: ObliqueTree) -> ObliqueTree:
    """Collapses every subtree whose leaves all predict the same action into one leaf.

    Works bottom-up, so the result has no collapsible subtree and predicts exactly like
    the input everywhere. Pruning a pruned tree returns an equal tree.
    """
    nodes: t.List[t.Optional[Node]] = []
    _flatten(_collapse(tree, 0), nodes)
    pruned = ObliqueTree(
        nodes=tuple(nodes),
        depth_limit=tree.depth_limit,
        seed=tree.seed,
        metadata=dict(tree.metadata),
    )
    logger.debug("pruned %s -> %s nodes", count_nodes(tree), count_nodes(pruned))
    return pruned
