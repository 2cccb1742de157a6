"""Init module."""

from .nodes import LeafNode, ObliqueNode
from .pruning import prune_argmax
from .serialization import (
    deserialize,
    load_tree,
    pack_tree,
    save_tree,
    serialize,
    unpack_tree,
)
from .training import SplitResult, TreeHyperParams, fit_split, train, train_tree
from .tree import ObliqueTree, count_nodes, count_params, full_tree, predict, predict_batch

__all__ = [
    "ObliqueNode",
    "LeafNode",
    "ObliqueTree",
    "TreeHyperParams",
    "SplitResult",
    "fit_split",
    "train",
    "train_tree",
    "predict",
    "predict_batch",
    "count_nodes",
    "count_params",
    "full_tree",
    "prune_argmax",
    "serialize",
    "deserialize",
    "pack_tree",
    "unpack_tree",
    "save_tree",
    "load_tree",
]
