"""Init module."""

from .packed_tree import LEAF_KIND, PACKED_MAGIC, PACKED_VERSION, SPLIT_KIND, packed_tree_structure

__all__ = [
    "packed_tree_structure",
    "PACKED_MAGIC",
    "PACKED_VERSION",
    "SPLIT_KIND",
    "LEAF_KIND",
]
