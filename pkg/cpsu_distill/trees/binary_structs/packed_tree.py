from construct import (
    Array,
    Const,
    Float64l,
    Int8ul,
    Int16ul,
    Struct,
    Switch,
    this,
)

# Little-endian layout for microcontroller deployment. Children are node indices,
# node 0 is the root, leaves keep only their argmax action. Hyperplanes are stored as
# float64 so routing of points on a split boundary matches the in-memory tree.

PACKED_MAGIC = b"OPCT"
PACKED_VERSION = 2
SPLIT_KIND = 0
LEAF_KIND = 1

split_record = Struct(
    "weights" / Array(4, Float64l),
    "threshold" / Float64l,
    "left" / Int16ul,
    "right" / Int16ul,
)
leaf_record = Struct(
    "action" / Int8ul,
)
node_structure = Struct(
    "kind" / Int8ul,
    "body" / Switch(this.kind, {SPLIT_KIND: split_record, LEAF_KIND: leaf_record}),
)
packed_tree_structure = Struct(
    "magic" / Const(PACKED_MAGIC),
    "version" / Int8ul,
    "depth_limit" / Int8ul,
    "node_count" / Int16ul,
    "nodes" / Array(this.node_count, node_structure),
)
