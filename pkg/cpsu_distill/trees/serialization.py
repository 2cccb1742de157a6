"""JSON and packed binary storage of oblique trees."""

from __future__ import annotations

import json
import math
import numbers
import typing as t
from pathlib import Path

from construct import ConstructError

from cpsu_distill.exceptions import MalformedDocumentError, SchemaError, UnsupportedVersionError
from cpsu_distill.sim.state import N_ACTIONS
from cpsu_distill.trees.binary_structs import (
    LEAF_KIND,
    PACKED_MAGIC,
    PACKED_VERSION,
    SPLIT_KIND,
    packed_tree_structure,
)
from cpsu_distill.trees.nodes import N_FEATURES, LeafNode, Node, ObliqueNode
from cpsu_distill.trees.tree import ObliqueTree, tree_depth

SCHEMA_VERSION = 1
DISTRIBUTION_TOLERANCE = 1e-9


def serialize(tree: ObliqueTree) -> dict:
    """JSON-ready document of a tree; node 0 is the root."""
    nodes = []
    for node in tree.nodes:
        if isinstance(node, ObliqueNode):
            nodes.append(
                {
                    "kind": "split",
                    "weights": [float(w) for w in node.weights],
                    "threshold": float(node.threshold),
                    "left": node.left,
                    "right": node.right,
                    "n_samples": node.n_samples,
                }
            )
        else:
            nodes.append(
                {
                    "kind": "leaf",
                    "distribution": [float(p) for p in node.distribution],
                    "n_samples": node.n_samples,
                }
            )
    document = {
        "version": SCHEMA_VERSION,
        "depth_limit": tree.depth_limit,
        "seed": tree.seed,
        "nodes": nodes,
    }
    if tree.metadata:
        document["metadata"] = dict(tree.metadata)
    return document


def _is_int(value: t.Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _require(node: dict, key: str, path: str) -> t.Any:
    if key not in node:
        raise SchemaError(f"missing key {key!r}", path=f"{path}/{key}")
    return node[key]


def _numbers(values: t.Any, length: int, path: str) -> t.Tuple[float, ...]:
    if not isinstance(values, list) or len(values) != length:
        raise SchemaError(f"expected a list of {length} numbers", path=path)
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
            raise SchemaError("expected a finite number", path=f"{path}/{i}")
    return tuple(float(v) for v in values)


def _n_samples(node: dict, path: str) -> int:
    value = node.get("n_samples", 0)
    if not _is_int(value) or value < 0:
        raise SchemaError("expected a non-negative integer", path=f"{path}/n_samples")
    return value


def _parse_node(node: t.Any, n_nodes: int, path: str) -> Node:
    if not isinstance(node, dict):
        raise SchemaError("node must be an object", path=path)
    kind = _require(node, "kind", path)
    if kind == "split":
        weights = _numbers(_require(node, "weights", path), N_FEATURES, f"{path}/weights")
        if not any(weights):
            raise SchemaError("weights are all zero", path=f"{path}/weights")
        threshold = _require(node, "threshold", path)
        if (
            isinstance(threshold, bool)
            or not isinstance(threshold, numbers.Real)
            or not math.isfinite(threshold)
        ):
            raise SchemaError("expected a finite number", path=f"{path}/threshold")
        children = []
        for key in ("left", "right"):
            child = _require(node, key, path)
            if not _is_int(child) or not 0 < child < n_nodes:
                raise SchemaError(
                    f"child index must lie in 1..{n_nodes - 1}", path=f"{path}/{key}"
                )
            children.append(child)
        return ObliqueNode(
            weights=weights,
            threshold=float(threshold),
            left=children[0],
            right=children[1],
            n_samples=_n_samples(node, path),
        )
    if kind == "leaf":
        distribution = _numbers(
            _require(node, "distribution", path), N_ACTIONS, f"{path}/distribution"
        )
        if min(distribution) < 0 or abs(sum(distribution) - 1.0) > DISTRIBUTION_TOLERANCE:
            raise SchemaError(
                "distribution must be non-negative and sum to 1", path=f"{path}/distribution"
            )
        return LeafNode(distribution=distribution, n_samples=_n_samples(node, path))
    raise SchemaError(f"unknown node kind {kind!r}", path=f"{path}/kind")


def _check_structure(nodes: t.Sequence[Node]) -> None:
    """Every node but the root is referenced exactly once and reachable from the root."""
    parents = [0] * len(nodes)
    for node in nodes:
        if isinstance(node, ObliqueNode):
            parents[node.left] += 1
            parents[node.right] += 1
    for i, count in enumerate(parents[1:], start=1):
        if count != 1:
            raise SchemaError(f"node is referenced {count} times", path=f"/nodes/{i}")
    seen = set()
    stack = [0]
    while stack:
        index = stack.pop()
        if index in seen:
            raise SchemaError("cycle through node", path=f"/nodes/{index}")
        seen.add(index)
        node = nodes[index]
        if isinstance(node, ObliqueNode):
            stack.extend((node.left, node.right))
    if len(seen) != len(nodes):
        orphan = min(set(range(len(nodes))) - seen)
        raise SchemaError("node is unreachable from the root", path=f"/nodes/{orphan}")


def deserialize(document: t.Any) -> ObliqueTree:
    """Validates a tree document and builds the tree.

    Raises:
        UnsupportedVersionError: the version field is not 1.
        SchemaError: any other structural problem, with the path of the offending field.
    """
    if not isinstance(document, dict):
        raise SchemaError("document must be an object", path="/")
    version = _require(document, "version", "")
    if version != SCHEMA_VERSION:
        raise UnsupportedVersionError(
            f"tree schema version {version!r} is not supported (expected {SCHEMA_VERSION})",
            path="/version",
        )
    depth_limit = _require(document, "depth_limit", "")
    if not _is_int(depth_limit) or depth_limit < 1:
        raise SchemaError("expected a positive integer", path="/depth_limit")
    seed = _require(document, "seed", "")
    if not _is_int(seed):
        raise SchemaError("expected an integer", path="/seed")
    raw_nodes = _require(document, "nodes", "")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise SchemaError("expected a non-empty list", path="/nodes")
    metadata = document.get("metadata", {})
    if not isinstance(metadata, dict):
        raise SchemaError("expected an object", path="/metadata")

    nodes = tuple(
        _parse_node(node, len(raw_nodes), f"/nodes/{i}") for i, node in enumerate(raw_nodes)
    )
    _check_structure(nodes)
    tree = ObliqueTree(nodes=nodes, depth_limit=depth_limit, seed=seed, metadata=metadata)
    if tree_depth(tree) > depth_limit:
        raise SchemaError(
            f"tree depth {tree_depth(tree)} exceeds depth_limit {depth_limit}",
            path="/depth_limit",
        )
    return tree


def pack_tree(tree: ObliqueTree) -> bytes:
    """Compact binary form: float64 hyperplanes and uint8 leaf actions."""
    if len(tree.nodes) > 0xFFFF or tree.depth_limit > 0xFF:
        raise ValueError("tree is too large for the packed format")
    nodes = []
    for node in tree.nodes:
        if isinstance(node, ObliqueNode):
            nodes.append(
                dict(
                    kind=SPLIT_KIND,
                    body=dict(
                        weights=list(node.weights),
                        threshold=node.threshold,
                        left=node.left,
                        right=node.right,
                    ),
                )
            )
        else:
            nodes.append(dict(kind=LEAF_KIND, body=dict(action=int(node.predicted_action))))
    return packed_tree_structure.build(
        dict(
            version=PACKED_VERSION,
            depth_limit=tree.depth_limit,
            node_count=len(nodes),
            nodes=nodes,
        )
    )


def unpack_tree(data: bytes) -> ObliqueTree:
    """Reads a packed tree. Leaves come back one-hot; the seed is not stored."""
    if data[:4] != PACKED_MAGIC:
        raise MalformedDocumentError("not a packed tree (bad magic)", path="/magic")
    try:
        parsed = packed_tree_structure.parse(data)
    except ConstructError as e:
        raise MalformedDocumentError(f"truncated or corrupt packed tree: {e}", path="/")
    if parsed.version != PACKED_VERSION:
        raise UnsupportedVersionError(
            f"packed tree version {parsed.version} is not supported", path="/version"
        )
    nodes = []
    for i, record in enumerate(parsed.nodes):
        if record.kind == SPLIT_KIND:
            body = record.body
            nodes.append(
                {
                    "kind": "split",
                    "weights": [float(w) for w in body.weights],
                    "threshold": float(body.threshold),
                    "left": int(body.left),
                    "right": int(body.right),
                }
            )
        elif record.kind == LEAF_KIND:
            if record.body.action >= N_ACTIONS:
                raise MalformedDocumentError("leaf action out of range", path=f"/nodes/{i}")
            distribution = [0.0] * N_ACTIONS
            distribution[record.body.action] = 1.0
            nodes.append({"kind": "leaf", "distribution": distribution})
        else:
            raise MalformedDocumentError(
                f"unknown node kind {record.kind}", path=f"/nodes/{i}/kind"
            )
    return deserialize(
        {
            "version": SCHEMA_VERSION,
            "depth_limit": int(parsed.depth_limit),
            "seed": 0,
            "nodes": nodes,
        }
    )


def save_tree(tree: ObliqueTree, filepath: str | Path) -> Path:
    """Writes a tree, choosing the format from the extension (.json or .bin)."""
    filepath = Path(filepath)
    suffix = filepath.suffix.lower()
    if suffix == ".json":
        with open(filepath, "w", encoding="utf-8") as f:
            json.dump(serialize(tree), f, indent=1)
    elif suffix == ".bin":
        with open(filepath, "wb") as f:
            f.write(pack_tree(tree))
    else:
        raise NotImplementedError(
            f"Saving with file extension {suffix} not supported. Valid options are .json and .bin."
        )
    return filepath


def load_tree(filepath: str | Path) -> ObliqueTree:
    """Reads a tree written by :func:`save_tree`."""
    filepath = Path(filepath)
    if not filepath.exists():
        raise FileNotFoundError(filepath)
    suffix = filepath.suffix.lower()
    if suffix == ".json":
        with open(filepath, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise MalformedDocumentError(f"not valid JSON: {e}", path=str(filepath))
        return deserialize(document)
    if suffix == ".bin":
        with open(filepath, "rb") as f:
            return unpack_tree(f.read())
    raise NotImplementedError(
        f"Loading file extension {suffix} not supported. Valid options are .json and .bin."
    )
