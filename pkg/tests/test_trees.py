import json

import numpy as np
import pytest

from cpsu_distill.exceptions import (
    ConfigError,
    EmptyDatasetError,
    MalformedDocumentError,
    NumericError,
    SchemaError,
    UnsupportedVersionError,
)
from cpsu_distill.sim import Action, Observation
from cpsu_distill.trees import (
    LeafNode,
    ObliqueNode,
    ObliqueTree,
    TreeHyperParams,
    count_nodes,
    count_params,
    deserialize,
    fit_split,
    full_tree,
    load_tree,
    pack_tree,
    predict,
    predict_batch,
    prune_argmax,
    save_tree,
    serialize,
    train_tree,
    unpack_tree,
)
from cpsu_distill.trees.nodes import project_one
from cpsu_distill.trees.training import accuracy, split_impurity
from cpsu_distill.trees.tree import tree_depth

FAST = TreeHyperParams(restarts=2, local_search_passes=6)


def _leaf(*distribution, n=0):
    return LeafNode(distribution=tuple(distribution), n_samples=n)


def _stump(left_leaf, right_leaf, weights=(1.0, 0.0, 0.0, 0.0), threshold=0.0):
    return ObliqueTree(
        nodes=(
            ObliqueNode(weights=weights, threshold=threshold, left=1, right=2),
            left_leaf,
            right_leaf,
        ),
        depth_limit=1,
    )


# prediction


def test_single_leaf_predicts_argmax():
    tree = ObliqueTree.single_leaf(_leaf(0.2, 0.5, 0.3))
    assert predict(tree, Observation()) == Action.NoOp


def test_leaf_tie_goes_to_lowest_action():
    tree = ObliqueTree.single_leaf(_leaf(0.5, 0.5, 0.0))
    assert predict(tree, Observation()) == Action.Left


def test_boundary_goes_left():
    tree = _stump(LeafNode.one_hot(0), LeafNode.one_hot(2))
    assert predict(tree, Observation(0.0, 5.0, 5.0, 5.0)) == Action.Left
    assert predict(tree, Observation(1e-12, 0.0, 0.0, 0.0)) == Action.Right


def test_predict_rejects_non_finite():
    tree = ObliqueTree.single_leaf(LeafNode.one_hot(1))
    with pytest.raises(NumericError):
        predict(tree, [np.nan, 0.0, 0.0, 0.0])


def test_batch_prediction_matches_single():
    tree = full_tree(6, seed=2)
    features = np.random.default_rng(1).normal(size=(500, 4))
    batch = predict_batch(tree, features)
    assert list(batch) == [int(predict(tree, x)) for x in features]


# counting


def test_full_depth_10_tree_counts():
    tree = full_tree(10)
    assert count_nodes(tree) == (1023, 1024)
    assert tree_depth(tree) == 10
    assert count_params(tree) == 1023 * 5 + 1024


def test_497_decision_tree_params_and_reduction(caterpillar_tree):
    tree = caterpillar_tree
    assert count_nodes(tree) == (497, 498)
    assert count_params(tree) == 2983
    assert 1 - count_params(tree) / 4675 == pytest.approx(0.362, abs=0.001)


def test_single_leaf_counts():
    tree = ObliqueTree.single_leaf(LeafNode.one_hot(0))
    assert count_nodes(tree) == (0, 1)
    assert count_params(tree) == 1


# pruning


def test_prune_collapses_same_action_leaves():
    tree = _stump(_leaf(0.8, 0.1, 0.1, n=10), _leaf(0.7, 0.2, 0.1, n=30))
    pruned = prune_argmax(tree)
    assert count_nodes(pruned) == (0, 1)
    leaf = pruned.root
    assert leaf.predicted_action == Action.Left
    np.testing.assert_allclose(leaf.distribution, [0.725, 0.175, 0.1])
    assert leaf.n_samples == 40


def test_prune_keeps_differing_leaves():
    tree = _stump(LeafNode.one_hot(0), LeafNode.one_hot(1))
    assert prune_argmax(tree) == tree


def test_prune_full_tree_with_one_action_collapses_entirely():
    tree = full_tree(10, leaf_actions=lambda k: Action.Right)
    pruned = prune_argmax(tree)
    assert count_nodes(pruned) == (0, 1)
    assert pruned.root.predicted_action == Action.Right


def test_prune_partial_collapse():
    # leaves L L | L R: the left pair collapses, the right pair stays
    tree = full_tree(2, leaf_actions=lambda k: [0, 0, 0, 2][k])
    pruned = prune_argmax(tree)
    assert count_nodes(pruned) == (2, 3)


def test_pruning_is_lossless_and_idempotent():
    rng = np.random.default_rng(11)
    observations = rng.uniform(-1.5, 1.5, size=(10_000, 4))
    for k in range(50):
        n = 120
        features = rng.normal(size=(n, 4))
        labels = rng.integers(0, 3, size=n)
        # a few coarse structures plus noise so trees have collapsible parts
        labels[features[:, 0] > 0.5] = 2
        tree = train_tree(features, labels, depth=5, seed=k, hyper=FAST)
        pruned = prune_argmax(tree)
        np.testing.assert_array_equal(
            predict_batch(pruned, observations), predict_batch(tree, observations)
        )
        assert count_params(pruned) <= count_params(tree)
        decisions, leaves = count_nodes(pruned)
        assert leaves == decisions + 1
        assert prune_argmax(pruned) == pruned


# split search


def test_fit_split_separates_two_points():
    features = np.array([[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
    labels = np.array([0, 2])
    split = fit_split(features, labels, seed=0)
    assert split is not None
    assert split.impurity == 0.0
    assert list(split.left_mask) in ([True, False], [False, True])


def test_fit_split_on_xor_cannot_reach_zero():
    corners = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=float)
    rng = np.random.default_rng(0)
    points = np.repeat(corners, 25, axis=0) + 0.05 * rng.normal(size=(100, 2))
    features = np.hstack([points, np.zeros((100, 2))])
    labels = np.repeat([0, 0, 1, 1], 25)
    split = fit_split(features, labels, seed=3)
    assert split is not None
    assert split.impurity > 0.0
    assert split.impurity < split.parent_impurity


def test_fit_split_single_label_gives_none():
    features = np.random.default_rng(0).normal(size=(20, 4))
    assert fit_split(features, np.ones(20, dtype=int), seed=0) is None


def test_fit_split_identical_features_gives_none():
    features = np.ones((20, 4))
    labels = np.array([0, 1] * 10)
    assert fit_split(features, labels, seed=0) is None


def test_more_restarts_never_hurt():
    rng = np.random.default_rng(5)
    for k in range(100):
        centres = rng.normal(scale=2.0, size=(3, 4))
        labels = rng.integers(0, 3, size=60)
        features = centres[labels] + rng.normal(size=(60, 4))
        one = fit_split(features, labels, seed=k, hyper=TreeHyperParams(restarts=1))
        five = fit_split(features, labels, seed=k, hyper=TreeHyperParams(restarts=5))
        if one is None:
            continue
        assert five is not None
        assert five.impurity <= one.impurity + 1e-12


def test_accepted_split_reduces_gini():
    rng = np.random.default_rng(2)
    features = rng.normal(size=(300, 4))
    labels = (features @ np.array([1.0, -2.0, 0.5, 0.0]) > 0).astype(int) + rng.integers(0, 2, 300)
    split = fit_split(features, labels, seed=9)
    assert split is not None
    assert split_impurity(labels, split.left_mask) < split.parent_impurity


# training


def test_single_label_dataset_gives_single_leaf():
    features = np.random.default_rng(0).normal(size=(50, 4))
    tree = train_tree(features, np.full(50, 2), depth=5, seed=0)
    assert count_nodes(tree) == (0, 1)
    assert predict(tree, Observation()) == Action.Right


def test_separable_dataset_depth_one(separable_blobs):
    features, labels = separable_blobs
    tree = train_tree(features, labels, depth=1, seed=0)
    assert count_nodes(tree) == (1, 2)
    assert accuracy(tree, features, labels) == 1.0


def test_training_is_seeded(separable_blobs):
    features, labels = separable_blobs
    labels = labels.copy()
    labels[::7] = 1
    a = train_tree(features, labels, depth=4, seed=1, hyper=FAST)
    b = train_tree(features, labels, depth=4, seed=1, hyper=FAST)
    assert a == b


def test_depth_bound_and_leaf_identity():
    rng = np.random.default_rng(4)
    features = rng.normal(size=(400, 4))
    labels = rng.integers(0, 3, size=400)
    for depth in (1, 3, 6):
        tree = train_tree(features, labels, depth=depth, seed=depth, hyper=FAST)
        assert tree_depth(tree) <= depth
        decisions, leaves = count_nodes(tree)
        assert leaves == decisions + 1
        for node in tree.nodes:
            if isinstance(node, LeafNode):
                assert sum(node.distribution) == pytest.approx(1.0, abs=1e-9)


def test_leaves_are_laplace_smoothed():
    features = np.random.default_rng(0).normal(size=(5, 4))
    tree = train_tree(features, np.array([0, 0, 0, 0, 1]), depth=3, seed=0)
    # fewer samples than min_samples_split: the root is a leaf
    np.testing.assert_allclose(tree.root.distribution, [5 / 8, 2 / 8, 1 / 8])


def test_identical_features_with_mixed_labels_degenerate_to_leaf():
    features = np.ones((30, 4))
    labels = np.array([0, 1, 2] * 10)
    with pytest.warns(UserWarning):
        tree = train_tree(features, labels, depth=4, seed=0)
    assert count_nodes(tree) == (0, 1)


def test_empty_dataset_raises():
    with pytest.raises(EmptyDatasetError):
        train_tree(np.zeros((0, 4)), np.zeros(0, dtype=int), depth=3, seed=0)


@pytest.mark.parametrize("depth", [0, 21])
def test_depth_out_of_range_raises(depth, separable_blobs):
    features, labels = separable_blobs
    with pytest.raises(ConfigError):
        train_tree(features, labels, depth=depth, seed=0)


def test_tree_metadata_records_dataset_size(separable_blobs):
    features, labels = separable_blobs
    tree = train_tree(features, labels, depth=2, seed=0, metadata={"iteration": 3})
    assert tree.metadata == {"iteration": 3, "dataset_size": 200}


# storage


def test_json_round_trip(tmp_path, separable_blobs):
    features, labels = separable_blobs
    tree = train_tree(features, labels, depth=3, seed=4, hyper=FAST)
    path = save_tree(tree, tmp_path / "tree.json")
    loaded = load_tree(path)
    assert loaded == tree
    assert loaded.metadata == tree.metadata
    np.testing.assert_array_equal(predict_batch(loaded, features), predict_batch(tree, features))


def test_document_round_trip_keeps_sample_counts():
    tree = _stump(_leaf(0.8, 0.1, 0.1, n=10), _leaf(0.1, 0.1, 0.8, n=30))
    assert deserialize(json.loads(json.dumps(serialize(tree)))) == tree


def _document():
    return serialize(_stump(LeafNode.one_hot(0), LeafNode.one_hot(2)))


def test_missing_child_reports_path():
    document = _document()
    del document["nodes"][0]["left"]
    with pytest.raises(SchemaError) as error:
        deserialize(document)
    assert error.value.path == "/nodes/0/left"


def test_child_index_out_of_range():
    document = _document()
    document["nodes"][0]["right"] = 3
    with pytest.raises(SchemaError) as error:
        deserialize(document)
    assert error.value.path == "/nodes/0/right"


def test_shared_child_is_rejected():
    document = _document()
    document["nodes"][0]["right"] = 1
    with pytest.raises(SchemaError):
        deserialize(document)


def test_distribution_must_sum_to_one():
    document = _document()
    document["nodes"][1]["distribution"] = [0.5, 0.2, 0.2]
    with pytest.raises(SchemaError) as error:
        deserialize(document)
    assert error.value.path == "/nodes/1/distribution"


def test_zero_weights_are_rejected():
    document = _document()
    document["nodes"][0]["weights"] = [0.0, 0.0, 0.0, 0.0]
    with pytest.raises(SchemaError):
        deserialize(document)


def test_depth_beyond_limit_is_rejected():
    document = serialize(full_tree(3))
    document["depth_limit"] = 2
    with pytest.raises(SchemaError):
        deserialize(document)


def test_unsupported_version():
    document = _document()
    document["version"] = 2
    with pytest.raises(UnsupportedVersionError) as error:
        deserialize(document)
    assert error.value.path == "/version"


def test_packed_round_trip(tmp_path):
    # hyperplanes survive the packed format bit for bit
    tree = ObliqueTree(
        nodes=(
            ObliqueNode(weights=(0.1, -1.0 / 3.0, 0.0, 0.7), threshold=0.123456789, left=1, right=2),
            LeafNode.one_hot(0),
            ObliqueNode(weights=(0.0, 1.0, 0.0, 0.0), threshold=-0.5, left=3, right=4),
            LeafNode.one_hot(1),
            LeafNode.one_hot(2),
        ),
        depth_limit=4,
    )
    path = save_tree(tree, tmp_path / "tree.bin")
    assert path.read_bytes()[:4] == b"OPCT"
    assert load_tree(path) == tree


def test_packed_format_keeps_predictions(separable_blobs):
    features, labels = separable_blobs
    tree = train_tree(features, labels, depth=2, seed=0)
    unpacked = unpack_tree(pack_tree(tree))
    assert count_nodes(unpacked) == count_nodes(tree)
    np.testing.assert_array_equal(predict_batch(unpacked, features), labels)


def test_packed_format_routes_boundary_points_like_the_original():
    rng = np.random.default_rng(11)
    weights = rng.uniform(-1.0, 1.0, size=4)
    weights /= np.linalg.norm(weights)
    points = rng.uniform(-1.0, 1.0, size=(200, 4))
    tree = ObliqueTree(
        nodes=(
            ObliqueNode(
                weights=tuple(float(w) for w in weights),
                threshold=project_one(points[0], weights),
                left=1,
                right=2,
            ),
            LeafNode.one_hot(0),
            LeafNode.one_hot(2),
        ),
        depth_limit=1,
    )
    unpacked = unpack_tree(pack_tree(tree))
    # points[0] lies exactly on the hyperplane
    assert predict(tree, points[0]) == Action.Left
    assert predict(unpacked, points[0]) == Action.Left
    np.testing.assert_array_equal(predict_batch(unpacked, points), predict_batch(tree, points))


def test_packed_rejects_other_versions():
    data = bytearray(pack_tree(full_tree(2)))
    data[4] = 1
    with pytest.raises(UnsupportedVersionError):
        unpack_tree(bytes(data))


def test_packed_rejects_bad_magic_and_truncation():
    data = pack_tree(full_tree(2))
    with pytest.raises(MalformedDocumentError):
        unpack_tree(b"XXXX" + data[4:])
    with pytest.raises(MalformedDocumentError):
        unpack_tree(data[:-3])


def test_unsupported_extension(tmp_path):
    tree = ObliqueTree.single_leaf(LeafNode.one_hot(0))
    with pytest.raises(NotImplementedError):
        save_tree(tree, tmp_path / "tree.yaml")
    (tmp_path / "tree.yaml").write_text("{}")
    with pytest.raises(NotImplementedError):
        load_tree(tmp_path / "tree.yaml")


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_tree(tmp_path / "absent.json")
