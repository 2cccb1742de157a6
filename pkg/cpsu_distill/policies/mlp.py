"""Inference-only multilayer perceptron policy (Q-network over the three actions)."""

from __future__ import annotations

import json
import logging
import math
import numbers
import typing as t
from pathlib import Path

import numpy as np

from cpsu_distill.exceptions import (
    DimensionError,
    MalformedDocumentError,
    NonFiniteWeightsError,
)
from cpsu_distill.policies.base import argmax_action
from cpsu_distill.sim.state import N_ACTIONS, Action, Observation

# 4 observables -> two dense tanh layers of 64 -> 3 Q-values
DEFAULT_LAYER_SIZES = (4, 64, 64, 3)
INPUT_SIZE = 4

Layer = t.Tuple[np.ndarray, np.ndarray]

logger = logging.getLogger(__name__)


class MlpPolicy(object):
    """Dense network with tanh hidden activations and a linear output layer.

    Each layer holds a weight matrix of shape (rows, cols) = (outputs, inputs) and a
    bias of length rows, so cols of layer k equals rows of layer k-1. Acting on the
    swing-up task needs 4 inputs and 3 outputs; other shapes are accepted for
    inspection (e.g. parameter counting).

    Attributes:
        layers: (weights, bias) pairs from input to output.
        hidden_activation: only "tanh" is supported.
    """

    def __init__(self, layers: t.Sequence[Layer], hidden_activation: str = "tanh") -> None:
        if hidden_activation != "tanh":
            raise MalformedDocumentError(
                f"unsupported hidden activation {hidden_activation!r}",
                path="/hidden_activation",
            )
        if len(layers) == 0:
            raise MalformedDocumentError("network has no layers", path="/layers")
        checked = []
        expected_cols = None
        for k, (weights, bias) in enumerate(layers):
            weights = np.array(weights, dtype=float)
            bias = np.array(bias, dtype=float)
            if weights.ndim != 2:
                raise DimensionError("weights must be a matrix", layer=k)
            rows, cols = weights.shape
            if bias.shape != (rows,):
                raise DimensionError(
                    f"bias has length {bias.size}, expected {rows}", layer=k
                )
            if expected_cols is not None and cols != expected_cols:
                raise DimensionError(
                    f"layer takes {cols} inputs but receives {expected_cols}", layer=k
                )
            if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
                raise NonFiniteWeightsError(f"layer {k} holds non-finite values")
            weights.setflags(write=False)
            bias.setflags(write=False)
            checked.append((weights, bias))
            expected_cols = rows
        self.layers: t.Tuple[Layer, ...] = tuple(checked)
        self.hidden_activation = hidden_activation

    @classmethod
    def zeros(cls, sizes: t.Sequence[int] = DEFAULT_LAYER_SIZES) -> "MlpPolicy":
        return cls(
            [
                (np.zeros((n_out, n_in)), np.zeros(n_out))
                for n_in, n_out in zip(sizes[:-1], sizes[1:])
            ]
        )

    @classmethod
    def random(cls, sizes: t.Sequence[int] = DEFAULT_LAYER_SIZES, seed: int = 0) -> "MlpPolicy":
        """Glorot-uniform initialised network, handy for tests and placeholders."""
        rng = np.random.default_rng(seed)
        layers = []
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            limit = math.sqrt(6.0 / (n_in + n_out))
            layers.append(
                (rng.uniform(-limit, limit, size=(n_out, n_in)), rng.uniform(-0.1, 0.1, n_out))
            )
        return cls(layers)

    @property
    def input_size(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_size(self) -> int:
        return self.layers[-1][0].shape[0]

    def check_task_shape(self) -> None:
        """Raises DimensionError unless the network maps 4 observables to 3 Q-values."""
        if self.input_size != INPUT_SIZE:
            raise DimensionError(
                f"network takes {self.input_size} inputs, expected {INPUT_SIZE}", layer=0
            )
        if self.output_size != N_ACTIONS:
            raise DimensionError(
                f"output size is {self.output_size}, expected {N_ACTIONS}",
                layer=len(self.layers) - 1,
            )

    def forward(self, observation: Observation | np.ndarray) -> np.ndarray:
        return mlp_forward(self, observation)

    def act(self, observation: Observation) -> Action:
        """Greedy action; ties go to the lowest action index."""
        self.check_task_shape()
        return argmax_action(self.forward(observation))

    def count_params(self) -> int:
        return count_params(self)

    def to_document(self) -> dict:
        return {
            "input_size": self.input_size,
            "hidden_activation": self.hidden_activation,
            "layers": [
                {
                    "rows": int(w.shape[0]),
                    "cols": int(w.shape[1]),
                    "weights": [float(v) for v in w.ravel(order="C")],
                    "bias": [float(v) for v in b],
                }
                for w, b in self.layers
            ],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MlpPolicy) or len(self.layers) != len(other.layers):
            return False
        return all(
            np.array_equal(w1, w2) and np.array_equal(b1, b2)
            for (w1, b1), (w2, b2) in zip(self.layers, other.layers)
        )

    def __repr__(self) -> str:
        sizes = [self.input_size] + [w.shape[0] for w, _ in self.layers]
        return f"MlpPolicy({'->'.join(str(s) for s in sizes)})"


def mlp_forward(policy: MlpPolicy, observation: Observation | np.ndarray) -> np.ndarray:
    """Q-values for one observation: affine and tanh on every layer but the last."""
    x = (
        observation.as_array()
        if isinstance(observation, Observation)
        else np.asarray(observation, dtype=float)
    )
    if x.shape != (policy.input_size,):
        raise DimensionError(
            f"input has shape {x.shape}, expected ({policy.input_size},)", layer=0
        )
    last = len(policy.layers) - 1
    for k, (weights, bias) in enumerate(policy.layers):
        x = weights @ x + bias
        if k != last:
            x = np.tanh(x)
    return x


def count_params(policy: MlpPolicy) -> int:
    """Number of trainable parameters; depends only on the layer shapes."""
    return sum(w.size + b.size for w, b in policy.layers)


def _number_list(values, path: str) -> t.List[float]:
    if not isinstance(values, list):
        raise MalformedDocumentError("expected a list of numbers", path=path)
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, numbers.Real):
            raise MalformedDocumentError("expected a number", path=f"{path}/{i}")
    return [float(v) for v in values]


def mlp_from_document(document: t.Any) -> MlpPolicy:
    """Validates a weight document and builds the policy.

    Raises:
        MalformedDocumentError: wrong structure or types.
        DimensionError: layer shapes do not chain or do not match their data.
        NonFiniteWeightsError: NaN or infinite weights.
    """
    if not isinstance(document, dict):
        raise MalformedDocumentError("document must be an object", path="/")
    for key in ("input_size", "hidden_activation", "layers"):
        if key not in document:
            raise MalformedDocumentError(f"missing key {key!r}", path=f"/{key}")
    if document["input_size"] != INPUT_SIZE:
        raise DimensionError(
            f"input_size is {document['input_size']}, expected {INPUT_SIZE}", layer=0
        )
    if not isinstance(document["layers"], list):
        raise MalformedDocumentError("layers must be a list", path="/layers")

    layers = []
    for k, layer in enumerate(document["layers"]):
        path = f"/layers/{k}"
        if not isinstance(layer, dict):
            raise MalformedDocumentError("layer must be an object", path=path)
        for key in ("rows", "cols", "weights", "bias"):
            if key not in layer:
                raise MalformedDocumentError(f"missing key {key!r}", path=f"{path}/{key}")
        rows, cols = layer["rows"], layer["cols"]
        if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
            raise MalformedDocumentError("rows and cols must be positive integers", path=path)
        weights = _number_list(layer["weights"], f"{path}/weights")
        bias = _number_list(layer["bias"], f"{path}/bias")
        if len(weights) != rows * cols:
            raise DimensionError(
                f"{len(weights)} weights given for a {rows}x{cols} matrix", layer=k
            )
        layers.append((np.array(weights).reshape(rows, cols), np.array(bias)))
    policy = MlpPolicy(layers, hidden_activation=document["hidden_activation"])
    policy.check_task_shape()
    return policy


def load_mlp(filepath: str | Path) -> MlpPolicy:
    """Reads an MLP policy from a JSON weight file."""
    filepath = Path(filepath)
    if not filepath.exists():
        raise FileNotFoundError(filepath)
    with open(filepath, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise MalformedDocumentError(f"not valid JSON: {e}", path=str(filepath))
    policy = mlp_from_document(document)
    logger.info("loaded %r with %d parameters", policy, count_params(policy))
    return policy


def save_mlp(policy: MlpPolicy, filepath: str | Path) -> Path:
    filepath = Path(filepath)
    with open(filepath, "w", encoding="utf-8") as f:
        json.dump(policy.to_document(), f, indent=1)
    return filepath
