"""Init module."""

from .base import ConstantPolicy, Policy, argmax_action
from .energy import EnergyOracle, EnergyOracleParams, energy_act
from .mlp import (
    DEFAULT_LAYER_SIZES,
    MlpPolicy,
    count_params,
    load_mlp,
    mlp_forward,
    mlp_from_document,
    save_mlp,
)

__all__ = [
    "Policy",
    "ConstantPolicy",
    "argmax_action",
    "EnergyOracle",
    "EnergyOracleParams",
    "energy_act",
    "MlpPolicy",
    "DEFAULT_LAYER_SIZES",
    "count_params",
    "load_mlp",
    "mlp_forward",
    "mlp_from_document",
    "save_mlp",
]
