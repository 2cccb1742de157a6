from __future__ import annotations

import dataclasses
import typing as t

import numpy as np

from cpsu_distill.sim.state import Action, Observation


@t.runtime_checkable
class Policy(t.Protocol):
    """Anything that maps an observation to an action.

    All policies in this package are deterministic: the same observation always
    yields the same action.
    """

    def act(self, observation: Observation) -> Action:
        ...


def argmax_action(values: t.Sequence[float] | np.ndarray) -> Action:
    """Action with the largest value; ties go to the lowest action index."""
    return Action(int(np.argmax(np.asarray(values))))


@dataclasses.dataclass(frozen=True)
class ConstantPolicy:
    """Always emits the same action, e.g. the NoOp baseline."""

    action: Action = Action.NoOp

    def act(self, observation: Observation) -> Action:
        return self.action
