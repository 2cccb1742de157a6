from __future__ import annotations

import csv
import typing as t
from pathlib import Path

from cpsu_distill.sim.state import SimState

TRAJECTORY_HEADER = [
    "step",
    "u",
    "u_dot",
    "y",
    "y_dot",
    "action",
    "reward",
    "terminated",
    "truncated",
    "in_zenith",
]


def write_trajectory_csv(
    filepath: str | Path,
    states: t.Sequence[SimState],
    actions: t.Sequence[int],
    rewards: t.Sequence[float],
    in_zenith: t.Sequence[bool],
    terminated: bool,
    truncated: bool,
) -> Path:
    """Writes one episode as CSV, one row per step.

    ``states`` are the post-step ground-truth states; the terminated/truncated flags
    are only set on the final row.

    Returns:
        Path to the written file.
    """
    filepath = Path(filepath)
    n = len(states)
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRAJECTORY_HEADER)
        for i, state in enumerate(states):
            last = i == n - 1
            writer.writerow(
                [
                    i + 1,
                    repr(state.u),
                    repr(state.u_dot),
                    repr(state.y),
                    repr(state.y_dot),
                    int(actions[i]),
                    repr(float(rewards[i])),
                    int(last and terminated),
                    int(last and truncated),
                    int(bool(in_zenith[i])),
                ]
            )
    return filepath
