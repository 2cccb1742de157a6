"""Run configuration: simulator, distillation loop, oracle and output location."""

from __future__ import annotations

import dataclasses
import json
import typing as t
from pathlib import Path

from cpsu_distill.distill.iterative import DistillConfig
from cpsu_distill.exceptions import ConfigError
from cpsu_distill.sim.config import SimConfig

ORACLE_KINDS = ("energy", "mlp")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Everything one CLI invocation needs.

    Values come from, in increasing priority: dataclass defaults, a JSON config file,
    command-line flags.

    Attributes:
        sim: simulator parameters.
        distill: distillation loop parameters, the master seed included.
        oracle: ``"energy"`` or ``"mlp:<path>"``.
        output_dir: every file a command writes goes below this directory.
        threads: worker processes for training and evaluation.
    """

    sim: SimConfig = dataclasses.field(default_factory=SimConfig)
    distill: DistillConfig = dataclasses.field(default_factory=DistillConfig)
    oracle: str = "energy"
    output_dir: str = "runs"
    threads: int = 1

    def __post_init__(self) -> None:
        kind = self.oracle.split(":", 1)[0]
        if kind not in ORACLE_KINDS:
            raise ConfigError(
                f"oracle must be 'energy' or 'mlp:<path>', got {self.oracle!r}"
            )
        if kind == "mlp" and not self.oracle[4:]:
            raise ConfigError("oracle 'mlp:' needs a weight file path")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")

    @property
    def master_seed(self) -> int:
        return self.distill.master_seed

    @classmethod
    def from_dict(cls, document: dict) -> "RunConfig":
        """Builds a config from a dict shaped like the JSON config file.

        A top-level ``master_seed`` is folded into the distill section.
        """
        if not isinstance(document, dict):
            raise ConfigError("config must be a JSON object")
        known = {"sim", "distill", "oracle", "output_dir", "threads", "master_seed"}
        unknown = sorted(set(document) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        distill = dict(document.get("distill", {}))
        if "master_seed" in document:
            distill["master_seed"] = document["master_seed"]
        values: t.Dict[str, t.Any] = {
            "sim": SimConfig.from_dict(document.get("sim", {})),
            "distill": DistillConfig.from_dict(distill),
        }
        for key in ("oracle", "output_dir", "threads"):
            if key in document:
                values[key] = document[key]
        return cls(**values)

    @classmethod
    def from_json(cls, filepath: str | Path) -> "RunConfig":
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(filepath)
        with open(filepath, "r", encoding="utf-8") as f:
            try:
                document = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{filepath}: not valid JSON ({e})")
        return cls.from_dict(document)

    def with_overrides(
        self,
        seed: t.Optional[int] = None,
        output_dir: t.Optional[str] = None,
        threads: t.Optional[int] = None,
        oracle: t.Optional[str] = None,
        **distill_overrides: t.Any,
    ) -> "RunConfig":
        """Copy with every non-``None`` override applied."""
        distill_values = {k: v for k, v in distill_overrides.items() if v is not None}
        if seed is not None:
            distill_values["master_seed"] = seed
        distill = dataclasses.replace(self.distill, **distill_values)
        values = {
            k: v
            for k, v in dict(output_dir=output_dir, threads=threads, oracle=oracle).items()
            if v is not None
        }
        return dataclasses.replace(self, distill=distill, **values)

    def to_dict(self) -> dict:
        return {
            "sim": self.sim.to_dict(),
            "distill": self.distill.to_dict(),
            "oracle": self.oracle,
            "output_dir": self.output_dir,
            "threads": self.threads,
        }
