from __future__ import annotations

import csv
import dataclasses
import typing as t
from pathlib import Path

import h5py
import numpy as np

from cpsu_distill.exceptions import MalformedDocumentError, NumericError
from cpsu_distill.sim.state import N_ACTIONS, Action, Observation

SAMPLE_HEADER = ["u_norm", "u_dot_obs", "y_norm", "y_dot_obs", "action", "provenance"]
BASE_PROVENANCE = "base"


def iteration_provenance(iteration: int) -> str:
    return f"iteration_{iteration}"


@dataclasses.dataclass(frozen=True)
class Sample:
    """Labelled observation.

    Attributes:
        features: the observation vector (u_norm, u_dot_obs, y_norm, y_dot_obs).
        label: oracle action.
    """

    features: t.Tuple[float, float, float, float]
    label: Action

    def __post_init__(self) -> None:
        if len(self.features) != 4 or not all(np.isfinite(self.features)):
            raise NumericError(f"sample features must be 4 finite numbers, got {self.features}")
        object.__setattr__(self, "label", Action(self.label))

    @classmethod
    def from_observation(cls, observation: Observation, label: Action | int) -> "Sample":
        return cls(
            features=(
                observation.u_norm,
                observation.u_dot_obs,
                observation.y_norm,
                observation.y_dot_obs,
            ),
            label=Action(label),
        )


class SampleSet(object):
    """Append-only labelled dataset with a provenance tag per sample.

    Samples are only ever appended; earlier rows, the base samples included, are never
    modified or removed.

    Attributes:
        features: read-only (n, 4) array.
        labels: read-only (n,) array of action indices.
        provenance: tag per sample, ``"base"`` or ``"iteration_<k>"``.
    """

    def __init__(self) -> None:
        self._features = np.zeros((0, 4))
        self._labels = np.zeros(0, dtype=np.int64)
        self._provenance: t.List[str] = []
        self._freeze()

    def _freeze(self) -> None:
        self._features.setflags(write=False)
        self._labels.setflags(write=False)

    @classmethod
    def from_samples(cls, samples: t.Iterable[Sample], provenance: str) -> "SampleSet":
        sample_set = cls()
        sample_set.extend(samples, provenance)
        return sample_set

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def provenance(self) -> t.Tuple[str, ...]:
        return tuple(self._provenance)

    def extend(self, samples: t.Iterable[Sample], provenance: str) -> int:
        """Appends samples under one provenance tag.

        Returns:
            Number of samples added.
        """
        samples = list(samples)
        if not samples:
            return 0
        features = np.array([s.features for s in samples], dtype=float)
        labels = np.array([int(s.label) for s in samples], dtype=np.int64)
        self._append_arrays(features, labels, [provenance] * len(samples))
        return len(samples)

    def _append_arrays(
        self, features: np.ndarray, labels: np.ndarray, provenance: t.Sequence[str]
    ) -> None:
        self._features = np.concatenate([self._features, features])
        self._labels = np.concatenate([self._labels, labels])
        self._provenance.extend(provenance)
        self._freeze()

    def counts_by_provenance(self) -> t.Dict[str, int]:
        counts: t.Dict[str, int] = {}
        for tag in self._provenance:
            counts[tag] = counts.get(tag, 0) + 1
        return counts

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> t.Iterator[Sample]:
        for features, label in zip(self._features, self._labels):
            yield Sample(features=tuple(float(v) for v in features), label=Action(int(label)))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SampleSet)
            and np.array_equal(self._features, other._features)
            and np.array_equal(self._labels, other._labels)
            and self._provenance == other._provenance
        )

    def __repr__(self) -> str:
        return f"SampleSet(n={len(self)}, provenance={self.counts_by_provenance()})"

    def save(self, filepath: str | Path) -> Path:
        """Writes the set as CSV or HDF5, depending on the extension."""
        filepath = Path(filepath)
        suffix = filepath.suffix.lower()
        if suffix == ".csv":
            with open(filepath, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(SAMPLE_HEADER)
                for features, label, tag in zip(self._features, self._labels, self._provenance):
                    writer.writerow([repr(float(v)) for v in features] + [int(label), tag])
        elif suffix in (".h5", ".hdf5"):
            with h5py.File(filepath, "w") as f:
                f.create_dataset("features", data=self._features)
                f.create_dataset("labels", data=self._labels)
                f.create_dataset(
                    "provenance",
                    data=np.array(self._provenance, dtype=object),
                    dtype=h5py.string_dtype(),
                )
        else:
            raise NotImplementedError(
                f"Saving with file extension {suffix} not supported. "
                "Valid options are .csv and .h5."
            )
        return filepath

    @classmethod
    def load(cls, filepath: str | Path) -> "SampleSet":
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(filepath)
        suffix = filepath.suffix.lower()
        if suffix == ".csv":
            features, labels, provenance = _read_csv(filepath)
        elif suffix in (".h5", ".hdf5"):
            with h5py.File(filepath, "r") as f:
                features = np.asarray(f["features"][()], dtype=float).reshape(-1, 4)
                labels = np.asarray(f["labels"][()], dtype=np.int64)
                provenance = [
                    p.decode("utf-8") if isinstance(p, bytes) else str(p)
                    for p in f["provenance"][()]
                ]
        else:
            raise NotImplementedError(
                f"Loading file extension {suffix} not supported. Valid options are .csv and .h5."
            )
        if len(features) != len(labels) or len(labels) != len(provenance):
            raise MalformedDocumentError("column lengths differ", path=str(filepath))
        if len(labels) and (labels.min() < 0 or labels.max() >= N_ACTIONS):
            raise MalformedDocumentError("labels must be 0..2", path=str(filepath))
        sample_set = cls()
        if len(labels):
            sample_set._append_arrays(features, labels, provenance)
        return sample_set


def _read_csv(filepath: Path) -> t.Tuple[np.ndarray, np.ndarray, t.List[str]]:
    features, labels, provenance = [], [], []
    with open(filepath, "r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != SAMPLE_HEADER:
            raise MalformedDocumentError(f"unexpected header {header}", path=f"{filepath}:1")
        for line, row in enumerate(reader, start=2):
            if len(row) != len(SAMPLE_HEADER):
                raise MalformedDocumentError("wrong number of columns", path=f"{filepath}:{line}")
            try:
                features.append([float(v) for v in row[:4]])
                labels.append(int(row[4]))
            except ValueError as e:
                raise MalformedDocumentError(str(e), path=f"{filepath}:{line}")
            provenance.append(row[5])
    return (
        np.array(features, dtype=float).reshape(-1, 4),
        np.array(labels, dtype=np.int64),
        provenance,
    )
