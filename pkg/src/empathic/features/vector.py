from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..signals import SignalKind


@dataclass(frozen=True)
class FeatureVector:
    """Named features computed from one window of one modality."""

    modality: SignalKind
    names: tuple[str, ...]
    values: tuple[float, ...]
    window_start: float = 0.0
    window_len: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modality", SignalKind(self.modality))
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.names) != len(self.values):
            raise ValidationError(
                f"{len(self.names)} feature names but {len(self.values)} values"
            )
        if len(set(self.names)) != len(self.names):
            raise ValidationError("feature names must be unique")
        bad = [n for n, v in zip(self.names, self.values) if not math.isfinite(v)]
        if bad:
            raise ValidationError(f"non-finite feature values: {', '.join(bad)}")

    def as_array(self) -> np.ndarray:
        return np.array(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values))

    def __getitem__(self, name: str) -> float:
        try:
            return self.values[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None
