"""Engine configuration, stored as JSON.

Example::

    {
      "window_s": 20.0,
      "hop_s": 5.0,
      "capacity_s": 30.0,
      "valence_mode": "paper_literal",
      "weights": {"arousal": {"eeg": 1, "eda": 2, "ppg": 2},
                  "valence": {"eeg": 1, "eda": 1, "ppg": 1}},
      "filters": {"EEG": {"kind": "bandpass", "low_hz": 1.0, "high_hz": 45.0,
                          "order": 4, "zero_phase": true}},
      "model_dir": "models/"
    }

Every key is optional; omitted keys take the defaults shown.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .emotion_model import ValenceMode
from .errors import ConfigError
from .fusion import AROUSAL_WEIGHTS, VALENCE_WEIGHTS, FusionWeights
from .preprocess import DEFAULT_FILTERS, FilterSpec
from .signals import SignalKind

_KEYS = {"window_s", "hop_s", "capacity_s", "valence_mode", "weights", "filters", "model_dir"}


@dataclass(frozen=True)
class EngineConfig:
    window_s: float = 20.0
    hop_s: float = 5.0
    capacity_s: float = 30.0
    valence_mode: ValenceMode = ValenceMode.LITERAL
    weights_arousal: FusionWeights = AROUSAL_WEIGHTS
    weights_valence: FusionWeights = VALENCE_WEIGHTS
    filters: dict = field(default_factory=lambda: dict(DEFAULT_FILTERS))
    model_dir: str | None = None

    def __post_init__(self):
        if not self.window_s > 0 or not self.hop_s > 0:
            raise ConfigError("window_s and hop_s must be positive")
        if self.capacity_s < self.window_s:
            raise ConfigError("capacity_s must be at least window_s")
        try:
            object.__setattr__(self, "valence_mode", ValenceMode(self.valence_mode))
        except ValueError:
            raise ConfigError(f"unknown valence_mode {self.valence_mode!r}") from None

    def with_overrides(self, **kw) -> "EngineConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "window_s": self.window_s,
            "hop_s": self.hop_s,
            "capacity_s": self.capacity_s,
            "valence_mode": self.valence_mode.value,
            "weights": {
                "arousal": self.weights_arousal.to_dict(),
                "valence": self.weights_valence.to_dict(),
            },
            "filters": {k.value: spec.to_dict() for k, spec in sorted(self.filters.items())},
            "model_dir": self.model_dir,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EngineConfig":
        unknown = set(d) - _KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = {k: d[k] for k in ("window_s", "hop_s", "capacity_s", "valence_mode", "model_dir") if k in d}
        weights = d.get("weights", {})
        try:
            if "arousal" in weights:
                kw["weights_arousal"] = FusionWeights(**weights["arousal"])
            if "valence" in weights:
                kw["weights_valence"] = FusionWeights(**weights["valence"])
            filters = dict(DEFAULT_FILTERS)
            for name, spec in d.get("filters", {}).items():
                filters[SignalKind(name)] = FilterSpec.from_dict(spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from None
        kw["filters"] = filters
        return cls(**kw)


def load_config(path) -> EngineConfig:
    if path is None:
        return EngineConfig()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
    return EngineConfig.from_dict(doc)
