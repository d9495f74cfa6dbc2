"""Weighted decision fusion and the quadrant -> expression mapping."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .emotion_model import BinaryLevel, ModalityPrediction
from .errors import ConfigError, ValidationError
from .signals import Quadrant, SignalKind


class Expression(str, enum.Enum):
    STRONG_HAPPINESS = "StrongHappiness"
    ANGER_SCAREDNESS = "AngerScaredness"
    SLIGHT_HAPPINESS = "SlightHappiness"
    SADNESS = "Sadness"


_QUADRANTS = {
    (BinaryLevel.HIGH, BinaryLevel.HIGH): (Quadrant.HAHV, Expression.STRONG_HAPPINESS),
    (BinaryLevel.HIGH, BinaryLevel.LOW): (Quadrant.HALV, Expression.ANGER_SCAREDNESS),
    (BinaryLevel.LOW, BinaryLevel.HIGH): (Quadrant.LAHV, Expression.SLIGHT_HAPPINESS),
    (BinaryLevel.LOW, BinaryLevel.LOW): (Quadrant.LALV, Expression.SADNESS),
}
EXPRESSIONS = {q: e for q, e in _QUADRANTS.values()}


@dataclass(frozen=True)
class FusionWeights:
    """Per-modality weights for one affect dimension (all strictly positive)."""

    eeg: float
    eda: float
    ppg: float

    def __post_init__(self):
        for name in ("eeg", "eda", "ppg"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"fusion weight {name} must be > 0, got {value!r}")

    def __getitem__(self, kind: SignalKind) -> float:
        return getattr(self, SignalKind(kind).value.lower())

    def to_dict(self) -> dict:
        return {"eeg": self.eeg, "eda": self.eda, "ppg": self.ppg}


AROUSAL_WEIGHTS = FusionWeights(eeg=1.0, eda=2.0, ppg=2.0)
VALENCE_WEIGHTS = FusionWeights(eeg=1.0, eda=1.0, ppg=1.0)


@dataclass(frozen=True)
class EmotionState:
    arousal: BinaryLevel
    valence: BinaryLevel
    quadrant: Quadrant
    expression: Expression
    raw_scores: tuple[float, float]
    timestamp: float

    def to_dict(self) -> dict:
        return {
            "arousal": int(self.arousal),
            "valence": int(self.valence),
            "quadrant": self.quadrant.value,
            "expression": self.expression.value,
            "raw_scores": list(self.raw_scores),
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EmotionState":
        arousal, valence = BinaryLevel(d["arousal"]), BinaryLevel(d["valence"])
        quadrant, expression = quadrant_expression(arousal, valence)
        if "quadrant" in d and Quadrant(d["quadrant"]) != quadrant:
            raise ValidationError("quadrant does not match arousal/valence")
        raw = d.get("raw_scores", (float(arousal), float(valence)))
        return cls(arousal, valence, quadrant, expression, (float(raw[0]), float(raw[1])), float(d.get("timestamp", 0.0)))


def quadrant_expression(arousal: BinaryLevel, valence: BinaryLevel) -> tuple[Quadrant, Expression]:
    return _QUADRANTS[(BinaryLevel(arousal), BinaryLevel(valence))]


def _fuse_dimension(votes: dict, weights: FusionWeights, complete: bool, held: BinaryLevel | None):
    score = float(sum(weights[k] * int(v) for k, v in votes.items()))
    if score < 0:
        return score, BinaryLevel.LOW
    if score > 0 or complete:
        return score, BinaryLevel.HIGH
    # a missing modality left a tie (or nothing at all): keep the last level
    return score, held if held is not None else BinaryLevel.LOW


def fuse(
    preds: Iterable[ModalityPrediction],
    weights_arousal: FusionWeights = AROUSAL_WEIGHTS,
    weights_valence: FusionWeights = VALENCE_WEIGHTS,
    t: float = 0.0,
    previous: EmotionState | None = None,
) -> EmotionState:
    """Weighted sum of signed per-modality votes, then sign -> level.

    A score of exactly zero maps to high when all three modalities voted.
    When a modality is absent its term is dropped; a resulting zero holds
    ``previous`` (or low at session start).
    """
    preds = list(preds)
    kinds = [p.modality for p in preds]
    if len(set(kinds)) != len(kinds):
        raise ValidationError("at most one prediction per modality")
    complete = set(kinds) == set(SignalKind)
    p_a, arousal = _fuse_dimension(
        {p.modality: p.arousal for p in preds}, weights_arousal, complete,
        previous.arousal if previous else None,
    )
    p_v, valence = _fuse_dimension(
        {p.modality: p.valence for p in preds}, weights_valence, complete,
        previous.valence if previous else None,
    )
    quadrant, expression = quadrant_expression(arousal, valence)
    return EmotionState(arousal, valence, quadrant, expression, (p_a, p_v), float(t))


def majority_emotion(states: Sequence[EmotionState | Quadrant]) -> Quadrant:
    """Most frequent quadrant; ties go to whichever tied quadrant occurred last."""
    quadrants = [s.quadrant if isinstance(s, EmotionState) else Quadrant(s) for s in states]
    if not quadrants:
        raise ValidationError("majority_emotion needs at least one state")
    counts = Counter(quadrants)
    top = max(counts.values())
    for q in reversed(quadrants):
        if counts[q] == top:
            return q
    raise AssertionError("unreachable")
