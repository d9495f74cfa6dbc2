"""Training over trial datasets and the recognition-alignment metric.

Alignment compares what the recognizer reported during a trial with the
participant's binarized self-report.  In the default trial mode a trial
agrees when the majority level over its window events equals the label;
``per_window`` mode scores each window separately.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import EngineConfig
from .emotion_model import (
    BinaryLevel,
    Dimension,
    ForestModel,
    binarize,
    predict_many,
    train,
)
from .engine import EmotionEvent, batch_windows, classify_window, replay
from .errors import InsufficientDataError, TrainingError, ValidationError
from .features import FeatureVector, extract_features
from .forest import Hyperparams
from .fusion import fuse
from .signals import SignalKind, TrialRecord

log = logging.getLogger(__name__)

FUSED = "Fusion"
SOURCES = (SignalKind.EEG.value, SignalKind.PPG.value, SignalKind.EDA.value, FUSED)


def window_features(trial: TrialRecord, config: EngineConfig = EngineConfig()) -> list[tuple[float, dict]]:
    """``(end_time, {kind: FeatureVector})`` for every full window of a trial."""
    out = []
    for t, windows in batch_windows(trial, config):
        fvs = {}
        for kind, block in windows.items():
            try:
                fvs[kind] = extract_features(block, config.filters)
            except InsufficientDataError as exc:
                log.debug("%s %s window at %.1fs skipped: %s", trial.trial_id, kind.value, t, exc)
        out.append((t, fvs))
    return out


@dataclass
class TrainingSummary:
    models: dict
    accuracy: dict = field(default_factory=dict)  # (kind, dim) -> training accuracy
    n_examples: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = []
        for (kind, dim), model in sorted(self.models.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)):
            lines.append(
                f"{kind.value:<4} {dim.value:<8} n={self.n_examples[(kind, dim)]:<5} "
                f"train_acc={100 * self.accuracy[(kind, dim)]:.1f}%"
            )
        lines.extend(f"warning: {w}" for w in self.warnings)
        return "\n".join(lines)


def training_sets(
    trials: Iterable[TrialRecord],
    config: EngineConfig = EngineConfig(),
) -> dict[tuple[SignalKind, Dimension], list[tuple[FeatureVector, BinaryLevel]]]:
    sets: dict = {}
    for trial in trials:
        levels = {dim: binarize(trial.label, dim, config.valence_mode) for dim in Dimension}
        for _, fvs in window_features(trial, config):
            for kind, fv in fvs.items():
                for dim in Dimension:
                    sets.setdefault((kind, dim), []).append((fv, levels[dim]))
    return sets


def train_models(
    trials: Sequence[TrialRecord],
    hyperparams: Hyperparams = Hyperparams(),
    seed: int = 0,
    config: EngineConfig = EngineConfig(),
) -> TrainingSummary:
    """One forest per (modality, dimension) that has usable windows."""
    trials = list(trials)
    if not trials:
        raise ValidationError("no trials to train on")
    sets = training_sets(trials, config)
    summary = TrainingSummary(models={})
    for kind in SignalKind:
        if not any((kind, d) in sets for d in Dimension):
            msg = f"no usable {kind.value} windows; skipping {kind.value} models"
            log.warning(msg)
            summary.warnings.append(msg)
            continue
        for dim in Dimension:
            data = sets[(kind, dim)]
            levels = {int(level) for _, level in data}
            if len(levels) < 2:
                raise TrainingError(
                    f"{kind.value}/{dim.value}: all {len(data)} windows carry label {levels.pop():+d}"
                )
            model = train(data, kind, dim, hyperparams, seed)
            pred = predict_many(model, [fv for fv, _ in data])
            truth = np.array([int(level) for _, level in data])
            summary.models[(kind, dim)] = model
            summary.accuracy[(kind, dim)] = float(np.mean(pred == truth))
            summary.n_examples[(kind, dim)] = len(data)
    return summary


def batch_events(
    trial: TrialRecord,
    models: Mapping,
    config: EngineConfig = EngineConfig(),
) -> list[EmotionEvent]:
    """Events computed window by window from the whole trial, without streaming."""
    events = []
    previous = None
    for t, windows in batch_windows(trial, config):
        preds = classify_window(windows, models, config)
        state = fuse(preds, config.weights_arousal, config.weights_valence, t, previous)
        previous = state
        events.append(EmotionEvent(state, (t - config.window_s, t), tuple(preds)))
    return events


@dataclass
class Score:
    n: int = 0
    agree: int = 0
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, decision: int, truth: int) -> None:
        self.n += 1
        if decision == truth:
            self.agree += 1
            if truth == 1:
                self.tp += 1
            else:
                self.tn += 1
        elif decision == 1:
            self.fp += 1
        else:
            self.fn += 1

    @property
    def percent(self) -> float | None:
        return 100.0 * self.agree / self.n if self.n else None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "agree": self.agree,
            "percent": self.percent,
            "confusion": {"tp": self.tp, "tn": self.tn, "fp": self.fp, "fn": self.fn},
        }


@dataclass
class AlignmentReport:
    """Percent agreement per source (each modality and the fusion) and dimension."""

    mode: str
    n_trials: int
    scores: dict  # source -> dimension -> Score

    def percent(self, source: str, dimension: Dimension | str) -> float | None:
        return self.scores[source][Dimension(dimension).value].percent

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_trials": self.n_trials,
            "scores": {
                src: {dim: s.to_dict() for dim, s in dims.items()} for src, dims in self.scores.items()
            },
        }

    def to_text(self) -> str:
        def fmt(p):
            return "   n/a" if p is None else f"{p:6.1f}"

        lines = [
            f"alignment ({self.mode} level, {self.n_trials} trials)",
            f"{'':<8}{'Arousal':>8}{'Valence':>9}",
        ]
        for src in SOURCES:
            dims = self.scores[src]
            lines.append(f"{src:<8}{fmt(dims['arousal'].percent):>8}{fmt(dims['valence'].percent):>9}")
        return "\n".join(lines)


def _levels(events: Sequence[EmotionEvent], source: str, dim: Dimension) -> list[int]:
    out = []
    for ev in events:
        if source == FUSED:
            out.append(int(getattr(ev.state, dim.value)))
        else:
            for p in ev.per_modality:
                if p.modality.value == source:
                    out.append(int(getattr(p, dim.value)))
    return out


def alignment_report(
    outcomes: Iterable[tuple[TrialRecord, Sequence[EmotionEvent]]],
    config: EngineConfig = EngineConfig(),
    per_window: bool = False,
) -> AlignmentReport:
    """Score recorded events against self-reports.

    A trial's decision for a source is the majority level of that source's
    window decisions (an even split counts as high).  Sources with no
    decisions in a trial are left out of that trial's denominator.
    """
    scores = {src: {d.value: Score() for d in Dimension} for src in SOURCES}
    n_trials = 0
    for trial, events in outcomes:
        n_trials += 1
        for dim in Dimension:
            truth = int(binarize(trial.label, dim, config.valence_mode))
            for src in SOURCES:
                levels = _levels(events, src, dim)
                if not levels:
                    continue
                if per_window:
                    for level in levels:
                        scores[src][dim.value].add(level, truth)
                else:
                    decision = 1 if sum(levels) >= 0 else -1
                    scores[src][dim.value].add(decision, truth)
    if n_trials == 0:
        raise ValidationError("alignment needs at least one trial")
    return AlignmentReport("window" if per_window else "trial", n_trials, scores)


def evaluate_alignment(
    trials: Sequence[TrialRecord],
    models: Mapping,
    config: EngineConfig = EngineConfig(),
    per_window: bool = False,
    method: str = "stream",
) -> AlignmentReport:
    """Replay each trial (``stream``) or classify its windows directly (``batch``)."""
    trials = list(trials)
    if not trials:
        raise ValidationError("alignment needs at least one trial")
    if method == "stream":
        run = lambda tr: replay(tr, models, config)  # noqa: E731
    elif method == "batch":
        run = lambda tr: batch_events(tr, models, config)  # noqa: E731
    else:
        raise ValidationError(f"unknown method {method!r}")
    return alignment_report(((tr, run(tr)) for tr in trials), config, per_window)
