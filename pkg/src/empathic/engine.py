"""Streaming recognition: ring buffers, sliding windows, timestamped events.

Scheduling follows stream time.  Windows end on multiples of the hop
(anchored at t = 0) and an event for boundary ``t`` covers ``[t - window, t)``.
A boundary becomes due once every active stream's watermark reaches it, so
live ingestion and file replay run through exactly the same code.
"""
from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .config import EngineConfig
from .emotion_model import BinaryLevel, Dimension, ForestModel, ModalityPrediction, predict
from .errors import InsufficientDataError, ValidationError
from .features import extract_features
from .fusion import EmotionState, fuse
from .preprocess import ClampCounter
from .signals import SampleBlock, SignalKind, TrialRecord, concatenate

log = logging.getLogger(__name__)

# a window may be short by at most this many samples and still count as full
_SLACK_SAMPLES = 1


def window_slice(times: np.ndarray, data: np.ndarray, sample_rate: float, start: float, end: float):
    """Samples with ``start <= time < end`` (half-sample tolerant), or None if not contiguous and full."""
    half = 0.5 / sample_rate
    lo = int(np.searchsorted(times, start - half, side="left"))
    hi = int(np.searchsorted(times, end - half, side="left"))
    expected = int(round((end - start) * sample_rate))
    if hi - lo < expected - _SLACK_SAMPLES:
        return None
    seg_t = times[lo:hi]
    if seg_t.size > 1 and np.diff(seg_t).max() > 1.5 / sample_rate:
        return None
    return seg_t[0], data[:, lo:hi]


class StreamBuffer:
    """Bounded buffer of the most recent samples of one stream."""

    def __init__(self, kind: SignalKind, capacity_seconds: float = 30.0):
        if capacity_seconds < 20.0:
            raise ValidationError("stream buffers must hold at least 20 s")
        self.kind = SignalKind(kind)
        self.capacity_seconds = float(capacity_seconds)
        self.sample_rate: float | None = None
        self.channels: tuple[str, ...] | None = None
        self.times = np.empty(0)
        self.data: np.ndarray | None = None
        self.watermark = -math.inf

    def append(self, block: SampleBlock) -> None:
        if block.kind != self.kind:
            raise ValidationError(f"{block.kind.value} block sent to {self.kind.value} buffer")
        if block.n_samples == 0:
            return
        if self.sample_rate is None:
            self.sample_rate, self.channels = block.sample_rate, block.channels
            self.data = np.empty((len(block.channels), 0))
        elif block.sample_rate != self.sample_rate or block.channels != self.channels:
            raise ValidationError(f"{self.kind.value} stream changed rate or channel layout")
        if block.start_time < self.watermark - 1e-6:
            raise ValidationError(
                f"{self.kind.value} block at {block.start_time}s overlaps or precedes "
                f"watermark {self.watermark}s"
            )
        times = np.concatenate([self.times, block.times()])
        data = np.concatenate([self.data, block.data], axis=1)
        self.watermark = block.end_time
        keep = int(np.searchsorted(times, self.watermark - self.capacity_seconds, side="left"))
        self.times, self.data = times[keep:], data[:, keep:]

    def window(self, start: float, end: float) -> SampleBlock | None:
        if self.sample_rate is None or self.times.size == 0:
            return None
        got = window_slice(self.times, self.data, self.sample_rate, start, end)
        if got is None:
            return None
        t0, seg = got
        return SampleBlock(self.kind, t0, self.sample_rate, self.channels, seg)

    @property
    def nbytes(self) -> int:
        return self.times.nbytes + (self.data.nbytes if self.data is not None else 0)


@dataclass(frozen=True)
class EmotionEvent:
    state: EmotionState
    window: tuple[float, float]
    per_modality: tuple[ModalityPrediction, ...]
    latency_ms: float = field(default=0.0, compare=False)

    def to_record(self, include_latency: bool = False) -> dict:
        rec = {
            "window": list(self.window),
            "state": self.state.to_dict(),
            "per_modality": [
                {"modality": p.modality.value, "arousal": int(p.arousal), "valence": int(p.valence)}
                for p in self.per_modality
            ],
        }
        if include_latency:
            rec["latency_ms"] = self.latency_ms
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "EmotionEvent":
        return cls(
            state=EmotionState.from_dict(rec["state"]),
            window=(float(rec["window"][0]), float(rec["window"][1])),
            per_modality=tuple(
                ModalityPrediction(SignalKind(p["modality"]), p["arousal"], p["valence"])
                for p in rec.get("per_modality", [])
            ),
            latency_ms=float(rec.get("latency_ms", 0.0)),
        )


def classify_window(
    windows: Mapping[SignalKind, SampleBlock],
    models: Mapping,
    config: EngineConfig,
    counter: ClampCounter | None = None,
) -> list[ModalityPrediction]:
    """Per-modality predictions for one window; modalities that fail are skipped."""
    preds = []
    for kind in SignalKind:
        block = windows.get(kind)
        arousal_model = models.get((kind, Dimension.AROUSAL))
        valence_model = models.get((kind, Dimension.VALENCE))
        if block is None or arousal_model is None or valence_model is None:
            continue
        try:
            fv = extract_features(block, config.filters, counter)
        except InsufficientDataError as exc:
            log.info("%s dropped from window at %.1fs: %s", kind.value, block.start_time, exc)
            continue
        preds.append(ModalityPrediction(kind, predict(arousal_model, fv), predict(valence_model, fv)))
    return preds


class Engine:
    """One session's recognition pipeline.

    Not thread-safe: a session has one writer (``ingest``) and one consumer
    (``tick``/``pump``), serialised by the caller.
    """

    def __init__(self, models: Mapping, config: EngineConfig = EngineConfig()):
        self.models = dict(models)
        self.config = config
        self.buffers: dict[SignalKind, StreamBuffer] = {}
        self.previous: EmotionState | None = None
        self.last_tick: float = -math.inf
        self.errors: list[str] = []
        self.clamps = ClampCounter()

    def ingest(self, block: SampleBlock) -> None:
        buf = self.buffers.get(block.kind)
        if buf is None:
            if block.n_samples == 0:
                return
            buf = self.buffers[block.kind] = StreamBuffer(block.kind, self.config.capacity_s)
        try:
            buf.append(block)
        except ValidationError as exc:
            self.errors.append(str(exc))
            raise

    def watermark(self) -> float:
        """Stream time up to which every active stream has data."""
        if not self.buffers:
            return -math.inf
        return min(b.watermark for b in self.buffers.values())

    def tick(self, t: float) -> EmotionEvent | None:
        cfg = self.config
        if t < cfg.window_s - 1e-9:
            return None
        start = t - cfg.window_s
        began = time.perf_counter()
        windows = {}
        for kind, buf in self.buffers.items():
            w = buf.window(start, t)
            if w is not None:
                windows[kind] = w
        self.last_tick = t
        if not windows:
            return None
        preds = classify_window(windows, self.models, cfg, self.clamps)
        state = fuse(preds, cfg.weights_arousal, cfg.weights_valence, t, self.previous)
        self.previous = state
        latency = (time.perf_counter() - began) * 1000.0
        return EmotionEvent(state, (start, t), tuple(preds), latency)

    def due_boundaries(self, until: float) -> list[float]:
        hop = self.config.hop_s
        first = max(self.config.window_s, self.last_tick + hop)
        k = math.ceil(first / hop - 1e-9)
        out = []
        while k * hop <= until + 1e-9:
            out.append(k * hop)
            k += 1
        return out

    def pump(self, until: float | None = None) -> list[EmotionEvent]:
        """Run every hop boundary not yet ticked up to ``until`` (default: watermark)."""
        until = self.watermark() if until is None else until
        events = []
        for t in self.due_boundaries(until):
            ev = self.tick(t)
            if ev is not None:
                events.append(ev)
        return events


def iter_chunks(trial: TrialRecord, chunk_s: float):
    """Yield ``(until, blocks)``: the trial cut into ``chunk_s`` pieces of stream time."""
    end = trial.duration()
    n = max(0, math.ceil(end / chunk_s - 1e-9))
    for k in range(n):
        lo, hi = k * chunk_s, min((k + 1) * chunk_s, end)
        parts = []
        for kind, blocks in trial.streams.items():
            for b in blocks:
                t = b.times()
                half = 0.5 / b.sample_rate
                i0 = int(np.searchsorted(t, lo - half, side="left"))
                i1 = int(np.searchsorted(t, hi - half, side="left")) if hi < end else len(t)
                if i1 > i0:
                    parts.append(SampleBlock(kind, t[i0], b.sample_rate, b.channels, b.data[:, i0:i1]))
        yield hi, parts


def replay(
    trial: TrialRecord,
    models: Mapping,
    config: EngineConfig = EngineConfig(),
    speed: float | str = "max",
    chunk_s: float = 1.0,
    sleep: Callable[[float], None] | None = None,
) -> list[EmotionEvent]:
    """Feed a recorded trial through a fresh engine in ``chunk_s`` pieces.

    ``speed`` paces ingestion relative to real time (``"max"`` = unpaced).
    Events depend only on the data, never on pacing.
    """
    if speed != "max" and not (isinstance(speed, (int, float)) and speed > 0):
        raise ValidationError(f"speed must be a positive number or 'max', got {speed!r}")
    sleep = sleep or time.sleep
    engine = Engine(models, config)
    events = []
    for until, blocks in iter_chunks(trial, chunk_s):
        if speed != "max":
            sleep(chunk_s / speed)
        for block in blocks:
            engine.ingest(block)
        events.extend(engine.pump(until))
    return events


def batch_windows(trial: TrialRecord, config: EngineConfig = EngineConfig()) -> list[tuple[float, dict]]:
    """Every hop-aligned window of a whole trial, sliced without streaming.

    Returns ``(end_time, {kind: SampleBlock})`` pairs; the same boundaries
    and sample selection the engine uses.
    """
    end = trial.duration()
    hop, win = config.hop_s, config.window_s
    out = []
    arrays = {}
    for kind, blocks in trial.streams.items():
        times, data = concatenate(blocks)
        arrays[kind] = (times, data, blocks[0].sample_rate, blocks[0].channels)
    k = math.ceil(win / hop - 1e-9)
    while k * hop <= end + 1e-9:
        t = k * hop
        windows = {}
        for kind, (times, data, fs, channels) in arrays.items():
            got = window_slice(times, data, fs, t - win, t)
            if got is not None:
                windows[kind] = SampleBlock(kind, got[0], fs, channels, got[1])
        if windows:
            out.append((t, windows))
        k += 1
    return out


def write_event_log(events: Iterable[EmotionEvent], path, include_latency: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev.to_record(include_latency), sort_keys=True) + "\n")


def read_event_log(path) -> list[EmotionEvent]:
    with open(path, encoding="utf-8") as fh:
        return [EmotionEvent.from_record(json.loads(line)) for line in fh if line.strip()]
