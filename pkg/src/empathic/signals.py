"""Signal, trial and label types, and the on-disk trial format.

A trial lives in its own directory::

    <trial>/
      manifest.json   id, topic category, self-report label, speech spans,
                      per-stream metadata (rate, channel labels, block layout)
      eeg.csv         one CSV per stream: ``time,<channel>,<channel>,...``
      ppg.csv
      eda.csv

Sample values are written with ``repr`` so a save/load cycle is bit-exact.
NaN and infinite samples are refused in both directions; gaps in a stream
are expressed as separate blocks, never as NaN.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ParseError, SerializationError, ValidationError

TRIAL_FORMAT = "empathic-trial"
TRIAL_FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"

# tolerance when checking the CSV time column against start_time + i / fs
_TIME_TOL = 1e-6


class SignalKind(str, enum.Enum):
    EEG = "EEG"
    PPG = "PPG"
    EDA = "EDA"


class Quadrant(str, enum.Enum):
    """Cell of the binary arousal x valence plane."""

    HAHV = "HAHV"
    HALV = "HALV"
    LAHV = "LAHV"
    LALV = "LALV"

    @property
    def high_arousal(self) -> bool:
        return self.value[0] == "H"

    @property
    def high_valence(self) -> bool:
        return self.value[2] == "H"


# fixture defaults; every stream can override them
DEFAULT_RATES = {SignalKind.EEG: 250.0, SignalKind.PPG: 128.0, SignalKind.EDA: 128.0}
DEFAULT_CHANNELS = {
    SignalKind.EEG: tuple(f"EEG{i}" for i in range(1, 9)),
    SignalKind.PPG: ("PPG",),
    SignalKind.EDA: ("EDA",),
}


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """A contiguous, uniformly sampled multichannel segment.

    ``data`` has shape ``(n_channels, n_samples)`` and is stored read-only.
    Sample ``i`` is taken at ``start_time + i / sample_rate`` seconds.
    """

    kind: SignalKind
    start_time: float
    sample_rate: float
    channels: tuple[str, ...]
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", SignalKind(self.kind))
        object.__setattr__(self, "channels", tuple(str(c) for c in self.channels))
        if not (self.sample_rate > 0 and math.isfinite(self.sample_rate)):
            raise ValidationError(f"sample_rate must be positive, got {self.sample_rate}")
        if not math.isfinite(self.start_time):
            raise ValidationError("start_time must be finite")
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise ValidationError(f"data must be 2-D (channels x samples), got {data.ndim}-D")
        if data.shape[0] != len(self.channels):
            raise ValidationError(
                f"data has {data.shape[0]} rows but {len(self.channels)} channel labels"
            )
        if len(set(self.channels)) != len(self.channels):
            raise ValidationError("channel labels must be unique")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "start_time", float(self.start_time))
        object.__setattr__(self, "sample_rate", float(self.sample_rate))

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def end_time(self) -> float:
        """Time just past the last sample."""
        return self.start_time + self.duration

    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.n_samples) / self.sample_rate

    def with_data(self, data) -> "SampleBlock":
        return SampleBlock(self.kind, self.start_time, self.sample_rate, self.channels, data)

    def __eq__(self, other):
        if not isinstance(other, SampleBlock):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.start_time == other.start_time
            and self.sample_rate == other.sample_rate
            and self.channels == other.channels
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None


@dataclass(frozen=True)
class SelfReportLabel:
    """Five-point self-reported arousal and valence ratings."""

    arousal_rate: int
    valence_rate: int

    def __post_init__(self):
        for name in ("arousal_rate", "valence_rate"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 1 <= value <= 5:
                raise ValidationError(f"{name} must be an integer in 1..5, got {value!r}")
            object.__setattr__(self, name, int(value))


def check_stream_order(blocks: Sequence[SampleBlock]) -> None:
    """Raise unless ``blocks`` are time-ordered and non-overlapping."""
    for prev, cur in zip(blocks, blocks[1:]):
        if cur.start_time <= prev.start_time:
            raise ValidationError(
                f"{cur.kind.value} blocks not strictly increasing in start_time "
                f"({prev.start_time} then {cur.start_time})"
            )
        if cur.start_time < prev.end_time - _TIME_TOL:
            raise ValidationError(
                f"{cur.kind.value} block at {cur.start_time}s overlaps previous block "
                f"ending at {prev.end_time}s"
            )


@dataclass(frozen=True, eq=False)
class TrialRecord:
    """One labeled conversation trial with its recorded streams."""

    trial_id: str
    topic_category: Quadrant
    streams: Mapping[SignalKind, tuple[SampleBlock, ...]]
    label: SelfReportLabel
    speech_spans: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        try:
            object.__setattr__(self, "topic_category", Quadrant(self.topic_category))
        except ValueError:
            raise ValidationError(
                f"topic_category must be one of HAHV/HALV/LAHV/LALV, got {self.topic_category!r}"
            ) from None
        if not isinstance(self.label, SelfReportLabel):
            raise ValidationError("label must be a SelfReportLabel")
        streams = {}
        for kind, blocks in self.streams.items():
            kind = SignalKind(kind)
            blocks = tuple(blocks)
            for b in blocks:
                if b.kind != kind:
                    raise ValidationError(f"{b.kind.value} block filed under {kind.value}")
                if b.channels != blocks[0].channels or b.sample_rate != blocks[0].sample_rate:
                    raise ValidationError(
                        f"{kind.value} blocks must share channels and sample_rate"
                    )
            check_stream_order(blocks)
            if blocks:
                streams[kind] = blocks
        object.__setattr__(self, "streams", dict(sorted(streams.items(), key=lambda kv: kv[0].value)))
        spans = []
        for span in self.speech_spans:
            start, end = (float(v) for v in span)
            if not start < end:
                raise ValidationError(f"speech span must have start < end, got {span!r}")
            spans.append((start, end))
        object.__setattr__(self, "speech_spans", tuple(spans))

    def stream(self, kind: SignalKind) -> tuple[SampleBlock, ...]:
        return self.streams.get(SignalKind(kind), ())

    def duration(self, kind: SignalKind | None = None) -> float:
        """End of the latest sample, over one stream or all of them."""
        kinds = [SignalKind(kind)] if kind is not None else list(self.streams)
        ends = [blocks[-1].end_time for k in kinds for blocks in [self.stream(k)] if blocks]
        return max(ends, default=0.0)

    def __eq__(self, other):
        if not isinstance(other, TrialRecord):
            return NotImplemented
        return (
            self.trial_id == other.trial_id
            and self.topic_category == other.topic_category
            and self.label == other.label
            and self.speech_spans == other.speech_spans
            and self.streams.keys() == other.streams.keys()
            and all(self.streams[k] == other.streams[k] for k in self.streams)
        )

    __hash__ = None


def concatenate(blocks: Iterable[SampleBlock]) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(times, data)`` for a sequence of blocks of one stream."""
    blocks = list(blocks)
    if not blocks:
        return np.empty(0), np.empty((0, 0))
    times = np.concatenate([b.times() for b in blocks])
    data = np.concatenate([b.data for b in blocks], axis=1)
    return times, data


# -- file format --------------------------------------------------------------


def _stream_filename(kind: SignalKind) -> str:
    return f"{kind.value.lower()}.csv"


def save_trial(trial: TrialRecord, path) -> None:
    """Write ``trial`` to directory ``path`` (created if needed)."""
    path = Path(path)
    streams_meta = {}
    csv_text = {}
    for kind, blocks in trial.streams.items():
        first = blocks[0]
        lines = ["time," + ",".join(first.channels)]
        layout = []
        for block in blocks:
            if not np.isfinite(block.data).all():
                raise SerializationError(
                    f"{kind.value} block at {block.start_time}s contains NaN/Inf samples"
                )
            layout.append({"start_time": block.start_time, "n_samples": block.n_samples})
            for t, row in zip(block.times().tolist(), block.data.T.tolist()):
                lines.append(repr(t) + "," + ",".join(map(repr, row)))
        streams_meta[kind.value] = {
            "file": _stream_filename(kind),
            "sample_rate": first.sample_rate,
            "channels": list(first.channels),
            "blocks": layout,
        }
        csv_text[kind] = "\n".join(lines) + "\n"
    manifest = {
        "format": TRIAL_FORMAT,
        "version": TRIAL_FORMAT_VERSION,
        "trial_id": trial.trial_id,
        "topic_category": trial.topic_category.value,
        "label": {
            "arousal_rate": trial.label.arousal_rate,
            "valence_rate": trial.label.valence_rate,
        },
        "speech_spans": [list(s) for s in trial.speech_spans],
        "streams": streams_meta,
    }
    path.mkdir(parents=True, exist_ok=True)
    for kind, text in csv_text.items():
        (path / _stream_filename(kind)).write_text(text, encoding="utf-8")
    (path / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _require(mapping, key, where, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ParseError(f"missing field {key!r}", location=where)
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"field {key!r} has wrong type {type(value).__name__}", location=where)
    return value


def _read_stream_csv(csv_path: Path, meta: dict, kind: SignalKind) -> tuple[SampleBlock, ...]:
    where = csv_path.name
    sample_rate = float(_require(meta, "sample_rate", f"manifest.streams.{kind.value}", (int, float)))
    channels = _require(meta, "channels", f"manifest.streams.{kind.value}", list)
    layout = _require(meta, "blocks", f"manifest.streams.{kind.value}", list)
    try:
        lines = csv_path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ParseError("stream file listed in manifest does not exist", location=where) from None
    if not lines:
        raise ParseError("empty file", location=f"{where}:1")
    header = lines[0].split(",")
    if header != ["time", *channels]:
        raise ParseError(
            f"header {header!r} does not match manifest channels", location=f"{where}:1"
        )
    ncol = len(header)
    rows = lines[1:]
    values = np.empty((len(rows), ncol))
    for i, line in enumerate(rows):
        fields = line.split(",")
        if len(fields) != ncol:
            raise ParseError(f"expected {ncol} fields, got {len(fields)}", location=f"{where}:{i + 2}")
        try:
            values[i] = [float(v) for v in fields]
        except ValueError:
            raise ParseError(f"non-numeric value in {line!r}", location=f"{where}:{i + 2}") from None
        if not np.isfinite(values[i]).all():
            raise ParseError("NaN/Inf values are not allowed", location=f"{where}:{i + 2}")

    blocks = []
    offset = 0
    for j, spec in enumerate(layout):
        loc = f"manifest.streams.{kind.value}.blocks[{j}]"
        start = float(_require(spec, "start_time", loc, (int, float)))
        n = int(_require(spec, "n_samples", loc, int))
        chunk = values[offset:offset + n]
        if len(chunk) != n:
            raise ParseError(f"block declares {n} samples but file ends early", location=loc)
        expected = start + np.arange(n) / sample_rate
        bad = np.flatnonzero(np.abs(chunk[:, 0] - expected) > _TIME_TOL)
        if bad.size:
            raise ParseError(
                f"time {chunk[bad[0], 0]!r} inconsistent with block start and sample rate",
                location=f"{where}:{offset + bad[0] + 2}",
            )
        blocks.append(SampleBlock(kind, start, sample_rate, tuple(channels), chunk[:, 1:].T))
        offset += n
    if offset != len(values):
        raise ParseError(
            f"{len(values) - offset} rows not covered by manifest block layout",
            location=f"{where}:{offset + 2}",
        )
    return tuple(blocks)


def load_trial(path) -> TrialRecord:
    """Read and validate a trial directory written by :func:`save_trial`."""
    path = Path(path)
    manifest_path = path / MANIFEST_NAME
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, location=f"{MANIFEST_NAME}:{exc.lineno}") from None
    if _require(manifest, "format", MANIFEST_NAME) != TRIAL_FORMAT:
        raise ParseError(f"not a trial manifest (format={manifest['format']!r})", location=MANIFEST_NAME)
    version = _require(manifest, "version", MANIFEST_NAME, int)
    if version != TRIAL_FORMAT_VERSION:
        raise ParseError(f"unsupported trial format version {version}", location="manifest.version")
    label = _require(manifest, "label", MANIFEST_NAME, dict)
    streams = {}
    for name, meta in _require(manifest, "streams", MANIFEST_NAME, dict).items():
        try:
            kind = SignalKind(name)
        except ValueError:
            raise ParseError(f"unknown stream kind {name!r}", location="manifest.streams") from None
        filename = _require(meta, "file", f"manifest.streams.{name}", str)
        streams[kind] = _read_stream_csv(path / filename, meta, kind)
    return TrialRecord(
        trial_id=str(_require(manifest, "trial_id", MANIFEST_NAME)),
        topic_category=_require(manifest, "topic_category", MANIFEST_NAME, str),
        streams=streams,
        label=SelfReportLabel(
            _require(label, "arousal_rate", "manifest.label"),
            _require(label, "valence_rate", "manifest.label"),
        ),
        speech_spans=tuple(tuple(s) for s in _require(manifest, "speech_spans", MANIFEST_NAME, list)),
    )
