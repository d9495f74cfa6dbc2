"""Per-modality signal conditioning.

The same functions run in training and in the real-time engine, so a model
never sees features computed from differently filtered data.  All filters
are Butterworth designs in second-order sections, run forward and backward
(zero phase) by default.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import signal as sps

from .errors import ConfigError, InsufficientDataError, ValidationError
from .signals import SampleBlock, SignalKind

log = logging.getLogger(__name__)

MIN_DURATION_S = 2.0
EEG_MIN_RATE = 100.0


@dataclass(frozen=True)
class FilterSpec:
    kind: str
    low_hz: float | None = None
    high_hz: float | None = None
    order: int = 2
    zero_phase: bool = True

    def __post_init__(self):
        if self.kind not in ("bandpass", "lowpass", "highpass"):
            raise ConfigError(f"unknown filter kind {self.kind!r}")
        if not 1 <= self.order <= 8:
            raise ConfigError(f"filter order must be in 1..8, got {self.order}")
        need_low = self.kind in ("bandpass", "highpass")
        need_high = self.kind in ("bandpass", "lowpass")
        if need_low != (self.low_hz is not None) or need_high != (self.high_hz is not None):
            raise ConfigError(f"{self.kind} filter needs exactly its own band edges: {self}")
        for edge in (self.low_hz, self.high_hz):
            if edge is not None and not edge > 0:
                raise ConfigError(f"band edges must be positive: {self}")
        if self.kind == "bandpass" and not self.low_hz < self.high_hz:
            raise ConfigError(f"bandpass needs low_hz < high_hz: {self}")

    def check_rate(self, sample_rate: float) -> None:
        nyquist = sample_rate / 2.0
        top = self.high_hz if self.high_hz is not None else self.low_hz
        if not top < nyquist:
            raise ValidationError(
                f"{self.kind} edge {top} Hz is not below Nyquist ({nyquist} Hz)"
            )

    @property
    def lowest_cutoff(self) -> float:
        return self.low_hz if self.low_hz is not None else self.high_hz

    def sos(self, sample_rate: float) -> np.ndarray:
        self.check_rate(sample_rate)
        return _butter_sos(self.kind, self.low_hz, self.high_hz, self.order, float(sample_rate)).copy()

    def padlen(self, sample_rate: float, n_samples: int) -> int:
        """Edge padding for forward-backward filtering.

        At least ``3 * order * sections`` samples, extended to three periods of
        the lowest cutoff so slow trends are carried through the edges.
        """
        n_sections = len(self.sos(sample_rate))
        base = 3 * self.order * n_sections
        settle = math.ceil(3.0 * sample_rate / self.lowest_cutoff)
        return int(min(n_samples - 1, max(base, settle)))

    def apply(self, x: np.ndarray, sample_rate: float) -> np.ndarray:
        """Filter ``x`` along its last axis."""
        x = np.asarray(x, dtype=np.float64)
        sos = self.sos(sample_rate)
        if self.zero_phase:
            n = x.shape[-1]
            pad = self.padlen(sample_rate, n)
            span = min(n, math.ceil(sample_rate / self.lowest_cutoff))
            padded = _odd_extend(x, pad, span)
            y = sps.sosfiltfilt(sos, padded, axis=-1, padtype=None)
            return np.ascontiguousarray(y[..., pad:pad + n])
        y, _ = sps.sosfilt(sos, x, axis=-1, zi=_broadcast_zi(sps.sosfilt_zi(sos), x))
        return y

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FilterSpec":
        return cls(**d)


@functools.lru_cache(maxsize=64)
def _butter_sos(kind: str, low: float | None, high: float | None, order: int, sample_rate: float) -> np.ndarray:
    wn = {"bandpass": (low, high), "lowpass": high, "highpass": low}[kind]
    sos = sps.butter(order, wn, btype=kind, fs=sample_rate, output="sos")
    return sos


def _edge_level(x: np.ndarray, span: int) -> np.ndarray:
    # value at x[..., 0] of a least-squares line through the first ``span`` samples
    if span < 2:
        return x[..., 0]
    u = np.arange(span) - (span - 1) / 2.0
    seg = x[..., :span]
    slope = (seg * u).sum(axis=-1) / (u * u).sum()
    return seg.mean(axis=-1) + slope * u[0]


def _odd_extend(x: np.ndarray, pad: int, span: int) -> np.ndarray:
    """Odd reflection at both ends about a locally fitted edge level.

    Pivoting on a line fit instead of the raw end sample keeps a noisy last
    sample from leaking into the output as a step, while ramps stay exact.
    """
    if pad == 0:
        return x
    left = _edge_level(x, span)[..., np.newaxis]
    right = _edge_level(x[..., ::-1], span)[..., np.newaxis]
    head = 2 * left - x[..., pad:0:-1]
    tail = 2 * right - x[..., -2:-pad - 2:-1]
    return np.concatenate([head, x, tail], axis=-1)


def _broadcast_zi(zi: np.ndarray, x: np.ndarray) -> np.ndarray:
    # sosfilt wants (n_sections, ..., 2) with the filtered axis removed
    lead = x[..., 0]
    return zi.reshape((zi.shape[0],) + (1,) * lead.ndim + (2,)) * lead[np.newaxis, ..., np.newaxis]


EEG_FILTER = FilterSpec("bandpass", low_hz=1.0, high_hz=45.0, order=4)
PPG_FILTER = FilterSpec("bandpass", low_hz=0.5, high_hz=8.0, order=2)
EDA_FILTER = FilterSpec("lowpass", high_hz=1.0, order=2)

DEFAULT_FILTERS = {
    SignalKind.EEG: EEG_FILTER,
    SignalKind.PPG: PPG_FILTER,
    SignalKind.EDA: EDA_FILTER,
}


class ClampCounter:
    """Tallies EDA blocks (and samples) clamped at zero conductance."""

    def __init__(self):
        self.warnings = 0
        self.samples = 0

    def __repr__(self):
        return f"ClampCounter(warnings={self.warnings}, samples={self.samples})"


def _check(block: SampleBlock, kind: SignalKind) -> None:
    if block.kind != kind:
        raise ValidationError(f"expected a {kind.value} block, got {block.kind.value}")
    if block.duration < MIN_DURATION_S:
        raise InsufficientDataError(
            f"{kind.value} block of {block.duration:.3f}s is shorter than the "
            f"{MIN_DURATION_S}s needed for filter warm-up"
        )


def preprocess_eeg(block: SampleBlock, spec: FilterSpec = EEG_FILTER) -> SampleBlock:
    """Remove each channel's mean, then band-pass (1-45 Hz by default)."""
    _check(block, SignalKind.EEG)
    if block.sample_rate < EEG_MIN_RATE:
        raise ValidationError(
            f"EEG sample rate {block.sample_rate} Hz is below {EEG_MIN_RATE} Hz"
        )
    centred = block.data - block.data.mean(axis=1, keepdims=True)
    return block.with_data(spec.apply(centred, block.sample_rate))


def preprocess_ppg(block: SampleBlock, spec: FilterSpec = PPG_FILTER) -> SampleBlock:
    _check(block, SignalKind.PPG)
    return block.with_data(spec.apply(block.data, block.sample_rate))


def preprocess_eda(
    block: SampleBlock,
    spec: FilterSpec = EDA_FILTER,
    counter: ClampCounter | None = None,
) -> SampleBlock:
    """Low-pass the skin conductance and clamp negative values to zero.

    Each block that needed clamping logs one warning and bumps
    ``counter.warnings``; ``counter.samples`` counts the clamped samples.
    """
    _check(block, SignalKind.EDA)
    out = spec.apply(block.data, block.sample_rate)
    negative = out < 0
    n_neg = int(negative.sum())
    if n_neg:
        out[negative] = 0.0
        log.warning("clamped %d negative EDA samples to 0 in block at %.3fs", n_neg, block.start_time)
        if counter is not None:
            counter.warnings += 1
            counter.samples += n_neg
    return block.with_data(out)


PREPROCESSORS = {
    SignalKind.EEG: preprocess_eeg,
    SignalKind.PPG: preprocess_ppg,
    SignalKind.EDA: preprocess_eda,
}


def preprocess(block: SampleBlock, filters: dict | None = None, counter: ClampCounter | None = None) -> SampleBlock:
    """Dispatch on ``block.kind`` with optional per-kind filter overrides."""
    spec = (filters or DEFAULT_FILTERS).get(block.kind, DEFAULT_FILTERS[block.kind])
    if block.kind == SignalKind.EDA:
        return preprocess_eda(block, spec, counter)
    return PREPROCESSORS[block.kind](block, spec)
