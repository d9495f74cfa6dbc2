"""Pulse detection on PPG and time-domain heart-rate-variability features."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy import signal as sps

from ..errors import InsufficientDataError, NoBeatsError, ValidationError
from ..signals import SampleBlock, SignalKind
from .vector import FeatureVector

MIN_DURATION_S = 20.0
NN_MIN_MS = 300.0
NN_MAX_MS = 2000.0
# intervals this far (relative) from the median are treated as missed or
# extra beats, e.g. a skipped pulse doubling the interval
NN_MAX_REL_DEVIATION = 0.3
PEAK_WINDOW_S = 1.0
PEAK_STD_FACTOR = 0.5
PEAK_MIN_DISTANCE_S = 0.4
# candidates far weaker than the typical beat are filter ringing, not pulses
PEAK_REL_PROMINENCE = 0.3

HIST_BIN_MS = 7.8125  # 1/128 s
MIN_GEOMETRIC_INTERVALS = 20

HRV_FEATURES = (
    "HRV_MeanNN",
    "HRV_SDNN",
    "HRV_RMSSD",
    "HRV_SDSD",
    "HRV_CVNN",
    "HRV_MedianNN",
    "HRV_CVSD",
    "HRV_MadNN",
    "HRV_MCVNN",
    "HRV_IQRNN",
    "HRV_pNN50",
    "HRV_pNN20",
    "HRV_HTI",
    "HRV_TINN",
)


@dataclass(frozen=True)
class NNSeries:
    """Normal-to-normal interbeat intervals in milliseconds."""

    intervals_ms: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.intervals_ms)
        for v in values:
            if not NN_MIN_MS <= v <= NN_MAX_MS:
                raise ValidationError(f"NN interval {v} ms outside [{NN_MIN_MS}, {NN_MAX_MS}]")
        object.__setattr__(self, "intervals_ms", values)

    def __len__(self):
        return len(self.intervals_ms)

    def as_array(self) -> np.ndarray:
        return np.array(self.intervals_ms)


def _refine(x: np.ndarray, peaks: np.ndarray) -> np.ndarray:
    """Sub-sample peak positions by parabolic interpolation."""
    pos = peaks.astype(float)
    inner = (peaks > 0) & (peaks < len(x) - 1)
    p = peaks[inner]
    a, b, c = x[p - 1], x[p], x[p + 1]
    denom = a - 2 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(denom != 0, 0.5 * (a - c) / denom, 0.0)
    pos[inner] += np.clip(shift, -0.5, 0.5)
    return pos


def detect_ppg_peaks(block: SampleBlock) -> NNSeries:
    """Find systolic peaks in a preprocessed PPG block and return NN intervals.

    A peak is a local maximum above the 1 s rolling mean plus half the 1 s
    rolling standard deviation, at least 0.4 s from its neighbours, whose
    prominence is at least 30% of the median candidate's.
    """
    if block.kind != SignalKind.PPG:
        raise ValidationError(f"expected PPG, got {block.kind.value}")
    if block.duration < MIN_DURATION_S - 1e-9:
        raise InsufficientDataError(
            f"PPG beat detection needs {MIN_DURATION_S}s, got {block.duration:.3f}s"
        )
    fs = block.sample_rate
    x = block.data.mean(axis=0)
    size = max(3, int(round(PEAK_WINDOW_S * fs)))
    mean = ndimage.uniform_filter1d(x, size, mode="reflect")
    sq = ndimage.uniform_filter1d(x * x, size, mode="reflect")
    std = np.sqrt(np.maximum(sq - mean * mean, 0.0))
    spread = float(np.percentile(x, 95) - np.percentile(x, 5))
    if spread <= 1e-9 * max(1.0, float(np.abs(x).max())):
        raise NoBeatsError("PPG signal is flat")
    peaks, props = sps.find_peaks(
        x,
        height=mean + PEAK_STD_FACTOR * std,
        distance=max(1, int(math.ceil(PEAK_MIN_DISTANCE_S * fs))),
        prominence=0.05 * spread,
    )
    if len(peaks):
        prom = props["prominences"]
        peaks = peaks[prom >= PEAK_REL_PROMINENCE * np.median(prom)]
    if len(peaks) < 3:
        raise NoBeatsError(f"only {len(peaks)} pulse peaks found")
    nn = np.diff(_refine(x, peaks)) / fs * 1000.0
    nn = nn[(nn >= NN_MIN_MS) & (nn <= NN_MAX_MS)]
    if len(nn):
        median = np.median(nn)
        nn = nn[np.abs(nn - median) <= NN_MAX_REL_DEVIATION * median]
    if len(nn) < 2:
        raise NoBeatsError(f"only {len(nn)} usable NN intervals")
    return NNSeries(tuple(nn.tolist()))


def nn_histogram(nn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Counts and left edges of fixed-width NN bins anchored at ``min(nn)``.

    The maximum lands in the last bin even when it falls on a bin edge.
    """
    lo = nn.min()
    n_bins = max(1, int(math.ceil((nn.max() - lo) / HIST_BIN_MS)))
    idx = np.minimum(np.floor((nn - lo) / HIST_BIN_MS).astype(int), n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins)
    edges = lo + HIST_BIN_MS * np.arange(n_bins + 1)
    return counts, edges


def tinn(counts: np.ndarray, edges: np.ndarray) -> float:
    """Base width of the least-squares triangle fitted to the NN histogram.

    The apex sits at the centre of the (first) modal bin with height equal to
    its count; the base ends are searched over the bin edges on each side.
    """
    centers = 0.5 * (edges[:-1] + edges[1:])
    mode = int(np.argmax(counts))
    apex_x, apex_y = centers[mode], float(counts[mode])
    lefts = edges[: mode + 1]
    rights = edges[mode + 1:]
    c = centers[np.newaxis, np.newaxis, :]
    n_ = lefts[:, np.newaxis, np.newaxis]
    m_ = rights[np.newaxis, :, np.newaxis]
    rising = apex_y * (c - n_) / (apex_x - n_)
    falling = apex_y * (m_ - c) / (m_ - apex_x)
    q = np.where(c <= apex_x, rising, falling)
    q = np.where((c <= n_) | (c >= m_), 0.0, q)
    err = ((counts[np.newaxis, np.newaxis, :] - q) ** 2).sum(axis=-1)
    i, j = np.unravel_index(int(np.argmin(err)), err.shape)
    return float(rights[j] - lefts[i])


def hrv_features(nn: NNSeries, window_start: float = 0.0, window_len: float = 0.0) -> FeatureVector:
    x = nn.as_array() if isinstance(nn, NNSeries) else NNSeries(tuple(nn)).as_array()
    n = len(x)
    if n < 2:
        raise InsufficientDataError(f"HRV_SDNN needs at least 2 intervals, got {n}")
    if n < 3:
        raise InsufficientDataError(f"HRV_SDSD needs at least 3 intervals, got {n}")
    if n < MIN_GEOMETRIC_INTERVALS:
        raise InsufficientDataError(
            f"HRV_HTI/HRV_TINN need at least {MIN_GEOMETRIC_INTERVALS} intervals, got {n}"
        )
    d = np.diff(x)
    mean = x.mean()
    median = np.median(x)
    sdnn = x.std(ddof=1)
    rmssd = math.sqrt(np.mean(d * d))
    mad = 1.4826 * np.median(np.abs(x - median))
    q1, q3 = np.percentile(x, [25, 75])
    counts, edges = nn_histogram(x)
    values = [
        mean,
        sdnn,
        rmssd,
        d.std(ddof=1),
        sdnn / mean,
        median,
        rmssd / mean,
        mad,
        mad / median,
        q3 - q1,
        100.0 * np.count_nonzero(np.abs(d) > 50.0) / len(d),
        100.0 * np.count_nonzero(np.abs(d) > 20.0) / len(d),
        n / counts.max(),
        tinn(counts, edges),
    ]
    return FeatureVector(SignalKind.PPG, HRV_FEATURES, values, window_start, window_len)


def ppg_features(block: SampleBlock, window_start: float | None = None) -> FeatureVector:
    start = block.start_time if window_start is None else window_start
    return hrv_features(detect_ppg_peaks(block), start, block.duration)
