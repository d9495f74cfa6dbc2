"""Tonic/phasic split of skin conductance and their summary statistics."""
from __future__ import annotations

import numpy as np
from scipy import signal as sps

from ..errors import InsufficientDataError, ValidationError
from ..preprocess import FilterSpec
from ..signals import SampleBlock, SignalKind
from .vector import FeatureVector

MIN_DURATION_S = 20.0
TONIC_FILTER = FilterSpec("lowpass", high_hz=0.05, order=2)
PEAK_PROMINENCE_US = 0.01

EDA_FEATURES = (
    "tonic_mean",
    "tonic_std",
    "tonic_var",
    "phasic_mean",
    "phasic_std",
    "phasic_var",
    "peaks_count",
    "peaks_mean",
    "peaks_std",
    "peaks_var",
    "peaks_pos_derivatives",
)


def eda_decompose(block: SampleBlock, tonic_filter: FilterSpec = TONIC_FILTER) -> tuple[np.ndarray, np.ndarray]:
    """Split a preprocessed EDA block into ``(tonic, phasic)``.

    The tonic level is a zero-phase 0.05 Hz low-pass of the signal and the
    phasic part is the remainder, so ``tonic + phasic`` rebuilds the input.
    Multichannel blocks are averaged first.
    """
    if block.kind != SignalKind.EDA:
        raise ValidationError(f"expected EDA, got {block.kind.value}")
    if block.duration < MIN_DURATION_S - 1e-9:
        raise InsufficientDataError(
            f"EDA decomposition needs {MIN_DURATION_S}s, got {block.duration:.3f}s"
        )
    x = block.data.mean(axis=0)
    tonic = tonic_filter.apply(x, block.sample_rate)
    return tonic, x - tonic


def scr_peaks(phasic: np.ndarray) -> np.ndarray:
    """Indices of phasic peaks with prominence of at least 0.01 uS."""
    peaks, _ = sps.find_peaks(phasic, prominence=PEAK_PROMINENCE_US)
    return peaks


def eda_features(
    tonic: np.ndarray,
    phasic: np.ndarray,
    sample_rate: float,
    window_start: float = 0.0,
) -> FeatureVector:
    tonic = np.asarray(tonic, dtype=float)
    phasic = np.asarray(phasic, dtype=float)
    if tonic.shape != phasic.shape or tonic.ndim != 1 or tonic.size < 2:
        raise ValidationError("tonic and phasic must be equal-length 1-D series")
    peaks = scr_peaks(phasic)
    amps = phasic[peaks]
    if amps.size:
        peak_stats = [amps.mean(), amps.std(), amps.var()]
    else:
        peak_stats = [0.0, 0.0, 0.0]
    rises = np.diff(phasic)
    rises = rises[rises > 0]
    pos_deriv = rises.mean() * sample_rate if rises.size else 0.0
    values = [
        tonic.mean(),
        tonic.std(),
        tonic.var(),
        phasic.mean(),
        phasic.std(),
        phasic.var(),
        float(len(peaks)),
        *peak_stats,
        pos_deriv,
    ]
    return FeatureVector(SignalKind.EDA, EDA_FEATURES, values, window_start, tonic.size / sample_rate)


def eda_block_features(block: SampleBlock, window_start: float | None = None) -> FeatureVector:
    tonic, phasic = eda_decompose(block)
    start = block.start_time if window_start is None else window_start
    return eda_features(tonic, phasic, block.sample_rate, start)
