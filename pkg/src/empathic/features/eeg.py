"""EEG band power from a channel-averaged Welch spectrum."""
from __future__ import annotations

import numpy as np
from scipy import signal as sps
from scipy.integrate import trapezoid

from ..errors import InsufficientDataError, ValidationError
from ..signals import SampleBlock, SignalKind
from .vector import FeatureVector

# (name, low Hz, high Hz); integration includes both edges
BANDS = (
    ("psd_delta", 0.5, 4.0),
    ("psd_theta", 4.0, 8.0),
    ("psd_alpha", 8.0, 12.0),
    ("psd_beta", 12.0, 30.0),
    ("psd_gamma", 30.0, 45.0),
)
EEG_FEATURES = tuple(name for name, _, _ in BANDS)

SEGMENT_S = 4.0
MIN_DURATION_S = 4.0
MIN_RATE_HZ = 90.0


def welch_psd(data: np.ndarray, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided PSD of each row: 4 s Hann segments, 50% overlap."""
    nperseg = int(round(SEGMENT_S * sample_rate))
    return sps.welch(
        data,
        fs=sample_rate,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        detrend="constant",
        scaling="density",
        axis=-1,
    )


def band_power(freqs: np.ndarray, psd: np.ndarray, low: float, high: float) -> float:
    mask = (freqs >= low) & (freqs <= high)
    if mask.sum() < 2:
        return 0.0
    return float(trapezoid(psd[mask], freqs[mask]))


def eeg_band_psd(block: SampleBlock, window_start: float | None = None) -> FeatureVector:
    """Delta..gamma band powers of a preprocessed EEG block, averaged over channels."""
    if block.kind != SignalKind.EEG:
        raise ValidationError(f"expected EEG, got {block.kind.value}")
    if block.sample_rate < MIN_RATE_HZ:
        raise ValidationError(
            f"sample rate {block.sample_rate} Hz cannot represent the gamma band (needs >= {MIN_RATE_HZ} Hz)"
        )
    if block.duration < MIN_DURATION_S - 1e-9:
        raise InsufficientDataError(
            f"EEG band power needs {MIN_DURATION_S}s, got {block.duration:.3f}s"
        )
    freqs, psd = welch_psd(block.data, block.sample_rate)
    mean_psd = psd.mean(axis=0)
    values = [band_power(freqs, mean_psd, lo, hi) for _, lo, hi in BANDS]
    return FeatureVector(
        SignalKind.EEG,
        EEG_FEATURES,
        values,
        window_start=block.start_time if window_start is None else window_start,
        window_len=block.duration,
    )
