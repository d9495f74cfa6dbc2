"""Window-level feature extraction, one family per modality.

Feature names are part of the model file contract; their order is fixed
by :data:`FEATURE_NAMES`.
"""
from __future__ import annotations

from ..preprocess import ClampCounter, preprocess
from ..signals import SampleBlock, SignalKind
from .eda import EDA_FEATURES, eda_block_features, eda_decompose, eda_features
from .eeg import BANDS, EEG_FEATURES, eeg_band_psd
from .hrv import HRV_FEATURES, NNSeries, detect_ppg_peaks, hrv_features, ppg_features
from .vector import FeatureVector

FEATURE_NAMES = {
    SignalKind.EEG: EEG_FEATURES,
    SignalKind.PPG: HRV_FEATURES,
    SignalKind.EDA: EDA_FEATURES,
}

_EXTRACTORS = {
    SignalKind.EEG: eeg_band_psd,
    SignalKind.PPG: ppg_features,
    SignalKind.EDA: eda_block_features,
}


def extract_features(
    raw: SampleBlock,
    filters: dict | None = None,
    counter: ClampCounter | None = None,
) -> FeatureVector:
    """Preprocess one raw window and compute its modality's features."""
    clean = preprocess(raw, filters, counter)
    return _EXTRACTORS[raw.kind](clean, raw.start_time)


__all__ = [
    "BANDS",
    "EDA_FEATURES",
    "EEG_FEATURES",
    "FEATURE_NAMES",
    "FeatureVector",
    "HRV_FEATURES",
    "NNSeries",
    "detect_ppg_peaks",
    "eda_decompose",
    "eda_features",
    "eeg_band_psd",
    "extract_features",
    "hrv_features",
]
