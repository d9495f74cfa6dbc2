"""Multimodal physiological emotion recognition for an empathetic agent.

EEG, PPG and EDA windows are turned into features, classified per modality
into binary arousal and valence, fused by weighted vote, and mapped to one
of four agent expressions.  The orchestrator drives a dialog from those
detections.
"""
from .config import EngineConfig, load_config
from .emotion_model import (
    BinaryLevel,
    Dimension,
    ForestModel,
    ModalityPrediction,
    ValenceMode,
    binarize_arousal,
    binarize_valence,
    load_model,
    load_model_dir,
    predict,
    save_model,
    train,
)
from .engine import EmotionEvent, Engine, StreamBuffer, replay
from .features import FeatureVector, NNSeries
from .forest import Hyperparams
from .fusion import (
    AROUSAL_WEIGHTS,
    VALENCE_WEIGHTS,
    EmotionState,
    Expression,
    FusionWeights,
    fuse,
    majority_emotion,
    quadrant_expression,
)
from .preprocess import FilterSpec, preprocess_eda, preprocess_eeg, preprocess_ppg
from .signals import Quadrant, SampleBlock, SelfReportLabel, SignalKind, TrialRecord, load_trial, save_trial

__version__ = "0.1.0"
