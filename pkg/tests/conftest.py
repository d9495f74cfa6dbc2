import numpy as np
import pytest

from empathic.evaluation import train_models
from empathic.forest import Hyperparams
from empathic.signals import Quadrant, SampleBlock, SelfReportLabel, SignalKind, TrialRecord
from empathic.synth import SynthSpec, generate_dataset


def block(kind, x, fs, start=0.0, channels=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if channels is None:
        channels = tuple(f"{kind}{i}" for i in range(len(x)))
    return SampleBlock(SignalKind(kind), start, fs, channels, x)


def sine(freq, duration, fs, amp=1.0, phase=0.0):
    t = np.arange(int(round(duration * fs))) / fs
    return amp * np.sin(2 * np.pi * freq * t + phase)


def pulse_train(bpm, duration, fs=128.0, skip=()):
    """Gaussian pulses at a fixed rate; beat indices in ``skip`` are left out."""
    t = np.arange(int(round(duration * fs))) / fs
    period = 60.0 / bpm
    x = np.zeros_like(t)
    for k, b in enumerate(np.arange(0.3, duration + 1, period)):
        if k not in skip:
            x += np.exp(-0.5 * ((t - b) / 0.08) ** 2)
    return x


def simple_trial(duration=30.0, trial_id="t1", label=(4, 2), kinds=("EEG", "PPG", "EDA"), seed=0, spans=((2.0, 8.0),)):
    rng = np.random.default_rng(seed)
    rates = {"EEG": 250.0, "PPG": 128.0, "EDA": 128.0}
    nch = {"EEG": 8, "PPG": 1, "EDA": 1}
    streams = {}
    for k in kinds:
        n = int(duration * rates[k])
        data = rng.standard_normal((nch[k], n))
        if k == "EDA":
            data = 2 + 0.01 * data
        streams[SignalKind(k)] = (block(k, data, rates[k]),)
    return TrialRecord(trial_id, Quadrant.HALV, streams, SelfReportLabel(*label), spans)


@pytest.fixture(scope="session")
def small_models():
    """Quick forests trained on a small strong-effect synthetic set."""
    spec = SynthSpec.strong(seed=7, trials_per_quadrant=4, duration_s=30.0, eeg_channels=4)
    trials = generate_dataset(spec)
    return train_models(trials, Hyperparams(n_trees=15, max_depth=6), seed=3).models


@pytest.fixture(scope="session")
def strong_trials():
    spec = SynthSpec.strong(seed=11, trials_per_quadrant=2, duration_s=30.0, eeg_channels=4)
    return generate_dataset(spec)


def constant_models(arousal=1, valence=1, kinds=("EEG", "PPG", "EDA")):
    """Single-leaf forests that always vote the given levels."""
    from empathic.emotion_model import Dimension, ForestModel
    from empathic.features import FEATURE_NAMES
    from empathic.forest import Tree

    models = {}
    for k in kinds:
        kind = SignalKind(k)
        for dim, level in ((Dimension.AROUSAL, arousal), (Dimension.VALENCE, valence)):
            leaf = Tree([-1], [0.0], [0], [0], [level])
            models[(kind, dim)] = ForestModel(kind, dim, FEATURE_NAMES[kind], (leaf,), 0, Hyperparams(1))
    return models


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
