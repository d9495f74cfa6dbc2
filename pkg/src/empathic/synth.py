"""Synthetic labeled trials with class-dependent physiological signatures.

The generator exists so the whole pipeline can be trained and evaluated
without private recordings.  Each quadrant gets its own signature:

* arousal: more frequent and larger SCR bumps in EDA, lower beat-to-beat
  dispersion in the NN series, more beta-band (20 Hz) EEG activity;
* valence: stronger alpha-band (10 Hz) EEG activity, higher tonic skin
  conductance, shorter mean NN interval.

Effect sizes scale these shifts and are zero in the null preset.  The
signals are only meant to be learnable, not physiologically faithful.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .signals import (
    DEFAULT_CHANNELS,
    DEFAULT_RATES,
    Quadrant,
    SampleBlock,
    SelfReportLabel,
    SignalKind,
    TrialRecord,
    load_trial,
    save_trial,
)

DATASET_INDEX = "dataset.json"
QUADRANT_ORDER = (Quadrant.HAHV, Quadrant.HALV, Quadrant.LAHV, Quadrant.LALV)


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    trials_per_quadrant: int = 10
    duration_s: float = 60.0
    # arousal effects
    arousal_scr_rate: float = 4.0  # extra SCRs per minute
    arousal_scr_gain: float = 0.5  # relative SCR amplitude increase
    arousal_hrv_ms: float = 20.0  # drop in NN standard deviation (ms)
    arousal_beta: float = 0.5  # relative beta amplitude increase
    # valence effects
    valence_alpha: float = 0.5  # relative alpha amplitude increase
    valence_tonic_us: float = 0.5  # tonic conductance increase (uS)
    valence_nn_ms: float = 40.0  # drop in mean NN interval (ms)
    # noise and between-trial variability
    eeg_noise_uv: float = 5.0
    ppg_noise: float = 0.02
    eda_noise_us: float = 0.005
    jitter: float = 0.1  # log-normal spread of per-trial baselines
    holdout: float = 0.25
    eeg_channels: int = 8
    include_eeg: bool = True

    def __post_init__(self):
        effects = (
            self.arousal_scr_rate, self.arousal_scr_gain, self.arousal_hrv_ms, self.arousal_beta,
            self.valence_alpha, self.valence_tonic_us, self.valence_nn_ms,
        )
        if min(effects) < 0:
            raise ValidationError("effect sizes must be >= 0")
        if self.duration_s < 20:
            raise ValidationError("trials must last at least 20 s")
        if self.trials_per_quadrant < 1:
            raise ValidationError("need at least one trial per quadrant")
        if min(self.eeg_noise_uv, self.ppg_noise, self.eda_noise_us, self.jitter) < 0:
            raise ValidationError("noise levels must be >= 0")
        if not 0 <= self.holdout < 1:
            raise ValidationError("holdout must be in [0, 1)")
        if self.arousal_hrv_ms >= BASE_NN_SD_MS:
            raise ValidationError(f"arousal_hrv_ms must stay below {BASE_NN_SD_MS} ms")

    @classmethod
    def strong(cls, **kw) -> "SynthSpec":
        """Large, easily separable effects; used for end-to-end checks."""
        base = dict(
            arousal_scr_rate=8.0,
            arousal_scr_gain=1.0,
            arousal_hrv_ms=35.0,
            arousal_beta=1.5,
            valence_alpha=1.5,
            valence_tonic_us=1.5,
            valence_nn_ms=100.0,
        )
        base.update(kw)
        return cls(**base)

    @classmethod
    def null(cls, **kw) -> "SynthSpec":
        base = {k: 0.0 for k in (
            "arousal_scr_rate", "arousal_scr_gain", "arousal_hrv_ms", "arousal_beta",
            "valence_alpha", "valence_tonic_us", "valence_nn_ms",
        )}
        base.update(kw)
        return cls(**base)

    PRESETS = ("default", "strong", "null")

    @classmethod
    def preset(cls, name: str, **kw) -> "SynthSpec":
        if name == "default":
            return cls(**kw)
        if name in ("strong", "null"):
            return getattr(cls, name)(**kw)
        raise ValidationError(f"unknown preset {name!r}; choose from {cls.PRESETS}")

    def to_dict(self) -> dict:
        return asdict(self)


BASE_NN_MS = 800.0
BASE_NN_SD_MS = 50.0
BASE_SCR_PER_MIN = 2.0
BASE_TONIC_US = 2.0
ALPHA_UV = 4.0
BETA_UV = 2.0


def scr_shape(t: np.ndarray, onset: float, amplitude: float, rise: float = 0.75, decay: float = 2.0) -> np.ndarray:
    """Bi-exponential skin conductance response peaking at ``amplitude``."""
    tt = t - onset
    out = np.zeros_like(t, dtype=float)
    m = tt > 0
    out[m] = (1 - np.exp(-tt[m] / rise)) * np.exp(-tt[m] / decay)
    t_peak = rise * math.log1p(decay / rise)
    peak = (1 - math.exp(-t_peak / rise)) * math.exp(-t_peak / decay)
    return amplitude * out / peak


def pulse_wave(t: np.ndarray, beats: np.ndarray) -> np.ndarray:
    """PPG-like waveform: systolic peak at each beat plus a dicrotic bump."""
    out = np.zeros_like(t)
    for b in beats:
        near = np.abs(t - b) < 1.0
        tt = t[near] - b
        out[near] += np.exp(-0.5 * (tt / 0.08) ** 2) + 0.3 * np.exp(-0.5 * ((tt - 0.3) / 0.1) ** 2)
    return out


def _pink(rng, n: int, fs: float) -> np.ndarray:
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, 1 / fs)
    f[0] = f[1]
    x = np.fft.irfft(spec / np.sqrt(f), n)
    return x / x.std()


def _jit(rng, spec: SynthSpec) -> float:
    return float(np.exp(spec.jitter * rng.standard_normal()))


def _nn_series(rng, mean_ms: float, sd_ms: float, total_s: float) -> np.ndarray:
    n = int(total_s * 1000 / (mean_ms * 0.8)) + 4
    ar = np.empty(n)
    ar[0] = rng.standard_normal()
    for i in range(1, n):
        ar[i] = 0.5 * ar[i - 1] + math.sqrt(1 - 0.25) * rng.standard_normal()
    nn = mean_ms + sd_ms * ar
    return np.clip(nn, 0.8 * mean_ms, 1.2 * mean_ms)


def generate_trial(spec: SynthSpec, quadrant: Quadrant, index: int, trial_id: str | None = None) -> TrialRecord:
    rng = np.random.default_rng([spec.seed, index])
    a = 1.0 if quadrant.high_arousal else 0.0
    v = 1.0 if quadrant.high_valence else 0.0
    dur = spec.duration_s
    streams = {}

    if spec.include_eeg:
        fs = DEFAULT_RATES[SignalKind.EEG]
        n = int(round(dur * fs))
        t = np.arange(n) / fs
        channels = DEFAULT_CHANNELS[SignalKind.EEG][: spec.eeg_channels] if spec.eeg_channels <= 8 else tuple(
            f"EEG{i}" for i in range(1, spec.eeg_channels + 1)
        )
        alpha = ALPHA_UV * (1 + spec.valence_alpha * v) * _jit(rng, spec)
        beta = BETA_UV * (1 + spec.arousal_beta * a) * _jit(rng, spec)
        f_alpha = rng.uniform(9.5, 10.5)
        f_beta = rng.uniform(18.0, 22.0)
        rows = []
        for _ in channels:
            x = spec.eeg_noise_uv * _pink(rng, n, fs)
            x += alpha * rng.uniform(0.8, 1.2) * np.sin(2 * np.pi * f_alpha * t + rng.uniform(0, 2 * np.pi))
            x += beta * rng.uniform(0.8, 1.2) * np.sin(2 * np.pi * f_beta * t + rng.uniform(0, 2 * np.pi))
            rows.append(x)
        streams[SignalKind.EEG] = (SampleBlock(SignalKind.EEG, 0.0, fs, channels, np.array(rows)),)

    fs = DEFAULT_RATES[SignalKind.PPG]
    n = int(round(dur * fs))
    t = np.arange(n) / fs
    mean_nn = (BASE_NN_MS - spec.valence_nn_ms * v) * _jit(rng, spec) ** 0.5
    sd_nn = (BASE_NN_SD_MS - spec.arousal_hrv_ms * a) * _jit(rng, spec)
    nn = _nn_series(rng, mean_nn, sd_nn, dur + 4)
    beats = rng.uniform(-1.0, 0.0) + np.concatenate([[0.0], np.cumsum(nn) / 1000.0])
    ppg = pulse_wave(t, beats)
    ppg += 0.2 * np.sin(2 * np.pi * 0.25 * t + rng.uniform(0, 2 * np.pi))
    ppg += spec.ppg_noise * rng.standard_normal(n)
    streams[SignalKind.PPG] = (SampleBlock(SignalKind.PPG, 0.0, fs, DEFAULT_CHANNELS[SignalKind.PPG], ppg),)

    fs = DEFAULT_RATES[SignalKind.EDA]
    n = int(round(dur * fs))
    t = np.arange(n) / fs
    tonic = (BASE_TONIC_US + spec.valence_tonic_us * v) * _jit(rng, spec)
    eda = tonic + rng.uniform(-0.2, 0.2) * t / dur
    rate = (BASE_SCR_PER_MIN + spec.arousal_scr_rate * a) / 60.0
    gain = 1 + spec.arousal_scr_gain * a
    onset = -5.0
    while True:
        onset += rng.exponential(1 / rate) if rate > 0 else math.inf
        if onset >= dur:
            break
        eda += scr_shape(t, onset, gain * rng.uniform(0.2, 0.5))
    eda += spec.eda_noise_us * rng.standard_normal(n)
    streams[SignalKind.EDA] = (SampleBlock(SignalKind.EDA, 0.0, fs, DEFAULT_CHANNELS[SignalKind.EDA], eda),)

    label = SelfReportLabel(
        arousal_rate=int(rng.choice([4, 5]) if a else rng.choice([1, 2, 3])),
        valence_rate=int(rng.choice([4, 5]) if v else rng.choice([1, 2, 3])),
    )
    # user talks in a few alternating turns
    spans = []
    s = rng.uniform(2.0, 5.0)
    while s + 4.0 < dur:
        e = min(dur, s + rng.uniform(6.0, 15.0))
        spans.append((round(s, 3), round(e, 3)))
        s = e + rng.uniform(3.0, 6.0)
    return TrialRecord(
        trial_id=trial_id or f"{quadrant.value.lower()}_{index:04d}",
        topic_category=quadrant,
        streams=streams,
        label=label,
        speech_spans=tuple(spans),
    )


def generate_dataset(spec: SynthSpec) -> list[TrialRecord]:
    trials = []
    index = 0
    for q in QUADRANT_ORDER:
        for _ in range(spec.trials_per_quadrant):
            trials.append(generate_trial(spec, q, index, trial_id=f"t{index:04d}_{q.value}"))
            index += 1
    return trials


def split_ids(trials: list[TrialRecord], holdout: float, seed: int) -> dict[str, str]:
    """Stratified train/test assignment by topic category."""
    rng = np.random.default_rng([seed, 10_000_019])
    split = {}
    for q in QUADRANT_ORDER:
        ids = [t.trial_id for t in trials if t.topic_category == q]
        order = rng.permutation(len(ids))
        n_test = int(round(holdout * len(ids)))
        for rank, i in enumerate(order):
            split[ids[i]] = "test" if rank < n_test else "train"
    return split


def write_dataset(trials: list[TrialRecord], out_dir, split: dict[str, str] | None = None, spec: SynthSpec | None = None) -> Path:
    out = Path(out_dir)
    (out / "trials").mkdir(parents=True, exist_ok=True)
    entries = []
    for tr in trials:
        save_trial(tr, out / "trials" / tr.trial_id)
        entries.append({
            "trial_id": tr.trial_id,
            "path": f"trials/{tr.trial_id}",
            "topic_category": tr.topic_category.value,
            "split": (split or {}).get(tr.trial_id, "train"),
        })
    index = {"trials": entries}
    if spec is not None:
        index["synth_spec"] = spec.to_dict()
    (out / DATASET_INDEX).write_text(json.dumps(index, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def generate(spec: SynthSpec, out_dir) -> list[TrialRecord]:
    trials = generate_dataset(spec)
    write_dataset(trials, out_dir, split_ids(trials, spec.holdout, spec.seed), spec)
    return trials


def load_dataset(dataset_dir, split: str | None = None) -> list[TrialRecord]:
    """Load trials listed in ``dataset.json``; ``split`` filters by train/test.

    Directories without an index are scanned for trial subdirectories.
    """
    root = Path(dataset_dir)
    index_path = root / DATASET_INDEX
    if index_path.exists():
        entries = json.loads(index_path.read_text(encoding="utf-8"))["trials"]
        paths = [root / e["path"] for e in entries if split in (None, "all") or e["split"] == split]
    else:
        if not root.is_dir():
            raise FileNotFoundError(f"dataset directory {root} does not exist")
        paths = sorted(p.parent for p in root.rglob("manifest.json"))
    return [load_trial(p) for p in paths]
