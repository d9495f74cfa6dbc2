"""
From raw signals to features
============================

One synthetic trial walked through conditioning and feature extraction,
one modality at a time.
"""

import numpy as np

from empathic import SignalKind
from empathic.features import detect_ppg_peaks, eda_decompose, eeg_band_psd, hrv_features
from empathic.preprocess import preprocess
from empathic.signals import Quadrant
from empathic.synth import SynthSpec, generate_trial

# A high-arousal, low-valence trial from the "strong" preset.  The generator
# plants more skin conductance responses and steadier heartbeats for high
# arousal, and a weaker alpha rhythm for low valence.
trial = generate_trial(SynthSpec.strong(seed=3, duration_s=20.0), Quadrant.HALV, 0)
print(trial.trial_id, trial.label, {k.value: len(v) for k, v in trial.streams.items()})

# %%
# EEG: band-pass 1-45 Hz, then Welch band power averaged over channels.
eeg = preprocess(trial.stream(SignalKind.EEG)[0])
bands = eeg_band_psd(eeg)
for name, value in bands.as_dict().items():
    print(f"{name:<10} {value:8.3f} uV^2")

# %%
# PPG: beats -> NN intervals -> heart rate variability.
ppg = preprocess(trial.stream(SignalKind.PPG)[0])
nn = detect_ppg_peaks(ppg)
print(f"{len(nn)} NN intervals, mean {np.mean(nn.intervals_ms):.0f} ms")
hrv = hrv_features(nn)
print({k: round(v, 2) for k, v in hrv.as_dict().items()})

# %%
# EDA: the slow tonic level and the fast phasic responses sum back to the
# conditioned signal exactly.
eda = preprocess(trial.stream(SignalKind.EDA)[0])
tonic, phasic = eda_decompose(eda)
print("reconstruction error:", np.max(np.abs(tonic + phasic - eda.data[0])))
print(f"tonic {tonic.mean():.2f} uS, largest phasic swing {phasic.max():.3f} uS")
