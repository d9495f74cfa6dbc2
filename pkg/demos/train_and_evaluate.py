"""
Training the per-modality forests
=================================

Generate a labelled synthetic set, fit one forest per modality and affect
dimension, and score the held-out trials against their self-reports.
"""

import tempfile
from pathlib import Path

from empathic.evaluation import evaluate_alignment, train_models
from empathic.forest import Hyperparams
from empathic.synth import SynthSpec, generate, load_dataset

workdir = Path(tempfile.mkdtemp())
spec = SynthSpec.strong(seed=42, trials_per_quadrant=8, duration_s=30.0)
generate(spec, workdir / "data")

train = load_dataset(workdir / "data", "train")
test = load_dataset(workdir / "data", "test")
print(f"{len(train)} training trials, {len(test)} held out")

# %%
# Each 20 s window (every 5 s) becomes one training example carrying its
# trial's binarized self-report.
summary = train_models(train, Hyperparams(n_trees=50), seed=0)
print(summary.to_text())

# %%
# A trial counts as aligned when the majority of its window decisions
# matches the self-report.  Fusion weighs the votes 1/2/2 (EEG/EDA/PPG)
# for arousal and equally for valence.
report = evaluate_alignment(test, summary.models)
print(report.to_text())
