"""
Streaming recognition
=====================

The engine consumes samples in arbitrary chunks and emits one emotion
state every 5 s of stream time once 20 s of data are buffered.
"""

from collections import Counter

from empathic.engine import Engine, iter_chunks
from empathic.evaluation import train_models
from empathic.forest import Hyperparams
from empathic.signals import Quadrant
from empathic.synth import SynthSpec, generate_dataset, generate_trial

spec = SynthSpec.strong(seed=1, trials_per_quadrant=4, duration_s=30.0)
models = train_models(generate_dataset(spec), Hyperparams(n_trees=30)).models

# %%
# Feed a fresh two-minute high-arousal, high-valence trial one second at a
# time, the way a live acquisition loop would.  With the default literal
# valence rule a rating above 3 binarizes to -1, so this trial's ground
# truth, and hence the expected output, is the HALV quadrant.  Pass
# ``EngineConfig(valence_mode="conventional")`` to training and engine for
# the opposite polarity.
trial = generate_trial(SynthSpec.strong(seed=99, duration_s=120.0), Quadrant.HAHV, 0)
engine = Engine(models)
events = []
for until, blocks in iter_chunks(trial, 1.0):
    for b in blocks:
        engine.ingest(b)
    for ev in engine.pump(until):
        events.append(ev)
        print(f"t={ev.window[1]:5.1f}s  {ev.state.quadrant.value}  {ev.state.expression.value:<16} "
              f"scores={ev.state.raw_scores}  {ev.latency_ms:5.1f} ms")

print(Counter(ev.state.quadrant.value for ev in events))
