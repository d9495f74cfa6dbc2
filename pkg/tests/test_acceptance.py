"""End-to-end acceptance checks, one test per criterion.

Each test records a ``PASS``/``FAIL`` line (also shown in the terminal
summary) before asserting, so a run lists every criterion's outcome.
"""
import asyncio
import copy
import itertools
import json
import math
import time

import numpy as np
import pytest

from empathic.cli import main
from empathic.config import EngineConfig
from empathic.emotion_model import (
    Dimension,
    ValenceMode,
    binarize_arousal,
    binarize_valence,
    load_model_dir,
    model_filename,
    save_model,
)
from empathic.engine import Engine, replay
from empathic.features import NNSeries, eda_decompose, eda_features, eeg_band_psd, hrv_features
from empathic.features.hrv import HRV_FEATURES
from empathic.fusion import majority_emotion
from empathic.orchestrator import Connection, ServerConfig, encode, start_server
from empathic.signals import Quadrant, SignalKind, save_trial
from empathic.synth import SynthSpec, generate_trial

from conftest import ACCEPTANCE_LINES, block, constant_models, simple_trial, sine
from oracles import hrv_oracle

KINDS = (SignalKind.EEG, SignalKind.EDA, SignalKind.PPG)


def record(number, title, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------

def per_modality_models(arousal_signs, valence_signs):
    models = {}
    for kind, a, v in zip(KINDS, arousal_signs, valence_signs):
        models.update({key: m for key, m in constant_models(a, v, kinds=(kind.value,)).items()})
    return models


def test_criterion_01_fusion_enumeration():
    trial = generate_trial(SynthSpec.strong(seed=1, duration_s=20.0), Quadrant.HAHV, 0)
    engine = Engine(constant_models())
    for blocks in trial.streams.values():
        for b in blocks:
            engine.ingest(b)
    signs = list(itertools.product((-1, 1), repeat=3))
    weights = {"arousal": (1, 2, 2), "valence": (1, 1, 1)}
    mismatches, zeros, checked = 0, 0, 0
    began = time.perf_counter()
    for a_signs, v_signs in itertools.product(signs, signs):
        engine.models = per_modality_models(a_signs, v_signs)
        state = engine.tick(20.0).state
        for dim, s in (("arousal", a_signs), ("valence", v_signs)):
            total = sum(w * x for w, x in zip(weights[dim], s))
            zeros += total == 0
            expected = 1 if total > 0 else -1
            mismatches += int(getattr(state, dim)) != expected
            checked += 1
    elapsed = time.perf_counter() - began
    ok = mismatches == 0 and zeros == 0 and elapsed < 1.0 and checked == 128
    record(1, "fusion enumeration", ok, f"{checked} checks, {mismatches} mismatches, {zeros} zero sums, {elapsed:.3f}s")


# 2 ---------------------------------------------------------------------------

def test_criterion_02_binarization():
    arousal = [int(binarize_arousal(r)) for r in range(1, 6)]
    literal = [int(binarize_valence(r, ValenceMode.LITERAL)) for r in range(1, 6)]
    conventional = [int(binarize_valence(r, ValenceMode.CONVENTIONAL)) for r in range(1, 6)]
    ok = (
        arousal == [-1, -1, -1, 1, 1]
        and literal == [1, 1, 1, -1, -1]
        and conventional == [-1, -1, -1, 1, 1]
    )
    record(2, "binarization tables", ok, f"arousal {arousal}, literal {literal}, conventional {conventional}")


# 3 ---------------------------------------------------------------------------

def test_criterion_03_hrv_oracle():
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        nn = rng.uniform(600, 1000, size=int(rng.integers(20, 80)))
        fv = hrv_features(NNSeries(tuple(nn)))
        ref = hrv_oracle(nn)
        for name in HRV_FEATURES:
            scale = max(abs(ref[name]), 1e-300)
            worst = max(worst, abs(fv[name] - ref[name]) / scale if ref[name] else abs(fv[name]))
    const = hrv_features(NNSeries((800.0,) * 30))
    alt = hrv_features(NNSeries((800.0, 860.0) * 15))
    fixtures = (
        const["HRV_MeanNN"] == 800 and const["HRV_SDNN"] == 0 and const["HRV_RMSSD"] == 0
        and const["HRV_SDSD"] == 0 and const["HRV_pNN50"] == 0 and const["HRV_pNN20"] == 0
        and const["HRV_MedianNN"] == 800
        and alt["HRV_RMSSD"] == 60 and alt["HRV_pNN50"] == 100 and alt["HRV_pNN20"] == 100
        and alt["HRV_MeanNN"] == 830
    )
    record(3, "HRV oracle equivalence", worst <= 1e-9 and fixtures, f"max rel error {worst:.2e}, fixtures exact: {fixtures}")


# 4 ---------------------------------------------------------------------------

def test_criterion_04_psd_attribution():
    fv = eeg_band_psd(block("EEG", sine(10.0, 20.0, 250.0), 250.0))
    share = fv["psd_alpha"] / sum(fv.values)
    zero = eeg_band_psd(block("EEG", np.zeros(5000), 250.0))
    worst_zero = max(abs(v) for v in zero.values)
    record(4, "PSD attribution", share >= 0.9 and worst_zero <= 1e-12, f"alpha share {share:.4f}, zero-input max {worst_zero:g}")


# 5 ---------------------------------------------------------------------------

def test_criterion_05_eda_reconstruction():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2560, 6000))
        x = 2 + 0.3 * rng.standard_normal(n).cumsum() / math.sqrt(n) + 0.05 * rng.standard_normal(n)
        tonic, phasic = eda_decompose(block("EDA", x, 128.0))
        worst = max(worst, float(np.max(np.abs(tonic + phasic - x))))
    tonic, phasic = eda_decompose(block("EDA", np.full(2560, 2.0), 128.0))
    fv = eda_features(tonic, phasic, 128.0)
    const_ok = float(np.max(np.abs(phasic))) < 1e-9 and fv["peaks_count"] == 0
    record(5, "EDA reconstruction", worst <= 1e-9 and const_ok, f"max |tonic+phasic-x| {worst:.1e}, constant ok: {const_ok}")


# shared trained pipeline (criteria 6, 7, 10) ------------------------------------

@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    data, models, report = root / "data", root / "models", root / "report.json"
    began = time.perf_counter()
    rc = [
        main(["generate", "--preset", "strong", "--seed", "42", "--trials-per-quadrant", "40",
              "--duration", "40", "--out", str(data)]),
        main(["train", "--data", str(data), "--seed", "42", "--models", str(models)]),
        main(["evaluate-alignment", "--data", str(data), "--models", str(models), "--out", str(report)]),
    ]
    elapsed = time.perf_counter() - began
    return {"rc": rc, "elapsed": elapsed, "report": json.loads(report.read_text()) if report.exists() else None,
            "models": models}


# 6 ---------------------------------------------------------------------------

def test_criterion_06_cadence(pipeline):
    models = load_model_dir(pipeline["models"], required=True)
    counts, windows_ok = {}, True
    for duration in (19, 20, 21, 60):
        events = replay(simple_trial(duration=float(duration)), models)
        counts[duration] = len(events)
        windows_ok &= all(ev.window == (ev.window[1] - 20.0, ev.window[1]) for ev in events)
    long = generate_trial(SynthSpec.strong(seed=77, duration_s=600.0), Quadrant.LAHV, 0)
    slept = []
    paced = replay(long, models, speed=1.0, sleep=slept.append)
    fast = replay(long, models, speed="max")
    counts[600] = len(fast)
    windows_ok &= [ev.window for ev in fast] == [(5.0 * k, 20.0 + 5.0 * k) for k in range(117)]
    identical = paced == fast and [e.to_record() for e in paced] == [e.to_record() for e in fast]
    paced_ok = abs(sum(slept) - 600.0) < 1e-6
    ok = counts == {19: 0, 20: 1, 21: 1, 60: 9, 600: 117} and windows_ok and identical and paced_ok
    record(6, "cadence law", ok, f"counts {counts}, windows exact: {windows_ok}, speed 1.0 == max: {identical}")


# 7 ---------------------------------------------------------------------------

def test_criterion_07_learnability(pipeline):
    rep = pipeline["report"]
    assert pipeline["rc"] == [0, 0, 0] and rep is not None
    pct = {src: {d: rep["scores"][src][d]["percent"] for d in ("arousal", "valence")} for src in rep["scores"]}
    singles_ok = all(pct[s][d] is not None and pct[s][d] >= 85.0 for s in ("EEG", "PPG", "EDA") for d in ("arousal", "valence"))
    fused_ok = all(
        pct["Fusion"][d] >= max(pct[s][d] for s in ("EEG", "PPG", "EDA")) - 2.0 for d in ("arousal", "valence")
    )
    fast = pipeline["elapsed"] < 120.0
    summary = ", ".join(f"{s} {pct[s]['arousal']:.1f}/{pct[s]['valence']:.1f}" for s in ("EEG", "PPG", "EDA", "Fusion"))
    record(7, "learnability end-to-end", singles_ok and fused_ok and fast,
           f"held-out {rep['n_trials']} trials, arousal/valence: {summary}; {pipeline['elapsed']:.1f}s")


# 8 ---------------------------------------------------------------------------

def test_criterion_08_alignment_fixture(tmp_path, capsys):
    # 38 of 55 trials self-report high arousal; models always detect high
    data, models = tmp_path / "fixture", tmp_path / "models"
    for k in range(55):
        rate = 4 if k < 38 else 2
        save_trial(simple_trial(duration=20.0, trial_id=f"f{k:02d}", label=(rate, 3), seed=k), data / f"f{k:02d}")
    models.mkdir()
    for (kind, dim), m in constant_models(1, 1).items():
        save_model(m, models / model_filename(kind, dim))
    capsys.readouterr()
    rc = main(["evaluate-alignment", "--data", str(data), "--split", "all", "--models", str(models),
               "--out", str(tmp_path / "r.json")])
    text = capsys.readouterr().out
    value = json.loads((tmp_path / "r.json").read_text())["scores"]["Fusion"]["arousal"]["percent"]
    fusion_row = next(line for line in text.splitlines() if line.startswith("Fusion"))
    ok = rc == 0 and abs(value - 69.1) <= 0.05 and fusion_row.split()[1] == "69.1"
    record(8, "alignment-metric fixture", ok, f"fused arousal {value:.4f}%, printed {fusion_row.split()[1]}")


# 9 ---------------------------------------------------------------------------

def event_msg(session, q, t):
    from empathic.engine import EmotionEvent
    from empathic.emotion_model import ModalityPrediction
    from empathic.fusion import fuse

    a, v = (1 if q[0] == "H" else -1), (1 if q[2] == "H" else -1)
    st = fuse([ModalityPrediction(k, a, v) for k in SignalKind], t=t)
    return {"type": "EmotionEvent", "session": session, "t": t,
            "event": EmotionEvent(st, (t - 20, t), ()).to_record()}


def transcript(session, mode):
    rng = np.random.default_rng(len(session))
    msgs = [{"type": "Hello", "session": session, "t": 0.0, "mode": mode}]
    expected_quadrants = []
    t = 0.0
    for topic in range(8):
        msgs.append(event_msg(session, "LALV", t + 0.5))  # prompting: mirrored, not accumulated
        msgs.append({"type": "SpeechStart", "session": session, "t": t + 1})
        quads = list(Quadrant)
        qs = [quads[i].value for i in rng.integers(0, 4, size=int(rng.integers(1, 6)))]
        for k, q in enumerate(qs):
            msgs.append(event_msg(session, q, t + 2 + k))
        expected_quadrants.append(majority_emotion([Quadrant(q) for q in qs]).value)
        msgs.append({"type": "SpeechEnd", "session": session, "t": t + 9})
        t += 10
    return msgs, expected_quadrants


async def run_client(port, msgs):
    reader, writer = await asyncio.open_connection("127.0.0.1", port)
    for m in msgs:
        writer.write(encode(m))
    await writer.drain()
    out = []
    while True:
        line = await asyncio.wait_for(reader.readline(), 10)
        if not line:
            break
        out.append(json.loads(line))
        if out[-1]["type"] == "EndSession":
            break
    writer.close()
    return out


def test_criterion_09_orchestrator_protocol():
    scripts = {mode: transcript(f"sess-{mode}", mode) for mode in ("neutral", "empathetic")}

    async def go():
        server = await start_server(ServerConfig(seed=3), "127.0.0.1", 0)
        port = server.sockets[0].getsockname()[1]
        async with server:
            return await asyncio.gather(*(run_client(port, scripts[m][0]) for m in ("neutral", "empathetic")))

    neutral, empathetic = asyncio.run(go())
    n_events = sum(m["type"] == "EmotionEvent" for m in scripts["empathetic"][0])
    checks = {
        "neutral no commands": sum(m["type"] == "ExpressionCommand" for m in neutral) == 0,
        "empathetic one command per event": sum(m["type"] == "ExpressionCommand" for m in empathetic) == n_events,
        "one response per listening phase": all(
            sum(m["type"] == "ResponseUtterance" for m in out) == 8 for out in (neutral, empathetic)
        ),
        "quadrant_used is majority": [m["quadrant_used"] for m in empathetic if m["type"] == "ResponseUtterance"]
        == scripts["empathetic"][1],
        "neutral quadrant_used absent": all(
            m["quadrant_used"] is None for m in neutral if m["type"] == "ResponseUtterance"
        ),
        "all phases reached": all(
            [m["type"] for m in out].count("StartTopic") == 8 and out[-1]["type"] == "EndSession"
            for out in (neutral, empathetic)
        ),
    }
    # illegal-phase messages: error reply, no state change
    conn = Connection(ServerConfig())
    conn.handle_line(json.dumps({"type": "Hello", "session": "x", "t": 0.0, "mode": "empathetic"}))
    illegal_ok = True
    for phase_setup, bad in [
        ([], {"type": "SpeechEnd", "session": "x", "t": 1.0}),
        ([{"type": "SpeechStart", "session": "x", "t": 1.0}], {"type": "SpeechStart", "session": "x", "t": 2.0}),
        ([{"type": "SpeechEnd", "session": "x", "t": 3.0}], {"type": "SpeechEnd", "session": "x", "t": 4.0}),
    ]:
        for m in phase_setup:
            conn.handle_line(json.dumps(m))
        before = copy.deepcopy(conn.session.__dict__)
        replies = conn.handle_line(json.dumps(bad))
        illegal_ok &= [r["type"] for r in replies] == ["Error"] and conn.session.__dict__ == before
    checks["illegal phase rejected without mutation"] = illegal_ok
    failed = [k for k, v in checks.items() if not v]
    record(9, "orchestrator protocol", not failed, "all checks hold" if not failed else f"failed: {failed}")


# 10 --------------------------------------------------------------------------

def test_criterion_10_realtime_budget(pipeline):
    models = load_model_dir(pipeline["models"], required=True)
    trial = generate_trial(SynthSpec.strong(seed=123, duration_s=600.0), Quadrant.HALV, 0)
    events = replay(trial, models, EngineConfig())
    lat = np.array([ev.latency_ms for ev in events])
    ok = len(events) == 117 and lat.max() < 500.0
    record(10, "real-time budget", ok, f"{len(events)} windows, latency mean {lat.mean():.1f} ms, max {lat.max():.1f} ms")
