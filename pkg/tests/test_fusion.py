import itertools

import pytest

from empathic.emotion_model import BinaryLevel, ModalityPrediction
from empathic.errors import ConfigError, ValidationError
from empathic.fusion import (
    AROUSAL_WEIGHTS,
    VALENCE_WEIGHTS,
    EmotionState,
    Expression,
    FusionWeights,
    fuse,
    majority_emotion,
    quadrant_expression,
)
from empathic.signals import Quadrant, SignalKind

KINDS = (SignalKind.EEG, SignalKind.EDA, SignalKind.PPG)
SIGNS = list(itertools.product((-1, 1), repeat=3))
EXPECTED_EXPRESSION = {
    (1, 1): ("HAHV", "StrongHappiness"),
    (1, -1): ("HALV", "AngerScaredness"),
    (-1, 1): ("LAHV", "SlightHappiness"),
    (-1, -1): ("LALV", "Sadness"),
}


def preds(arousal, valence, kinds=KINDS):
    return [ModalityPrediction(k, a, v) for k, a, v in zip(kinds, arousal, valence)]


def oracle_level(signs, weights):
    total = sum(w * s for w, s in zip(weights, signs))
    assert total != 0
    return 1 if total > 0 else -1


def test_brute_force_enumeration():
    wa = (AROUSAL_WEIGHTS.eeg, AROUSAL_WEIGHTS.eda, AROUSAL_WEIGHTS.ppg)
    wv = (VALENCE_WEIGHTS.eeg, VALENCE_WEIGHTS.eda, VALENCE_WEIGHTS.ppg)
    assert wa == (1, 2, 2) and wv == (1, 1, 1)
    for a_signs, v_signs in itertools.product(SIGNS, SIGNS):
        state = fuse(preds(a_signs, v_signs))
        a, v = oracle_level(a_signs, wa), oracle_level(v_signs, wv)
        assert (int(state.arousal), int(state.valence)) == (a, v)
        assert state.raw_scores[0] != 0 and state.raw_scores[1] != 0
        assert (state.quadrant.value, state.expression.value) == EXPECTED_EXPRESSION[(a, v)]


@pytest.mark.parametrize("arousal,valence,p,level", [
    ((1, 1, -1), (1, 1, -1), 1.0, 1),  # valence only, (EEG, EDA, PPG)
    ((-1, 1, 1), (1, 1, 1), 3.0, 1),
    ((1, -1, -1), (1, 1, 1), -3.0, -1),
])
def test_fixtures(arousal, valence, p, level):
    s = fuse(preds(arousal, valence))
    if arousal == valence:
        assert s.raw_scores[1] == p and s.valence == level
    else:
        assert s.raw_scores[0] == p and s.arousal == level


def test_odd_integer_weights_never_tie():
    # with all weights odd the sum of three odd terms is odd, so never zero
    for w in itertools.product((1, 3, 5), repeat=3):
        fw = FusionWeights(*w)
        for signs in SIGNS:
            s = fuse(preds(signs, signs), fw, fw)
            assert s.raw_scores[0] != 0


@pytest.mark.parametrize("k", [0.1, 2.0, 7.5])
def test_weight_scaling_invariance(k):
    wa = FusionWeights(AROUSAL_WEIGHTS.eeg * k, AROUSAL_WEIGHTS.eda * k, AROUSAL_WEIGHTS.ppg * k)
    wv = FusionWeights(k, k, k)
    for a_signs, v_signs in itertools.product(SIGNS, SIGNS):
        base = fuse(preds(a_signs, v_signs))
        scaled = fuse(preds(a_signs, v_signs), wa, wv)
        assert (base.arousal, base.valence) == (scaled.arousal, scaled.valence)


def test_exact_tie_with_all_modalities_is_high():
    s = fuse(preds((1, -1, 1), (1, -1, 1)), FusionWeights(1, 2, 1), FusionWeights(1, 2, 1))
    assert s.raw_scores == (0.0, 0.0)
    assert s.arousal == BinaryLevel.HIGH and s.valence == BinaryLevel.HIGH


def test_missing_modality_tie_holds_previous():
    prev = fuse(preds((-1, -1, -1), (1, 1, 1)))
    two = [ModalityPrediction(SignalKind.EDA, 1, 1), ModalityPrediction(SignalKind.PPG, -1, -1)]
    s = fuse(two, previous=prev)
    assert s.raw_scores == (0.0, 0.0)
    assert (s.arousal, s.valence) == (prev.arousal, prev.valence)
    assert fuse(two).arousal == BinaryLevel.LOW  # nothing to hold yet


def test_missing_modality_dropped_from_sum():
    s = fuse([ModalityPrediction(SignalKind.EDA, 1, -1), ModalityPrediction(SignalKind.PPG, 1, -1)])
    assert s.raw_scores == (4.0, -2.0)
    assert s.quadrant is Quadrant.HALV


def test_no_modalities():
    s = fuse([])
    assert s.raw_scores == (0.0, 0.0) and s.quadrant is Quadrant.LALV


def test_duplicate_modality_rejected():
    with pytest.raises(ValidationError):
        fuse([ModalityPrediction("EEG", 1, 1)] * 2)


@pytest.mark.parametrize("w", [(0, 1, 1), (1, -2, 1), (1, 1, float("nan"))])
def test_nonpositive_weight(w):
    with pytest.raises(ConfigError):
        FusionWeights(*w)


def test_quadrant_expression_table():
    for (a, v), (q, e) in EXPECTED_EXPRESSION.items():
        assert quadrant_expression(BinaryLevel(a), BinaryLevel(v)) == (Quadrant(q), Expression(e))


def state_of(q):
    return fuse(preds((1 if q[0] == "H" else -1,) * 3, (1 if q[2] == "H" else -1,) * 3))


@pytest.mark.parametrize("seq,expected", [
    (["HAHV", "HAHV", "LALV"], "HAHV"),
    (["HAHV", "LALV"], "LALV"),
    (["LAHV"], "LAHV"),
    (["HALV", "LAHV", "LAHV", "HALV"], "HALV"),
])
def test_majority_emotion(seq, expected):
    assert majority_emotion([state_of(q) for q in seq]) is Quadrant(expected)


def test_majority_emotion_empty():
    with pytest.raises(ValidationError):
        majority_emotion([])


def test_state_dict_roundtrip():
    s = fuse(preds((1, -1, 1), (-1, -1, 1)), t=25.0)
    assert EmotionState.from_dict(s.to_dict()) == s


def test_state_dict_inconsistent_quadrant():
    d = state_of("HAHV").to_dict()
    d["quadrant"] = "LALV"
    with pytest.raises(ValidationError):
        EmotionState.from_dict(d)
