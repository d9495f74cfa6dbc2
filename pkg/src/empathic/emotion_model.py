"""Binary arousal/valence labels and per-modality forest classifiers.

Six models cover the three modalities times the two affect dimensions.
Valence binarization has two modes: ``paper_literal`` maps ratings above 3
to low (-1) and ``conventional`` maps them to high (+1).  The literal mode
is the default; pick one per deployment and train and run with the same.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IncompatibleModelError, ModelFormatError, ValidationError
from .features import FeatureVector
from .forest import Hyperparams, Tree, fit_forest, forest_predict
from .signals import SelfReportLabel, SignalKind

MODEL_FORMAT = "empathic-forest"
MODEL_FORMAT_VERSION = 1


class BinaryLevel(enum.IntEnum):
    LOW = -1
    HIGH = 1


class Dimension(str, enum.Enum):
    AROUSAL = "arousal"
    VALENCE = "valence"


class ValenceMode(str, enum.Enum):
    LITERAL = "paper_literal"
    CONVENTIONAL = "conventional"


def _check_rate(rate) -> int:
    if isinstance(rate, bool) or int(rate) != rate or not 1 <= rate <= 5:
        raise ValidationError(f"rating must be an integer in 1..5, got {rate!r}")
    return int(rate)


def binarize_arousal(rate: int) -> BinaryLevel:
    return BinaryLevel.LOW if _check_rate(rate) <= 3 else BinaryLevel.HIGH


def binarize_valence(rate: int, mode: ValenceMode | str = ValenceMode.LITERAL) -> BinaryLevel:
    high = _check_rate(rate) > 3
    if ValenceMode(mode) is ValenceMode.LITERAL:
        return BinaryLevel.LOW if high else BinaryLevel.HIGH
    return BinaryLevel.HIGH if high else BinaryLevel.LOW


def binarize(label: SelfReportLabel, dimension: Dimension | str, mode=ValenceMode.LITERAL) -> BinaryLevel:
    if Dimension(dimension) is Dimension.AROUSAL:
        return binarize_arousal(label.arousal_rate)
    return binarize_valence(label.valence_rate, mode)


@dataclass(frozen=True)
class ModalityPrediction:
    modality: SignalKind
    arousal: BinaryLevel
    valence: BinaryLevel

    def __post_init__(self):
        object.__setattr__(self, "modality", SignalKind(self.modality))
        object.__setattr__(self, "arousal", BinaryLevel(self.arousal))
        object.__setattr__(self, "valence", BinaryLevel(self.valence))


@dataclass(frozen=True, eq=False)
class ForestModel:
    modality: SignalKind
    dimension: Dimension
    feature_names: tuple[str, ...]
    trees: tuple[Tree, ...]
    train_seed: int
    hyperparams: Hyperparams

    def __post_init__(self):
        if not self.trees:
            raise ValidationError("a forest needs at least one tree")
        n = len(self.feature_names)
        for tree in self.trees:
            inner = tree.feature[tree.feature >= 0]
            if inner.size and inner.max() >= n:
                raise ValidationError("tree references a feature index beyond feature_names")

    @property
    def key(self) -> tuple[SignalKind, Dimension]:
        return (self.modality, self.dimension)

    def check_features(self, fv: FeatureVector) -> None:
        if fv.modality != self.modality or fv.names != self.feature_names:
            raise ValidationError(
                f"{self.modality.value}/{self.dimension.value} model expects features "
                f"{list(self.feature_names)}, got {fv.modality.value} {list(fv.names)}"
            )

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_FORMAT_VERSION,
            "modality": self.modality.value,
            "dimension": self.dimension.value,
            "feature_names": list(self.feature_names),
            "train_seed": self.train_seed,
            "hyperparams": self.hyperparams.to_dict(),
            "trees": [t.to_nested() for t in self.trees],
        }


def _dataset_arrays(dataset, modality: SignalKind):
    dataset = list(dataset)
    if not dataset:
        raise ValidationError("empty training set")
    names = dataset[0][0].names
    for fv, _ in dataset:
        if fv.modality != modality:
            raise ValidationError(f"{fv.modality.value} vector in a {modality.value} training set")
        if fv.names != names:
            raise ValidationError("inconsistent feature names in training set")
    X = np.array([fv.values for fv, _ in dataset], dtype=np.float64)
    y = np.array([int(BinaryLevel(level)) for _, level in dataset], dtype=np.int64)
    return names, X, y


def train(
    dataset: Iterable[tuple[FeatureVector, BinaryLevel]],
    modality: SignalKind,
    dimension: Dimension,
    hyperparams: Hyperparams = Hyperparams(),
    seed: int = 0,
) -> ForestModel:
    modality, dimension = SignalKind(modality), Dimension(dimension)
    names, X, y = _dataset_arrays(dataset, modality)
    trees = fit_forest(X, y, hyperparams, seed)
    return ForestModel(modality, dimension, names, tuple(trees), int(seed), hyperparams)


def predict(model: ForestModel, features: FeatureVector) -> BinaryLevel:
    model.check_features(features)
    return BinaryLevel(int(forest_predict(list(model.trees), features.as_array()[np.newaxis])[0]))


def predict_many(model: ForestModel, features: Sequence[FeatureVector]) -> np.ndarray:
    for fv in features:
        model.check_features(fv)
    X = np.array([fv.values for fv in features], dtype=np.float64)
    return forest_predict(list(model.trees), X)


def dumps_model(model: ForestModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def save_model(model: ForestModel, path) -> None:
    Path(path).write_text(dumps_model(model), encoding="utf-8")


def loads_model(text: str, where: str = "<model>") -> ForestModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(exc.msg, location=f"{where}:{exc.lineno}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not a forest model file", location=where)
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise IncompatibleModelError(
            f"{where}: model format version {doc.get('version')!r} is not supported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    try:
        names = tuple(doc["feature_names"])
        return ForestModel(
            modality=SignalKind(doc["modality"]),
            dimension=Dimension(doc["dimension"]),
            feature_names=names,
            trees=tuple(Tree.from_nested(t, len(names)) for t in doc["trees"]),
            train_seed=int(doc["train_seed"]),
            hyperparams=Hyperparams(**doc["hyperparams"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model: {exc}", location=where) from None


def load_model(path) -> ForestModel:
    path = Path(path)
    return loads_model(path.read_text(encoding="utf-8"), where=str(path))


def model_filename(modality: SignalKind, dimension: Dimension) -> str:
    return f"{SignalKind(modality).value.lower()}_{Dimension(dimension).value}.json"


def load_model_dir(directory, required: bool = False) -> dict[tuple[SignalKind, Dimension], ForestModel]:
    """Load every ``<modality>_<dimension>.json`` present in ``directory``.

    With ``required=True`` a missing file raises ``FileNotFoundError``
    naming the model.
    """
    directory = Path(directory)
    models = {}
    for kind in SignalKind:
        for dim in Dimension:
            path = directory / model_filename(kind, dim)
            if path.exists():
                models[(kind, dim)] = load_model(path)
            elif required:
                raise FileNotFoundError(f"missing model {kind.value}/{dim.value}: {path}")
    if not models:
        raise FileNotFoundError(f"no model files in {directory}")
    return models
