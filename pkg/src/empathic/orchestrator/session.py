"""Dialog state machine for one agent session.

Phases run ``Idle -> Prompting -> Listening -> Responding`` and then either
back to ``Prompting`` for the next of eight topics or on to ``Done``.
Every operation validates first and only then mutates, so a rejected
message leaves the session untouched.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ProtocolError
from ..fusion import EmotionState, Expression, majority_emotion
from ..signals import Quadrant
from .responses import ResponseDB

N_TOPICS = 8
FALLBACK_QUADRANT = Quadrant.LAHV
DEFAULT_TOPIC_ORDER = (
    Quadrant.HAHV, Quadrant.HALV, Quadrant.LAHV, Quadrant.LALV,
    Quadrant.HAHV, Quadrant.HALV, Quadrant.LAHV, Quadrant.LALV,
)


class Mode(str, enum.Enum):
    NEUTRAL = "neutral"
    EMPATHETIC = "empathetic"


class Phase(str, enum.Enum):
    IDLE = "Idle"
    PROMPTING = "Prompting"
    LISTENING = "Listening"
    RESPONDING = "Responding"
    DONE = "Done"


@dataclass(frozen=True)
class StartTopic:
    index: int
    category: Quadrant


@dataclass(frozen=True)
class Prompt:
    text: str


@dataclass(frozen=True)
class ExpressionCommand:
    expression: Expression
    t: float


@dataclass(frozen=True)
class ResponseUtterance:
    text: str
    quadrant_used: Quadrant | None


@dataclass(frozen=True)
class EndSession:
    pass


def topic_order(seed: int | None = None) -> tuple[Quadrant, ...]:
    """Two topics per category; shuffled deterministically when ``seed`` is given."""
    if seed is None:
        return DEFAULT_TOPIC_ORDER
    perm = np.random.default_rng([seed, 8]).permutation(N_TOPICS)
    return tuple(DEFAULT_TOPIC_ORDER[i] for i in perm)


@dataclass
class Session:
    session_id: str
    mode: Mode
    responses: ResponseDB
    seed: int = 0
    topics: tuple[Quadrant, ...] = DEFAULT_TOPIC_ORDER
    phase: Phase = Phase.IDLE
    topic_index: int = -1
    speech_emotions: list = field(default_factory=list)
    latest_state: EmotionState | None = None
    t: float = 0.0
    _cursor: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if len(self.topics) != N_TOPICS:
            raise ValueError(f"a session runs exactly {N_TOPICS} topics")

    @property
    def topic_category(self) -> Quadrant | None:
        return self.topics[self.topic_index] if 0 <= self.topic_index < N_TOPICS else None

    def _require(self, *phases: Phase) -> None:
        if self.phase not in phases:
            allowed = "/".join(p.value for p in phases)
            raise ProtocolError(f"illegal in phase {self.phase.value} (needs {allowed})")

    def _check_time(self, t: float) -> float:
        t = float(t)
        if t < self.t:
            raise ProtocolError(f"stream time went backwards ({t} < {self.t})")
        return t

    def _pick(self, key: tuple[str, ...]) -> str:
        """Round-robin through a response list from a seeded starting point."""
        options = self.responses.lookup(key)
        if key not in self._cursor:
            slot = self.responses.keys().index(key)
            self._cursor[key] = int(np.random.default_rng([self.seed, slot]).integers(len(options)))
        i = self._cursor[key]
        self._cursor[key] = i + 1
        return options[i % len(options)]

    # -- operations ----------------------------------------------------------

    def advance_topic(self) -> StartTopic | EndSession:
        self._require(Phase.IDLE, Phase.RESPONDING)
        if self.topic_index + 1 >= N_TOPICS:
            self.phase = Phase.DONE
            return EndSession()
        self.topic_index += 1
        self.phase = Phase.PROMPTING
        return StartTopic(self.topic_index, self.topics[self.topic_index])

    def prompt(self) -> Prompt:
        self._require(Phase.PROMPTING)
        return Prompt(self.responses.prompt(self.topic_category, self.topic_index // 4))

    def on_emotion_event(self, state: EmotionState, t: float | None = None) -> ExpressionCommand | None:
        """Mirror the detected state (empathetic mode) and collect it while listening."""
        if self.phase is Phase.DONE:
            raise ProtocolError("session has ended")
        t = self._check_time(state.timestamp if t is None else t)
        self.t = t
        self.latest_state = state
        if self.phase is Phase.LISTENING:
            self.speech_emotions.append(state)
        if self.mode is Mode.NEUTRAL:
            return None
        return ExpressionCommand(state.expression, t)

    def on_speech_start(self, t: float) -> None:
        self._require(Phase.PROMPTING)
        self.t = self._check_time(t)
        self.speech_emotions = []
        self.phase = Phase.LISTENING

    def on_speech_end(self, t: float) -> ResponseUtterance:
        self._require(Phase.LISTENING)
        t = self._check_time(t)
        topic = self.topic_category
        if self.mode is Mode.NEUTRAL:
            reply = ResponseUtterance(self._pick(("neutral", topic.value)), None)
        else:
            if self.speech_emotions:
                quadrant = majority_emotion(self.speech_emotions)
            elif self.latest_state is not None:
                quadrant = self.latest_state.quadrant
            else:
                quadrant = FALLBACK_QUADRANT
            reply = ResponseUtterance(self._pick((topic.value, quadrant.value)), quadrant)
        self.t = t
        self.phase = Phase.RESPONDING
        return reply
