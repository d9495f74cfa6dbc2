"""Newline-delimited JSON wire protocol.

One UTF-8 JSON object per line, always with ``type``, ``session`` and ``t``
(stream seconds, non-decreasing within a session).

Client -> server
    ``Hello {mode, seed?, shuffle?}``   opens the session
    ``SpeechStart {}`` / ``SpeechEnd {}``   user utterance boundaries
    ``EmotionEvent {event}``   an engine event record computed elsewhere
    ``Samples {kind, start_time, sample_rate, channels, data}``   raw signal
        for the server-side engine (``data`` is channels x samples)
    ``EndSession {}``

Server -> client
    ``Hello {mode}``  ``StartTopic {index, category}``  ``Prompt {text}``
    ``EmotionEvent {event}``  ``ExpressionCommand {expression}``
    ``ResponseUtterance {text, quadrant_used}``  ``EndSession {}``
    ``Error {code, message}``
"""
from __future__ import annotations

import json
import math

from ..errors import ProtocolError
from .session import EndSession, ExpressionCommand, Prompt, ResponseUtterance, StartTopic

CLIENT_TYPES = {
    "Hello": ("mode",),
    "SpeechStart": (),
    "SpeechEnd": (),
    "EmotionEvent": ("event",),
    "Samples": ("kind", "start_time", "sample_rate", "channels", "data"),
    "EndSession": (),
}
SERVER_TYPES = {
    "Hello", "StartTopic", "Prompt", "EmotionEvent", "ExpressionCommand",
    "ResponseUtterance", "EndSession", "Error",
}


def encode(msg: dict) -> bytes:
    return (json.dumps(msg, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def decode(line: bytes | str) -> dict:
    """Parse and validate one client message."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError:
            raise ProtocolError("message is not valid UTF-8") from None
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc.msg}") from None
    if not isinstance(msg, dict):
        raise ProtocolError("message must be a JSON object")
    kind = msg.get("type")
    if kind not in CLIENT_TYPES:
        raise ProtocolError(f"unknown message type {kind!r}")
    for key in ("session", "t", *CLIENT_TYPES[kind]):
        if key not in msg:
            raise ProtocolError(f"{kind} message lacks {key!r}")
    if not isinstance(msg["session"], str) or not msg["session"]:
        raise ProtocolError("session must be a non-empty string")
    t = msg["t"]
    if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t):
        raise ProtocolError("t must be a finite number")
    return msg


def to_wire(session_id: str, t: float, obj) -> dict:
    """Wire form of a session output object."""
    base = {"session": session_id, "t": t}
    if isinstance(obj, StartTopic):
        return {**base, "type": "StartTopic", "index": obj.index, "category": obj.category.value}
    if isinstance(obj, Prompt):
        return {**base, "type": "Prompt", "text": obj.text}
    if isinstance(obj, ExpressionCommand):
        return {**base, "type": "ExpressionCommand", "expression": obj.expression.value, "t": obj.t}
    if isinstance(obj, ResponseUtterance):
        used = obj.quadrant_used.value if obj.quadrant_used is not None else None
        return {**base, "type": "ResponseUtterance", "text": obj.text, "quadrant_used": used}
    if isinstance(obj, EndSession):
        return {**base, "type": "EndSession"}
    raise TypeError(f"no wire form for {type(obj).__name__}")


def error(session_id: str | None, t: float, message: str, code: str = "protocol") -> dict:
    return {"type": "Error", "session": session_id, "t": t, "code": code, "message": message}
