"""Dialog orchestration for an empathetic (or neutral) conversational agent."""
from .protocol import decode, encode
from .responses import ResponseDB, load_response_db, parse_response_db
from .server import Connection, ServerConfig, serve, start_server
from .session import (
    EndSession,
    ExpressionCommand,
    Mode,
    Phase,
    Prompt,
    ResponseUtterance,
    Session,
    StartTopic,
    topic_order,
)

__all__ = [
    "Connection",
    "EndSession",
    "ExpressionCommand",
    "Mode",
    "Phase",
    "Prompt",
    "ResponseDB",
    "ResponseUtterance",
    "ServerConfig",
    "Session",
    "StartTopic",
    "decode",
    "encode",
    "load_response_db",
    "parse_response_db",
    "serve",
    "start_server",
    "topic_order",
]
