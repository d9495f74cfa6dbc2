"""Orchestration service: one TCP connection per session.

:class:`Connection` holds the protocol logic and is transport-free; the
asyncio server only frames lines.  Each connection processes its messages
strictly in arrival order, and server-side engine ticks run inline in that
same order, so a session's state is never touched concurrently.
"""
from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Mapping

from ..config import EngineConfig
from ..engine import EmotionEvent, Engine
from ..errors import EmpathicError, ProtocolError
from ..signals import SampleBlock, SignalKind
from . import protocol
from .responses import ResponseDB, load_response_db
from .session import EndSession, Mode, Phase, Session, topic_order

log = logging.getLogger(__name__)


@dataclass
class ServerConfig:
    responses: ResponseDB = field(default_factory=load_response_db)
    default_mode: Mode = Mode.EMPATHETIC
    seed: int = 0
    models: Mapping | None = None
    engine_config: EngineConfig = field(default_factory=EngineConfig)


class Connection:
    def __init__(self, config: ServerConfig, registry: set | None = None):
        self.config = config
        self.registry = registry if registry is not None else set()
        self.session: Session | None = None
        self.engine: Engine | None = None
        self.closed = False

    def _t(self) -> float:
        return self.session.t if self.session else 0.0

    def _sid(self):
        return self.session.session_id if self.session else None

    def handle_line(self, line: bytes | str) -> list[dict]:
        try:
            msg = protocol.decode(line)
        except ProtocolError as exc:
            return [protocol.error(self._sid(), self._t(), str(exc))]
        return self.handle(msg)

    def handle(self, msg: dict) -> list[dict]:
        try:
            return self._dispatch(msg)
        except ProtocolError as exc:
            return [protocol.error(self._sid(), self._t(), str(exc))]
        except EmpathicError as exc:
            return [protocol.error(self._sid(), self._t(), str(exc), code="validation")]

    def _dispatch(self, msg: dict) -> list[dict]:
        kind = msg["type"]
        if kind == "Hello":
            return self._hello(msg)
        s = self.session
        if s is None or msg["session"] != s.session_id:
            raise ProtocolError(f"unknown session {msg['session']!r}")
        if s.phase is Phase.DONE:
            raise ProtocolError("session has ended")
        t = float(msg["t"])
        if t < s.t:
            raise ProtocolError(f"stream time went backwards ({t} < {s.t})")
        sid = s.session_id
        if kind == "SpeechStart":
            s.on_speech_start(t)
            return []
        if kind == "SpeechEnd":
            reply = s.on_speech_end(t)
            return [protocol.to_wire(sid, t, reply), *self._advance()]
        if kind == "EmotionEvent":
            try:
                event = EmotionEvent.from_record(msg["event"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ProtocolError(f"bad EmotionEvent payload: {exc}") from None
            return self._on_event(event, t)
        if kind == "Samples":
            return self._samples(msg, t)
        if kind == "EndSession":
            s.t = t
            s.phase = Phase.DONE
            self.close()
            return [protocol.to_wire(sid, t, EndSession())]
        raise ProtocolError(f"unhandled message type {kind!r}")

    def _hello(self, msg: dict) -> list[dict]:
        if self.session is not None:
            raise ProtocolError("session already open on this connection")
        sid = msg["session"]
        if sid in self.registry:
            raise ProtocolError(f"session {sid!r} is already active")
        try:
            mode = Mode(msg.get("mode") or self.config.default_mode)
        except ValueError:
            raise ProtocolError(f"unknown mode {msg.get('mode')!r}") from None
        seed = msg.get("seed", self.config.seed)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ProtocolError("seed must be an integer")
        topics = topic_order(seed if msg.get("shuffle") else None)
        self.session = Session(sid, mode, self.config.responses, seed=seed, topics=topics, t=float(msg["t"]))
        self.registry.add(sid)
        if self.config.models:
            self.engine = Engine(self.config.models, self.config.engine_config)
        return [{"type": "Hello", "session": sid, "t": self.session.t, "mode": mode.value}, *self._advance()]

    def _advance(self) -> list[dict]:
        s = self.session
        nxt = s.advance_topic()
        out = [protocol.to_wire(s.session_id, s.t, nxt)]
        if isinstance(nxt, EndSession):
            self.close()
        else:
            out.append(protocol.to_wire(s.session_id, s.t, s.prompt()))
        return out

    def _on_event(self, event: EmotionEvent, t: float) -> list[dict]:
        cmd = self.session.on_emotion_event(event.state, t)
        return [] if cmd is None else [protocol.to_wire(self.session.session_id, t, cmd)]

    def _samples(self, msg: dict, t: float) -> list[dict]:
        if self.engine is None:
            raise ProtocolError("server has no models loaded; send EmotionEvent messages instead")
        try:
            block = SampleBlock(
                SignalKind(msg["kind"]), msg["start_time"], msg["sample_rate"], msg["channels"], msg["data"]
            )
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"bad Samples payload: {exc}") from None
        self.engine.ingest(block)
        out = []
        for ev in self.engine.pump():
            out.append({"type": "EmotionEvent", "session": self.session.session_id, "t": t, "event": ev.to_record()})
            out.extend(self._on_event(ev, t))
        self.session.t = t
        return out

    def close(self) -> None:
        if not self.closed and self.session is not None:
            self.registry.discard(self.session.session_id)
        self.closed = True


async def _serve_connection(reader, writer, config: ServerConfig, registry: set) -> None:
    conn = Connection(config, registry)
    peer = writer.get_extra_info("peername")
    log.info("connection from %s", peer)
    try:
        while not conn.closed:
            line = await reader.readline()
            if not line:
                break
            if not line.strip():
                continue
            for out in conn.handle_line(line):
                writer.write(protocol.encode(out))
            await writer.drain()
    finally:
        conn.close()
        writer.close()
        try:
            await writer.wait_closed()
        except ConnectionError:
            pass


async def start_server(config: ServerConfig, host: str = "127.0.0.1", port: int = 8765) -> asyncio.AbstractServer:
    registry: set = set()
    return await asyncio.start_server(
        lambda r, w: _serve_connection(r, w, config, registry), host, port, limit=2**24
    )


def serve(config: ServerConfig, host: str = "127.0.0.1", port: int = 8765) -> None:
    async def main():
        server = await start_server(config, host, port)
        addrs = ", ".join(str(sock.getsockname()) for sock in server.sockets)
        log.info("orchestrator listening on %s", addrs)
        print(f"listening on {addrs}", flush=True)
        async with server:
            await server.serve_forever()

    try:
        asyncio.run(main())
    except KeyboardInterrupt:
        pass
