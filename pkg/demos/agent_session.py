"""
Talking to the orchestration server
===================================

Start the server in-process, then play a client that supplies speech
boundaries and engine events for two topics before hanging up.
"""

import asyncio
import json

from empathic.engine import EmotionEvent
from empathic.emotion_model import ModalityPrediction
from empathic.fusion import fuse
from empathic.orchestrator import ServerConfig, encode, start_server
from empathic.signals import SignalKind


def emotion(session, arousal, valence, t):
    state = fuse([ModalityPrediction(k, arousal, valence) for k in SignalKind], t=t)
    return {"type": "EmotionEvent", "session": session, "t": t,
            "event": EmotionEvent(state, (t - 20, t), ()).to_record()}


def script(session):
    yield {"type": "Hello", "session": session, "t": 0.0, "mode": "empathetic"}
    yield {"type": "SpeechStart", "session": session, "t": 1.0}
    yield emotion(session, 1, 1, 2.0)
    yield emotion(session, 1, 1, 7.0)
    yield emotion(session, -1, -1, 12.0)
    yield {"type": "SpeechEnd", "session": session, "t": 13.0}
    yield {"type": "SpeechStart", "session": session, "t": 20.0}
    yield {"type": "SpeechEnd", "session": session, "t": 25.0}
    yield {"type": "EndSession", "session": session, "t": 30.0}


async def main():
    server = await start_server(ServerConfig(seed=0), "127.0.0.1", 0)
    port = server.sockets[0].getsockname()[1]
    async with server:
        reader, writer = await asyncio.open_connection("127.0.0.1", port)
        for msg in script("demo"):
            writer.write(encode(msg))
        await writer.drain()
        while line := await reader.readline():
            reply = json.loads(line)
            detail = {k: v for k, v in reply.items() if k not in ("type", "session", "event")}
            print(f"{reply['type']:<18} {detail}")
            if reply["type"] == "EndSession":
                break
        writer.close()


asyncio.run(main())
