"""Debug-session wire protocol (see PROTOCOL.md).

Newline-delimited JSON frames over TCP or stdio; each WebSocket text message
carries one identical frame for browser clients. One session per connection,
requests processed strictly in order; long `continue` runs emit heartbeat
events while the state machine reports `running`.
"""
from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Awaitable, Callable

from .debugger import DebugSession
from .errors import CursorExhausted, QdbError, SourceError
from .qasm import load_source
from .qasm.elaborate import parse_directive_text

PROTOCOL_VERSION = 1
CAPABILITIES = [
    "load",
    "step",
    "continue",
    "set-breakpoint",
    "inspect",
    "assert",
    "separability",
    "clone",
    "tomo",
    "set-mode",
]
_CONTINUE_CHUNK = 64

Send = Callable[[dict], Awaitable[None]]


def _dumps(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


class ProtocolSession:
    """State machine for one connection: created -> loaded -> paused/running
    -> finished. Malformed frames produce an error with id null and leave
    the session untouched."""

    def __init__(self, send: Send, heartbeat_interval: float = 5.0, include_path=None):
        self._send = send
        self.heartbeat_interval = heartbeat_interval
        self.include_path = include_path
        self.state = "created"
        self.session: DebugSession | None = None
        self.last_id = 0

    async def _event(self, event: str, **payload) -> None:
        await self._send({"type": "event", "event": event, **payload})

    async def _result(self, msg_id: int, result: dict) -> None:
        await self._send({"id": msg_id, "type": "result", "result": result})

    async def _error(self, msg_id, code: str, message: str) -> None:
        await self._send(
            {"id": msg_id, "type": "error", "error": {"code": code, "message": message}}
        )

    async def handle_line(self, line: str) -> None:
        line = line.strip()
        if not line:
            return
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            await self._error(None, "malformed", f"invalid JSON: {exc}")
            return
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            await self._error(None, "malformed", "frame must be an object with a string type")
            return
        msg_id = msg.get("id")
        if not isinstance(msg_id, int) or isinstance(msg_id, bool) or msg_id <= self.last_id:
            await self._error(
                msg_id if isinstance(msg_id, int) and not isinstance(msg_id, bool) else None,
                "protocol-violation",
                "request id must be a monotonically increasing integer",
            )
            return
        self.last_id = msg_id
        handler = getattr(self, "_handle_" + msg["type"].replace("-", "_"), None)
        if handler is None:
            await self._error(msg_id, "unknown-type", f"unknown message type {msg['type']!r}")
            return
        try:
            await handler(msg_id, msg)
        except SourceError as exc:
            await self._error(msg_id, "source-error", str(exc))
        except QdbError as exc:
            await self._error(msg_id, type(exc).__name__, str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            await self._error(msg_id, "bad-payload", f"{type(exc).__name__}: {exc}")

    def _require_loaded(self) -> DebugSession:
        if self.session is None:
            raise QdbError("no program loaded (state: created)")
        return self.session

    # --- handlers ------------------------------------------------------------

    async def _handle_hello(self, msg_id: int, msg: dict) -> None:
        await self._result(
            msg_id,
            {"protocol": PROTOCOL_VERSION, "capabilities": CAPABILITIES, "state": self.state},
        )

    async def _handle_load(self, msg_id: int, msg: dict) -> None:
        if "source" in msg:
            source = msg["source"]
        elif "path" in msg:
            source = Path(msg["path"]).read_text(encoding="utf-8")
        else:
            raise ValueError('load needs "source" or "path"')
        ir = load_source(source, self.include_path)
        kwargs = {}
        if "seed" in msg:
            kwargs["seed"] = int(msg["seed"])
        if "mode" in msg:
            kwargs["mode"] = msg["mode"]
        if "shot_budget" in msg:
            kwargs["shot_budget"] = int(msg["shot_budget"])
        self.session = DebugSession(ir, source=source, **kwargs)
        self.state = "paused"
        listing = [
            {"index": i, "kind": ins.kind, "line": ref.span.line, "source": ref.text}
            for i, (ins, ref) in enumerate(zip(ir.instructions, ir.source_map))
        ]
        await self._result(
            msg_id,
            {
                "n_qubits": ir.n_qubits,
                "n_clbits": ir.n_clbits,
                "source": source,
                "mode": self.session.mode,
                "seed": self.session.seed,
                "instructions": listing,
                "directives": [d.to_json() for d in ir.all_directives()],
                "breakpoints": sorted(self.session.breakpoints),
            },
        )

    async def _handle_step(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        if session.cursor.finished:
            raise CursorExhausted("cursor is past the last instruction")
        event, assertions = session.step()
        self.state = "finished" if session.cursor.finished else "paused"
        for assertion in assertions:
            await self._event("assertion", result=assertion.to_json())
        await self._result(
            msg_id,
            {
                "event": event.to_json() if event else None,
                "position": session.cursor.position,
                "finished": session.cursor.finished,
                "assertions": [a.to_json() for a in assertions],
            },
        )

    async def _handle_continue(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        self.state = "running"
        heartbeat = asyncio.create_task(self._heartbeat())
        try:
            info = None
            while info is None:
                info = session.continue_(max_steps=_CONTINUE_CHUNK)
                if info is None:
                    await asyncio.sleep(0)
        finally:
            heartbeat.cancel()
        self.state = "finished" if session.cursor.finished else "paused"
        for assertion in info.assertions:
            await self._event("assertion", result=assertion.to_json())
        await self._event(
            "finished" if info.reason == "end" else "paused",
            reason=info.reason,
            position=info.position,
        )
        await self._result(
            msg_id,
            {
                "reason": info.reason,
                "position": info.position,
                "finished": session.cursor.finished,
                "assertions": [a.to_json() for a in info.assertions],
            },
        )

    async def _heartbeat(self) -> None:
        while True:
            await asyncio.sleep(self.heartbeat_interval)
            await self._event("heartbeat", state=self.state)

    async def _handle_set_breakpoint(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        index = session.set_breakpoint(line=msg.get("line"), index=msg.get("index"))
        await self._result(msg_id, {"index": index, "breakpoints": sorted(session.breakpoints)})

    async def _handle_inspect(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        await self._result(msg_id, session.inspect_state())

    async def _handle_assert(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        directive = parse_directive_text(msg["directive"], session.ir.qregs, session.ir.cregs)
        result = session.evaluate_assertion(directive)
        await self._result(msg_id, result.to_json())

    async def _handle_separability(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        report = session.separability_report(
            msg.get("qubits"), bool(msg.get("bipartitions", False))
        )
        await self._result(msg_id, report.to_json())

    async def _handle_clone(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        kind = msg.get("kind")
        if kind == "exact":
            report = session.exact_clone_orthogonal(msg["source"], msg["blank"])
        elif kind == "universal":
            report = session.universal_clone(int(msg["source"]), msg["blank"])
        else:
            raise ValueError('clone kind must be "exact" or "universal"')
        await self._result(msg_id, report.to_json())

    async def _handle_tomo(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        shots = msg.get("shots")
        result = session.tomography(msg["qubits"], None if shots is None else int(shots))
        await self._result(msg_id, result.to_json())

    async def _handle_set_mode(self, msg_id: int, msg: dict) -> None:
        session = self._require_loaded()
        session.set_mode(msg["mode"])
        await self._result(msg_id, {"mode": session.mode})


# --- transports ---------------------------------------------------------------------


async def _serve_stream(
    reader: asyncio.StreamReader,
    writer: asyncio.StreamWriter,
    heartbeat_interval: float,
    include_path=None,
) -> None:
    lock = asyncio.Lock()

    async def send(payload: dict) -> None:
        async with lock:
            writer.write((_dumps(payload) + "\n").encode("utf-8"))
            await writer.drain()

    session = ProtocolSession(send, heartbeat_interval, include_path)
    try:
        while True:
            line = await reader.readline()
            if not line:
                break
            await session.handle_line(line.decode("utf-8", errors="replace"))
    except ConnectionResetError:
        pass
    finally:
        try:
            writer.close()
            await writer.wait_closed()
        except (ConnectionResetError, BrokenPipeError):
            pass


async def serve_tcp(
    host: str = "127.0.0.1",
    port: int = 7459,
    heartbeat_interval: float = 5.0,
    include_path=None,
    ready: "asyncio.Event | None" = None,
) -> None:
    """Listen on TCP; one protocol session per connection."""

    async def handler(reader, writer):
        await _serve_stream(reader, writer, heartbeat_interval, include_path)

    server = await asyncio.start_server(handler, host, port)
    if ready is not None:
        ready.set()
    async with server:
        await server.serve_forever()


async def serve_stdio(heartbeat_interval: float = 5.0, include_path=None) -> None:
    """Speak the protocol over stdin/stdout (frames identical to TCP)."""
    loop = asyncio.get_running_loop()
    reader = asyncio.StreamReader()
    await loop.connect_read_pipe(lambda: asyncio.StreamReaderProtocol(reader), sys.stdin)
    transport, protocol = await loop.connect_write_pipe(
        asyncio.streams.FlowControlMixin, sys.stdout
    )
    writer = asyncio.StreamWriter(transport, protocol, None, loop)
    await _serve_stream(reader, writer, heartbeat_interval, include_path)


async def serve_websocket(
    host: str = "127.0.0.1",
    port: int = 7460,
    heartbeat_interval: float = 5.0,
    include_path=None,
    ready: "asyncio.Event | None" = None,
) -> None:
    """Same protocol for browsers: one frame per WebSocket text message."""
    try:
        from websockets.asyncio.server import serve
    except ImportError as exc:  # pragma: no cover
        raise QdbError(
            "WebSocket transport needs the 'websockets' package (pip install qdb[ws])"
        ) from exc

    async def handler(websocket):
        async def send(payload: dict) -> None:
            await websocket.send(_dumps(payload))

        session = ProtocolSession(send, heartbeat_interval, include_path)
        async for message in websocket:
            if isinstance(message, bytes):
                message = message.decode("utf-8", errors="replace")
            await session.handle_line(message)

    server = await serve(handler, host, port)
    if ready is not None:
        ready.set()
    async with server:
        await asyncio.get_running_loop().create_future()  # run until cancelled
