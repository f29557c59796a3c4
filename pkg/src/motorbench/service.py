"""Network service: the live bench behind a wire protocol.

One BenchService owns one World and advances it on a wall-clock schedule
(sim time runs at `speed` times real time; when the process falls behind it
catches up by stepping flat out, never by skipping ticks). Clients talk a
small JSON message protocol over either WebSocket (/ws) or a line-delimited
TCP socket:

    server -> client: {"type": "hello", "v": 1, ...}    once, on connect
                      {"type": "snapshot", "v": 1, ...} coalesced, periodic
                      {"type": "event", "v": 1, ...}    every event, in order
                      {"type": "error", "v": 1, ...}    protocol violations
    client -> server: {"type": "command", "kind": ..., "sequence_number": n}

Snapshot payloads carry the world state plus "last_events", the events
published since the previous snapshot went out.

Commands carry a per-client strictly increasing sequence_number; a stale or
repeated number is rejected without touching the world. Events are never
dropped. Snapshots are best-effort state sync: a slow client gets the
freshest one, not a backlog.

HTTP endpoints: GET /healthz (liveness plus clock) and GET /config (the
exact running configuration).
"""
from __future__ import annotations

import asyncio
import json
import logging
from contextlib import asynccontextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import __version__
from .config import RunConfig
from .events import Event, PanelCommand
from .sim import World

log = logging.getLogger("motorbench.service")

PROTOCOL_VERSION = 1

#: Queue marker: "a snapshot is pending"; the payload lives outside the
#: queue so later snapshots can replace unsent ones.
_SNAPSHOT = object()


@dataclass
class ClientSession:
    """One connected control-panel client."""

    client_id: str
    queue: "asyncio.Queue" = field(default_factory=asyncio.Queue)
    last_sequence: int = -1
    pending_snapshot: Optional[dict] = None

    def send_message(self, message: dict) -> None:
        self.queue.put_nowait(message)

    def offer_snapshot(self, snapshot: dict) -> None:
        # replace any unsent snapshot; queue the marker only once
        if self.pending_snapshot is None:
            self.queue.put_nowait(_SNAPSHOT)
        self.pending_snapshot = {"type": "snapshot", "v": 1, "data": snapshot}

    def take_snapshot(self) -> Optional[dict]:
        snap, self.pending_snapshot = self.pending_snapshot, None
        return snap


class BenchService:
    """The world, its clock, its clients, and its event log."""

    def __init__(
        self,
        config: RunConfig,
        speed: float = 1.0,
        snapshot_every_ticks: int = 10,
        log_path: Union[str, Path, None] = None,
    ):
        if speed <= 0.0:
            raise ValueError("speed must be positive")
        if snapshot_every_ticks < 1:
            raise ValueError("snapshot_every_ticks must be >= 1")
        self.config = config
        self.world = World(config)
        self.speed = speed
        self.snapshot_every_ticks = snapshot_every_ticks
        self.clients: Dict[str, ClientSession] = {}
        self._pending_commands: List[PanelCommand] = []
        self._since_snapshot: List[Event] = []
        self._client_counter = 0
        self._running = False
        self._log_file: Optional[TextIO] = None
        if log_path is not None:
            self._log_file = open(log_path, "a", encoding="utf-8")

    # -- clients -------------------------------------------------------------

    def connect(self, transport: str) -> ClientSession:
        self._client_counter += 1
        client_id = f"{transport}-{self._client_counter}"
        session = ClientSession(client_id=client_id)
        self.clients[client_id] = session
        session.send_message(self.hello())
        session.offer_snapshot(self._snapshot_payload(()))
        log.info("client %s connected", client_id)
        return session

    def disconnect(self, session: ClientSession) -> None:
        self.clients.pop(session.client_id, None)
        log.info("client %s disconnected", session.client_id)

    def hello(self) -> dict:
        return {
            "type": "hello",
            "v": PROTOCOL_VERSION,
            "server": "motorbench",
            "server_version": __version__,
            "tick_duration_s": self.config.tick_duration_s,
            "speed": self.speed,
            "tick": self.world.tick_index,
        }

    def _snapshot_payload(self, last_events) -> dict:
        snap = self.world.snapshot()
        snap["last_events"] = [ev.to_dict() for ev in last_events]
        return snap

    def handle_client_message(self, session: ClientSession, raw: str) -> None:
        """Parse, validate, and enqueue one inbound message."""
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as e:
            session.send_message(
                {"type": "error", "v": 1, "error": f"not valid JSON: {e}"}
            )
            return
        if not isinstance(msg, dict) or msg.get("type") != "command":
            session.send_message(
                {
                    "type": "error",
                    "v": 1,
                    "error": "expected a {'type': 'command'} object",
                }
            )
            return
        try:
            command = PanelCommand.from_dict(msg)
        except (KeyError, ValueError, TypeError) as e:
            session.send_message(
                {"type": "error", "v": 1, "error": f"bad command: {e}"}
            )
            return
        if command.sequence_number <= session.last_sequence:
            session.send_message(
                {
                    "type": "error",
                    "v": 1,
                    "error": "sequence_number must be strictly increasing "
                    f"(got {command.sequence_number}, "
                    f"last {session.last_sequence})",
                    "sequence_number": command.sequence_number,
                }
            )
            return
        session.last_sequence = command.sequence_number
        self._pending_commands.append(replace(command, client_id=session.client_id))

    # -- the clock -----------------------------------------------------------

    def step_once(self) -> List[Event]:
        """One world tick: pending commands in arrival order, then physics,
        then fan-out."""
        commands, self._pending_commands = self._pending_commands, []
        events = self.world.step(commands)
        if self._log_file is not None:
            for ev in events:
                self._log_file.write(ev.to_json() + "\n")
            self._log_file.flush()
        for session in self.clients.values():
            for ev in events:
                session.send_message({"type": "event", "v": 1, "data": ev.to_dict()})
        self._since_snapshot.extend(events)
        if events or self.world.tick_index % self.snapshot_every_ticks == 0:
            snapshot = self._snapshot_payload(self._since_snapshot)
            self._since_snapshot = []
            for session in self.clients.values():
                session.offer_snapshot(snapshot)
        return events

    async def run_loop(self) -> None:
        """Advance the world at `speed` times real time until cancelled.

        When a tick overruns its slot the loop steps again immediately: the
        schedule catches up tick by tick, it never jumps the counter.
        """
        loop = asyncio.get_running_loop()
        self._running = True
        dt_wall = self.config.tick_duration_s / self.speed
        t0 = loop.time() - self.world.tick_index * dt_wall
        try:
            while self._running:
                next_due = t0 + (self.world.tick_index + 1) * dt_wall
                delay = next_due - loop.time()
                # behind schedule: still yield so client I/O makes progress
                await asyncio.sleep(delay if delay > 0.0 else 0.0)
                self.step_once()
        finally:
            self._running = False

    def close(self) -> None:
        self._running = False
        if self._log_file is not None:
            self._log_file.close()
            self._log_file = None


# -- WebSocket + HTTP --------------------------------------------------------


def create_app(
    service: BenchService, tcp_listen: Optional[tuple] = None
) -> FastAPI:
    """FastAPI app exposing /ws, /healthz, and /config for one service.
    tcp_listen=(host, port) additionally serves the TCP line protocol for
    the app's lifetime."""

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(service.run_loop())
        tcp_server = None
        if tcp_listen is not None:
            tcp_server = await serve_tcp(service, *tcp_listen)
        try:
            yield
        finally:
            if tcp_server is not None:
                tcp_server.close()
                await tcp_server.wait_closed()
            task.cancel()
            try:
                await task
            except asyncio.CancelledError:
                pass
            service.close()

    app = FastAPI(title="motorbench", version=__version__, lifespan=lifespan)
    app.state.service = service

    @app.get("/healthz")
    async def healthz() -> dict:
        return {
            "status": "ok",
            "tick": service.world.tick_index,
            "sim_time_s": round(service.world.sim_time_s, 9),
            "clients": len(service.clients),
        }

    @app.get("/config")
    async def config() -> dict:
        return service.config.to_dict()

    @app.websocket("/ws")
    async def ws(websocket: WebSocket) -> None:
        await websocket.accept()
        session = service.connect("ws")

        async def writer() -> None:
            while True:
                msg = await session.queue.get()
                if msg is _SNAPSHOT:
                    snap = session.take_snapshot()
                    if snap is None:
                        continue
                    msg = snap
                await websocket.send_text(json.dumps(msg, sort_keys=True))

        writer_task = asyncio.create_task(writer())
        try:
            while True:
                raw = await websocket.receive_text()
                service.handle_client_message(session, raw)
        except WebSocketDisconnect:
            pass
        finally:
            writer_task.cancel()
            service.disconnect(session)

    return app


# -- TCP line protocol ---------------------------------------------------


async def serve_tcp(
    service: BenchService, host: str, port: int
) -> "asyncio.AbstractServer":
    """Same message protocol as /ws, newline-delimited over a plain socket."""

    async def handle(
        reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        session = service.connect("tcp")

        async def pump_out() -> None:
            while True:
                msg = await session.queue.get()
                if msg is _SNAPSHOT:
                    snap = session.take_snapshot()
                    if snap is None:
                        continue
                    msg = snap
                writer.write(json.dumps(msg, sort_keys=True).encode() + b"\n")
                await writer.drain()

        out_task = asyncio.create_task(pump_out())
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                text = line.decode("utf-8", errors="replace").strip()
                if text:
                    service.handle_client_message(session, text)
        except (ConnectionResetError, asyncio.IncompleteReadError):
            pass
        finally:
            out_task.cancel()
            service.disconnect(session)
            writer.close()

    return await asyncio.start_server(handle, host, port)
