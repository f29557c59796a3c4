"""Service and wire protocol tests.

Verifies:
- Connect sequence: hello first, then a snapshot, with "v": 1 on every message
- Snapshots carry last_events (events since the previous snapshot)
- Commands apply in arrival order with a strictly increasing per-client
  sequence_number; violations get an error without touching the world
- Snapshots coalesce for a slow client (freshest wins) while events queue
  losslessly in order
- Snapshot ticks observed by one client strictly increase
- GET /healthz and GET /config report the live clock and the running config
- The same protocol works over the line-delimited TCP transport
"""
from __future__ import annotations

import asyncio
import json

import pytest
from fastapi.testclient import TestClient

from motorbench.config import RunConfig, deterministic_overrides
from motorbench.events import CommandKind, PanelCommand
from motorbench.service import BenchService, create_app, serve_tcp

DET = deterministic_overrides(RunConfig())


def make_service(**kw) -> BenchService:
    kw.setdefault("speed", 200.0)
    kw.setdefault("snapshot_every_ticks", 5)
    return BenchService(DET, **kw)


def drain(session) -> list:
    """Pull everything out of a session queue the way a transport writer
    would: dicts pass through, the snapshot marker resolves to the freshest
    pending snapshot."""
    out = []
    while not session.queue.empty():
        item = session.queue.get_nowait()
        if isinstance(item, dict):
            out.append(item)
        else:
            snap = session.take_snapshot()
            if snap is not None:
                out.append(snap)
    return out


def command_json(kind: str, seq: int, **extra) -> str:
    msg = {"type": "command", "kind": kind, "sequence_number": seq}
    msg.update(extra)
    return json.dumps(msg)


def read_until(ws, pred, budget: int = 400) -> dict:
    for _ in range(budget):
        msg = ws.receive_json()
        assert msg["v"] == 1
        if pred(msg):
            return msg
    raise AssertionError("expected message never arrived")


class TestServiceCore:
    def test_construction_guards(self):
        with pytest.raises(ValueError):
            BenchService(DET, speed=0.0)
        with pytest.raises(ValueError):
            BenchService(DET, snapshot_every_ticks=0)

    def test_connect_sends_hello_then_snapshot(self):
        svc = make_service()
        session = svc.connect("ws")
        msgs = drain(session)
        assert [m["type"] for m in msgs] == ["hello", "snapshot"]
        hello, snap = msgs
        assert hello["v"] == 1
        assert hello["server"] == "motorbench"
        assert hello["tick_duration_s"] == DET.tick_duration_s
        assert snap["v"] == 1
        assert snap["data"]["last_events"] == []
        assert snap["data"]["tick"] == 0

    def test_client_ids_are_unique_per_transport(self):
        svc = make_service()
        a = svc.connect("ws")
        b = svc.connect("tcp")
        assert a.client_id == "ws-1"
        assert b.client_id == "tcp-2"
        assert len(svc.clients) == 2
        svc.disconnect(a)
        assert len(svc.clients) == 1

    def test_commands_stamped_with_client_id(self):
        svc = make_service()
        session = svc.connect("ws")
        svc.handle_client_message(session, command_json("power_on", 1))
        assert len(svc._pending_commands) == 1
        assert svc._pending_commands[0].client_id == session.client_id
        assert svc._pending_commands[0].kind is CommandKind.POWER_ON

    def test_malformed_messages_get_errors(self):
        svc = make_service()
        session = svc.connect("ws")
        drain(session)
        svc.handle_client_message(session, "{oops")
        svc.handle_client_message(session, json.dumps({"type": "snapshot"}))
        svc.handle_client_message(session, json.dumps({"type": "command"}))
        msgs = drain(session)
        errors = [m for m in msgs if m["type"] == "error"]
        assert len(errors) == 3
        assert "not valid JSON" in errors[0]["error"]
        assert "command" in errors[1]["error"]
        assert all(m["v"] == 1 for m in errors)
        assert svc._pending_commands == []

    def test_stale_sequence_rejected_without_world_effect(self):
        svc = make_service()
        session = svc.connect("ws")
        drain(session)
        svc.handle_client_message(session, command_json("power_on", 5))
        svc.handle_client_message(session, command_json("power_off", 5))
        svc.handle_client_message(session, command_json("power_off", 4))
        msgs = drain(session)
        errors = [m for m in msgs if m["type"] == "error"]
        assert len(errors) == 2
        assert "strictly increasing" in errors[0]["error"]
        assert len(svc._pending_commands) == 1  # only the first went through
        svc.handle_client_message(session, command_json("power_off", 6))
        assert len(svc._pending_commands) == 2

    def test_sequences_tracked_per_client(self):
        svc = make_service()
        a = svc.connect("ws")
        b = svc.connect("ws")
        svc.handle_client_message(a, command_json("power_on", 1))
        svc.handle_client_message(b, command_json("power_on", 1))
        assert len(svc._pending_commands) == 2


class TestFanOut:
    def test_events_queue_losslessly_in_order(self):
        svc = make_service()
        session = svc.connect("ws")
        drain(session)
        svc.handle_client_message(session, command_json("power_on", 1))
        svc.handle_client_message(session, command_json("start_motor", 2))
        svc.step_once()
        msgs = drain(session)
        events = [m for m in msgs if m["type"] == "event"]
        assert len(events) == 2
        assert events[0]["data"]["data"]["command"]["kind"] == "power_on"
        assert events[1]["data"]["data"]["command"]["kind"] == "start_motor"
        assert all(e["data"]["type"] == "command_accepted" for e in events)

    def test_snapshots_coalesce_for_slow_clients(self):
        svc = make_service(snapshot_every_ticks=1)
        session = svc.connect("ws")
        drain(session)
        for _ in range(7):
            svc.step_once()
        msgs = drain(session)
        snaps = [m for m in msgs if m["type"] == "snapshot"]
        assert len(snaps) == 1  # six offers replaced, one marker
        assert snaps[0]["data"]["tick"] == 7

    def test_snapshot_carries_events_since_previous(self):
        svc = make_service(snapshot_every_ticks=1000)  # no timer snapshots
        session = svc.connect("ws")
        drain(session)
        svc.handle_client_message(session, command_json("power_on", 1))
        svc.step_once()  # event -> snapshot published this tick
        for _ in range(3):
            svc.step_once()  # quiet ticks: no snapshot
        msgs = drain(session)
        snaps = [m for m in msgs if m["type"] == "snapshot"]
        assert len(snaps) == 1
        last = snaps[0]["data"]["last_events"]
        assert len(last) == 1
        assert last[0]["type"] == "command_accepted"
        assert last[0]["data"]["command"]["kind"] == "power_on"

    def test_coalesced_snapshot_still_reports_all_events(self):
        """Snapshots may be replaced; their last_events roll forward so no
        event disappears from the stream."""
        svc = make_service(snapshot_every_ticks=1000)
        session = svc.connect("ws")
        drain(session)
        svc.handle_client_message(session, command_json("power_on", 1))
        svc.step_once()
        svc.handle_client_message(session, command_json("start_motor", 2))
        svc.step_once()
        msgs = drain(session)
        events = [m for m in msgs if m["type"] == "event"]
        assert len(events) == 2  # both ticks' events survive coalescing

    def test_event_log_written_as_ldjson(self, tmp_path):
        path = tmp_path / "bench.ldjson"
        svc = make_service(log_path=path)
        session = svc.connect("ws")
        svc.handle_client_message(session, command_json("power_on", 1))
        svc.step_once()
        svc.close()
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 1
        entry = json.loads(lines[0])
        assert entry["type"] == "command_accepted"
        assert entry["tick"] == 1


class TestHttpAndWebSocket:
    def test_healthz_and_config(self):
        svc = make_service()
        with TestClient(create_app(svc)) as client:
            health = client.get("/healthz").json()
            assert health["status"] == "ok"
            assert health["tick"] >= 0
            assert health["clients"] == 0
            cfg = client.get("/config").json()
            assert cfg == svc.config.to_dict()
            assert cfg["measurement_window_ticks"] == 1

    def test_full_panel_session_over_websocket(self):
        svc = make_service()
        with TestClient(create_app(svc)) as client:
            with client.websocket_connect("/ws") as ws:
                hello = ws.receive_json()
                assert hello["type"] == "hello"
                assert hello["v"] == 1

                first = read_until(ws, lambda m: m["type"] == "snapshot")
                assert "last_events" in first["data"]
                assert first["data"]["panel"]["green_led"] is False

                ws.send_text(command_json("power_on", 1))
                accept = read_until(
                    ws,
                    lambda m: m["type"] == "event"
                    and m["data"]["type"] == "command_accepted",
                )
                assert accept["data"]["data"]["command"]["kind"] == "power_on"
                assert accept["data"]["data"]["command"]["client_id"].startswith(
                    "ws-"
                )

                lit = read_until(
                    ws,
                    lambda m: m["type"] == "snapshot"
                    and m["data"]["panel"]["green_led"],
                )
                assert lit["data"]["panel"]["lcd_line"] == "Workbench Working"

                ws.send_text(command_json("power_off", 1))  # stale sequence
                err = read_until(ws, lambda m: m["type"] == "error")
                assert "strictly increasing" in err["error"]

                later = read_until(ws, lambda m: m["type"] == "snapshot")
                assert later["data"]["panel"]["green_led"] is True  # unharmed

    def test_snapshot_ticks_strictly_increase(self):
        svc = make_service(snapshot_every_ticks=2)
        with TestClient(create_app(svc)) as client:
            with client.websocket_connect("/ws") as ws:
                ticks = []
                while len(ticks) < 6:
                    msg = ws.receive_json()
                    if msg["type"] == "snapshot":
                        ticks.append(msg["data"]["tick"])
                assert ticks == sorted(ticks)
                assert len(set(ticks)) == len(ticks)

    def test_two_clients_both_hear_the_trip(self):
        svc = make_service()
        with TestClient(create_app(svc)) as client:
            with client.websocket_connect("/ws") as a, client.websocket_connect(
                "/ws"
            ) as b:
                for ws in (a, b):
                    read_until(ws, lambda m: m["type"] == "snapshot")
                a.send_text(command_json("power_on", 1))
                a.send_text(command_json("start_motor", 2))
                a.send_text(
                    command_json(
                        "set_fault", 3, fault="overvoltage", enable=True
                    )
                )
                for ws in (a, b):
                    trip = read_until(
                        ws,
                        lambda m: m["type"] == "event"
                        and m["data"]["type"] == "trip",
                        budget=4000,
                    )
                    assert trip["data"]["data"]["fault_kind"] == "overvoltage"
                    assert trip["data"]["data"]["ansi_function"] == "59"


class TestTcpTransport:
    def test_same_protocol_over_tcp(self):
        async def scenario():
            svc = BenchService(DET, speed=500.0, snapshot_every_ticks=5)
            server = await serve_tcp(svc, "127.0.0.1", 0)
            port = server.sockets[0].getsockname()[1]
            tick_task = asyncio.create_task(svc.run_loop())

            async def read_msg(reader):
                line = await asyncio.wait_for(reader.readline(), timeout=10.0)
                assert line, "connection closed early"
                msg = json.loads(line)
                assert msg["v"] == 1
                return msg

            try:
                reader, writer = await asyncio.open_connection("127.0.0.1", port)
                hello = await read_msg(reader)
                assert hello["type"] == "hello"
                snap = await read_msg(reader)
                assert snap["type"] == "snapshot"
                assert "last_events" in snap["data"]

                writer.write((command_json("power_on", 1) + "\n").encode())
                await writer.drain()
                for _ in range(200):
                    msg = await read_msg(reader)
                    if (
                        msg["type"] == "event"
                        and msg["data"]["type"] == "command_accepted"
                    ):
                        break
                else:
                    raise AssertionError("no accept event over TCP")

                writer.write(b"{broken\n")
                await writer.drain()
                for _ in range(200):
                    msg = await read_msg(reader)
                    if msg["type"] == "error":
                        assert "not valid JSON" in msg["error"]
                        break
                else:
                    raise AssertionError("no error reply over TCP")

                writer.close()
                await writer.wait_closed()
            finally:
                tick_task.cancel()
                try:
                    await tick_task
                except asyncio.CancelledError:
                    pass
                server.close()
                await server.wait_closed()
                svc.close()

        asyncio.run(scenario())
