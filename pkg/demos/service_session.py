#!/usr/bin/env python3
"""Talk to the bench over its wire protocol: start the service in-process,
connect a TCP client, power the panel on, inject an overvoltage, and print
every message until the trip lands."""
import asyncio
import json

from motorbench.config import RunConfig, deterministic_overrides
from motorbench.service import BenchService, serve_tcp


def describe(msg):
    kind = msg["type"]
    if kind == "hello":
        return f"hello from {msg['server']} v{msg['server_version']}, speed {msg['speed']}x"
    if kind == "snapshot":
        panel = msg["data"]["panel"]
        return (f"snapshot tick {msg['data']['tick']}: lcd '{panel['lcd_line']}' "
                f"yellow={panel['yellow_fault_led']} "
                f"last_events={len(msg['data']['last_events'])}")
    if kind == "event":
        ev = msg["data"]
        if ev["type"] == "trip":
            d = ev["data"]
            return (f"event tick {ev['tick']}: TRIP {d['ansi_function']} "
                    f"measured {d['measured_value']} {d['unit']}")
        return f"event tick {ev['tick']}: {ev['type']}"
    return json.dumps(msg)


async def session():
    service = BenchService(
        deterministic_overrides(RunConfig()), speed=50.0, snapshot_every_ticks=25
    )
    server = await serve_tcp(service, "127.0.0.1", 0)
    port = server.sockets[0].getsockname()[1]
    clock = asyncio.create_task(service.run_loop())

    reader, writer = await asyncio.open_connection("127.0.0.1", port)

    async def send(seq, kind, **extra):
        msg = {"type": "command", "kind": kind, "sequence_number": seq}
        msg.update(extra)
        writer.write((json.dumps(msg) + "\n").encode())
        await writer.drain()
        print(f"  -> {kind}")

    await send(1, "power_on")
    await send(2, "start_motor")
    sent_fault = False
    tripped = False
    while not tripped:
        msg = json.loads(await asyncio.wait_for(reader.readline(), timeout=30.0))
        print(f"  <- {describe(msg)}")
        if not sent_fault and msg["type"] == "snapshot":
            if msg["data"]["motor"]["phase"] == "running":
                await send(3, "set_fault", fault="overvoltage", enable=True)
                sent_fault = True
        if msg["type"] == "event" and msg["data"]["type"] == "trip":
            tripped = True

    writer.close()
    await writer.wait_closed()
    clock.cancel()
    try:
        await clock
    except asyncio.CancelledError:
        pass
    server.close()
    await server.wait_closed()
    service.close()


if __name__ == "__main__":
    asyncio.run(session())
