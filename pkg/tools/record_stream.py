#!/usr/bin/env python3
"""Record a live bridge session into the frontend test fixture.

Starts the bridge on messaging_basic (events cleared), performs the
canonical input session (attention key, typed text, exit), captures
every server message, and derives the expected led/mode sequence from a
headless run of the equivalent script. Run from the repo root:

    python tools/record_stream.py > frontend/test/fixtures/recorded_stream.json
"""

import json
import socket
import sys
import time

from websockets.sync.client import connect

from tcbsim.bridge import BridgeServer
from tcbsim.cli import resolve_script
from tcbsim.scenario.runner import build_world, run_world
from tcbsim.scenario.script import load_script

INPUTS = [
    {"kind": "sak"},
    {"kind": "text", "value": "hello from the browser"},
    {"kind": "exit"},
]


def headless_led_mode(doc) -> list:
    equivalent = dict(doc)
    equivalent["events"] = [
        {"at_us": 1_000_000, "device": "phoneA", "do": "sak"},
        {"at_us": 2_000_000, "device": "phoneA", "do": "user",
         "op": "type_sensitive",
         "args": {"text": "hello from the browser"}},
        {"at_us": 3_000_000, "device": "phoneA", "do": "user", "op": "exit"},
    ]
    equivalent["assertions"] = []
    world, _ = run_world(equivalent)
    seq = [["normal", False]]
    for r in world.trace.records:
        if r["dev"] != "phoneA":
            continue
        if r["event"] == "sak_press":
            seq.append(["secure", not r["suppressed"]])
        elif r["event"] == "sak_re_press":
            seq.append(["secure", True])
        elif r["event"] == "exit_secure":
            seq.append(["normal", False])
    out = []
    for point in seq:
        if not out or out[-1] != point:
            out.append(point)
    return out


def main() -> None:
    doc = load_script(resolve_script("messaging_basic"))
    doc["events"] = []
    world = build_world(doc)
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    server = BridgeServer(world, "messaging_basic", speed=50.0)
    server.start(port=port)
    messages = []
    try:
        with connect(f"ws://127.0.0.1:{port}") as client:
            for inp in INPUTS:
                client.send(json.dumps({"type": "user_input",
                                        "device": "phoneA", "input": inp}))
                time.sleep(0.3)
            deadline = time.monotonic() + 2.0
            while time.monotonic() < deadline:
                try:
                    raw = client.recv(timeout=0.3)
                except TimeoutError:
                    break
                msg = json.loads(raw)
                if msg["type"] != "clock":  # keep the fixture compact
                    messages.append(msg)
    finally:
        server.stop()

    fixture = {
        "inputs": INPUTS,
        "messages": messages,
        "expected_led_mode": headless_led_mode(
            load_script(resolve_script("messaging_basic"))),
    }
    json.dump(fixture, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
