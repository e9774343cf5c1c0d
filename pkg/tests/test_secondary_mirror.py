"""Live-bridge snapshots mirror the headless run of the same inputs.

The browser UI renders snapshots and nothing else, so the interesting
half of the mirror property lives here: a serve-mode input session
(attention key, typed text, exit) must produce led/mode transitions
identical to the equivalent headless script.
"""

import json
import socket
import time

from websockets.sync.client import connect

from tcbsim.bridge import BridgeServer
from tcbsim.cli import resolve_script
from tcbsim.scenario.runner import build_world, run_world
from tcbsim.scenario.script import load_script


def free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def live_led_mode_sequence(inputs) -> list:
    doc = load_script(resolve_script("messaging_basic"))
    doc["events"] = []
    world = build_world(doc)
    server = BridgeServer(world, "messaging_basic", speed=100.0)
    port = free_port()
    server.start(port=port)
    messages = []
    try:
        with connect(f"ws://127.0.0.1:{port}") as client:
            for inp in inputs:
                client.send(json.dumps({"type": "user_input",
                                        "device": "phoneA", "input": inp}))
                time.sleep(0.25)
            deadline = time.monotonic() + 2.0
            while time.monotonic() < deadline:
                try:
                    messages.append(json.loads(client.recv(timeout=0.3)))
                except TimeoutError:
                    break
    finally:
        server.stop()
    seq = []
    for msg in messages:
        if msg["type"] != "state_snapshot":
            continue
        phone = next(d for d in msg["devices"] if d["device"] == "phoneA")
        point = (phone["mode"], phone["led"])
        if not seq or seq[-1] != point:
            seq.append(point)
    return seq


def headless_led_mode_sequence(text: str) -> list:
    doc = load_script(resolve_script("messaging_basic"))
    doc["events"] = [
        {"at_us": 1_000_000, "device": "phoneA", "do": "sak"},
        {"at_us": 2_000_000, "device": "phoneA", "do": "user",
         "op": "type_sensitive", "args": {"text": text}},
        {"at_us": 3_000_000, "device": "phoneA", "do": "user", "op": "exit"},
    ]
    doc["assertions"] = []
    world, _ = run_world(doc)
    seq = [("normal", False)]
    for r in world.trace.records:
        if r["dev"] != "phoneA":
            continue
        if r["event"] == "sak_press":
            seq.append(("secure", not r["suppressed"]))
        elif r["event"] == "sak_re_press":
            seq.append(("secure", True))
        elif r["event"] == "exit_secure":
            seq.append(("normal", False))
    out = []
    for point in seq:
        if not out or out[-1] != point:
            out.append(point)
    return out


def test_recorded_session_mirrors_headless_run():
    text = "hello from the browser"
    live = live_led_mode_sequence([
        {"kind": "sak"},
        {"kind": "text", "value": text},
        {"kind": "exit"},
    ])
    headless = headless_led_mode_sequence(text)
    assert live == headless == [("normal", False), ("secure", True),
                                ("normal", False)]


def test_frontend_fixture_matches_current_bridge():
    """The committed frontend fixture must stay in sync with the bridge:
    its expectation equals what the headless run produces today."""
    fixture = json.load(open("frontend/test/fixtures/recorded_stream.json"))
    expected = [tuple(p) for p in fixture["expected_led_mode"]]
    assert expected == headless_led_mode_sequence("hello from the browser")
    kinds = {m["type"] for m in fixture["messages"]}
    assert {"hello", "state_snapshot", "trace_event"} <= kinds
