"""Live bridge: the simulator behind a local WebSocket.

Serve mode drives the scenario's virtual clock at a configurable ratio
to wall time and lets humans inject inputs; every connected client
receives the identical message stream. One JSON document per WebSocket
frame:

  server -> client
    {"type": "hello", "devices": [...], "scenario": name}
    {"type": "state_snapshot", "seq": n, "time_us": t, "devices": [...]}
    {"type": "trace_event", "record": {...}}
    {"type": "clock", "time_us": t}
  client -> server
    {"type": "user_input", "device": id,
     "input": {"kind": "sak" | "touch" | "text" | "exit",
               "x"?: int, "y"?: int, "value"?: str}}

Device snapshots carry mode, led, pending-request labels, sensor
policies and the last training feedback; the browser client renders them
and computes no security state of its own.

The simulator stays the single-threaded owner of all state: socket
threads only enqueue inputs through the loop's injection queue.
"""

from __future__ import annotations

import json
import threading
import time

from tcbsim.errors import PortInUse, TcbError
from tcbsim.kernel import (
    KIND_REQUEST_DATA,
    LED_ON,
    MODE_SECURE,
    SENSOR_KIND_NAMES,
)
from tcbsim.scenario.runner import build_world
from tcbsim.scenario.script import load_script

_TICK_WALL_S = 0.025


def device_snapshot(device) -> dict:
    kernel = device.kernel
    pending = [{"request_id": r.request_id, "kind": r.kind,
                "peer": r.peer_name, "groups": list(r.peer_groups)}
               for r in kernel.pending]
    sensors = {name: {"policy": SENSOR_KIND_NAMES[kind], "until": until}
               for name, (kind, until) in sorted(kernel.policies.items())}
    session = kernel.session
    return {
        "device": device.device_id,
        "user": device.identity.name,
        "mode": "secure" if kernel.mode == MODE_SECURE else "normal",
        "led": kernel.led == LED_ON,
        "pending": pending,
        "sensors": sensors,
        "feedback_count": kernel.feedback_count,
        "suppressed_session": bool(session and session.suppressed
                                   and not session.re_pressed),
    }


class BridgeServer:
    def __init__(self, world, scenario_name: str = "", speed: float = 1.0):
        self.world = world
        self.scenario_name = scenario_name
        self.speed = speed
        self._clients: set = set()
        self._clients_lock = threading.Lock()
        self._seq = 0
        self._stop = threading.Event()
        self._last_semantic = ""
        self._trace_cursor = 0
        self._server = None
        self._sim_thread = None

    # ---- fan-out ----

    def _broadcast(self, message: dict) -> None:
        data = json.dumps(message, sort_keys=True)
        with self._clients_lock:
            clients = list(self._clients)
        for ws in clients:
            try:
                ws.send(data)
            except Exception:
                self._drop(ws)

    def _drop(self, ws) -> None:
        with self._clients_lock:
            self._clients.discard(ws)

    def _snapshot_message(self) -> dict:
        return {"type": "state_snapshot", "seq": self._seq,
                "time_us": self.world.loop.now,
                "devices": [device_snapshot(d)
                            for d in self.world.device_list()]}

    def _publish_progress(self) -> None:
        records = self.world.trace.records
        for r in records[self._trace_cursor:]:
            self._broadcast({"type": "trace_event", "record": r})
        self._trace_cursor = len(records)
        snap = self._snapshot_message()
        semantic = json.dumps([d for d in snap["devices"]], sort_keys=True)
        if semantic != self._last_semantic:
            self._seq += 1
            snap["seq"] = self._seq
            self._last_semantic = semantic
            self._broadcast(snap)

    # ---- simulation thread ----

    def _sim_loop(self) -> None:
        last_wall = time.monotonic()
        last_clock_wall = last_wall
        while not self._stop.is_set():
            time.sleep(_TICK_WALL_S)
            now_wall = time.monotonic()
            dt_us = int((now_wall - last_wall) * self.speed * 1_000_000)
            last_wall = now_wall
            target = self.world.loop.now + max(dt_us, 0)
            self.world.loop.advance_to(target)
            self._publish_progress()
            if now_wall - last_clock_wall >= 1.0:
                last_clock_wall = now_wall
                self._broadcast({"type": "clock", "time_us": target})

    # ---- input handling (runs on the sim thread via injection) ----

    def _apply_input(self, device_id: str, inp: dict):
        def apply(now):
            device = self.world.devices.get(device_id)
            if device is None:
                return
            kind = inp.get("kind")
            if kind == "sak":
                device.press_sak()
            elif kind == "exit":
                if device.kernel.mode == MODE_SECURE:
                    from tcbsim.kernel import CAUSE_EXIT_BUTTON
                    device.kernel.exit_secure(now, CAUSE_EXIT_BUTTON)
            elif kind == "touch":
                device.emit_interrupt("touch", {"x": inp.get("x", 0),
                                                "y": inp.get("y", 0)})
            elif kind == "text":
                self._apply_text(device, now, str(inp.get("value", "")))
        return apply

    def _apply_text(self, device, now: int, value: str) -> None:
        if device.kernel.mode != MODE_SECURE:
            for ch in value:  # normal-world typing: ordinary touch events
                device.emit_interrupt("touch", {"char": ch})
            return
        if not device.kernel.user_action(now, "type"):
            return
        for r in device.kernel.pending:
            if r.kind == KIND_REQUEST_DATA:
                try:
                    device.gateway.complete_request_data(
                        r.request_id, ("text", value))
                except TcbError:
                    pass
                return
        labeled = device.secure_text_input(value)
        device.trace("kernel", "secure_note", {"chars": len(labeled.data)})

    # ---- websocket side ----

    def _handler(self, ws) -> None:
        with self._clients_lock:
            self._clients.add(ws)
        try:
            ws.send(json.dumps({
                "type": "hello", "scenario": self.scenario_name,
                "speed": self.speed,
                "devices": sorted(self.world.devices)}, sort_keys=True))
            ws.send(json.dumps(self._snapshot_message(), sort_keys=True))
            for raw in ws:
                try:
                    msg = json.loads(raw)
                except (TypeError, ValueError):
                    continue
                if msg.get("type") != "user_input":
                    continue
                device_id = msg.get("device") or next(
                    iter(sorted(self.world.devices)))
                self.world.loop.inject(
                    self._apply_input(device_id, msg.get("input", {})))
        finally:
            self._drop(ws)

    # ---- lifecycle ----

    def start(self, host: str = "127.0.0.1", port: int = 8765):
        from websockets.sync.server import serve as ws_serve
        try:
            self._server = ws_serve(self._handler, host, port)
        except OSError as e:
            raise PortInUse(f"{host}:{port}: {e}") from e
        self._sim_thread = threading.Thread(target=self._sim_loop,
                                            daemon=True)
        self._sim_thread.start()
        self._srv_thread = threading.Thread(
            target=self._server.serve_forever, daemon=True)
        self._srv_thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._server is not None:
            self._server.shutdown()
        if self._sim_thread is not None:
            self._sim_thread.join(timeout=2)


DEFAULT_SCENARIO = "messaging_basic"


def serve(host: str = "127.0.0.1", port: int = 8765,
          scenario_path: str | None = None, speed: float = 1.0) -> int:
    if scenario_path is None:
        from tcbsim.cli import resolve_script
        scenario_path = resolve_script(DEFAULT_SCENARIO)
    doc = load_script(scenario_path)
    world = build_world(doc)
    server = BridgeServer(world, scenario_name=doc["name"], speed=speed)
    try:
        server.start(host, port)
    except PortInUse as e:
        print(f"port in use: {e}")
        return 1
    print(f"bridge listening on ws://{host}:{port} "
          f"(scenario {doc['name']}, speed {speed}x); Ctrl-C stops")
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0
