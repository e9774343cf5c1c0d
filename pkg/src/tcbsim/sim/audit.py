"""Whole-trace audits: confidentiality, indicator soundness, one-way
secure-mode, touch isolation and sensor-gate effectiveness.

These run after a scenario completes, over the trace log and the
normal-world observation logs, and back the global invariant suite the
scenario runner applies to every run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from tcbsim import taint

# secure -> normal transitions a trace may legally contain
_EXIT_OK = {"exit_button", "idle_timeout"}
_EXIT_USER_PATH = {"credential_lockout"}


@dataclass
class AuditFindings:
    leaks: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.leaks and not self.violations


def audit_taint(devices, network) -> list:
    """Leak events: secret-labeled buffers (or verbatim secret bytes)
    observed by any normal-world app, or secret bytes on the wire."""
    leaks = []
    for device in devices:
        ledger = device.secret_ledger
        for app_id, log in device.observations.items():
            app = device.apps.get(app_id)
            if app is not None and getattr(app, "kind", "nworld") != "nworld":
                continue
            for t, kind, data in log:
                if taint.is_secret(data):
                    leaks.append({"dev": device.device_id, "app": app_id,
                                  "t": t, "kind": kind,
                                  "via": "labeled",
                                  "owner": data.label.owner})
                elif isinstance(data, (bytes, bytearray)):
                    for owner, origin in ledger.scan(bytes(data)):
                        leaks.append({"dev": device.device_id, "app": app_id,
                                      "t": t, "kind": kind,
                                      "via": f"bytes:{origin}",
                                      "owner": owner})
    if network is not None:
        for rec in network.log:
            payload = rec["payload"]
            if taint.is_secret(payload):
                leaks.append({"dev": rec["src"], "app": "network",
                              "t": rec["t"], "kind": "wire",
                              "via": "labeled", "owner": payload.label.owner})
            else:
                for device in devices:
                    for owner, origin in device.secret_ledger.scan(
                            taint.data_of(payload)):
                        leaks.append({"dev": rec["src"], "app": "network",
                                      "t": rec["t"], "kind": "wire",
                                      "via": f"bytes:{origin}",
                                      "owner": owner})
    return leaks


def audit_led_and_mode(trace) -> list:
    """LED soundness (lit implies secure) and completeness modulo
    training (secure and acknowledged implies lit), per device."""
    violations = []
    state: dict[str, dict] = {}

    def dev_state(dev):
        return state.setdefault(dev, {"mode": "normal", "led": False,
                                      "suppressed": False})

    for r in trace.records:
        s = dev_state(r["dev"])
        ev = r["event"]
        if ev == "sak_press":
            s["mode"] = "secure"
            s["suppressed"] = bool(r.get("suppressed"))
            s["led"] = not s["suppressed"]
        elif ev == "sak_re_press":
            s["suppressed"] = False
            s["led"] = True
        elif ev == "exit_secure":
            s["mode"] = "normal"
            s["led"] = False
        elif ev == "boot":
            s["mode"] = "normal"
            s["led"] = False
            s["suppressed"] = False
        elif ev == "led_change":
            s["led"] = bool(r["on"])
        if s["led"] and s["mode"] != "secure":
            violations.append({"rule": "led_soundness", "seq": r["seq"],
                               "dev": r["dev"]})
        if s["mode"] == "secure" and not s["suppressed"] and not s["led"]:
            violations.append({"rule": "led_completeness", "seq": r["seq"],
                               "dev": r["dev"]})
    return violations


def audit_one_way_secure_mode(trace) -> list:
    """Every secure -> normal transition must be the Exit button, the
    idle timeout, a credential lockout immediately preceded by a failed
    credential entry in the same session, or a power cycle."""
    violations = []
    last_cred_failure: dict[str, int] = {}
    for r in trace.records:
        dev = r["dev"]
        if r["event"] == "credential_failure":
            last_cred_failure[dev] = r["seq"]
        elif r["event"] == "sak_press":
            last_cred_failure.pop(dev, None)
        elif r["event"] == "exit_secure":
            cause = r["cause"]
            if cause in _EXIT_OK:
                continue
            if cause in _EXIT_USER_PATH and dev in last_cred_failure:
                continue
            violations.append({"rule": "one_way_secure_mode",
                               "seq": r["seq"], "dev": dev, "cause": cause})
    return violations


def audit_touch_isolation(trace) -> list:
    """Zero touch deliveries to the normal world while in secure mode."""
    violations = []
    mode: dict[str, str] = {}
    for r in trace.records:
        dev = r["dev"]
        if r["event"] == "sak_press":
            mode[dev] = "secure"
        elif r["event"] in ("exit_secure", "boot"):
            mode[dev] = "normal"
        elif (r["event"] == "interrupt" and r.get("source") == "touch"
                and r.get("world") == "nworld"
                and mode.get(dev) == "secure"):
            violations.append({"rule": "touch_isolation", "seq": r["seq"],
                               "dev": dev})
    return violations


def audit_sensor_gate(trace, devices) -> list:
    """No dropped sensor signal may surface in a normal-world app's
    observation log (signals carry unique ids for cross-reference)."""
    dropped: set[tuple] = set()
    for r in trace.records:
        if r["event"] == "interrupt" and r.get("decision") == "drop":
            dropped.add((r["dev"], r.get("signal_id")))
    violations = []
    for device in devices:
        for app_id, log in device.observations.items():
            for t, kind, data in log:
                if kind == "sensor_reading" and (
                        device.device_id, data.get("signal_id")) in dropped:
                    violations.append({"rule": "sensor_gate",
                                       "dev": device.device_id,
                                       "app": app_id, "t": t})
    return violations


def audit_interrupt_conservation(trace) -> list:
    """Every emitted interrupt record carries a disposition."""
    violations = []
    for r in trace.records:
        if r["event"] == "interrupt" and r.get("world") not in (
                "sworld", "nworld", "masked", "dropped"):
            violations.append({"rule": "interrupt_conservation",
                               "seq": r["seq"]})
    return violations


def audit_forcing_ceremony(trace) -> list:
    """Key unseals and counter-signatures happen only inside a secure
    session, i.e. after an attention-key press with no exit between."""
    violations = []
    in_secure: dict[str, bool] = {}
    for r in trace.records:
        dev = r["dev"]
        if r["event"] == "sak_press":
            in_secure[dev] = True
        elif r["event"] in ("exit_secure", "boot"):
            in_secure[dev] = False
        elif r["event"] in ("key_unsealed", "countersign"):
            if not in_secure.get(dev, False):
                violations.append({"rule": "forcing_ceremony",
                                   "seq": r["seq"], "dev": dev,
                                   "what": r["event"]})
    return violations


def run_all(trace, devices, network, expect_leaks: bool = False) -> AuditFindings:
    findings = AuditFindings()
    findings.leaks = audit_taint(devices, network)
    findings.violations += audit_led_and_mode(trace)
    findings.violations += audit_one_way_secure_mode(trace)
    findings.violations += audit_touch_isolation(trace)
    findings.violations += audit_sensor_gate(trace, devices)
    findings.violations += audit_interrupt_conservation(trace)
    findings.violations += audit_forcing_ceremony(trace)
    if expect_leaks and not findings.leaks:
        findings.violations.append({"rule": "auditor_self_test",
                                    "detail": "expected leaks, found none"})
    return findings
