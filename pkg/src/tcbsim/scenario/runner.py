"""Build a world from a script, run it, audit it, judge it.

Exit code 0 means every embedded assertion and the global invariant
suite (taint audit, LED soundness, one-way secure-mode, touch isolation,
sensor gating) passed. Reports are written without any wall-clock input,
so a replay under the same seed is byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from tcbsim.errors import SchemaError, TcbError
from tcbsim.fixtures import World, WorldBuilder
from tcbsim.kernel import KernelConfig, MODE_SECURE, SENSOR_KIND_NAMES
from tcbsim.scenario.script import load_script, validate_script


@dataclass
class RunReport:
    name: str
    seed: int
    ok: bool
    assertion_results: list = field(default_factory=list)
    audit_leaks: list = field(default_factory=list)
    audit_violations: list = field(default_factory=list)
    trace_jsonl: str = ""
    ledger_text: str = ""
    repo_blobs: dict = field(default_factory=dict)

    def result_json(self) -> str:
        return json.dumps({
            "name": self.name,
            "seed": self.seed,
            "ok": self.ok,
            "assertions": self.assertion_results,
            "audit": {"leaks": len(self.audit_leaks),
                      "violations": self.audit_violations},
        }, sort_keys=True, indent=2) + "\n"


def build_world(doc: dict, seed_override: int | None = None) -> World:
    seed = doc["seed"] if seed_override is None else seed_override
    builder = WorldBuilder(seed, doc.get("suite", "x25519"),
                           doc.get("net_delay_us", 50_000))
    builder.world.leak_demo = bool(doc.get("leak_demo", False))
    pki = doc.get("pki", {})
    preinstall_roots = []
    for r in pki.get("roots", []):
        builder.add_root(r["name"], r["authorized_groups"])
        if r.get("preinstall", True):
            preinstall_roots.append(r["name"])
    for p in pki.get("principals", []):
        builder.add_principal(
            p["name"], p["role"], groups=p.get("groups", ()),
            doc_types=p.get("doc_types", ()), issuer=p.get("issuer"),
            authorized_groups=p.get("authorized_groups", ()))
    from tcbsim.peers import encode_root_fixture
    root_fixture = encode_root_fixture(
        [builder.world.roots[n] for n in sorted(preinstall_roots)])
    for d in doc["devices"]:
        config = KernelConfig(**d.get("kernel", {}))
        device = builder.add_device(
            d["id"], d["user"], credential=d.get("credential", ""),
            install_peers=d.get("install_peers", ()),
            repo_files=d.get("repo_files", ()),
            admin_password=d.get("admin_password", ""),
            kernel_config=config, sensors=d.get("sensors"),
            compliant=d.get("compliant", True))
        device.root_fixture = root_fixture
        for spec in d.get("apps", ()):
            _wire_app(builder, d["id"], spec)
    world = builder.boot_all()
    _schedule_events(world, doc["events"])
    return world


def _wire_app(builder: WorldBuilder, device_id: str, spec: dict) -> None:
    kind = spec["kind"]
    if kind == "messaging":
        builder.wire_messaging(device_id, spec.get("contacts", {}),
                               spec.get("preinstalled", ()))
    elif kind == "payments":
        builder.wire_payments(device_id, spec.get("brokers", {}),
                              spec.get("preinstalled", ()))
    elif kind == "broker":
        builder.wire_broker(device_id,
                            registered_users=spec.get("registered_users", ()),
                            doc_type=spec.get("doc_type", "commerce"),
                            withhold_receipt=spec.get("withhold_receipt",
                                                      False))
    elif kind == "adversary":
        builder.wire_adversary(device_id)
    elif kind == "generic":
        from tcbsim.apps.base import AppHarness
        AppHarness(builder.world.devices[device_id],
                   spec.get("app_id", "generic"))


def _schedule_events(world: World, events: list) -> None:
    for e in events:
        world.loop.schedule(e["at_us"], _make_step(world, e))


def _make_step(world: World, e: dict):
    device = world.devices[e["device"]]
    agent = world.agents[e["device"]]
    kind = e["do"]
    args = e.get("args", {})

    def step():
        if kind == "sak":
            device.press_sak()
        elif kind == "interrupt":
            for _ in range(e.get("count", 1)):
                device.emit_interrupt(e["source"])
        elif kind == "reboot":
            device.reboot()
        else:
            # user mistakes and app crashes are scenario data, not runner
            # failures: they land in the trace for assertions to inspect
            try:
                if kind == "user":
                    _user_op(world, device, agent, e["op"], args)
                elif kind == "app":
                    getattr(device.apps[e["app"]], e["op"])(**args)
                elif kind == "adversary":
                    device.apps["adversary"].run(e["strategy"])
            except TcbError as err:
                device.trace("scenario", "op_error",
                             {"do": kind, "op": e.get("op", ""),
                              "error": type(err).__name__})
    return step


def _user_op(world: World, device, agent, op: str, args: dict) -> None:
    if op == "exit":
        agent.exit_secure()
    elif op == "approve_data":
        agent.approve_data(args["source"], args.get("value", ""),
                           app=args.get("app"), peer=args.get("peer"))
    elif op == "view_message":
        agent.view_message(app=args.get("app"), peer=args.get("peer"))
    elif op == "approve_signature":
        agent.approve_signature(args.get("fields", {}),
                                credential=args.get("credential"),
                                app=args.get("app"), peer=args.get("peer"))
    elif op == "view_signed_doc":
        agent.view_signed_doc(app=args.get("app"), peer=args.get("peer"))
    elif op == "sensor_decision":
        agent.sensor_decision(tuple(args["decision"]), app=args.get("app"))
    elif op == "decline":
        agent.decline(kind=args.get("kind"), app=args.get("app"),
                      peer=args.get("peer"))
    elif op == "set_sensor":
        agent.set_sensor(args["sensor"], args["policy"],
                         args.get("duration_us", 0))
    elif op == "repo_write":
        agent.repo_write(args["path"], args["text"],
                         acl=tuple(args.get("acl", ())))
    elif op == "repo_read":
        agent.repo_read(args["path"])
    elif op == "repo_delete":
        agent.repo_delete(args["path"])
    elif op == "list_archive":
        agent.list_archive()
    elif op == "admin_install":
        name = args["principal"]
        cert = (world.roots[name] if name in world.roots
                else world.principals[name].cert)
        agent.admin_install(args["password"], cert.encode())
    elif op == "type_sensitive":
        agent.type_sensitive(args["text"])
    else:
        raise TcbError(f"unknown user op {op!r}")


# ---- assertions ----

def _eval_assertion(world: World, a: dict, leaks: list) -> tuple[bool, str]:
    check = a["check"]
    if check == "ledger_count":
        got = world.devices[a["device"]].ledger.count(a["counter"])
    elif check == "ledger_cycles":
        got = world.devices[a["device"]].ledger.cycles(a["counter"])
    elif check == "ledger_total_cycles":
        got = world.devices[a["device"]].ledger.total_cycles
    elif check == "trace_count":
        kw = {}
        if "event" in a:
            kw["event"] = a["event"]
        if "dev" in a:
            kw["dev"] = a["dev"]
        if "comp" in a:
            kw["comp"] = a["comp"]
        kw.update(a.get("fields", {}))
        got = world.trace.count(**kw)
    elif check == "taint_leaks":
        got = len(leaks)
    elif check == "payment_phase":
        app = world.devices[a["device"]].apps[a.get("app", "payments")]
        got = app.sessions[a["broker"]].phase
    elif check == "secure_default":
        app = world.devices[a["device"]].apps[a.get("app", "messaging")]
        got = app.secure_default.get(a["contact"], False)
    elif check == "mode":
        kernel = world.devices[a["device"]].kernel
        got = "secure" if kernel.mode == MODE_SECURE else "normal"
    elif check == "observation_count":
        log = world.devices[a["device"]].observations.get(a["app"], [])
        got = sum(1 for _, k, _d in log
                  if "kind" not in a or k == a["kind"])
    elif check == "archive_count":
        got = len(world.devices[a["device"]].repository.signed_archive)
    elif check == "repo_has":
        got = a["path"] in world.devices[a["device"]].repository.files
    elif check == "registry_has":
        got = world.devices[a["device"]].registry.get(a["peer"]) is not None
    elif check == "sensor_policy":
        kind, _ = world.devices[a["device"]].kernel.sensor_policy(a["sensor"])
        got = SENSOR_KIND_NAMES[kind]
    elif check == "app_alerts":
        app = world.devices[a["device"]].apps[a.get("app", "messaging")]
        got = len(app.alerts)
    else:
        return False, f"unknown check {check!r}"

    if "equals" in a and got != a["equals"]:
        return False, f"expected {a['equals']!r}, got {got!r}"
    if "min" in a and got < a["min"]:
        return False, f"expected >= {a['min']}, got {got!r}"
    if "max" in a and got > a["max"]:
        return False, f"expected <= {a['max']}, got {got!r}"
    return True, f"got {got!r}"


def run_world(doc: dict, seed_override: int | None = None) -> tuple[World, RunReport]:
    world = build_world(doc, seed_override)
    world.run()
    findings = world.audit()
    report = RunReport(name=doc["name"],
                       seed=doc["seed"] if seed_override is None
                       else seed_override, ok=True)
    report.audit_leaks = findings.leaks
    report.audit_violations = findings.violations
    # credentials must never reach persisted state, under any scenario
    for device in world.device_list():
        device.persist()
        credential = world.credentials.get(device.device_id, "")
        if credential and credential.encode() in (device.storage.blob or b""):
            report.audit_violations.append(
                {"rule": "credential_persisted", "dev": device.device_id})
    if world.leak_demo:
        # negative control: the auditor must have caught the planted leak
        if not findings.leaks:
            report.ok = False
            report.assertion_results.append(
                {"check": "auditor_self_test", "ok": False,
                 "detail": "planted leak not detected"})
    elif findings.leaks:
        report.ok = False
    if findings.violations:
        report.ok = False
    for a in doc.get("assertions", ()):
        ok, detail = _eval_assertion(world, a, findings.leaks)
        report.assertion_results.append({**a, "ok": ok, "detail": detail})
        if not ok:
            report.ok = False
    report.trace_jsonl = world.trace.to_jsonl()
    report.ledger_text = "\n\n".join(
        d.ledger.summary(d.device_id) for d in world.device_list()) + "\n"
    report.repo_blobs = {d.device_id: d.storage.blob
                         for d in world.device_list()
                         if d.storage.blob is not None}
    return world, report


def run_script(path: str, out_dir: str | None = None,
               seed_override: int | None = None,
               strict: bool = False) -> int:
    """CLI entry: 0 pass, 1 assertion/audit failure, 2 schema error."""
    try:
        doc = load_script(path)
    except SchemaError as e:
        print(f"schema error: {e}")
        return 2
    world, report = run_world(doc, seed_override)
    if strict:
        _, replay = run_world(doc, seed_override)
        if replay.trace_jsonl != report.trace_jsonl or \
                replay.ledger_text != report.ledger_text:
            report.ok = False
            report.assertion_results.append(
                {"check": "replay_determinism", "ok": False,
                 "detail": "replay diverged from first run"})
    if out_dir:
        write_reports(out_dir, report)
    for r in report.assertion_results:
        status = "pass" if r["ok"] else "FAIL"
        print(f"[{status}] {r['check']}: {r['detail']}")
        if not r["ok"]:
            offset = report.trace_jsonl.count("\n")
            print(f"  first failing predicate: {json.dumps(r, sort_keys=True)}"
                  f" (trace offset {offset})")
            break
    print(f"scenario {report.name}: {'PASS' if report.ok else 'FAIL'} "
          f"(leaks={len(report.audit_leaks)}, "
          f"violations={len(report.audit_violations)})")
    return 0 if report.ok else 1


def write_reports(out_dir: str, report: RunReport) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "trace.jsonl"), "w") as fh:
        fh.write(report.trace_jsonl)
    with open(os.path.join(out_dir, "ledger.txt"), "w") as fh:
        fh.write(report.ledger_text)
    with open(os.path.join(out_dir, "audit.json"), "w") as fh:
        json.dump({"leaks": report.audit_leaks,
                   "violations": report.audit_violations},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(os.path.join(out_dir, "result.json"), "w") as fh:
        fh.write(report.result_json())
    for device_id, blob in sorted(report.repo_blobs.items()):
        with open(os.path.join(out_dir, f"repo_{device_id}.blob"), "wb") as fh:
            fh.write(blob)
