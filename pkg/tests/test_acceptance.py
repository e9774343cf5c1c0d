"""Acceptance suite: one test per top-level criterion, each printing a
pass/fail line with its measured numbers.

Run as: pytest tests/test_acceptance.py -v -s
"""

import copy
import time

import pytest

from tcbsim.apps.adversary import STRATEGIES
from tcbsim.cli import bundled_scenarios, resolve_script
from tcbsim.crypto import (
    Envelope,
    decrypt_calls,
    get_suite,
    make_document,
    open_envelope,
    seal,
)
from tcbsim.errors import EnvelopeError
from tcbsim.fixtures import standard_world
from tcbsim.gateway import ApiResult
from tcbsim.kernel import (
    CAUSE_EXIT_BUTTON,
    EVENT_ALPHABET,
    KernelConfig,
    KernelCore,
    LED_ON,
    NullBus,
)
from tcbsim.modelcheck import exhaustive_check, random_trace_check
from tcbsim.peers import PeerCertificate, Role
from tcbsim.rng import DeterministicRng
from tcbsim.scenario.runner import run_world
from tcbsim.scenario.script import load_script


def report(name: str, ok: bool, detail: str) -> None:
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def load_bundled(name: str) -> dict:
    return load_script(resolve_script(name))


# ---------------------------------------------------------------- corpus

def corpus_docs():
    skip = {"leak_demo_negative_control"}
    return {name: load_bundled(name) for name in bundled_scenarios()
            if name not in skip}


def adversary_variant(doc: dict, strategy: str) -> dict:
    variant = copy.deepcopy(doc)
    variant["assertions"] = []
    target = variant["devices"][0]
    has_adversary = any(a.get("kind") == "adversary"
                        for a in target.get("apps", []))
    if not has_adversary:
        target.setdefault("apps", []).append({"kind": "adversary"})
    variant["events"] = ([{"at_us": 500_000, "device": target["id"],
                           "do": "adversary", "strategy": strategy}]
                         + variant["events"])
    return variant


@pytest.fixture(scope="module")
def corpus_runs():
    """Every bundled scenario crossed with every adversary strategy,
    shared by the confidentiality and payment-unforgeability criteria."""
    t0 = time.monotonic()
    runs = []
    for name, doc in corpus_docs().items():
        for strategy in STRATEGIES:
            world, rep = run_world(adversary_variant(doc, strategy))
            runs.append((name, strategy, world, rep))
    return runs, time.monotonic() - t0


# ------------------------------------------------- 1. cycle-ledger fidelity

def test_cycle_ledger_fidelity():
    t0 = time.monotonic()
    # frozen hand counts: boot 1600; switches x 3000; sak entries x 950000
    expected = {
        "messaging_basic": {"phoneA": 963600, "phoneB": 963600},
        "payment_honest": {"phone": 1925600},
        "idle_timeout": {"phone": 957600},
    }
    checked = 0
    for name, totals in expected.items():
        world, rep = run_world(load_bundled(name))
        assert rep.ok, f"{name} failed: {rep.assertion_results}"
        for device_id, total in totals.items():
            ledger = world.devices[device_id].ledger
            assert ledger.costs["boot_init"] == 1600
            assert ledger.costs["world_switch"] == 3000
            assert ledger.cycles("boot_init") == 1600 * ledger.count("boot_init")
            # 3000 cycles at the 600 MHz model is exactly 5 microseconds
            assert ledger.time_us(ledger.costs["world_switch"]) == 5.0
            assert ledger.time_us(1600) < 3.0
            sak_full = ledger.costs["sak_handling"] + ledger.costs["world_switch"]
            assert sak_full <= 10**6
            assert ledger.time_us(sak_full) <= 2000.0
            assert ledger.total_cycles == total, \
                f"{name}/{device_id}: {ledger.total_cycles} != {total}"
            analytic = sum(ledger.counts[k] * ledger.costs[k]
                           for k in ledger.costs)
            assert ledger.total_cycles == analytic
            checked += 1
    elapsed = time.monotonic() - t0
    report("cycle-ledger fidelity", elapsed < 5.0,
           f"{checked} device ledgers integer-exact across 3 scenarios "
           f"in {elapsed:.2f}s (< 5s)")


# ------------------------------------------------ 2. one-way SAK model check

def test_one_way_sak_model_check():
    t0 = time.monotonic()
    exhaustive = exhaustive_check(max_depth=6)
    n = len(EVENT_ALPHABET)
    expected_sequences = sum(n**k for k in range(1, 7))
    assert exhaustive.sequences == expected_sequences
    assert exhaustive.ok, exhaustive.violations[:3]
    randomized = random_trace_check(traces=10_000, length=200)
    assert randomized.steps == 2_000_000
    assert randomized.ok, randomized.violations[:3]
    elapsed = time.monotonic() - t0
    report("one-way SAK model check", elapsed < 60.0,
           f"{exhaustive.sequences} exhaustive sequences (depth<=6) + "
           f"10^4 random 200-event traces, 0 illegal exits, "
           f"{elapsed:.1f}s (< 60s)")


# ------------------------------------------------- 3. confidentiality audit

def test_confidentiality_audit(corpus_runs):
    runs, elapsed = corpus_runs
    scenario_count = len({name for name, *_ in runs})
    assert scenario_count >= 12
    assert len(runs) == scenario_count * len(STRATEGIES)
    leaky = [(name, strategy, rep.audit_leaks)
             for name, strategy, world, rep in runs if rep.audit_leaks]
    assert not leaky, f"leaks found: {leaky[:3]}"
    violations = [(name, strategy, rep.audit_violations)
                  for name, strategy, world, rep in runs
                  if rep.audit_violations]
    assert not violations, f"invariant violations: {violations[:3]}"
    # negative control: the planted leak must be caught
    world, rep = run_world(load_bundled("leak_demo_negative_control"))
    assert len(rep.audit_leaks) >= 1
    assert rep.ok
    report("confidentiality audit", elapsed < 120.0,
           f"{scenario_count} scenarios x {len(STRATEGIES)} strategies = "
           f"{len(runs)} runs, 0 leaks; negative control caught "
           f"{len(rep.audit_leaks)} planted leak(s); {elapsed:.1f}s (< 120s)")


# ---------------------------------------------------------- 4. crypto suite

def test_crypto_suite():
    suite = get_suite("test")
    rng = DeterministicRng(404)
    sender = suite.generate_keypair(rng)
    recipient = suite.generate_keypair(rng)
    cert = PeerCertificate(name="alice", public_key=sender.public,
                           role=Role.CONTACT)

    msg_rng = DeterministicRng(405)
    for _ in range(1000):
        m = msg_rng.bytes(1 + msg_rng.randrange(128))
        env = seal(suite, sender, "alice", recipient.public, m, rng)
        assert open_envelope(suite, recipient, cert, env) == m

    env = seal(suite, sender, "alice", recipient.public,
               b"16-byte message!", rng)
    blob = bytearray(env.encode())
    corruptions = rejections = 0
    for pos in range(len(blob)):
        orig = blob[pos]
        for delta in range(1, 256):
            blob[pos] = (orig + delta) % 256
            corruptions += 1
            log: list = []
            try:
                open_envelope(suite, recipient, cert,
                              Envelope.decode(bytes(blob)), log)
            except EnvelopeError:
                rejections += 1
                assert decrypt_calls(log) == 0, \
                    f"decrypt primitive ran on a rejected envelope (pos {pos})"
        blob[pos] = orig
    assert corruptions == len(blob) * 255
    report("crypto suite", rejections == corruptions,
           f"1000 roundtrips OK; {rejections}/{corruptions} single-byte "
           f"corruptions rejected with 0 decrypt calls each")


# ------------------------------------------------------------ 5. RBAC matrix

def test_rbac_matrix():
    b = standard_world(seed=500)
    groups = {"friends", "brokers", "banking"}
    spec = [
        ("c1", Role.CONTACT, frozenset()),
        ("c2", Role.CONTACT, frozenset()),
        ("c3", Role.CONTACT, frozenset()),
        ("s_bank", Role.SIGNATORY, frozenset({"banking"})),
        ("s_shop", Role.SIGNATORY, frozenset({"commerce"})),
        ("s_both", Role.SIGNATORY, frozenset({"banking", "commerce"})),
        ("s_none", Role.SIGNATORY, frozenset()),
        ("ca1", Role.CA, frozenset()),
        ("ca2", Role.CA, frozenset()),
        ("ca3", Role.CA, frozenset()),
    ]
    for name, role, doc_types in spec:
        b.add_principal(name, role, groups={"friends"}, doc_types=doc_types,
                        authorized_groups=groups if role is Role.CA else ())
    b.add_device("phone", "alice", credential="pw",
                 install_peers=[n for n, *_ in spec])
    world = b.boot_all()
    device = world.devices["phone"]
    suite = world.suite

    def admitted(result) -> bool:
        if isinstance(result, int):
            return True  # queued for user approval
        assert isinstance(result, ApiResult)
        return False

    doc_types = ("banking", "commerce")
    cells = failures = 0
    for name, role, peer_doc_types in spec:
        principal = world.principals[name]
        for doc_type in doc_types:
            doc = make_document(suite, principal.device_keys, name,
                                doc_type, b"body")
            env = seal(suite, principal.device_keys, name,
                       world.principals["alice"].cert.public_key,
                       b"msg", DeterministicRng(7))
            results = {
                "request_data": device.gateway.request_data("app", name),
                "display_message": device.gateway.display_message(
                    "app", name, env.encode()),
                "request_signature": device.gateway.request_signature(
                    "app", name, doc.encode()),
                "display_signed_doc": device.gateway.display_signed_doc(
                    "app", name, doc.encode()),
            }
            for function, result in results.items():
                got = admitted(result)
                if function in ("request_data", "display_message"):
                    want = role is Role.CONTACT
                else:
                    want = (role is Role.SIGNATORY
                            and doc_type in peer_doc_types)
                cells += 1
                if got != want:
                    failures += 1
    report("RBAC matrix", failures == 0,
           f"{cells} (peer x function x doc-type) cells match the "
           f"role-permission scheme exactly")


# ----------------------------------------------- 6. ceremony determinism

def run_training(seed: int, compliant: bool, entries: int = 1000):
    config = KernelConfig(suppression_prob=0.1, training_entries=entries)
    kernel = KernelCore(config, DeterministicRng(seed, "training"), NullBus())
    suppressed = []
    now = 0
    for i in range(entries):
        kernel.sak_press(now)
        if kernel.session.suppressed:
            suppressed.append(i)
        if compliant and kernel.led != LED_ON:
            kernel.sak_press(now + 1)  # trained user re-presses
        kernel.user_action(now + 2, "sign")
        kernel.exit_secure(now + 3, CAUSE_EXIT_BUTTON)
        now += 10_000_000
    return kernel, suppressed


def test_ceremony_determinism():
    kernel_nc, suppressed_nc = run_training(seed=606, compliant=False)
    assert len(suppressed_nc) > 0
    assert kernel_nc.feedback_count == len(suppressed_nc) == \
        kernel_nc.suppressed_count
    kernel_c, suppressed_c = run_training(seed=606, compliant=True)
    assert kernel_c.feedback_count == 0
    assert kernel_c.repress_count == len(suppressed_c)
    # the suppressed set is a pure function of seed and entry count
    _, again = run_training(seed=606, compliant=False)
    assert again == suppressed_nc
    _, other = run_training(seed=607, compliant=False)
    assert other != suppressed_nc
    report("ceremony determinism", True,
           f"1000 entries at p=0.1: non-compliant agent got "
           f"{kernel_nc.feedback_count} feedbacks == {len(suppressed_nc)} "
           f"suppressed episodes; compliant agent got 0")


# ---------------------------------------------- 7. payment end-to-end

def test_payment_end_to_end(corpus_runs):
    world, rep = run_world(load_bundled("payment_honest"))
    assert rep.ok, rep.assertion_results
    assert world.devices["phone"].apps["payments"].sessions[
        "acmebroker"].phase == "done"
    assert world.trace.count(event="payment_cleared") == 1

    world2, rep2 = run_world(load_bundled("payment_revocation"))
    assert rep2.ok, rep2.assertion_results
    [notice] = world2.trace.select(event="revocation_notice")
    [cleared] = world2.trace.select(event="payment_cleared")
    order_done = world2.trace.select(event="api_result", status="completed")
    assert notice["t"] == order_done[0]["t"] + 600_000_000  # deadline + 0

    # unforgeability: across the whole adversary corpus, every broker
    # acceptance of a counter-signed order is preceded by a scripted
    # secure-mode approval (key unseal + countersign) on the buyer device
    runs, _ = corpus_runs
    accepted = approvals = 0
    for name, strategy, world3, rep3 in runs:
        for clear in world3.trace.select(event="payment_cleared"):
            accepted += 1
            signed_before = [
                r for r in world3.trace.records
                if r["event"] == "countersign" and r["seq"] < clear["seq"]]
            unsealed_before = [
                r for r in world3.trace.records
                if r["event"] == "key_unsealed" and r["seq"] < clear["seq"]]
            approved_before = [
                r for r in world3.trace.records
                if r["event"] == "user_interaction"
                and r.get("what") == "approve_signature"
                and r["seq"] < clear["seq"]]
            if signed_before and unsealed_before and approved_before:
                approvals += 1
    assert accepted == approvals
    report("payment end-to-end", True,
           f"honest run Done with broker-verified counter-signature; "
           f"withheld receipt Revoked at deadline+0; {accepted}/{accepted} "
           f"corpus order acceptances had scripted approvals")


# --------------------------------------------------------- 8. determinism

def test_replay_determinism():
    names = sorted(corpus_docs())
    diverged = []
    for name in names:
        doc = load_bundled(name)
        _, rep1 = run_world(doc)
        _, rep2 = run_world(doc)
        if (rep1.trace_jsonl != rep2.trace_jsonl
                or rep1.ledger_text != rep2.ledger_text
                or rep1.result_json() != rep2.result_json()):
            diverged.append(name)
    report("replay determinism", not diverged,
           f"{len(names)} scenarios replayed byte-identically"
           + (f"; diverged: {diverged}" if diverged else ""))
