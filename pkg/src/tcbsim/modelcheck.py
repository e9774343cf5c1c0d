"""Exhaustive and randomized checking of the secure-mode transition rule.

The property: the kernel leaves secure-mode only through the Exit button
or the idle timeout; no normal-world or application event can cause a
Secure -> Normal transition. The checker drives the real kernel entry
points over every event sequence up to a bounded depth (DFS with state
cloning) and over long random traces, verifying the transition rule and
the LED-soundness invariant (LED on implies secure) at every step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from tcbsim.kernel import (
    CAUSE_EXIT_BUTTON,
    CAUSE_IDLE_TIMEOUT,
    EV_EXIT_BUTTON,
    EV_TICK_LONG,
    EV_TICK_SHORT,
    EVENT_ALPHABET,
    EVENT_NAMES,
    KernelConfig,
    KernelCore,
    LED_ON,
    MODE_SECURE,
)
from tcbsim.rng import DeterministicRng

# ticks advance virtual time: short stays below the idle timeout,
# long jumps past it
_SHORT_TICK_US = 60 * 1000 * 1000
_LONG_TICK_US = 6 * 60 * 1000 * 1000


@dataclass
class CheckResult:
    sequences: int = 0
    steps: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _mk_kernel(seed: int) -> KernelCore:
    config = KernelConfig(suppression_prob=0.5, training_entries=1 << 30)
    return KernelCore(config, DeterministicRng(seed, "modelcheck"))


def _advance(now: int, code: int) -> int:
    if code == EV_TICK_SHORT:
        return now + _SHORT_TICK_US
    if code == EV_TICK_LONG:
        return now + _LONG_TICK_US
    return now


def _check_step(kernel: KernelCore, code: int, now: int,
                trail, result: CheckResult) -> None:
    before = kernel.mode
    kernel.handle(code, now)
    result.steps += 1
    after = kernel.mode
    if before == MODE_SECURE and after != MODE_SECURE:
        legal_event = code in (EV_EXIT_BUTTON, EV_TICK_SHORT, EV_TICK_LONG)
        legal_cause = kernel.last_exit_cause in (CAUSE_EXIT_BUTTON,
                                                 CAUSE_IDLE_TIMEOUT)
        if not (legal_event and legal_cause):
            result.violations.append(
                ("illegal_exit", [EVENT_NAMES[c] for c in trail],
                 EVENT_NAMES[code]))
    if kernel.led == LED_ON and kernel.mode != MODE_SECURE:
        result.violations.append(
            ("led_without_secure", [EVENT_NAMES[c] for c in trail],
             EVENT_NAMES[code]))


def exhaustive_check(max_depth: int = 6, seed: int = 0) -> CheckResult:
    """Enumerate every event sequence of length <= max_depth."""
    result = CheckResult()
    root = _mk_kernel(seed)

    def dfs(kernel: KernelCore, now: int, depth: int, trail: list) -> None:
        for code in EVENT_ALPHABET:
            child = kernel.clone()
            child_now = _advance(now, code)
            _check_step(child, code, child_now, trail, result)
            result.sequences += 1
            if depth + 1 < max_depth and not result.violations:
                trail.append(code)
                dfs(child, child_now, depth + 1, trail)
                trail.pop()

    dfs(root, 0, 0, [])
    return result


def random_trace_check(traces: int = 10_000, length: int = 200,
                       seed: int = 1) -> CheckResult:
    """Randomized long-run complement to the exhaustive bound."""
    result = CheckResult()
    pick = DeterministicRng(seed, "modelcheck-traces")
    alphabet = EVENT_ALPHABET
    n = len(alphabet)
    for t in range(traces):
        kernel = _mk_kernel(seed + t)
        now = 0
        for _ in range(length):
            code = alphabet[pick.randrange(n)]
            now = _advance(now, code)
            _check_step(kernel, code, now, (), result)
            if result.violations:
                return result
    return result
