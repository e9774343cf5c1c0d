#!/usr/bin/env python3
"""Compare the compiled and interpreted kernel twins on the two hot
workloads: straight event streaming and the clone-per-node pattern the
model checker uses.

    python benchmarks/bench_kernel.py [--events N] [--clones N]
"""

import argparse
import time

from tcbsim.rng import DeterministicRng


def load_twins():
    from tcbsim.kernel import core as py_core
    twins = [("python", py_core)]
    try:
        from tcbsim.kernel import _core as ext_core
        if getattr(ext_core, "COMPILED", False):
            twins.append(("compiled", ext_core))
    except ImportError:
        pass
    return twins


def fresh_kernel(mod):
    config = mod.KernelConfig(suppression_prob=0.3, training_entries=1 << 30)
    return mod.KernelCore(config, DeterministicRng(1, "bench"))


def bench_stream(mod, n_events: int) -> float:
    kernel = fresh_kernel(mod)
    alphabet = mod.EVENT_ALPHABET
    n = len(alphabet)
    pick = DeterministicRng(2, "tape")
    codes = [alphabet[pick.randrange(n)] for _ in range(n_events)]
    now = 0
    t0 = time.perf_counter()
    for code in codes:
        if code == mod.EV_TICK_SHORT:
            now += 60_000_000
        elif code == mod.EV_TICK_LONG:
            now += 360_000_000
        kernel.handle(code, now)
    return time.perf_counter() - t0


def bench_clone_step(mod, n_clones: int) -> float:
    kernel = fresh_kernel(mod)
    kernel.sak_press(0)
    alphabet = mod.EVENT_ALPHABET
    n = len(alphabet)
    pick = DeterministicRng(3, "tape")
    codes = [alphabet[pick.randrange(n)] for _ in range(n_clones)]
    t0 = time.perf_counter()
    for code in codes:
        child = kernel.clone()
        child.handle(code, 1000)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--events", type=int, default=2_000_000)
    parser.add_argument("--clones", type=int, default=500_000)
    args = parser.parse_args()

    twins = load_twins()
    if len(twins) == 1:
        print("note: compiled twin not built (run: pip install -e . "
              "--no-build-isolation or python setup.py build_ext --inplace)")
    results = {}
    print(f"{'impl':<10} {'events/s':>14} {'clone+step/s':>14}")
    for name, mod in twins:
        ev = args.events / bench_stream(mod, args.events)
        cl = args.clones / bench_clone_step(mod, args.clones)
        results[name] = (ev, cl)
        print(f"{name:<10} {ev:>14,.0f} {cl:>14,.0f}")
    if len(results) == 2:
        ev_ratio = results["compiled"][0] / results["python"][0]
        cl_ratio = results["compiled"][1] / results["python"][1]
        print(f"\ncompiled/python speedup: events {ev_ratio:.2f}x, "
              f"clone+step {cl_ratio:.2f}x")


if __name__ == "__main__":
    main()
