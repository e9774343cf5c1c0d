"""Command-line driver.

    tcbsim run <script> [--out DIR] [--seed N] [--strict]
    tcbsim serve [--port N] [--scenario SCRIPT] [--speed X]
    tcbsim list

Scripts are paths or names of bundled scenarios (see `tcbsim list`).
Exit codes for run: 0 all assertions and invariants pass, 1 assertion or
audit failure, 2 schema error.
"""

from __future__ import annotations

import argparse
import importlib.resources
import sys


def bundled_scenarios() -> dict:
    base = importlib.resources.files("tcbsim").joinpath("data/scenarios")
    return {p.name.removesuffix(".yaml"): p
            for p in sorted(base.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".yaml")}


def resolve_script(name_or_path: str) -> str:
    import os
    if os.path.exists(name_or_path):
        return name_or_path
    bundled = bundled_scenarios()
    if name_or_path in bundled:
        return str(bundled[name_or_path])
    print(f"no such scenario: {name_or_path} "
          f"(bundled: {', '.join(bundled)})", file=sys.stderr)
    raise SystemExit(2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tcbsim",
        description="deterministic trusted-core phone simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless")
    p_run.add_argument("script", help="scenario path or bundled name")
    p_run.add_argument("--out", metavar="DIR",
                       help="write trace/ledger/audit/result reports here")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the script's seed")
    p_run.add_argument("--strict", action="store_true",
                       help="also replay and require byte-identical reports")

    p_serve = sub.add_parser("serve", help="serve the live UI bridge")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--scenario", default=None,
                         help="scenario providing devices and fixtures")
    p_serve.add_argument("--speed", type=float, default=1.0,
                         help="virtual-to-wall time ratio")

    sub.add_parser("list", help="list bundled scenarios")

    p_check = sub.add_parser(
        "check", help="run the one-way secure-mode model check")
    p_check.add_argument("--depth", type=int, default=6,
                         help="exhaustive enumeration depth")
    p_check.add_argument("--traces", type=int, default=10_000)
    p_check.add_argument("--length", type=int, default=200)

    args = parser.parse_args(argv)

    if args.command == "list":
        for name in bundled_scenarios():
            print(name)
        return 0

    if args.command == "run":
        from tcbsim.scenario.runner import run_script
        return run_script(resolve_script(args.script), out_dir=args.out,
                          seed_override=args.seed, strict=args.strict)

    if args.command == "serve":
        from tcbsim.bridge import serve
        script = resolve_script(args.scenario) if args.scenario else None
        return serve(host=args.host, port=args.port, scenario_path=script,
                     speed=args.speed)

    if args.command == "check":
        import time as _time
        from tcbsim.kernel import ACTIVE_IMPLEMENTATION
        from tcbsim.modelcheck import exhaustive_check, random_trace_check
        t0 = _time.monotonic()
        ex = exhaustive_check(max_depth=args.depth)
        rnd = random_trace_check(traces=args.traces, length=args.length)
        elapsed = _time.monotonic() - t0
        ok = ex.ok and rnd.ok
        print(f"kernel implementation: {ACTIVE_IMPLEMENTATION}")
        print(f"exhaustive: {ex.sequences} sequences (depth<={args.depth}), "
              f"{len(ex.violations)} violations")
        print(f"randomized: {rnd.steps} steps over {args.traces} traces, "
              f"{len(rnd.violations)} violations")
        print(f"{'PASS' if ok else 'FAIL'} in {elapsed:.1f}s")
        return 0 if ok else 1

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
