"""CLI: `runner [--mode exec|check-trivial]`, code on stdin, semantics via
exit status (0 ok / 1 exception / 2 trivial / 3 not trivial)."""

from __future__ import annotations

import argparse
import sys

from . import (EXIT_USAGE, check_snippet, disable_network, limit_cpu,
               run_snippet)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="runner", add_help=True)
    parser.add_argument("--mode", choices=["exec", "check-trivial"], default="exec")
    parser.add_argument("--no-network", action="store_true",
                        help="block socket creation before running the snippet")
    parser.add_argument("--cpu-seconds", type=int, default=None,
                        help="self-imposed CPU limit (wall clock is the caller's job)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 means trivial-true here, so
        # remap anything that is not a clean --help exit.
        return EXIT_USAGE if exc.code else 0

    code = sys.stdin.read()
    if args.mode == "check-trivial":
        return check_snippet(code)

    if args.cpu_seconds:
        limit_cpu(args.cpu_seconds)
    if args.no_network:
        disable_network()
    status, captured = run_snippet(code)
    if status == 0:
        sys.stdout.write(captured)
        sys.stdout.flush()
    return status


if __name__ == "__main__":
    sys.exit(main())
