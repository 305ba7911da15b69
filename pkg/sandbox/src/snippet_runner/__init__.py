"""One-shot snippet runner.

Each process serves exactly one request delivered on standard input, so a
fresh interpreter guarantees no state leaks between snippets and a wall
clock kill from the orchestrator is always clean.

Protocol (stable, relied on by external adapters):
  exec mode          exit 0, trimmed stdout capture written verbatim to
                     standard output (nothing else); any exception exits 1
                     with empty standard output.
  check-trivial mode exit 2 when the snippet is exactly a constant
                     assignment followed by a print of that name, exit 3
                     otherwise (including unparseable code).

WARNING: exec mode runs arbitrary code with the privileges of this
process. Network access follows the host environment unless --no-network
is given (a best-effort in-process socket block). Intended for curated
research datasets, not untrusted input.
"""

from __future__ import annotations

import ast
import contextlib
import io

EXIT_OK = 0
EXIT_EXCEPTION = 1
EXIT_TRIVIAL = 2
EXIT_NOT_TRIVIAL = 3
EXIT_USAGE = 64  # distinct from the semantic codes above


def run_snippet(code: str) -> tuple[int, str]:
    """Execute code with stdout redirected; (exit status, trimmed capture)."""
    buf = io.StringIO()
    try:
        with contextlib.redirect_stdout(buf):
            exec(code, {"__name__": "__main__"})
    except BaseException:
        return EXIT_EXCEPTION, ""
    return EXIT_OK, buf.getvalue().strip()


def is_assign_then_print(code: str) -> bool:
    """Syntax-tree check: module of exactly two statements where a name is
    assigned a constant and then printed, either bare or as a formatted
    value of an f-string."""
    try:
        node = ast.parse(code)
    except (SyntaxError, ValueError):
        return False
    if not (isinstance(node, ast.Module) and len(node.body) == 2):
        return False
    assign, expr = node.body
    if not (isinstance(assign, ast.Assign) and isinstance(expr, ast.Expr)):
        return False
    if not (isinstance(assign.targets[0], ast.Name)
            and isinstance(assign.value, ast.Constant)):
        return False
    call = expr.value
    if not (isinstance(call, ast.Call) and isinstance(call.func, ast.Name)
            and call.func.id == "print" and len(call.args) == 1):
        return False
    target = assign.targets[0].id
    arg = call.args[0]
    if isinstance(arg, ast.Name):
        return arg.id == target
    if isinstance(arg, ast.JoinedStr):
        for value in arg.values:
            if (isinstance(value, ast.FormattedValue)
                    and isinstance(value.value, ast.Name)
                    and value.value.id == target):
                return True
    return False


def check_snippet(code: str) -> int:
    return EXIT_TRIVIAL if is_assign_then_print(code) else EXIT_NOT_TRIVIAL


def disable_network() -> None:
    """Best-effort: make socket creation raise inside this process."""
    import socket

    def _blocked(*args, **kwargs):
        raise OSError("network access disabled by runner policy")

    socket.socket = _blocked  # type: ignore[misc, assignment]
    socket.create_connection = _blocked  # type: ignore[assignment]


def limit_cpu(seconds: int) -> None:
    """Self-limit CPU time where the platform supports it."""
    try:
        import resource
        resource.setrlimit(resource.RLIMIT_CPU, (seconds, seconds))
    except (ImportError, ValueError, OSError):
        pass
