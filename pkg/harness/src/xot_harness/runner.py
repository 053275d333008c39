"""Crash-safe runner for instrumented programs.

Usage: ``<python> runner.py <program-file>``

Executes the file in a fresh namespace. When the program body finishes,
its appended footer has already printed the result line; when it raises
instead, this script prints an equivalent ``exception`` line. Either
way standard output ends with exactly one sentinel-prefixed JSON line
and the exit code is 0. Anything more violent (interpreter killed,
unwritable stdout) leaves no sentinel, which callers treat as a lost
run.

This file is executed as a plain script in a bare environment, so it
must stay free of non-standard-library imports.
"""

import json
import sys

SENTINEL = "##XOT##"


def emit_exception(error):
    report = {
        "status": "exception",
        "bindings": {},
        "ans": None,
        "error_type": type(error).__name__,
        "error_msg": str(error),
    }
    sys.stdout.write("\n" + SENTINEL + json.dumps(report, sort_keys=True) + "\n")
    sys.stdout.flush()


def run_file(path):
    with open(path, encoding="utf-8") as handle:
        source = handle.read()
    try:
        code = compile(source, "<program>", "exec")
    except SyntaxError as error:
        emit_exception(error)
        return
    namespace = {"__name__": "__main__", "__builtins__": __builtins__}
    try:
        exec(code, namespace)
    except BaseException as error:  # a report line beats any traceback
        emit_exception(error)


def main(argv):
    if len(argv) != 2:
        sys.stderr.write("usage: runner.py <program-file>\n")
        return 2
    run_file(argv[1])
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
