"""Instrumentation for generated math programs.

A program is made observable by appending a footer that, after the
program body has finished, prints one sentinel-prefixed JSON line
describing the run: every top-level numeric or boolean variable, the
final answer, and a status. The footer deliberately wraps nothing;
exceptions raised by the program body are caught one level up by
``runner.py``, which executes the instrumented file in a fresh
interpreter and emits the same kind of line for failures.

The result protocol, shared with the consuming executor:

- exactly one line starting with ``##XOT##`` per run, as the last line
  of standard output;
- the rest of the line is a JSON object with keys ``status`` (``ok``,
  ``no_ans``, or ``exception``), ``bindings`` (name to number or bool),
  ``ans``, ``error_type``, and ``error_msg``;
- ``status`` is ``ok`` only when ``ans`` holds a usable scalar.
"""

from __future__ import annotations

SENTINEL = "##XOT##"

__all__ = ["SENTINEL", "instrument"]

# The footer runs inside the program's own namespace, so everything it
# needs lives behind one underscore-prefixed function; the export logic
# skips underscore-prefixed names, which keeps the footer invisible to
# itself. Writing a leading newline guarantees the sentinel starts a
# fresh line even when the program left the cursor mid-line.
_FOOTER = '''

# -- value export footer, appended automatically; not part of the solution --
def _xot_export_(_scope):
    import json
    import math
    import sys

    bindings = {}
    for name, value in _scope.items():
        if name.startswith("_"):
            continue
        if isinstance(value, bool):
            bindings[name] = value
        elif isinstance(value, (int, float)):
            if isinstance(value, float) and not math.isfinite(value):
                continue
            bindings[name] = value
    ans = _scope.get("ans")
    report = {
        "status": "ok",
        "bindings": bindings,
        "ans": None,
        "error_type": "",
        "error_msg": "",
    }
    if isinstance(ans, bool) or isinstance(ans, (int, str)):
        report["ans"] = ans
    elif isinstance(ans, float) and math.isfinite(ans):
        report["ans"] = ans
    elif ans is None:
        report["status"] = "no_ans"
        report["error_msg"] = "program finished without a usable ans"
    else:
        report["status"] = "no_ans"
        report["error_msg"] = "ans has unsupported type %s" % type(ans).__name__
    sys.stdout.write("\\n##XOT##" + json.dumps(report, sort_keys=True) + "\\n")
    sys.stdout.flush()


_xot_export_(globals())
'''


def instrument(program: str) -> str:
    """Append the value-export footer to a raw generated program.

    Pure text transform; the input is not parsed or validated here.
    """
    if program and not program.endswith("\n"):
        program = program + "\n"
    return program + _FOOTER
