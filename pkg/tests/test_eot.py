"""Equation engine tests.

The property tests build systems forward from a known assignment, so
expected values come from construction rather than from the solver.
"""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from xot.eot import (
    BinOp,
    DivisionByZero,
    EotSyntaxError,
    Inconsistent,
    NonlinearError,
    Num,
    Underdetermined,
    Var,
    lower,
    parse,
    run,
    solve,
)

ALYSSA = """\
% Assume Alyssa ate x chicken nuggets
total = 100
alyssa + keely + kendall = total
% Keely and Kendall each ate twice as much
keely = 2 * alyssa
kendall = 2 * alyssa
% The answer is alyssa
ans = alyssa
"""


def frac(a, b=1):
    return Fraction(a, b)


# ---------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------

def test_parse_collects_equations_and_comments():
    program = parse(ALYSSA)
    assert len(program.equations) == 5
    assert [c[1] for c in program.comments] == [
        "Assume Alyssa ate x chicken nuggets",
        "Keely and Kendall each ate twice as much",
        "The answer is alyssa",
    ]
    assert program.equations[0].line_no == 2


def test_parse_rejects_double_equals():
    with pytest.raises(EotSyntaxError) as err:
        parse("x == 3\nans = x")
    assert err.value.line_no == 1


def test_parse_rejects_empty_and_comment_only():
    for text in ("", "   \n\n", "% just a remark\n"):
        with pytest.raises(EotSyntaxError):
            parse(text)


def test_parse_requires_ans_mention():
    with pytest.raises(EotSyntaxError) as err:
        parse("x = 3\ny = x + 1\n")
    assert "ans" in err.value.reason


def test_parse_rejects_stray_tokens():
    with pytest.raises(EotSyntaxError):
        parse("ans = 3 4")
    with pytest.raises(EotSyntaxError):
        parse("= 3")
    with pytest.raises(EotSyntaxError):
        parse("ans = (3")
    with pytest.raises(EotSyntaxError):
        parse("ans = 3 ?")


def test_unary_minus_binds_to_factor():
    solution = solve(parse("x = -(2 + 3) * 4\nans = x"))
    assert solution["x"] == frac(-20)


def test_precedence_and_parens():
    assert run("ans = 2 + 3 * 4").answer == frac(14)
    assert run("ans = (2 + 3) * 4").answer == frac(20)
    assert run("ans = 2 - 3 - 4").answer == frac(-5)
    assert run("ans = 12 / 4 / 3").answer == frac(1)


def test_unicode_operator_aliases():
    assert run("ans = 5 − 3").answer == frac(2)
    assert run("ans = 5 × 3").answer == frac(15)
    assert run("ans = 5 ÷ 2").answer == frac(5, 2)


def test_trailing_dot_number():
    assert run("ans = 5. + 0.5").answer == frac(11, 2)


# ---------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------

def test_lower_moves_everything_left():
    rows, unknowns = lower(parse("keely = 2 * alyssa\nans = keely"))
    assert unknowns == ["keely", "alyssa", "ans"]
    coeffs, const = rows[0]
    assert coeffs == {"keely": frac(1), "alyssa": frac(-2)}
    assert const == 0


def test_lower_drops_cancelled_terms():
    rows, unknowns = lower(parse("x - x = 0\nans = 3"))
    assert unknowns == ["x", "ans"]
    assert rows[0] == ({}, frac(0))


def test_product_of_variables_is_nonlinear():
    with pytest.raises(NonlinearError):
        solve(parse("x * y = 4\nans = x"))


def test_division_by_variable_is_nonlinear():
    with pytest.raises(NonlinearError):
        solve(parse("ans = 6 / x\nx = 2"))


def test_constant_division():
    assert run("ans = 6 / 2").answer == frac(3)


def test_division_by_zero_constant():
    with pytest.raises(DivisionByZero):
        solve(parse("ans = 5 / 0"))
    with pytest.raises(DivisionByZero):
        solve(parse("ans = 5 / (2 - 2)"))


def test_constant_times_constant_folds():
    assert run("ans = (2 + 1) * (4 - 1)").answer == frac(9)


# ---------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------

def test_two_by_two_unique():
    solution = solve(parse("x + y = 3\nx - y = 1\nans = x"))
    assert solution == {"x": frac(2), "y": frac(1), "ans": frac(2)}


def test_underdetermined_ans():
    with pytest.raises(Underdetermined):
        solve(parse("ans = x"))


def test_partial_solution_when_ans_pinned():
    solution = solve(parse("x - x = 0\nans = 3"))
    assert solution == {"ans": frac(3)}


def test_pinned_subset_with_free_variable():
    text = "a = 4\nans = a + b - b"
    solution = solve(parse(text))
    assert solution == {"a": frac(4), "ans": frac(4)}


def test_inconsistent_system():
    with pytest.raises(Inconsistent):
        solve(parse("x = 1\nx = 2\nans = x"))


def test_alyssa_end_to_end():
    outcome = run(ALYSSA)
    assert outcome.error is None
    assert outcome.answer == frac(20)
    assert outcome.bindings == {
        "total": frac(100),
        "alyssa": frac(20),
        "keely": frac(40),
        "kendall": frac(40),
        "ans": frac(20),
    }


def test_alyssa_with_leading_assumption_line():
    outcome = run("alyssa = x\n" + ALYSSA)
    assert outcome.error is None
    assert outcome.answer == frac(20)
    assert outcome.bindings["x"] == frac(20)


def test_run_carries_errors_as_data():
    for text, kind in (
        ("", "syntax"),
        ("x == 3\nans = x", "syntax"),
        ("x * y = 4\nans = x", "nonlinear"),
        ("ans = 1 / 0", "division_by_zero"),
        ("x = 1\nx = 2\nans = x", "inconsistent"),
        ("ans = x", "underdetermined"),
    ):
        outcome = run(text)
        assert outcome.answer is None
        assert outcome.bindings == {}
        assert outcome.error is not None and outcome.error.kind == kind


def test_run_is_deterministic():
    assert run(ALYSSA) == run(ALYSSA)


# ---------------------------------------------------------------------
# Random round trips against a constructed assignment
# ---------------------------------------------------------------------

def _nonsingular_matrix(rng: random.Random, n: int) -> list[list[Fraction]]:
    lower_tri = [[frac(0)] * n for _ in range(n)]
    upper_tri = [[frac(0)] * n for _ in range(n)]
    for i in range(n):
        lower_tri[i][i] = frac(rng.choice([1, -1, 2, 3]))
        upper_tri[i][i] = frac(rng.choice([1, -1, 2, -3]))
        for j in range(i):
            lower_tri[i][j] = frac(rng.randint(-3, 3))
            upper_tri[j][i] = frac(rng.randint(-3, 3))
    return [
        [sum(lower_tri[i][k] * upper_tri[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]


def _eval(expr, values):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        return values[expr.name]
    if isinstance(expr, BinOp):
        left, right = _eval(expr.left, values), _eval(expr.right, values)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        return left / right
    return -_eval(expr.operand, values)


def _render_constant(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return "%d / %d" % (value.numerator, value.denominator)


def _render_term(coeff: Fraction, name: str, rng: random.Random) -> str:
    if coeff == 1:
        return name
    if coeff.denominator == 1:
        if rng.random() < 0.5:
            return "%d * %s" % (coeff.numerator, name)
        return "%s * %d" % (name, coeff.numerator)
    return "%d * %s / %d" % (coeff.numerator, name, coeff.denominator)


def _join_terms(parts: list[tuple[Fraction, str]], rng: random.Random) -> str:
    pieces: list[str] = []
    for coeff, name in parts:
        if name == "":
            rendered = _render_constant(abs(coeff))
        else:
            rendered = _render_term(abs(coeff), name, rng)
        if not pieces:
            pieces.append(rendered if coeff >= 0 else "-" + rendered)
        else:
            pieces.append(("+ " if coeff >= 0 else "- ") + rendered)
    return " ".join(pieces) if pieces else "0"


def make_random_system(rng: random.Random, max_vars: int = 8):
    """Build equation text plus the assignment it was generated from."""
    n = rng.randint(1, max_vars)
    names = ["v%d" % i for i in range(n - 1)] + ["ans"]
    rng.shuffle(names)
    values = {
        name: frac(rng.randint(-99, 99), rng.randint(1, 12)) for name in names
    }
    matrix = _nonsingular_matrix(rng, n)
    lines = []
    for i in range(n):
        terms = [
            (matrix[i][j], names[j]) for j in range(n) if matrix[i][j] != 0
        ]
        rhs_const = sum(matrix[i][j] * values[names[j]] for j in range(n))
        rng.shuffle(terms)
        split = rng.randint(0, max(0, len(terms) - 1))
        lhs_terms = terms[: split + 1]
        rhs_terms = [(-c, v) for c, v in terms[split + 1 :]]
        lhs = _join_terms(lhs_terms, rng)
        rhs = _join_terms([(rhs_const, "")] + rhs_terms, rng)
        if rng.random() < 0.3:
            lines.append("%% step %d" % i)
        lines.append("%s = %s" % (lhs, rhs))
    return "\n".join(lines) + "\n", values


def test_random_systems_round_trip_exactly():
    rng = random.Random(20260814)
    for _ in range(150):
        text, values = make_random_system(rng)
        program = parse(text)
        for eq in program.equations:
            assert _eval(eq.lhs, values) == _eval(eq.rhs, values)
        solution = solve(program)
        assert solution == values
        assert run(text).answer == values["ans"]
