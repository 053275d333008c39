"""Equation-of-thought engine.

Parses a line-oriented system of linear equations (one ``lhs = rhs`` per
line, ``%`` starts a comment) and solves it with exact rational
arithmetic. A valid program mentions the reserved identifier ``ans``;
its solved value is the answer.

Underdetermined systems still succeed when every variable of interest is
pinned: the solver returns values for all determined variables and omits
free ones, failing only if ``ans`` itself is not determined.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .core import SolutionError

ANSWER_NAME = "ans"

_ALIASES = {"−": "-", "×": "*", "÷": "/"}
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/()=]))"
)


# =====================================================================
# Errors
# =====================================================================

class EotError(Exception):
    """Base class for anything wrong with an equation program."""


class EotSyntaxError(EotError):
    def __init__(self, line_no: int, reason: str):
        super().__init__("line %d: %s" % (line_no, reason))
        self.line_no = line_no
        self.reason = reason


class NonlinearError(EotError):
    def __init__(self, term: str):
        super().__init__("nonlinear term: %s" % term)
        self.term = term


class DivisionByZero(EotError):
    def __init__(self, term: str):
        super().__init__("division by zero: %s" % term)
        self.term = term


class Inconsistent(EotError):
    def __init__(self) -> None:
        super().__init__("system has no solution")


class Underdetermined(EotError):
    def __init__(self, name: str):
        super().__init__("variable %r is not uniquely determined" % name)
        self.name = name


_ERROR_KINDS = {
    EotSyntaxError: "syntax",
    NonlinearError: "nonlinear",
    DivisionByZero: "division_by_zero",
    Inconsistent: "inconsistent",
    Underdetermined: "underdetermined",
}


# =====================================================================
# Syntax tree
# =====================================================================

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Neg, BinOp]


@dataclass(frozen=True)
class Equation:
    lhs: Expr
    rhs: Expr
    line_no: int


@dataclass(frozen=True)
class EotProgram:
    equations: Tuple[Equation, ...]
    comments: Tuple[Tuple[int, str], ...]


def render_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        v = expr.value
        return str(v.numerator) if v.denominator == 1 else str(v)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        return "-%s" % _wrap(expr.operand)
    return "%s %s %s" % (_wrap(expr.left), expr.op, _wrap(expr.right))


def _wrap(expr: Expr) -> str:
    text = render_expr(expr)
    return "(%s)" % text if isinstance(expr, BinOp) else text


# =====================================================================
# Lexing and parsing
# =====================================================================

def _tokenize(line: str, line_no: int) -> List[Tuple[str, str]]:
    for raw, plain in _ALIASES.items():
        line = line.replace(raw, plain)
    tokens: List[Tuple[str, str]] = []
    pos = 0
    while pos < len(line):
        match = _TOKEN_RE.match(line, pos)
        if match is None:
            rest = line[pos:].strip()
            if not rest:
                break
            raise EotSyntaxError(line_no, "unexpected character %r" % rest[0])
        if match.lastgroup == "num":
            tokens.append(("num", match.group("num")))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group("ident")))
        else:
            tokens.append(("op", match.group("op")))
        pos = match.end()
    return tokens


class _Parser:
    """Recursive descent over one statement's token list."""

    def __init__(self, tokens: List[Tuple[str, str]], line_no: int):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no

    def peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise EotSyntaxError(self.line_no, "unexpected end of line")
        self.pos += 1
        return tok

    def statement(self) -> Tuple[Expr, Expr]:
        lhs = self.expr()
        tok = self.peek()
        if tok != ("op", "="):
            raise EotSyntaxError(self.line_no, "expected '='")
        self.take()
        rhs = self.expr()
        tok = self.peek()
        if tok is not None:
            raise EotSyntaxError(self.line_no, "unexpected %r" % tok[1])
        return lhs, rhs

    def expr(self) -> Expr:
        node = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        tok = self.peek()
        if tok == ("op", "-"):
            self.take()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Expr:
        kind, value = self.take()
        if kind == "num":
            return Num(Fraction(value if not value.endswith(".") else value[:-1]))
        if kind == "ident":
            return Var(value)
        if (kind, value) == ("op", "("):
            inner = self.expr()
            if self.peek() != ("op", ")"):
                raise EotSyntaxError(self.line_no, "expected ')'")
            self.take()
            return inner
        raise EotSyntaxError(self.line_no, "unexpected %r" % value)


def _walk_names(expr: Expr, out: List[str]) -> None:
    if isinstance(expr, Var):
        out.append(expr.name)
    elif isinstance(expr, Neg):
        _walk_names(expr.operand, out)
    elif isinstance(expr, BinOp):
        _walk_names(expr.left, out)
        _walk_names(expr.right, out)


def parse(text: str) -> EotProgram:
    """Parse program text into equations; comments are kept aside.

    Raises EotSyntaxError if any line violates the grammar, if there are
    no equations at all, or if no equation mentions ``ans``.
    """
    equations: List[Equation] = []
    comments: List[Tuple[int, str]] = []
    for line_no, line in enumerate(text.replace("\r\n", "\n").split("\n"), start=1):
        if "%" in line:
            line, comment = line.split("%", 1)
            comments.append((line_no, comment.strip()))
        if not line.strip():
            continue
        parser = _Parser(_tokenize(line, line_no), line_no)
        lhs, rhs = parser.statement()
        equations.append(Equation(lhs, rhs, line_no))
    if not equations:
        raise EotSyntaxError(0, "no equations")
    names: List[str] = []
    for eq in equations:
        _walk_names(eq.lhs, names)
        _walk_names(eq.rhs, names)
    if ANSWER_NAME not in names:
        raise EotSyntaxError(0, "no equation mentions %r" % ANSWER_NAME)
    return EotProgram(tuple(equations), tuple(comments))


# =====================================================================
# Lowering to affine rows
# =====================================================================

class _Affine:
    """const + sum(coeffs[name] * name), all exact rationals."""

    __slots__ = ("const", "coeffs")

    def __init__(self, const: Fraction, coeffs: Dict[str, Fraction]):
        self.const = const
        self.coeffs = coeffs

    @property
    def is_const(self) -> bool:
        return not self.coeffs

    def combine(self, other: "_Affine", sign: int) -> "_Affine":
        coeffs = dict(self.coeffs)
        for name, coeff in other.coeffs.items():
            coeffs[name] = coeffs.get(name, Fraction(0)) + sign * coeff
        return _Affine(self.const + sign * other.const, coeffs)

    def scale(self, factor: Fraction) -> "_Affine":
        return _Affine(
            self.const * factor,
            {name: coeff * factor for name, coeff in self.coeffs.items()},
        )


def _fold(expr: Expr) -> _Affine:
    if isinstance(expr, Num):
        return _Affine(expr.value, {})
    if isinstance(expr, Var):
        return _Affine(Fraction(0), {expr.name: Fraction(1)})
    if isinstance(expr, Neg):
        return _fold(expr.operand).scale(Fraction(-1))
    left = _fold(expr.left)
    right = _fold(expr.right)
    if expr.op == "+":
        return left.combine(right, 1)
    if expr.op == "-":
        return left.combine(right, -1)
    if expr.op == "*":
        if right.is_const:
            return left.scale(right.const)
        if left.is_const:
            return right.scale(left.const)
        raise NonlinearError(render_expr(expr))
    if not right.is_const:
        raise NonlinearError(render_expr(expr))
    if right.const == 0:
        raise DivisionByZero(render_expr(expr))
    return left.scale(1 / right.const)


def lower(program: EotProgram) -> Tuple[List[Tuple[Dict[str, Fraction], Fraction]], List[str]]:
    """Reduce equations to rows of (coefficients, constant) meaning
    ``sum(coeff * var) = constant``. Also returns the unknowns in order
    of first appearance in the source."""
    unknowns: List[str] = []
    seen = set()
    for eq in program.equations:
        names: List[str] = []
        _walk_names(eq.lhs, names)
        _walk_names(eq.rhs, names)
        for name in names:
            if name not in seen:
                seen.add(name)
                unknowns.append(name)
    rows = []
    for eq in program.equations:
        form = _fold(eq.lhs).combine(_fold(eq.rhs), -1)
        coeffs = {n: c for n, c in form.coeffs.items() if c != 0}
        rows.append((coeffs, -form.const))
    return rows, unknowns


# =====================================================================
# Exact solve
# =====================================================================

def solve(program: EotProgram) -> Dict[str, Fraction]:
    """Solve for every determined variable.

    Eliminates with partial pivoting by magnitude, entirely in Fraction
    arithmetic, so results are exact. Raises Inconsistent when no
    assignment satisfies the system and Underdetermined when ``ans`` is
    left with degrees of freedom.
    """
    rows, unknowns = lower(program)
    n = len(unknowns)
    index = {name: i for i, name in enumerate(unknowns)}
    matrix = []
    for coeffs, const in rows:
        row = [Fraction(0)] * (n + 1)
        for name, coeff in coeffs.items():
            row[index[name]] = coeff
        row[n] = const
        matrix.append(row)

    pivot_cols: List[int] = []
    rank = 0
    for col in range(n):
        best = None
        for i in range(rank, len(matrix)):
            if matrix[i][col] != 0 and (
                best is None or abs(matrix[i][col]) > abs(matrix[best][col])
            ):
                best = i
        if best is None:
            continue
        matrix[rank], matrix[best] = matrix[best], matrix[rank]
        pivot = matrix[rank][col]
        matrix[rank] = [v / pivot for v in matrix[rank]]
        for i in range(len(matrix)):
            if i != rank and matrix[i][col] != 0:
                factor = matrix[i][col]
                matrix[i] = [a - factor * b for a, b in zip(matrix[i], matrix[rank])]
        pivot_cols.append(col)
        rank += 1

    for i in range(rank, len(matrix)):
        if matrix[i][n] != 0:
            raise Inconsistent()

    free = [c for c in range(n) if c not in set(pivot_cols)]
    solution: Dict[str, Fraction] = {}
    for k, col in enumerate(pivot_cols):
        if all(matrix[k][f] == 0 for f in free):
            solution[unknowns[col]] = matrix[k][n]
    if ANSWER_NAME not in solution:
        raise Underdetermined(ANSWER_NAME)
    return solution


# =====================================================================
# End to end
# =====================================================================

@dataclass(frozen=True)
class EotOutcome:
    """Solve attempt result: answer and bindings, or a carried error."""

    answer: Optional[Fraction]
    bindings: Dict[str, Fraction]
    error: Optional[SolutionError]


def run(text: str) -> EotOutcome:
    """Parse and solve; errors become data instead of propagating."""
    try:
        solution = solve(parse(text))
    except EotError as exc:
        kind = _ERROR_KINDS.get(type(exc), "syntax")
        return EotOutcome(None, {}, SolutionError(kind, str(exc)))
    return EotOutcome(solution[ANSWER_NAME], solution, None)
