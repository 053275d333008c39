"""Shared value types: methods, answers, token usage, solutions, episodes.

Answers are exact rationals or choice labels. Numeric comparison uses a
mixed absolute/relative tolerance; a missing answer never equals anything,
including another missing answer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple, Union

ABS_TOL = Fraction(1, 10**6)
REL_TOL = Fraction(1, 10**4)

_CURRENCY = "$€£¥"
_NUMBER_RE = re.compile(r"\d[\d,]*(\.\d*)?|\.\d+")
_CHOICE_STRIP = " \t\r\n()[]{}<>.:;,*'\"-_"


# =====================================================================
# Reasoning methods
# =====================================================================

@dataclass(frozen=True)
class Method:
    """A reasoning method and what the verifier can do with its output."""

    name: str
    letter: str
    supports_passive: bool
    supports_active: bool


COT = Method("cot", "C", supports_passive=False, supports_active=False)
POT = Method("pot", "P", supports_passive=True, supports_active=True)
EOT = Method("eot", "E", supports_passive=True, supports_active=True)

METHODS: dict[str, Method] = {}
_BY_LETTER: dict[str, Method] = {}


def register_method(method: Method) -> Method:
    if method.name in METHODS:
        raise ValueError("duplicate method name: %s" % method.name)
    if method.letter in _BY_LETTER:
        raise ValueError("duplicate method letter: %s" % method.letter)
    METHODS[method.name] = method
    _BY_LETTER[method.letter] = method
    return method


for _m in (COT, POT, EOT):
    register_method(_m)


def method_by_name(name: str) -> Method:
    try:
        return METHODS[name.lower()]
    except KeyError:
        raise KeyError("unknown method: %r" % name) from None


def parse_method_order(order: str) -> Tuple[Method, ...]:
    """Turn a letter string such as 'PEC' into a method sequence."""
    out = []
    for ch in order.strip().upper():
        if ch not in _BY_LETTER:
            raise ValueError("unknown method letter: %r" % ch)
        out.append(_BY_LETTER[ch])
    if not out:
        raise ValueError("empty method order")
    return tuple(out)


# =====================================================================
# Answers
# =====================================================================

@dataclass(frozen=True)
class Answer:
    """A final answer: an exact rational, a choice label, or nothing."""

    kind: str  # "numeric" | "choice" | "none"
    value: Union[Fraction, str, None] = None

    @classmethod
    def numeric(cls, value: Union[Fraction, int, str]) -> "Answer":
        return cls("numeric", Fraction(value))

    @classmethod
    def choice(cls, label: str) -> "Answer":
        return cls("choice", label.strip().upper())

    @classmethod
    def none(cls) -> "Answer":
        return cls("none", None)

    @property
    def is_none(self) -> bool:
        return self.kind == "none"

    def display(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "choice":
            return str(self.value)
        return format_rational(self.value)


def format_rational(value: Fraction) -> str:
    """Render a rational compactly: integers bare, otherwise a decimal
    when exact in <= 12 places, else numerator/denominator."""
    if value.denominator == 1:
        return str(value.numerator)
    for places in range(1, 13):
        scaled = value * 10**places
        if scaled.denominator == 1:
            text = "%d" % abs(scaled.numerator)
            text = text.rjust(places + 1, "0")
            sign = "-" if value < 0 else ""
            return "%s%s.%s" % (sign, text[:-places], text[-places:])
    return "%d/%d" % (value.numerator, value.denominator)


def _parse_decimal(text: str) -> Optional[Fraction]:
    s = text.strip()
    sign = ""
    if s.startswith(("+", "-")):
        sign, s = s[0], s[1:].lstrip()
    while s[:1] and s[:1] in _CURRENCY:
        s = s[1:].lstrip()
    if not sign and s.startswith(("+", "-")):
        sign, s = s[0], s[1:].lstrip()
    percent = s.endswith("%")
    if percent:
        s = s[:-1].rstrip()
    if s.endswith("."):
        s = s[:-1]
    if not _NUMBER_RE.fullmatch(s):
        return None
    value = Fraction(sign + s.replace(",", ""))
    return value / 100 if percent else value


def normalize_answer(raw: Union[str, int, float, Fraction, None], kind: str) -> Answer:
    """Turn an extracted token into an Answer, or none() if unusable.

    Numeric handles thousand separators, a leading currency symbol, a
    trailing percent sign (divides by 100) and a trailing period.
    Choice accepts a single letter A..E, ignoring surrounding punctuation.
    """
    if raw is None:
        return Answer.none()
    if isinstance(raw, bool):
        raw = int(raw)
    if isinstance(raw, (int, Fraction)):
        number: Optional[Fraction] = Fraction(raw)
    elif isinstance(raw, float):
        number = float_to_rational(raw)
    else:
        number = None
        text = str(raw)
        if kind == "choice":
            label = text.strip(_CHOICE_STRIP)
            if len(label) == 1 and label.upper() in "ABCDE":
                return Answer.choice(label)
            return Answer.none()
        number = _parse_decimal(text)
    if number is None:
        return Answer.none()
    if kind == "choice":
        return Answer.none()
    return Answer("numeric", number)


def float_to_rational(value: float) -> Optional[Fraction]:
    """Exact rational for a finite float, reading its shortest repr."""
    if value != value or value in (float("inf"), float("-inf")):
        return None
    return Fraction(repr(value))


def answers_equal(a: Answer, b: Answer) -> bool:
    """Whether answer a matches reference b.

    Missing answers never match. Numerics match within
    ``|a - b| <= max(1e-6, 1e-4 * |b|)``; choices match exactly.
    """
    if a.is_none or b.is_none or a.kind != b.kind:
        return False
    if a.kind == "choice":
        return a.value == b.value
    tol = max(ABS_TOL, REL_TOL * abs(b.value))
    return abs(a.value - b.value) <= tol


# =====================================================================
# Token accounting
# =====================================================================

@dataclass(frozen=True)
class TokenUsage:
    """Prompt and completion token counts for one or more model calls.

    ``estimated`` marks counts approximated locally because the provider
    response carried no usage block.
    """

    input: int = 0
    output: int = 0
    estimated: bool = False

    def total(self) -> int:
        # Completion tokens are billed at twice the prompt rate.
        return self.input + self.output * 2

    def __add__(self, other: "TokenUsage") -> "TokenUsage":
        return TokenUsage(
            self.input + other.input,
            self.output + other.output,
            self.estimated or other.estimated,
        )


def sum_usage(parts: Sequence[TokenUsage]) -> TokenUsage:
    total = TokenUsage()
    for part in parts:
        total = total + part
    return total


# =====================================================================
# Questions and solutions
# =====================================================================

@dataclass(frozen=True)
class Question:
    """One problem instance with its gold answer."""

    id: str
    text: str
    gold: Answer
    dataset: str = ""
    options: Optional[Tuple[Tuple[str, str], ...]] = None

    @property
    def kind(self) -> str:
        return "choice" if self.options is not None else "numeric"


@dataclass(frozen=True)
class SolutionError:
    """Why a solution attempt failed to produce a trustworthy answer."""

    kind: str  # syntax | runtime | timeout | no_ans | harness_lost | nonlinear | ...
    detail: str = ""


@dataclass(frozen=True)
class Solution:
    """One attempt by one method.

    ``raw`` is the unmodified completion, ``artifact`` the executable or
    solvable payload extracted from it (None for free text), ``bindings``
    the intermediate variable values recovered from execution.
    """

    method: Method
    raw: str
    artifact: Optional[str]
    answer: Answer
    bindings: Mapping[str, Fraction] = field(default_factory=dict)
    usage: TokenUsage = TokenUsage()
    error: Optional[SolutionError] = None


@dataclass(frozen=True)
class VerificationOutcome:
    """Verdict of the verification stage for one solution."""

    passed: bool
    stage: str  # "skipped" | "passive" | "active"
    failure: Optional[SolutionError] = None
    assertions: Optional[str] = None


@dataclass(frozen=True)
class IterationRecord:
    t: int
    method: Method
    solution: Solution
    verification: VerificationOutcome


@dataclass(frozen=True)
class EpisodeResult:
    """Full trajectory for one question.

    ``exhausted`` is true exactly when every attempted method failed
    verification; the final answer is then the last attempt's answer.
    """

    question_id: str
    iterations: Tuple[IterationRecord, ...]
    final_answer: Answer
    final_method: Optional[Method]
    exhausted: bool
    usage: TokenUsage
    error: Optional[str] = None
