from __future__ import annotations

import random
from fractions import Fraction

import pytest

from xot.core import (
    COT,
    EOT,
    POT,
    Answer,
    Method,
    TokenUsage,
    answers_equal,
    format_rational,
    method_by_name,
    normalize_answer,
    parse_method_order,
    register_method,
    sum_usage,
)


# ---------------------------------------------------------------------
# Method registry
# ---------------------------------------------------------------------

def test_builtin_methods():
    assert method_by_name("pot") is POT
    assert method_by_name("EoT") is EOT
    assert COT.supports_passive is False and COT.supports_active is False
    assert POT.supports_passive and POT.supports_active


def test_parse_method_order():
    assert parse_method_order("PEC") == (POT, EOT, COT)
    assert parse_method_order("ep") == (EOT, POT)
    with pytest.raises(ValueError):
        parse_method_order("PXQ")
    with pytest.raises(ValueError):
        parse_method_order("")


def test_register_rejects_duplicates():
    with pytest.raises(ValueError):
        register_method(Method("pot", "Z", True, True))
    with pytest.raises(ValueError):
        register_method(Method("fresh", "P", True, True))


# ---------------------------------------------------------------------
# Answer normalization
# ---------------------------------------------------------------------

def test_normalize_currency_and_separators():
    assert normalize_answer("$1,234.5", "numeric") == Answer.numeric(Fraction("1234.5"))
    assert normalize_answer(" -$3,000 ", "numeric") == Answer.numeric(-3000)
    assert normalize_answer("€12", "numeric") == Answer.numeric(12)


def test_normalize_percent_divides():
    assert normalize_answer("50%", "numeric") == Answer.numeric(Fraction(1, 2))
    assert normalize_answer("12.5%", "numeric") == Answer.numeric(Fraction(1, 8))


def test_normalize_trailing_period_and_sign():
    assert normalize_answer("18.", "numeric") == Answer.numeric(18)
    assert normalize_answer("+7", "numeric") == Answer.numeric(7)
    assert normalize_answer("-0.25", "numeric") == Answer.numeric(Fraction(-1, 4))


def test_normalize_rejects_prose():
    assert normalize_answer("answer: 12", "numeric").is_none
    assert normalize_answer("twelve", "numeric").is_none
    assert normalize_answer("", "numeric").is_none
    assert normalize_answer(None, "numeric").is_none


def test_normalize_choice_labels():
    assert normalize_answer(" b)", "choice") == Answer.choice("B")
    assert normalize_answer("(D)", "choice") == Answer.choice("D")
    assert normalize_answer("A.", "choice") == Answer.choice("A")
    assert normalize_answer("F", "choice").is_none
    assert normalize_answer("BD", "choice").is_none
    assert normalize_answer("12", "choice").is_none


def test_normalize_numbers_passed_directly():
    assert normalize_answer(18, "numeric") == Answer.numeric(18)
    assert normalize_answer(0.5, "numeric") == Answer.numeric(Fraction(1, 2))
    assert normalize_answer(True, "numeric") == Answer.numeric(1)
    assert normalize_answer(float("nan"), "numeric").is_none
    assert normalize_answer(float("inf"), "numeric").is_none


# ---------------------------------------------------------------------
# Answer equality
# ---------------------------------------------------------------------

def test_missing_answers_never_match():
    assert not answers_equal(Answer.none(), Answer.none())
    assert not answers_equal(Answer.none(), Answer.numeric(3))
    assert not answers_equal(Answer.numeric(3), Answer.none())


def test_choice_equality_is_exact():
    assert answers_equal(Answer.choice("b"), Answer.choice("B"))
    assert not answers_equal(Answer.choice("A"), Answer.choice("B"))
    assert not answers_equal(Answer.choice("A"), Answer.numeric(1))


def test_numeric_tolerance():
    gold = Answer.numeric(Fraction(1, 3))
    assert answers_equal(Answer.numeric(Fraction("0.3333")), gold)
    assert not answers_equal(Answer.numeric(Fraction("0.333")), gold)
    big = Answer.numeric(1000000)
    assert answers_equal(Answer.numeric(Fraction("1000099.9")), big)
    assert not answers_equal(Answer.numeric(Fraction("1000101")), big)
    tiny = Answer.numeric(0)
    assert answers_equal(Answer.numeric(Fraction(1, 10**6)), tiny)
    assert not answers_equal(Answer.numeric(Fraction(2, 10**6)), tiny)


def test_tolerance_is_relative_to_reference():
    a = Answer.numeric(Fraction("10001"))
    b = Answer.numeric(Fraction("10000"))
    assert answers_equal(a, b)


# ---------------------------------------------------------------------
# Token usage
# ---------------------------------------------------------------------

def test_usage_total_weights_output_double():
    assert TokenUsage(100, 50).total() == 200
    assert TokenUsage(0, 0).total() == 0


def test_usage_sum_componentwise():
    total = sum_usage([TokenUsage(100, 50), TokenUsage(30, 10)])
    assert total == TokenUsage(130, 60)
    assert total.total() == 250


def test_usage_estimated_flag_propagates():
    total = TokenUsage(1, 1) + TokenUsage(2, 2, estimated=True)
    assert total.estimated


def test_usage_total_linearity_property():
    rng = random.Random(7)
    for _ in range(200):
        parts = [
            TokenUsage(rng.randint(0, 5000), rng.randint(0, 5000))
            for _ in range(rng.randint(0, 6))
        ]
        total = sum_usage(parts)
        assert total.total() == sum(p.total() for p in parts)
        assert total.input == sum(p.input for p in parts)
        assert total.output == sum(p.output for p in parts)


# ---------------------------------------------------------------------
# Rational display
# ---------------------------------------------------------------------

def test_format_rational():
    assert format_rational(Fraction(20)) == "20"
    assert format_rational(Fraction(-3)) == "-3"
    assert format_rational(Fraction(1, 2)) == "0.5"
    assert format_rational(Fraction(-5, 4)) == "-1.25"
    assert format_rational(Fraction(1, 3)) == "1/3"
