"""Shared test doubles and factories for the solver test suite."""

from __future__ import annotations

from fractions import Fraction

from xot.core import Answer, Question, Solution, TokenUsage
from xot.gateway import Completion


class QueueGateway:
    """Hands out canned completions in order, remembering every prompt."""

    provider_id = "test"
    model = "scripted"

    def __init__(self, texts=(), usage=TokenUsage(100, 50)):
        self.texts = list(texts)
        self.usage = usage
        self.prompts = []

    def complete(self, prompt, params):
        self.prompts.append(prompt)
        if not self.texts:
            raise AssertionError("gateway called more times than scripted")
        return Completion(self.texts.pop(0), self.usage)


class RefusingGateway:
    """Fails the test if anything tries to call the model."""

    provider_id = "test"
    model = "scripted"

    def complete(self, prompt, params):
        raise AssertionError("gateway must not be called here")


class RefusingExecutor:
    def run_pot(self, program):
        raise AssertionError("executor must not be called here")

    def run_assertions(self, base, assertions, bindings):
        raise AssertionError("executor must not be called here")


def make_question(
    text="A farmer has 12 sheep and buys 6 more. How many sheep?",
    gold=18,
    qid="q1",
    dataset="",
    options=None,
):
    if options is not None:
        gold_answer = Answer.choice(gold)
    else:
        gold_answer = Answer.numeric(gold)
    return Question(qid, text, gold_answer, dataset=dataset, options=options)


def make_solution(method, value=None, error=None, bindings=None, usage=TokenUsage(10, 5)):
    if value is None:
        answer = Answer.none()
    elif isinstance(value, str):
        answer = Answer.choice(value)
    else:
        answer = Answer.numeric(Fraction(value))
    return Solution(
        method=method,
        raw="scripted",
        artifact=None,
        answer=answer,
        bindings=bindings or {},
        usage=usage,
        error=error,
    )
