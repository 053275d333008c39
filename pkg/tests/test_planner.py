from __future__ import annotations

import random

import pytest

from support import QueueGateway, RefusingGateway, make_question
from xot.core import COT, EOT, POT
from xot.gateway import ProviderError
from xot.planner import Planner, parse_plan_output
from xot.prompts import PromptLibrary

LIBRARY = PromptLibrary()


class FailingGateway:
    provider_id = "test"
    model = "scripted"

    def complete(self, prompt, params):
        raise ProviderError("provider down", 500)


def make_planner(gateway, **kwargs):
    return Planner(LIBRARY, gateway, **kwargs)


# ---------------------------------------------------------------------
# Output parsing
# ---------------------------------------------------------------------

def test_parse_plan_output_basic():
    assert parse_plan_output("System of linear equations") is EOT
    assert parse_plan_output("Python Program") is POT
    assert parse_plan_output("I would use the python program method.") is POT
    assert parse_plan_output("chain of thought") is COT
    assert parse_plan_output("no idea") is None
    assert parse_plan_output("") is None


def test_parse_plan_output_earliest_mention_wins():
    assert parse_plan_output("Chain of thought, not Python Program") is COT
    assert parse_plan_output("Either Python Program or a linear equation") is POT


# ---------------------------------------------------------------------
# Planning rules
# ---------------------------------------------------------------------

def test_singleton_needs_no_model():
    planner = make_planner(RefusingGateway())
    decision = planner.plan(make_question(), (COT,), 2)
    assert decision.chosen is COT
    assert decision.source == "fallback"


def test_llm_choice_between_program_and_equations():
    gateway = QueueGateway(["System of linear equations"])
    planner = make_planner(gateway)
    decision = planner.plan(make_question(), (POT, EOT, COT), 0)
    assert decision.chosen is EOT
    assert decision.source == "llm"
    assert gateway.prompts[0].endswith("Method:")


def test_unparseable_output_falls_back():
    planner = make_planner(QueueGateway(["hmm, tough one"]))
    decision = planner.plan(make_question(), (POT, EOT, COT), 0)
    assert decision.chosen is POT
    assert decision.source == "fallback"


def test_out_of_set_choice_falls_back():
    planner = make_planner(QueueGateway(["chain of thought"]))
    decision = planner.plan(make_question(), (POT, EOT, COT), 0)
    assert decision.chosen is POT
    assert decision.source == "fallback"


def test_no_llm_after_first_iteration():
    planner = make_planner(RefusingGateway())
    decision = planner.plan(make_question(), (POT, EOT), 1)
    assert decision.chosen is POT
    assert decision.source == "fallback"


def test_no_llm_when_either_choice_is_gone():
    planner = make_planner(RefusingGateway())
    assert planner.plan(make_question(), (POT, COT), 0).chosen is POT
    assert planner.plan(make_question(), (EOT, COT), 0).chosen is EOT


def test_fixed_mode_never_calls_model():
    planner = make_planner(RefusingGateway(), mode="fixed")
    decision = planner.plan(make_question(), (POT, EOT, COT), 0)
    assert decision.chosen is POT


def test_fallback_order_is_honored():
    planner = make_planner(RefusingGateway(), mode="fixed", fallback_order="EPC")
    assert planner.plan(make_question(), (POT, EOT, COT), 0).chosen is EOT
    assert planner.plan(make_question(), (POT, COT), 0).chosen is POT
    assert planner.plan(make_question(), (COT,), 0).chosen is COT


def test_provider_failure_falls_back():
    planner = make_planner(FailingGateway())
    decision = planner.plan(make_question(), (POT, EOT, COT), 0)
    assert decision.chosen is POT
    assert decision.source == "fallback"


def test_invalid_mode_rejected():
    with pytest.raises(ValueError):
        make_planner(RefusingGateway(), mode="wild")


def test_chosen_method_always_among_remaining():
    rng = random.Random(99)
    outputs = [
        "Python Program",
        "System of linear equations",
        "chain of thought",
        "gibberish",
        "",
    ]
    all_methods = [POT, EOT, COT]
    for _ in range(200):
        k = rng.randint(1, 3)
        remaining = tuple(rng.sample(all_methods, k))
        t = rng.randint(0, 2)
        planner = make_planner(QueueGateway([rng.choice(outputs)] * 2))
        decision = planner.plan(make_question(), remaining, t)
        assert decision.chosen in remaining
