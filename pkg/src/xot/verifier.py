"""Solution checking in two stages.

Passive: a verifiable solution must carry no execution error and a real
answer. Active: the model writes assert statements over the recovered
variable values and those asserts are executed; a raised assertion
rejects the solution. Free-text solutions cannot be checked and are
accepted as-is. Choice-style questions skip the active stage by default
because their intermediate values rarely relate linearly to the label.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, Optional

from .core import (
    POT,
    Question,
    Solution,
    SolutionError,
    VerificationOutcome,
    format_rational,
)
from .executor import Executor
from .gateway import DecodingParams, Gateway
from .prompts import PromptLibrary

VERIFY_STOP = ("Question:",)
_ASSERT_RE = re.compile(r"assert(\s|$)")


def filter_assertion_lines(text: str) -> str:
    """Keep only assert statements and comments; drop everything else."""
    kept = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#") or _ASSERT_RE.match(stripped):
            kept.append(stripped)
    return "\n".join(kept)


def render_bindings(bindings: Dict) -> str:
    return "\n".join(
        "%s = %s" % (name, format_rational(value)) for name, value in bindings.items()
    )


@dataclass(frozen=True)
class VerifyPolicy:
    mode: str = "passive_and_active"  # or "passive_only"
    dataset_overrides: Dict[str, str] = field(
        default_factory=lambda: {"aqua": "passive_only"}
    )

    def mode_for(self, question: Question) -> str:
        override = self.dataset_overrides.get(question.dataset)
        if override is not None:
            return override
        if question.kind == "choice":
            return "passive_only"
        return self.mode


class Verifier:
    def __init__(
        self,
        library: PromptLibrary,
        gateway: Gateway,
        executor: Optional[Executor],
        policy: VerifyPolicy = VerifyPolicy(),
        params: DecodingParams = DecodingParams(stop=VERIFY_STOP),
        exemplar_count: Optional[int] = None,
    ):
        self.library = library
        self.gateway = gateway
        self.executor = executor
        self.policy = policy
        self.params = params
        self.exemplar_count = exemplar_count

    def verify(self, question: Question, solution: Solution) -> VerificationOutcome:
        if not solution.method.supports_passive:
            return VerificationOutcome(True, "skipped")
        if solution.error is not None:
            return VerificationOutcome(False, "passive", failure=solution.error)
        if solution.answer.is_none:
            return VerificationOutcome(
                False,
                "passive",
                failure=SolutionError("no_answer", "no usable answer was produced"),
            )
        if (
            self.policy.mode_for(question) == "passive_only"
            or not solution.method.supports_active
            or not solution.bindings
        ):
            return VerificationOutcome(True, "passive")
        return self.verify_active(question, solution)

    def generate_assertions(self, question: Question, solution: Solution) -> str:
        prompt = self.library.render(
            "assert_" + solution.method.name,
            {
                "question": question.text,
                "bindings": render_bindings(dict(solution.bindings)),
            },
            exemplar_count=self.exemplar_count,
        )
        completion = self.gateway.complete(prompt, self.params)
        return filter_assertion_lines(completion.text)

    def verify_active(self, question: Question, solution: Solution) -> VerificationOutcome:
        if self.executor is None:
            return VerificationOutcome(True, "passive")
        assertions = self.generate_assertions(question, solution)
        if not assertions.strip():
            # Nothing checkable was produced; that is not evidence of error.
            return VerificationOutcome(True, "active", assertions="")
        base = solution.artifact if solution.method == POT else None
        outcome = self.executor.run_assertions(
            base, assertions, dict(solution.bindings)
        )
        if outcome.passed:
            return VerificationOutcome(True, "active", assertions=assertions)
        return VerificationOutcome(
            False,
            "active",
            failure=SolutionError("assertion", outcome.detail),
            assertions=assertions,
        )
