"""The solve loop: plan a method, attempt it, verify, switch on failure.

Methods are consumed from a working set until one attempt passes
verification or nothing is left; in the latter case the last attempt's
answer is returned and the episode is marked exhausted. Optional single
self-refinement reworks each attempt once before verification. Majority
voting over all methods is provided as a baseline; it runs every method
exactly once and never verifies.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from .core import (
    COT,
    EOT,
    POT,
    Answer,
    EpisodeResult,
    IterationRecord,
    Method,
    Question,
    Solution,
    TokenUsage,
    VerificationOutcome,
    answers_equal,
)
from .executor import Executor
from .gateway import DecodingParams, Gateway, MeteredGateway, ProviderError
from .planner import DEFAULT_FALLBACK_ORDER, Planner
from .prompts import PromptLibrary
from .reasoners import REASON_STOP, ReasoningModule
from .verifier import Verifier, VerifyPolicy

DEFAULT_METHODS: Tuple[Method, ...] = (POT, EOT, COT)


class GoldVerifier:
    """Upper-bound probe: accepts a solution iff it matches the gold."""

    def verify(self, question: Question, solution: Solution) -> VerificationOutcome:
        return VerificationOutcome(
            answers_equal(solution.answer, question.gold), "gold"
        )


@dataclass(frozen=True)
class VoteResult:
    question_id: str
    answer: Answer
    solutions: Tuple[Solution, ...]
    winner_method: Optional[Method]
    usage: TokenUsage


def majority_answer(
    solutions: Sequence[Solution],
) -> Tuple[Answer, Optional[Method]]:
    """Most common non-missing answer; ties go to the earliest method."""
    groups: list[list] = []  # [representative answer, count]
    for solution in solutions:
        if solution.answer.is_none:
            continue
        for group in groups:
            if answers_equal(solution.answer, group[0]):
                group[1] += 1
                break
        else:
            groups.append([solution.answer, 1])
    if not groups:
        return Answer.none(), None
    best = max(group[1] for group in groups)
    winners = [group[0] for group in groups if group[1] == best]
    if len(winners) == 1:
        chosen = winners[0]
    else:
        chosen = next(
            solution.answer for solution in solutions if not solution.answer.is_none
        )
    for solution in solutions:
        if answers_equal(solution.answer, chosen):
            return chosen, solution.method
    return chosen, None


class Engine:
    """Wires planner, reasoner and verifier over a shared model gateway.

    Component factories take the per-episode metered gateway so token
    accounting covers planning, reasoning, refinement and verification;
    tests inject scripted components through the same seam.
    """

    def __init__(
        self,
        library: PromptLibrary,
        gateway: Gateway,
        executor: Optional[Executor],
        methods: Sequence[Method] = DEFAULT_METHODS,
        plan_mode: str = "llm",
        fallback_order: str = DEFAULT_FALLBACK_ORDER,
        verify_policy: VerifyPolicy = VerifyPolicy(),
        params: DecodingParams = DecodingParams(stop=REASON_STOP),
        exemplar_count: Optional[int] = None,
        refine_rounds: int = 0,
        exemplar_seeds: Optional[Sequence[int]] = None,
        planner_factory: Optional[Callable[[Gateway], Planner]] = None,
        reasoner_factory: Optional[Callable[[Gateway], ReasoningModule]] = None,
        verifier_factory: Optional[Callable[[Gateway], Verifier]] = None,
    ):
        if refine_rounds not in (0, 1):
            raise ValueError("refine_rounds must be 0 or 1")
        self.library = library
        self.gateway = gateway
        self.executor = executor
        self.methods = tuple(methods)
        self.params = params
        self.exemplar_count = exemplar_count
        self.refine_rounds = refine_rounds
        self.exemplar_seeds = tuple(exemplar_seeds) if exemplar_seeds else None
        self.planner_factory = planner_factory or (
            lambda meter: Planner(
                library,
                meter,
                mode=plan_mode,
                fallback_order=fallback_order,
                params=params,
                exemplar_count=exemplar_count,
            )
        )
        self.reasoner_factory = reasoner_factory or (
            lambda meter: ReasoningModule(
                library, meter, executor, params=params, exemplar_count=exemplar_count
            )
        )
        self.verifier_factory = verifier_factory or (
            lambda meter: Verifier(
                library,
                meter,
                executor,
                policy=verify_policy,
                params=params,
                exemplar_count=exemplar_count,
            )
        )

    def _seed_for(self, t: int) -> Optional[int]:
        if self.exemplar_seeds is None:
            return None
        return self.exemplar_seeds[t % len(self.exemplar_seeds)]

    def solve_episode(self, question: Question) -> EpisodeResult:
        meter = MeteredGateway(self.gateway)
        planner = self.planner_factory(meter)
        reasoner = self.reasoner_factory(meter)
        verifier = self.verifier_factory(meter)

        remaining = list(self.methods)
        records: list[IterationRecord] = []
        error: Optional[str] = None
        t = 0
        try:
            while remaining:
                decision = planner.plan(question, tuple(remaining), t)
                remaining.remove(decision.chosen)
                solution = reasoner.reason(
                    decision.chosen, question, exemplar_seed=self._seed_for(t)
                )
                if self.refine_rounds >= 1:
                    solution = self._refine(
                        reasoner, meter, question, solution, self._seed_for(t)
                    )
                outcome = verifier.verify(question, solution)
                records.append(IterationRecord(t, decision.chosen, solution, outcome))
                if outcome.passed:
                    break
                t += 1
        except ProviderError as exc:
            error = str(exc)
        return self._result(question, records, meter.usage, error)

    def single_episode(self, question: Question, method: Method) -> EpisodeResult:
        """One method, one attempt, no verification."""
        meter = MeteredGateway(self.gateway)
        reasoner = self.reasoner_factory(meter)
        records: list[IterationRecord] = []
        error: Optional[str] = None
        try:
            solution = reasoner.reason(method, question, exemplar_seed=self._seed_for(0))
            records.append(
                IterationRecord(0, method, solution, VerificationOutcome(True, "skipped"))
            )
        except ProviderError as exc:
            error = str(exc)
        return self._result(question, records, meter.usage, error)

    def vote_episode(self, question: Question) -> VoteResult:
        """Every distinct method once; modal answer wins, no verification."""
        meter = MeteredGateway(self.gateway)
        reasoner = self.reasoner_factory(meter)
        solutions = []
        for method in dict.fromkeys(self.methods):
            solutions.append(
                reasoner.reason(method, question, exemplar_seed=self._seed_for(0))
            )
        answer, winner = majority_answer(solutions)
        return VoteResult(question.id, answer, tuple(solutions), winner, meter.usage)

    def _refine(
        self,
        reasoner: ReasoningModule,
        meter: Gateway,
        question: Question,
        first: Solution,
        seed: Optional[int],
    ) -> Solution:
        """Think twice: gather advice about the first attempt, retry with it."""
        if first.method == COT:
            hint = self.library.render(
                "refine_cot", {"answer": first.answer.display()}
            )
        else:
            prompt = self.library.render(
                "refine_" + first.method.name,
                {
                    "question": question.text,
                    "solution": first.artifact if first.artifact is not None else first.raw,
                },
                exemplar_count=self.exemplar_count,
            )
            hint = meter.complete(prompt, self.params).text.strip()
        return reasoner.reason(first.method, question, hint=hint, exemplar_seed=seed)

    def _result(
        self,
        question: Question,
        records: Sequence[IterationRecord],
        usage: TokenUsage,
        error: Optional[str],
    ) -> EpisodeResult:
        if records:
            last = records[-1]
            final_answer, final_method = last.solution.answer, last.method
            exhausted = not any(r.verification.passed for r in records)
        else:
            final_answer, final_method = Answer.none(), None
            exhausted = True
        return EpisodeResult(
            question_id=question.id,
            iterations=tuple(records),
            final_answer=final_answer,
            final_method=final_method,
            exhausted=exhausted,
            usage=usage,
            error=error,
        )
