"""The three reasoning methods behind one interface.

Free text is mined for an "answer is" phrase; programs are executed and
their ``ans`` variable taken; equation systems are solved exactly. A
failed attempt keeps its error so the verifier can reject it passively.
"""

from __future__ import annotations

import re
from typing import Optional

from . import eot
from .core import (
    COT,
    EOT,
    POT,
    Answer,
    Method,
    Question,
    Solution,
    normalize_answer,
)
from .executor import Executor
from .gateway import DecodingParams, Gateway
from .prompts import PromptLibrary

REASON_STOP = ("Question:",)

_ANSWER_IS_RE = re.compile(r"answer is\s*:?\s*", re.IGNORECASE)
_NUM_TOKEN_RE = re.compile(r"[-+]?[$€£¥]?\d[\d,]*(?:\.\d+)?%?")
_CHOICE_TOKEN_RE = re.compile(r"\(([A-Ea-e])\)|\b([A-Ea-e])\)|\b([A-E])\b")
_FENCE_RE = re.compile(r"```[a-zA-Z]*\s*\n(.*?)```", re.DOTALL)


def strip_code_fence(text: str) -> str:
    match = _FENCE_RE.search(text)
    if match:
        return match.group(1).strip("\n")
    return text.strip("\n")


def _choice_from(text: str, from_end: bool = False) -> Answer:
    matches = list(_CHOICE_TOKEN_RE.finditer(text))
    if from_end:
        matches.reverse()
    for match in matches:
        label = match.group(1) or match.group(2) or match.group(3)
        return Answer.choice(label)
    return Answer.none()


def extract_cot_answer(text: str, kind: str) -> Answer:
    """Answer token from free text.

    Prefers the token after the last usable "answer is" phrase, then
    falls back to the last standalone number (or choice letter). Returns
    none() rather than guessing when nothing parses.
    """
    for match in reversed(list(_ANSWER_IS_RE.finditer(text))):
        tail = text[match.end(): match.end() + 80]
        if kind == "choice":
            answer = _choice_from(tail)
        else:
            token = _NUM_TOKEN_RE.search(tail)
            answer = normalize_answer(token.group(0), kind) if token else Answer.none()
        if not answer.is_none:
            return answer
    if kind == "choice":
        return _choice_from(text, from_end=True)
    for token in reversed(_NUM_TOKEN_RE.findall(text)):
        answer = normalize_answer(token, kind)
        if not answer.is_none:
            return answer
    return Answer.none()


def answer_from_value(value, kind: str) -> Answer:
    """Answer for an executed/solved value, refusing to guess: numeric
    values never satisfy a choice question and vice versa."""
    if value is None:
        return Answer.none()
    if isinstance(value, str):
        return normalize_answer(value, kind)
    return normalize_answer(value, kind) if kind == "numeric" else Answer.none()


class ReasoningModule:
    """Renders the method prompt, calls the model, grounds the output."""

    def __init__(
        self,
        library: PromptLibrary,
        gateway: Gateway,
        executor: Optional[Executor],
        params: DecodingParams = DecodingParams(stop=REASON_STOP),
        exemplar_count: Optional[int] = None,
    ):
        self.library = library
        self.gateway = gateway
        self.executor = executor
        self.params = params
        self.exemplar_count = exemplar_count

    def render_prompt(
        self,
        method: Method,
        question: Question,
        hint: Optional[str] = None,
        exemplar_seed: Optional[int] = None,
    ) -> str:
        text = question.text
        if hint:
            text = text + "\n\nHints: " + hint
        return self.library.render(
            method.name,
            {"question": text},
            exemplar_count=self.exemplar_count,
            exemplar_seed=exemplar_seed,
        )

    def reason(
        self,
        method: Method,
        question: Question,
        hint: Optional[str] = None,
        exemplar_seed: Optional[int] = None,
    ) -> Solution:
        prompt = self.render_prompt(method, question, hint, exemplar_seed)
        completion = self.gateway.complete(prompt, self.params)
        text = completion.text
        if method == COT:
            return Solution(
                method=COT,
                raw=text,
                artifact=None,
                answer=extract_cot_answer(text, question.kind),
                usage=completion.usage,
            )
        if method == POT:
            if self.executor is None:
                raise RuntimeError("program method needs an executor")
            program = strip_code_fence(text)
            result = self.executor.run_pot(program)
            if result.ok:
                return Solution(
                    method=POT,
                    raw=text,
                    artifact=program,
                    answer=answer_from_value(result.ans, question.kind),
                    bindings=result.bindings,
                    usage=completion.usage,
                )
            return Solution(
                method=POT,
                raw=text,
                artifact=program,
                answer=Answer.none(),
                usage=completion.usage,
                error=result_error(result),
            )
        if method == EOT:
            program = strip_code_fence(text)
            outcome = eot.run(program)
            return Solution(
                method=EOT,
                raw=text,
                artifact=program,
                answer=answer_from_value(outcome.answer, question.kind),
                bindings=outcome.bindings,
                usage=completion.usage,
                error=outcome.error,
            )
        raise ValueError("no reasoning routine for method %r" % method.name)


def result_error(result):
    from .core import SolutionError

    return SolutionError(result.error_class or "runtime", result.detail)
