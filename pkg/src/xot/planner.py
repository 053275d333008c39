"""Method selection.

The model is consulted once, before the first attempt, and only to pick
between the program and equation methods; everything afterwards walks a
fixed preference order over whatever methods remain. A selection the
parser cannot understand, or one naming a method that is not available,
falls back to that same order, as does any provider failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .core import COT, EOT, POT, Method, Question, parse_method_order
from .gateway import DecodingParams, Gateway, ProviderError
from .prompts import PromptLibrary

PLAN_STOP = ("Question:",)
DEFAULT_FALLBACK_ORDER = "PEC"

_PATTERNS: Tuple[Tuple[str, Method], ...] = (
    ("python program", POT),
    ("linear equation", EOT),
    ("chain", COT),
)


@dataclass(frozen=True)
class PlanDecision:
    chosen: Method
    source: str  # "llm" | "fallback"
    raw: str = ""


def parse_plan_output(text: str) -> Optional[Method]:
    """Map completion text to a method by earliest phrase occurrence."""
    lowered = text.lower()
    hits = []
    for pattern, method in _PATTERNS:
        index = lowered.find(pattern)
        if index >= 0:
            hits.append((index, method))
    if not hits:
        return None
    return min(hits, key=lambda hit: hit[0])[1]


class Planner:
    def __init__(
        self,
        library: PromptLibrary,
        gateway: Gateway,
        mode: str = "llm",
        fallback_order: str = DEFAULT_FALLBACK_ORDER,
        params: DecodingParams = DecodingParams(stop=PLAN_STOP),
        exemplar_count: Optional[int] = None,
    ):
        if mode not in ("llm", "fixed"):
            raise ValueError("plan mode must be 'llm' or 'fixed', got %r" % mode)
        self.library = library
        self.gateway = gateway
        self.mode = mode
        self.fallback = parse_method_order(fallback_order)
        self.params = params
        self.exemplar_count = exemplar_count

    def _fallback_choice(self, remaining: Sequence[Method]) -> Method:
        for method in self.fallback:
            if method in remaining:
                return method
        return remaining[0]

    def plan(self, question: Question, remaining: Sequence[Method], t: int) -> PlanDecision:
        if not remaining:
            raise ValueError("no methods remain to plan over")
        if len(remaining) == 1:
            return PlanDecision(remaining[0], "fallback")
        if (
            self.mode == "llm"
            and t == 0
            and POT in remaining
            and EOT in remaining
        ):
            prompt = self.library.render(
                "planner",
                {"question": question.text},
                exemplar_count=self.exemplar_count,
            )
            try:
                completion = self.gateway.complete(prompt, self.params)
            except ProviderError:
                return PlanDecision(self._fallback_choice(remaining), "fallback")
            parsed = parse_plan_output(completion.text)
            if parsed in (POT, EOT) and parsed in remaining:
                return PlanDecision(parsed, "llm", completion.text)
            return PlanDecision(self._fallback_choice(remaining), "fallback", completion.text)
        return PlanDecision(self._fallback_choice(remaining), "fallback")
