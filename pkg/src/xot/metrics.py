"""Accuracy aggregation and verifier quality metrics.

The correctness matrix records, per question, which solving methods
produced a correct answer. The ceiling accuracy treats a question as
solved when any method got it right, which is what an always-right
answer checker would achieve when it can keep switching methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple


@dataclass
class CorrectnessMatrix:
    """Per-question, per-method correctness bits."""

    methods: Tuple[str, ...]
    rows: Dict[str, Dict[str, bool]] = field(default_factory=dict)

    def add(self, question_id: str, method: str, correct: bool) -> None:
        if method not in self.methods:
            raise ValueError("unknown method %r" % method)
        self.rows.setdefault(question_id, {})[method] = bool(correct)

    def question_ids(self) -> Tuple[str, ...]:
        return tuple(self.rows)


def oracle_accuracy(matrix: CorrectnessMatrix) -> float:
    """Fraction of questions solved by at least one method."""
    if not matrix.rows:
        return 0.0
    solved = sum(1 for bits in matrix.rows.values() if any(bits.values()))
    return solved / len(matrix.rows)


def per_method_accuracy(matrix: CorrectnessMatrix) -> Dict[str, float]:
    """Fraction of questions each method answered correctly.

    A question with no entry for a method counts as incorrect for that
    method, so every method is measured over the same denominator.
    """
    if not matrix.rows:
        return {method: 0.0 for method in matrix.methods}
    totals = {method: 0 for method in matrix.methods}
    for bits in matrix.rows.values():
        for method in matrix.methods:
            if bits.get(method, False):
                totals[method] += 1
    count = len(matrix.rows)
    return {method: totals[method] / count for method in matrix.methods}


def verifier_metrics(
    pairs: Sequence[Tuple[bool, bool]],
) -> Dict[str, Optional[float]]:
    """Quality of a pass/fail judge against ground-truth correctness.

    Each pair is ``(passed, correct)``. Positives are correct solutions,
    so a false positive is a wrong solution the judge accepted and a
    false negative is a correct solution the judge rejected. Rates whose
    denominator is empty are reported as None rather than as zero.
    """
    tp = fp = tn = fn = 0
    for passed, correct in pairs:
        if passed and correct:
            tp += 1
        elif passed and not correct:
            fp += 1
        elif not passed and not correct:
            tn += 1
        else:
            fn += 1
    total = tp + fp + tn + fn
    negatives = fp + tn
    positives = tp + fn
    return {
        "acc": (tp + tn) / total if total else None,
        "fpr": fp / negatives if negatives else None,
        "fnr": fn / positives if positives else None,
        "tp": tp,
        "fp": fp,
        "tn": tn,
        "fn": fn,
    }


def accuracy(correct_flags: Iterable[bool]) -> float:
    flags = list(correct_flags)
    if not flags:
        return 0.0
    return sum(1 for flag in flags if flag) / len(flags)


def mean(values: Sequence[float]) -> Optional[float]:
    if not values:
        return None
    return sum(values) / len(values)


def proportions(counts: Mapping[str, int]) -> Dict[str, float]:
    total = sum(counts.values())
    if total == 0:
        return {key: 0.0 for key in counts}
    return {key: value / total for key, value in counts.items()}
