"""Benchmark driving: runs a question set through the engine and builds
a report with per-question rows and aggregate metrics.

A replay-backed run is a pure function of the trace fixture and the
config, so reports from it are byte-identical across repetitions. The
``created`` timestamp is supplied by the caller and should be None for
replay runs to keep that property.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

from .config import config_hash
from .core import (
    Answer,
    EpisodeResult,
    Question,
    TokenUsage,
    answers_equal,
    method_by_name,
    parse_method_order,
)
from .executor import Executor
from .gateway import DecodingParams, Gateway
from .metrics import accuracy, proportions, verifier_metrics
from .orchestrator import Engine, GoldVerifier, VoteResult
from .prompts import PromptLibrary
from .reasoners import REASON_STOP
from .verifier import VerifyPolicy

# Verification stages that reflect a real pass/fail judgement; "skipped"
# and "gold" stages say nothing about the judge being measured.
JUDGED_STAGES = ("passive", "active")

CSV_HEADER = (
    "id",
    "mode",
    "method",
    "correct",
    "answer",
    "gold",
    "attempts",
    "exhausted",
    "tokens_input",
    "tokens_output",
    "tokens_total",
    "error",
)


def build_engine(
    cfg: Mapping[str, Any],
    gateway: Gateway,
    executor: Optional[Executor],
    library: Optional[PromptLibrary] = None,
    oracle: bool = False,
) -> Engine:
    """Wire an engine from a validated config.

    Under fixed planning the order string defines both which methods an
    episode gets and the attempt sequence; under model-led planning the
    methods key defines the pool and doubles as the fallback order.
    """
    if library is None:
        prompt_dir = cfg["prompts"]["dir"]
        library = PromptLibrary(prompt_dir) if prompt_dir else PromptLibrary()
    plan = cfg["plan"]
    if plan["mode"] == "fixed":
        order = plan["fixed_order"]
    else:
        order = cfg["methods"]
    params = DecodingParams(
        temperature=cfg["decoding"]["temperature"],
        max_tokens=cfg["decoding"]["max_tokens"],
        stop=REASON_STOP,
    )
    policy = VerifyPolicy(
        mode=cfg["verify"]["mode"],
        dataset_overrides=dict(cfg["verify"]["dataset_overrides"]),
    )
    seeds = cfg["prompts"]["exemplar_seeds"]
    return Engine(
        library,
        gateway,
        executor,
        methods=parse_method_order(order),
        plan_mode=plan["mode"],
        fallback_order=order,
        verify_policy=policy,
        params=params,
        exemplar_count=cfg["prompts"]["exemplar_count"],
        refine_rounds=cfg["refine_rounds"],
        exemplar_seeds=seeds,
        verifier_factory=(lambda meter: GoldVerifier()) if oracle else None,
    )


# ---------------------------------------------------------------------
# Row construction
# ---------------------------------------------------------------------

def _usage_dict(usage: TokenUsage) -> Dict[str, Any]:
    return {
        "input": usage.input,
        "output": usage.output,
        "total": usage.total(),
        "estimated": usage.estimated,
    }


def _display(answer: Answer) -> Optional[str]:
    return None if answer.is_none else answer.display()


def episode_row(question: Question, episode: EpisodeResult) -> Dict[str, Any]:
    iterations = []
    for record in episode.iterations:
        solution = record.solution
        entry: Dict[str, Any] = {
            "t": record.t,
            "method": record.method.name,
            "answer": _display(solution.answer),
            "correct": answers_equal(solution.answer, question.gold),
            "error": str(solution.error) if solution.error else None,
            "verify_stage": record.verification.stage,
            "verify_passed": record.verification.passed,
            "verify_failure": (
                str(record.verification.failure) if record.verification.failure else None
            ),
        }
        if record.verification.assertions is not None:
            entry["assertions"] = record.verification.assertions
        iterations.append(entry)
    return {
        "id": question.id,
        "gold": _display(question.gold),
        "answer": _display(episode.final_answer),
        "method": episode.final_method.name if episode.final_method else None,
        "correct": answers_equal(episode.final_answer, question.gold),
        "attempts": len(episode.iterations),
        "exhausted": episode.exhausted,
        "iterations": iterations,
        "usage": _usage_dict(episode.usage),
        "error": episode.error,
    }


def vote_row(question: Question, result: VoteResult) -> Dict[str, Any]:
    return {
        "id": question.id,
        "gold": _display(question.gold),
        "answer": _display(result.answer),
        "method": result.winner_method.name if result.winner_method else None,
        "correct": answers_equal(result.answer, question.gold),
        "votes": {
            solution.method.name: _display(solution.answer)
            for solution in result.solutions
        },
        "vote_correct": {
            solution.method.name: answers_equal(solution.answer, question.gold)
            for solution in result.solutions
        },
        "usage": _usage_dict(result.usage),
        "error": None,
    }


# ---------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------

def _token_aggregate(rows: Sequence[Mapping[str, Any]]) -> Dict[str, Any]:
    total_in = sum(row["usage"]["input"] for row in rows)
    total_out = sum(row["usage"]["output"] for row in rows)
    return {
        "input": total_in,
        "output": total_out,
        "total": total_in + total_out * 2,
        "estimated": any(row["usage"]["estimated"] for row in rows),
    }


def _episode_aggregates(rows: Sequence[Mapping[str, Any]]) -> Dict[str, Any]:
    aggregates: Dict[str, Any] = {
        "questions": len(rows),
        "correct": sum(1 for row in rows if row["correct"]),
        "accuracy": accuracy(row["correct"] for row in rows),
        "tokens": _token_aggregate(rows),
    }
    attempts = [row["attempts"] for row in rows]
    aggregates["avg_iterations"] = (sum(attempts) / len(rows)) if rows else None
    first_pass = sum(
        1
        for row in rows
        if row["iterations"] and row["iterations"][0]["verify_passed"]
    )
    aggregates["first_iteration_solve_rate"] = first_pass / len(rows) if rows else None
    aggregates["exhausted"] = sum(1 for row in rows if row["exhausted"])

    methods = [row["method"] or "none" for row in rows]
    counts: Dict[str, int] = {}
    for name in methods:
        counts[name] = counts.get(name, 0) + 1
    aggregates["method_proportions"] = proportions(counts)

    judged: Dict[str, List[tuple]] = {}
    for row in rows:
        for entry in row["iterations"]:
            if entry["verify_stage"] in JUDGED_STAGES:
                pair = (entry["verify_passed"], entry["correct"])
                judged.setdefault("overall", []).append(pair)
                judged.setdefault(entry["method"], []).append(pair)
    aggregates["verifier"] = {
        name: verifier_metrics(pairs) for name, pairs in sorted(judged.items())
    }
    return aggregates


def _vote_aggregates(rows: Sequence[Mapping[str, Any]]) -> Dict[str, Any]:
    per_method: Dict[str, List[bool]] = {}
    for row in rows:
        for name, correct in row["vote_correct"].items():
            per_method.setdefault(name, []).append(correct)
    return {
        "questions": len(rows),
        "correct": sum(1 for row in rows if row["correct"]),
        "accuracy": accuracy(row["correct"] for row in rows),
        "per_method_accuracy": {
            name: accuracy(flags) for name, flags in sorted(per_method.items())
        },
        "tokens": _token_aggregate(rows),
    }


# ---------------------------------------------------------------------
# Driving
# ---------------------------------------------------------------------

def _map_ordered(
    function: Callable[[Question], Any],
    questions: Sequence[Question],
    workers: int,
    progress: Optional[Callable[[str], None]] = None,
) -> List[Any]:
    def run(question: Question) -> Any:
        result = function(question)
        if progress is not None:
            progress(question.id)
        return result

    if workers <= 1 or len(questions) <= 1:
        return [run(question) for question in questions]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, questions))


def run_benchmark(
    questions: Sequence[Question],
    cfg: Mapping[str, Any],
    gateway: Gateway,
    executor: Optional[Executor],
    mode: Optional[str] = None,
    created: Optional[str] = None,
    progress: Optional[Callable[[str], None]] = None,
    library: Optional[PromptLibrary] = None,
) -> Dict[str, Any]:
    mode = mode or cfg["mode"]
    workers = cfg["bench"]["workers"]
    engine = build_engine(cfg, gateway, executor, library=library, oracle=(mode == "oracle"))

    if mode in ("xot", "oracle"):
        episodes = _map_ordered(engine.solve_episode, questions, workers, progress)
        rows = [episode_row(q, e) for q, e in zip(questions, episodes)]
        aggregates = _episode_aggregates(rows)
    elif mode.startswith("single:"):
        method = method_by_name(mode.split(":", 1)[1])
        episodes = _map_ordered(
            lambda q: engine.single_episode(q, method), questions, workers, progress
        )
        rows = [episode_row(q, e) for q, e in zip(questions, episodes)]
        aggregates = _episode_aggregates(rows)
        aggregates["method"] = method.name
    elif mode == "vote":
        votes = _map_ordered(engine.vote_episode, questions, workers, progress)
        rows = [vote_row(q, v) for q, v in zip(questions, votes)]
        aggregates = _vote_aggregates(rows)
    else:
        raise ValueError("unknown run mode %r" % mode)

    return {
        "meta": {
            "mode": mode,
            "model": cfg["model"],
            "config_hash": config_hash(cfg),
            "created": created,
            "questions": len(questions),
        },
        "aggregates": aggregates,
        "questions": rows,
    }


# ---------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------

def _csv_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.4f" % value
    return str(value)


def emit_report(report: Mapping[str, Any], format: str = "json") -> str:
    if format == "json":
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        mode = report["meta"]["mode"]
        for row in report["questions"]:
            attempts = row.get("attempts", len(row.get("votes", {})))
            writer.writerow(
                [
                    _csv_value(row["id"]),
                    _csv_value(mode),
                    _csv_value(row["method"]),
                    _csv_value(row["correct"]),
                    _csv_value(row["answer"]),
                    _csv_value(row["gold"]),
                    _csv_value(attempts),
                    _csv_value(row.get("exhausted")),
                    _csv_value(row["usage"]["input"]),
                    _csv_value(row["usage"]["output"]),
                    _csv_value(row["usage"]["total"]),
                    _csv_value(row["error"]),
                ]
            )
        return buffer.getvalue()
    raise ValueError("unknown report format %r" % format)


def write_report(report: Mapping[str, Any], path, format: str = "json") -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(emit_report(report, format))
