"""Command line entry point.

Subcommands:
  solve    answer one question from the command line
  bench    run a dataset and write a report (JSON, optional CSV/figures)
  convert  rewrite a dataset into the canonical JSONL form
  record   live run that also freezes model and execution traces
  report   re-emit CSV or figures from a saved report JSON

Exit codes: 0 on success, 2 when a replay fixture is missing a needed
record, 1 on configuration or dataset problems.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path
from typing import Optional

from .bench import build_engine, emit_report, run_benchmark, write_report
from .config import RUN_MODES, ConfigError, load_config
from .core import Question, answers_equal, normalize_answer
from .datasets import FORMATS, DatasetError, load_dataset, write_canonical
from .executor import (
    Executor,
    ExecutorUnavailable,
    ProcessExecutor,
    RecordingExecutor,
    ScriptedExecutor,
    ScriptedMiss,
)
from .gateway import (
    GatewayError,
    LiveGateway,
    RecordingGateway,
    ReplayGateway,
    ReplayMiss,
    TraceStore,
)
from .figures import render_report_figures

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REPLAY_MISS = 2


def _add_gateway_args(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--replay", metavar="TRACES", help="answer from a recorded trace file")
    source.add_argument("--live", action="store_true", help="call the configured model API")
    parser.add_argument(
        "--exec-fixture",
        metavar="OUTCOMES",
        help="serve program executions from a recorded outcome file",
    )


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="YAML or JSON run configuration")
    parser.add_argument("--mode", choices=RUN_MODES, help="override the configured run mode")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xot",
        description="Iterative multi-method math solving with planning and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="answer a single question")
    solve.add_argument("--question", required=True, help="question text")
    solve.add_argument("--gold", help="known answer, for correctness display")
    _add_common_args(solve)
    _add_gateway_args(solve)

    bench = sub.add_parser("bench", help="run a dataset and write a report")
    bench.add_argument("--dataset", required=True, help="dataset file")
    bench.add_argument("--format", required=True, choices=FORMATS, dest="format")
    bench.add_argument("--out", help="report JSON path (stdout when omitted)")
    bench.add_argument("--csv", help="also write per-question rows as CSV")
    bench.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    bench.add_argument("--limit", type=int, help="only run the first N questions")
    bench.add_argument("--quiet", action="store_true", help="suppress progress lines")
    _add_common_args(bench)
    _add_gateway_args(bench)

    convert = sub.add_parser("convert", help="rewrite a dataset as canonical JSONL")
    convert.add_argument("--in", required=True, dest="input", help="source dataset file")
    convert.add_argument("--format", required=True, choices=FORMATS, dest="format")
    convert.add_argument("--out", required=True, help="canonical JSONL destination")

    record = sub.add_parser(
        "record", help="live run that also freezes model and execution traces"
    )
    record.add_argument("--dataset", required=True, help="dataset file")
    record.add_argument("--format", required=True, choices=FORMATS, dest="format")
    record.add_argument("--traces-out", required=True, help="model trace JSONL to append to")
    record.add_argument("--exec-out", help="execution outcome JSONL to append to")
    record.add_argument("--out", help="report JSON path (stdout when omitted)")
    record.add_argument("--limit", type=int, help="only run the first N questions")
    record.add_argument("--quiet", action="store_true", help="suppress progress lines")
    _add_common_args(record)

    report = sub.add_parser("report", help="re-emit artifacts from a saved report")
    report.add_argument("--in", required=True, dest="input", help="report JSON file")
    report.add_argument("--csv", help="write per-question rows as CSV")
    report.add_argument("--figures", metavar="DIR", help="render figures into DIR")

    return parser


def _make_gateway(args, cfg):
    if getattr(args, "replay", None):
        store = TraceStore.load(args.replay)
        return ReplayGateway(store, cfg["model"], cfg["provider_id"])
    return LiveGateway.from_env(
        model=cfg["model"],
        rate_per_min=cfg["gateway"]["rate_per_min"],
        max_retries=cfg["gateway"]["max_retries"],
    )


def _make_executor(args, cfg) -> Optional[Executor]:
    if getattr(args, "exec_fixture", None):
        return ScriptedExecutor.load(args.exec_fixture)
    try:
        return ProcessExecutor.from_installed_harness(
            timeout_secs=cfg["exec"]["timeout_secs"],
            max_procs=cfg["exec"]["max_procs"],
            runtime=cfg["exec"]["runtime"],
        )
    except ExecutorUnavailable as exc:
        print("note: %s; program execution disabled" % exc, file=sys.stderr)
        return None


def _created_stamp(args) -> Optional[str]:
    if getattr(args, "replay", None):
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _load_questions(args):
    questions = load_dataset(args.dataset, args.format)
    limit = getattr(args, "limit", None)
    if limit is not None:
        questions = questions[: max(limit, 0)]
    return questions


def _progress(args):
    if getattr(args, "quiet", False):
        return None
    return lambda qid: print("done %s" % qid, file=sys.stderr)


def _emit_outputs(report, args) -> None:
    if getattr(args, "out", None):
        write_report(report, args.out)
        print("wrote %s" % args.out, file=sys.stderr)
    else:
        sys.stdout.write(emit_report(report, "json"))
    if getattr(args, "csv", None):
        write_report(report, args.csv, format="csv")
        print("wrote %s" % args.csv, file=sys.stderr)
    if getattr(args, "figures", None):
        for path in render_report_figures(report, args.figures):
            print("wrote %s" % path, file=sys.stderr)


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    gateway = _make_gateway(args, cfg)
    executor = _make_executor(args, cfg)
    engine = build_engine(cfg, gateway, executor, oracle=False)
    question = Question("cli-0", args.question, normalize_answer(args.gold, "numeric"))
    episode = engine.solve_episode(question)

    for record in episode.iterations:
        verdict = "accepted" if record.verification.passed else "rejected"
        line = "t=%d method=%s answer=%s %s (%s)" % (
            record.t,
            record.method.name,
            record.solution.answer.display(),
            verdict,
            record.verification.stage,
        )
        if record.solution.error:
            line += " error=%s" % record.solution.error
        print(line)
    print("final: %s via %s" % (episode.final_answer.display(), episode.final_method.name if episode.final_method else "none"))
    if args.gold is not None:
        print("correct: %s" % answers_equal(episode.final_answer, question.gold))
    if episode.exhausted:
        print("all methods failed verification; reporting the last attempt")
    print(
        "tokens: input=%d output=%d weighted=%d"
        % (episode.usage.input, episode.usage.output, episode.usage.total())
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    questions = _load_questions(args)
    gateway = _make_gateway(args, cfg)
    executor = _make_executor(args, cfg)
    report = run_benchmark(
        questions,
        cfg,
        gateway,
        executor,
        mode=args.mode,
        created=_created_stamp(args),
        progress=_progress(args),
    )
    _emit_outputs(report, args)
    return EXIT_OK


def cmd_convert(args) -> int:
    questions = load_dataset(args.input, args.format)
    write_canonical(questions, args.out)
    print("wrote %d questions to %s" % (len(questions), args.out), file=sys.stderr)
    return EXIT_OK


def cmd_record(args) -> int:
    cfg = load_config(args.config)
    questions = _load_questions(args)

    trace_path = Path(args.traces_out)
    store = TraceStore.load(trace_path) if trace_path.exists() else TraceStore()
    live = LiveGateway.from_env(
        model=cfg["model"],
        rate_per_min=cfg["gateway"]["rate_per_min"],
        max_retries=cfg["gateway"]["max_retries"],
    )
    gateway = RecordingGateway(live, store, trace_path)

    executor = _make_executor(args, cfg)
    if args.exec_out and executor is not None:
        executor = RecordingExecutor(executor, args.exec_out)

    report = run_benchmark(
        questions,
        cfg,
        gateway,
        executor,
        mode=args.mode,
        created=_created_stamp(args),
        progress=_progress(args),
    )
    _emit_outputs(report, args)
    return EXIT_OK


def cmd_report(args) -> int:
    with open(args.input, encoding="utf-8") as handle:
        report = json.load(handle)
    if not args.csv and not args.figures:
        print("nothing to do: pass --csv and/or --figures", file=sys.stderr)
        return EXIT_ERROR
    if args.csv:
        write_report(report, args.csv, format="csv")
        print("wrote %s" % args.csv, file=sys.stderr)
    if args.figures:
        for path in render_report_figures(report, args.figures):
            print("wrote %s" % path, file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "solve": cmd_solve,
    "bench": cmd_bench,
    "convert": cmd_convert,
    "record": cmd_record,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ReplayMiss as exc:
        print("replay miss: no recorded completion for key %s" % exc.key, file=sys.stderr)
        return EXIT_REPLAY_MISS
    except ScriptedMiss as exc:
        print("replay miss: no recorded execution for sha %s" % exc.sha, file=sys.stderr)
        return EXIT_REPLAY_MISS
    except (ConfigError, DatasetError, GatewayError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
