"""Builds the committed replay fixture used by the end-to-end tests.

Authors 20 word problems together with the model output every pipeline
stage would request for them (planner picks, programs, equation
systems, prose answers, assertion blocks), then drives every run mode
through the real engine with a recording gateway and executor. The
resulting files let the whole benchmark replay offline:

    tests/fixtures/golden/questions.jsonl   canonical dataset
    tests/fixtures/golden/config.yaml       run configuration
    tests/fixtures/golden/traces.jsonl      model completions by request key
    tests/fixtures/golden/exec.jsonl        program execution outcomes by sha

The script verifies the fixture before writing it down: per-question
episode shapes, mode accuracies, the cost ordering between voting and
iterative solving, and byte-stable replay through the replay gateway
and scripted executor. Rerun from the repository root:

    python3 scripts/make_golden_fixture.py
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Optional, Tuple

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from xot.bench import emit_report, run_benchmark
from xot.config import load_config
from xot.core import Answer, Question, TokenUsage
from xot.datasets import write_canonical
from xot.executor import (
    AssertionOutcome,
    ExecutionResult,
    Executor,
    RecordingExecutor,
    ScriptedExecutor,
    _to_fraction,
    compose_eot_assertion_script,
    compose_pot_assertion_script,
)
from xot.gateway import (
    Completion,
    RecordingGateway,
    ReplayGateway,
    TraceStore,
    estimate_tokens,
)
from xot.prompts import PromptLibrary

CONFIG_TEXT = """\
model: gpt-3.5-turbo
methods: PEC
plan:
  mode: llm
verify:
  mode: passive_and_active
bench:
  workers: 4
"""

MODES = ("xot", "single:pot", "single:eot", "single:cot", "vote", "oracle")


@dataclass(frozen=True)
class Authored:
    """One question plus every reply the pipeline may ask for, and the
    episode shape we expect from the iterative and oracle runs as
    (attempt count, final answer correct)."""

    qid: str
    text: str
    gold: int
    planner: str  # which method the scripted planner reply names
    pot: str
    eot: str
    cot: str
    pot_asserts: Optional[str] = None
    eot_asserts: Optional[str] = None
    xot: Tuple[int, bool] = (1, True)
    oracle: Tuple[int, bool] = (1, True)


AUTHORED = [
    Authored(
        qid="g01",
        text="Maya sells 8 baskets of peaches at the market. Each basket holds 7 peaches. How many peaches does she sell in total?",
        gold=56,
        planner="pot",
        pot="baskets = 8\nper_basket = 7\nans = baskets * per_basket",
        eot="total = 8 * 7\nans = total",
        cot="Each basket holds 7 peaches, so 8 baskets hold 8 * 7 = 56 peaches. The answer is 56.",
        pot_asserts="assert baskets == 8\nassert per_basket == 7\nassert ans == baskets * per_basket",
    ),
    Authored(
        qid="g02",
        text="Liam had 45 marbles. He gave 22 of them to his sister. How many marbles does he have left?",
        gold=23,
        planner="pot",
        pot="```python\nstart = 45\ngiven_away = 22\nans = start - given_away\n```",
        eot="left = 45 - 22\nans = left",
        cot="Liam started with 45 marbles and gave away 22, leaving 45 - 22 = 23. The answer is 23.",
        pot_asserts="assert start == 45\nassert given_away == 22\nassert ans == start - given_away",
    ),
    Authored(
        qid="g03",
        text="The sum of two numbers is 60 and their difference is 8. What is the smaller number?",
        gold=26,
        planner="eot",
        pot="a = (60 + 8) / 2\nb = 60 - a\nans = b",
        eot="a + b = 60\na - b = 8\nans = b",
        cot="The larger number is (60 + 8) / 2 = 34, so the smaller is 60 - 34 = 26. The answer is 26.",
        eot_asserts="assert a + b == 60\nassert a - b == 8\nassert ans == b",
    ),
    Authored(
        qid="g04",
        text="A baker fills 3 trays with rolls. Each tray holds 6 rolls. How many rolls does the baker have?",
        gold=18,
        planner="eot",
        pot="trays = 3\nrolls_per_tray = 6\nans = trays * rolls_per",
        eot="total = 3 * 6\nans = total",
        cot="3 trays of 6 rolls each is 3 * 6 = 18 rolls. The answer is 18.",
        eot_asserts="assert total == 3 * 6\nassert ans == total",
    ),
    Authored(
        qid="g05",
        text="Noah scored 35 points in the first game and 38 points in the second game. How many points did he score in total?",
        gold=73,
        planner="eot",
        pot="first_game = 35\nsecond_game = 38\ntotal = first_game + second_game",
        eot="total = 35 + 38\nans = total",
        cot="Adding both games gives 35 + 38 = 73 points. The answer is 73.",
        eot_asserts="assert total == 35 + 38\nassert ans == total",
    ),
    Authored(
        qid="g06",
        text="A shop sells 40 cups on Monday and twice as many on Tuesday. How many cups does it sell over the two days?",
        gold=120,
        planner="eot",
        pot="monday = 40\ntuesday = 2 * monday\nans = tuesday",
        eot="monday = 40\ntuesday = 2 × 40\ntotal = monday + tuesday\nans = total",
        cot="Tuesday is twice Monday, 80 cups, so the total is 40 + 80 = 120. The answer is 120.",
        pot_asserts="assert monday == 40\nassert tuesday == 2 * monday\nassert ans == monday + tuesday",
        eot_asserts="assert monday == 40\nassert tuesday == 80\nassert ans == monday + tuesday",
    ),
    Authored(
        qid="g07",
        text="At the fair, rides cost 4 tokens and games cost 3 tokens. Ethan used 25 tokens on 7 plays. How many rides did he take?",
        gold=4,
        planner="pot",
        pot="plays = 7\ntokens = 25\nrides = tokens - 3 * plays\ngames = plays - rides\nans = rides",
        eot="rides + games = 7\n4 * rides + 3 * games = 25\nrides + games = 8\nans = rides",
        cot="If all 7 plays were games he would spend 21 tokens; the 4 extra tokens mean 4 rides. The answer is 4.",
        pot_asserts="assert rides + games == plays\nassert 4 * rides + 3 * games == tokens\nassert ans == rides",
    ),
    Authored(
        qid="g08",
        text="Zoe picks 5 flowers every day for a week. How many flowers does she pick that week?",
        gold=35,
        planner="pot",
        pot="days = 7\nper_day = 5\nans = days * per_day",
        eot="total = 5 × 7\nans = total",
        cot="A week has 7 days and 5 flowers a day gives 7 * 5 = 35. The answer is 35.",
        pot_asserts="assert days == 7\nassert ans == 30",
        eot_asserts="assert total == 35\nassert ans == total",
        xot=(2, True),
        oracle=(1, True),
    ),
    Authored(
        qid="g09",
        text="A hall has 9 rows with 8 chairs in each row. How many chairs are in the hall?",
        gold=72,
        planner="pot",
        pot="rows = 9\nchairs_per_row = 8\nans = rows * chairs_per_row + rows",
        eot="total = 9 × 8\nans = total",
        cot="Each of the 9 rows has 8 chairs plus the row itself, 81 in all. The answer is 81.",
        pot_asserts="assert rows == 9\nassert chairs_per_row == 8\nassert ans > 0",
        xot=(1, False),
        oracle=(2, True),
    ),
    Authored(
        qid="g10",
        text="Mia read 17 pages on Saturday and 12 pages on Sunday. How many pages did she read over the weekend?",
        gold=29,
        planner="pot",
        pot="saturday = 17\nsunday = 12\nans = saturday - sunday",
        eot="pages = 17 - 12\nans = pages",
        cot="She read 17 + 12 = 29 pages over the weekend. The answer is 29.",
        pot_asserts="assert saturday == 17\nassert sunday == 12\nassert ans == saturday + sunday",
        eot_asserts="assert ans == 17 + 12",
        xot=(3, True),
        oracle=(3, True),
    ),
    Authored(
        qid="g11",
        text="A crate holds 12 bottles. How many bottles are in 4 crates?",
        gold=48,
        planner="pot",
        pot="crates = 4\nbottles_per_crate = 12\nans = crates + bottles_per_crate",
        eot="total = 4 + 12\nans = total",
        cot="4 crates and 12 bottles make 4 + 12 = 16 bottles. The answer is 16.",
        pot_asserts="assert crates == 4\nassert bottles_per_crate == 12\nassert ans > 0",
        eot_asserts="assert ans == 4 * 12",
        xot=(1, False),
        oracle=(3, False),
    ),
    Authored(
        qid="g12",
        text="Two numbers add up to 21 and the larger one is twice the smaller one. What is the smaller number?",
        gold=7,
        planner="pot",
        pot="small = 21 / 3\nans = small",
        eot="large + small = 21\nans = small",
        cot="The parts are 2x and x, so 3x = 21 and x = 7. The answer is 7.",
        pot_asserts="assert small * 3 == 21\nassert ans == small",
    ),
    Authored(
        qid="g13",
        text="Eli shares 24 crayons equally between 8 friends. How many crayons does each friend get?",
        gold=3,
        planner="eot",
        pot="crayons = 24\nfriends = 8\ngroups = friends - 8\nans = crayons / groups",
        eot="each = 24 - 8\nans = each",
        cot="Sharing 24 crayons with 8 friends leaves 24 - 8 = 16 each. The answer is 16.",
        eot_asserts="assert each > 0\nassert ans == each",
        xot=(1, False),
        oracle=(3, False),
    ),
    Authored(
        qid="g14",
        text="A parking garage has 4 levels with 16 cars parked on each level. How many cars are in the garage?",
        gold=64,
        planner="pot",
        pot="levels = 4\ncars_per_level = 16\nans = levels * cars_per_level",
        eot="cars = 16 + 4\nans = cars",
        cot="There are 16 cars and 4 levels, 16 + 4 = 20 cars. The answer is 20.",
        pot_asserts="assert levels == 4\nassert cars_per_level == 16\nassert ans == levels * cars_per_level",
    ),
    Authored(
        qid="g15",
        text="A train travels at 45 kilometers per hour for 2 hours. How far does it travel?",
        gold=90,
        planner="eot",
        pot="speed = 45\nhours = 2\nans = speed * hours",
        eot="% distance is speed times time\ndistance = 45 × 2\nans = distance",
        cot="At 45 kilometers per hour for 2 hours the train covers 90 kilometers. The answer is 90.",
        eot_asserts="assert distance == 45 * 2\nassert ans == distance",
    ),
    Authored(
        qid="g16",
        text="Leo saves 2 dollars every day. After how many days will he have saved 52 dollars?",
        gold=26,
        planner="pot",
        pot="saved = 0\ndays = 0\nwhile saved < 52:\n    days = days + 1\nans = days",
        eot="days = 52 ÷ 2\nans = days",
        cot="Saving 2 dollars a day, 52 dollars takes 52 / 2 = 26 days. The answer is 26.",
        eot_asserts="assert days * 2 == 52\nassert ans == days",
        xot=(2, True),
        oracle=(2, True),
    ),
    Authored(
        qid="g17",
        text="A farmer plants 6 rows of apple trees with 7 trees in each row. How many trees does the farmer plant?",
        gold=42,
        planner="pot",
        pot="rows = 6\ntrees_per_row = 7\nans = rows * trees_per_row",
        eot="rows = 6\nper_row = 7\ntotal = rows * per_row\nans = total",
        cot="6 rows of 7 trees is 6 * 7 = 42 trees. The answer is 42.",
        pot_asserts="assert rows == 6\nassert trees_per_row == 7\nassert ans == rows * trees_per_row",
    ),
    Authored(
        qid="g18",
        text="Emma is 5 years more than twice her brother's age. Emma is 25 years old. How old is her brother?",
        gold=10,
        planner="eot",
        pot="emma = 25\nbrother = (emma - 5) / 2\nans = brother",
        eot="emma = 25\nbrother = emma ÷ 2 - 5\nans = brother",
        cot="Half of 25 is 12.5, minus 5 gives 7.5 years. The answer is 7.5.",
        eot_asserts="assert emma == 25\nassert ans < emma",
        xot=(1, False),
        oracle=(2, True),
    ),
    Authored(
        qid="g19",
        text="Ruth has 13 red pens and 18 blue pens in her drawer. How many pens does she have?",
        gold=31,
        planner="pot",
        pot="red = 13\nblue = 18\nans = red + blue",
        eot="total = 13 - 18\nans = total",
        cot="Adding 13 red and 18 blue pens gives 31 pens. The answer is 31.",
        pot_asserts="assert red == 13\nassert blue == 18\nassert ans == red + blue",
    ),
    Authored(
        qid="g20",
        text="Ella buys 4 packs of stickers with 4 stickers in each pack. How many stickers does she buy?",
        gold=16,
        planner="pot",
        pot="packs = 4\nstickers_per_pack = 4\nans = packs * stickers_per_pack",
        eot="total = 4 × 4\nans = total",
        cot="4 packs of 4 stickers is 4 * 4 = 16 stickers. The answer is 16.",
        pot_asserts="assert packs == 4\nassert stickers_per_pack == 4\nassert ans == packs * stickers_per_pack",
    ),
]

_PLANNER_REPLY = {"pot": "Python Program", "eot": "System of linear equations"}


class AuthorGateway:
    """Serves the authored reply for whatever prompt the pipeline built.

    Prompts are classified by their trailing cue and matched to a
    question by its text, so the fixture stays faithful to the exact
    prompts the real components render."""

    provider_id = "openai"
    model = "gpt-3.5-turbo"

    def __init__(self, authored, library: PromptLibrary):
        self.authored = authored
        self.pot_assert_tag = library.get("assert_pot").exemplars[0][0]
        self.eot_assert_tag = library.get("assert_eot").exemplars[0][0]

    def _entry(self, prompt: str) -> Authored:
        for entry in self.authored:
            if entry.text in prompt:
                return entry
        raise LookupError("prompt matches no authored question: %r" % prompt[-160:])

    def _reply(self, prompt: str) -> str:
        entry = self._entry(prompt)
        tail = prompt.rstrip()
        if tail.endswith("Method:"):
            return _PLANNER_REPLY[entry.planner]
        if tail.endswith("# Assertion"):
            if self.pot_assert_tag in prompt:
                reply = entry.pot_asserts
            elif self.eot_assert_tag in prompt:
                reply = entry.eot_asserts
            else:
                raise LookupError("assertion prompt from an unknown template")
            if reply is None:
                raise LookupError("no authored assertions for %s" % entry.qid)
            return reply
        if tail.endswith("Python program:"):
            return entry.pot
        if tail.endswith("(Do not simplify)"):
            return entry.eot
        if tail.endswith("Answer:"):
            return entry.cot
        raise LookupError("unrecognized prompt cue: %r" % tail[-80:])

    def complete(self, prompt: str, params) -> Completion:
        text = self._reply(prompt)
        usage = TokenUsage(estimate_tokens(prompt), estimate_tokens(text), False)
        return Completion(text, usage)


class LocalExecutor(Executor):
    """In-process program runner for fixture generation.

    Mirrors the subprocess protocol semantics (status classes, numeric
    and bool bindings, the ans variable) with fixed wall times so the
    recorded outcomes are stable across regenerations. Loops are not
    run; a while statement is treated as the timeout it would become."""

    def run_pot(self, program: str) -> ExecutionResult:
        if re.search(r"^\s*while\b", program, re.MULTILINE):
            return ExecutionResult.failure("timeout", "no result within 10.0s", 10.01)
        scope: Dict[str, object] = {}
        try:
            exec(compile(program, "<program>", "exec"), scope)
        except SyntaxError as exc:
            return ExecutionResult.failure("syntax", "SyntaxError: %s" % exc.msg, 0.002)
        except Exception as exc:
            return ExecutionResult.failure(
                "runtime", "%s: %s" % (type(exc).__name__, exc), 0.002
            )
        bindings = {}
        for name, value in scope.items():
            if name.startswith("__"):
                continue
            rational = _to_fraction(value)
            if rational is not None:
                bindings[name] = rational
        if "ans" not in scope:
            return ExecutionResult.failure(
                "no_ans", "variable ans is not defined", 0.002
            )
        ans = scope["ans"]
        if isinstance(ans, str):
            return ExecutionResult.success(bindings, ans, 0.002)
        rational = _to_fraction(ans)
        if rational is None:
            return ExecutionResult.failure("no_ans", "ans is not a finite number", 0.002)
        return ExecutionResult.success(bindings, rational, 0.002)

    def run_assertions(self, base, assertions, bindings) -> AssertionOutcome:
        if base is not None:
            script = compose_pot_assertion_script(base, assertions)
        else:
            script = compose_eot_assertion_script(bindings, assertions)
        try:
            exec(compile(script, "<assertions>", "exec"), {})
        except AssertionError as exc:
            detail = "AssertionError" + (": %s" % exc if str(exc) else "")
            return AssertionOutcome(False, detail, 0.002)
        except Exception as exc:
            return AssertionOutcome(
                False, "%s: %s" % (type(exc).__name__, exc), 0.002
            )
        return AssertionOutcome(True, "", 0.002)


def dedupe_jsonl(path: Path) -> None:
    seen = set()
    kept = []
    for line in path.read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        key = (record["kind"], record["sha256"])
        if key in seen:
            continue
        seen.add(key)
        kept.append(line)
    path.write_text("\n".join(kept) + "\n", encoding="utf-8")


def check(condition: bool, message: str) -> None:
    if not condition:
        raise SystemExit("fixture check failed: %s" % message)


def main() -> None:
    out = ROOT / "tests" / "fixtures" / "golden"
    out.mkdir(parents=True, exist_ok=True)

    questions = [
        Question(a.qid, a.text, Answer.numeric(Fraction(a.gold))) for a in AUTHORED
    ]
    write_canonical(questions, out / "questions.jsonl")
    (out / "config.yaml").write_text(CONFIG_TEXT, encoding="utf-8")
    cfg = load_config(str(out / "config.yaml"))

    traces_path = out / "traces.jsonl"
    exec_path = out / "exec.jsonl"
    for path in (traces_path, exec_path):
        if path.exists():
            path.unlink()
        path.touch()

    library = PromptLibrary()
    gateway = RecordingGateway(AuthorGateway(AUTHORED, library), TraceStore(), traces_path)
    executor = RecordingExecutor(LocalExecutor(), exec_path)

    reports = {}
    for mode in MODES:
        reports[mode] = run_benchmark(
            questions, cfg, gateway, executor, mode=mode, created=None
        )
    dedupe_jsonl(exec_path)

    # Episode shapes must match the authored intent exactly.
    for mode, field in (("xot", "xot"), ("oracle", "oracle")):
        rows = {row["id"]: row for row in reports[mode]["questions"]}
        for entry in AUTHORED:
            attempts, correct = getattr(entry, field)
            row = rows[entry.qid]
            check(
                row["attempts"] == attempts and row["correct"] == correct,
                "%s %s: expected %s, got attempts=%d correct=%s"
                % (mode, entry.qid, (attempts, correct), row["attempts"], row["correct"]),
            )

    accuracies = {mode: reports[mode]["aggregates"]["accuracy"] for mode in MODES}
    for single in ("single:pot", "single:eot", "single:cot"):
        check(
            accuracies["oracle"] >= accuracies[single],
            "oracle should dominate %s" % single,
        )
    vote_tokens = reports["vote"]["aggregates"]["tokens"]["total"]
    xot_tokens = reports["xot"]["aggregates"]["tokens"]["total"]
    check(vote_tokens > xot_tokens, "voting should cost more tokens than iterating")

    # The files must reproduce every report byte for byte.
    store = TraceStore.load(traces_path)
    replay = ReplayGateway(store, cfg["model"], cfg["provider_id"])
    scripted = ScriptedExecutor.load(exec_path)
    for mode in MODES:
        again = run_benchmark(questions, cfg, replay, scripted, mode=mode, created=None)
        check(
            emit_report(again) == emit_report(reports[mode]),
            "replay drifted for mode %s" % mode,
        )

    print("questions: %d" % len(questions))
    print("trace records: %d" % len(store))
    print("exec records: %d" % len(exec_path.read_text().splitlines()))
    for mode in MODES:
        print(
            "%-12s accuracy=%.2f tokens=%d"
            % (mode, accuracies[mode], reports[mode]["aggregates"]["tokens"]["total"])
        )


if __name__ == "__main__":
    main()
