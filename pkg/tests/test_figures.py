from xot.bench import run_benchmark
from xot.figures import render_report_figures

from test_bench import COT_RULES, QUESTIONS, VOTE_RULES, RouteGateway, cot_only_config
from xot.config import load_config
from support import make_question

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_episode_report_renders_full_figure_set(tmp_path):
    report = run_benchmark(QUESTIONS, cot_only_config(), RouteGateway(COT_RULES), None)
    written = render_report_figures(report, tmp_path / "figs")
    names = sorted(path.name for path in written)
    assert names == ["accuracy.png", "attempts.png", "methods.png", "tokens.png"]
    for path in written:
        data = path.read_bytes()
        assert data.startswith(PNG_MAGIC)
        assert len(data) > 1000


def test_vote_report_renders_accuracy_and_tokens(tmp_path):
    cfg = load_config(
        overrides={"methods": "EC", "plan": {"mode": "fixed", "fixed_order": "EC"}}
    )
    report = run_benchmark(
        [make_question(qid="farm")], cfg, RouteGateway(VOTE_RULES), None, mode="vote"
    )
    written = render_report_figures(report, tmp_path)
    names = sorted(path.name for path in written)
    assert names == ["accuracy.png", "tokens.png"]


def test_empty_report_writes_nothing(tmp_path):
    report = run_benchmark([], cot_only_config(), RouteGateway([]), None)
    assert render_report_figures(report, tmp_path) == []
