"""Render summary figures for a benchmark report.

Figures are written as PNG files next to the other report artifacts.
Rendering uses the non-interactive backend so it works headless; every
figure is optional and only drawn when the report carries its data.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, List, Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _save(figure, path: Path) -> None:
    figure.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(figure)


def _accuracy_figure(report: Mapping[str, Any], outdir: Path) -> Path:
    aggregates = report["aggregates"]
    labels = ["overall"]
    values = [aggregates["accuracy"]]
    for name, value in sorted(aggregates.get("per_method_accuracy", {}).items()):
        labels.append(name)
        values.append(value)
    figure, axis = plt.subplots(figsize=(4 + len(labels), 3.2))
    bars = axis.bar(labels, values, color="#4878a8")
    axis.set_ylim(0.0, 1.0)
    axis.set_ylabel("accuracy")
    axis.set_title("Accuracy (%s)" % report["meta"]["mode"])
    for bar, value in zip(bars, values):
        axis.annotate(
            "%.3f" % value,
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center",
            va="bottom",
            fontsize=8,
        )
    path = outdir / "accuracy.png"
    _save(figure, path)
    return path


def _attempts_figure(report: Mapping[str, Any], outdir: Path) -> Path:
    attempts = [row["attempts"] for row in report["questions"]]
    top = max(attempts)
    figure, axis = plt.subplots(figsize=(5, 3.2))
    axis.hist(
        attempts,
        bins=[x + 0.5 for x in range(top + 1)],
        rwidth=0.85,
        color="#6aa84f",
    )
    axis.set_xticks(range(1, top + 1))
    axis.set_xlabel("attempts per question")
    axis.set_ylabel("questions")
    axis.set_title("Attempts before acceptance")
    path = outdir / "attempts.png"
    _save(figure, path)
    return path


def _methods_figure(report: Mapping[str, Any], outdir: Path) -> Path:
    shares = report["aggregates"]["method_proportions"]
    labels = sorted(shares)
    values = [shares[name] for name in labels]
    figure, axis = plt.subplots(figsize=(4.5, 3.2))
    axis.bar(labels, values, color="#a85454")
    axis.set_ylim(0.0, 1.0)
    axis.set_ylabel("share of final answers")
    axis.set_title("Final method proportions")
    path = outdir / "methods.png"
    _save(figure, path)
    return path


def _tokens_figure(report: Mapping[str, Any], outdir: Path) -> Path:
    totals = [row["usage"]["total"] for row in report["questions"]]
    figure, axis = plt.subplots(figsize=(5, 3.2))
    axis.hist(totals, bins=min(10, max(3, len(set(totals)))), color="#8a6aa8")
    axis.set_xlabel("weighted tokens per question")
    axis.set_ylabel("questions")
    axis.set_title("Token cost distribution")
    path = outdir / "tokens.png"
    _save(figure, path)
    return path


def render_report_figures(report: Mapping[str, Any], outdir) -> List[Path]:
    """Write the figures a report's data supports; returns written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    rows = report.get("questions", [])
    if not rows:
        return written
    written.append(_accuracy_figure(report, outdir))
    if all("attempts" in row for row in rows):
        written.append(_attempts_figure(report, outdir))
    if "method_proportions" in report["aggregates"]:
        written.append(_methods_figure(report, outdir))
    written.append(_tokens_figure(report, outdir))
    return written
