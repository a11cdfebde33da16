"""Evaluation report output."""

from __future__ import annotations

import json
from pathlib import Path

from rich.console import Console
from rich.table import Table

from .models import EvalReport


def report_json(report: EvalReport) -> str:
    """Deterministic JSON: sorted keys, absent values omitted, trailing newline."""
    data = report.model_dump(mode="json", exclude_none=True)
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def render_table(report: EvalReport) -> Table:
    table = Table(title="Knowledge graph evaluation")
    table.add_column("Metric")
    table.add_column("Value", justify="right")
    table.add_row("Precision", "n/a" if report.precision is None else f"{report.precision:.1%}")
    table.add_row("Recall number", str(report.recall_number))
    table.add_row("Average recall number", f"{report.average_recall_number:.1f}")
    table.add_row("Unparseable verdicts", str(report.unparseable))
    table.add_row("Entities", str(report.entity_count))
    table.add_row("Average entities per document", f"{report.average_entity_number:.1f}")
    if report.gold_metrics is not None:
        gm = report.gold_metrics
        table.add_row("Gold precision", f"{gm.precision:.1%}")
        table.add_row("Gold recall", f"{gm.recall:.1%}")
        table.add_row("Gold F1", f"{gm.f1 * 100:.1f}")
    return table


def write_report(report: EvalReport, path: Path, console: Console | None = None) -> None:
    """Write `report` as JSON to `path` and print a summary table to stdout."""
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(report_json(report), encoding="utf-8", newline="\n")
    tmp.replace(path)
    (console or Console()).print(render_table(report))
