"""Judge-based evaluation of a constructed graph."""

from .judge import check_reported_f1, f1, judge_precision, match_gold, parse_gold_line, parse_verdict
from .models import DocumentScore, EvalReport, GoldMetrics, GoldTriple, JudgedTriple, Verdict
from .report import render_table, report_json, write_report

__all__ = [
    "DocumentScore",
    "EvalReport",
    "GoldMetrics",
    "GoldTriple",
    "JudgedTriple",
    "Verdict",
    "check_reported_f1",
    "f1",
    "judge_precision",
    "match_gold",
    "parse_gold_line",
    "parse_verdict",
    "render_table",
    "report_json",
    "write_report",
]
