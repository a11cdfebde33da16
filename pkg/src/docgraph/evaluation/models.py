"""Judge verdicts and evaluation reports."""

from __future__ import annotations

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field

from ..pipeline.models import Triple


class Verdict(StrEnum):
    TRUE = "true"
    FALSE = "false"
    UNPARSEABLE = "unparseable"


class JudgedTriple(BaseModel):
    model_config = ConfigDict(frozen=True)

    triple: Triple
    verdict: Verdict
    judge_raw: str = ""


class DocumentScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    judged: int = Field(0, ge=0)
    true: int = Field(0, ge=0)


class GoldTriple(BaseModel):
    """One line of a gold file: ``{"subject", "predicate", "object", "doc"}``."""

    model_config = ConfigDict(frozen=True)

    subject: str = Field(..., min_length=1)
    predicate: str = Field(..., min_length=1)
    object: str = Field(..., min_length=1)
    doc: str | None = None

    def spo(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


class GoldMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float
    recall: float
    f1: float
    matched: int
    extracted: int
    gold: int


class EvalReport(BaseModel):
    """Aggregate judge results; `precision` is absent when no triple was judgeable."""

    model_config = ConfigDict(frozen=True)

    precision: float | None = None
    recall_number: int = 0
    average_recall_number: float = 0.0
    judged_true: int = 0
    judged_false: int = 0
    unparseable: int = 0
    entity_count: int = 0
    average_entity_number: float = 0.0
    per_document: dict[str, DocumentScore] = Field(default_factory=dict)
    gold_metrics: GoldMetrics | None = None
