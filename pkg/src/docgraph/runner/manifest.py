"""Run manifest and run-directory lock."""

from __future__ import annotations

from enum import StrEnum
import os
from pathlib import Path
from types import TracebackType
from typing import Any

from loguru import logger
from pydantic import BaseModel, Field

from ..errors import ConfigError, RunLocked
from ..pipeline.models import ExtractionStats
from ..utils.jsonl import file_digest, write_json

MANIFEST_NAME = "manifest.json"
LOCK_NAME = "run.lock"


class Stage(StrEnum):
    ORDER = "order"
    SCHEMA = "schema"
    EXTRACT = "extract"
    EVAL = "eval"


class StageStatus(StrEnum):
    PENDING = "pending"
    DONE = "done"
    FAILED = "failed"


STAGE_ARTIFACTS: dict[Stage, tuple[str, ...]] = {
    Stage.ORDER: ("summaries.jsonl", "order.json", "store.jsonl"),
    Stage.SCHEMA: ("schema.json",),
    Stage.EXTRACT: ("entities.jsonl", "triples.jsonl"),
    Stage.EVAL: ("eval_report.json",),
}

BUILD_STAGES = (Stage.ORDER, Stage.SCHEMA, Stage.EXTRACT)


class StageRecord(BaseModel):
    status: StageStatus = StageStatus.PENDING
    artifacts: dict[str, str] = Field(default_factory=dict, description="artifact file name -> sha256")
    warnings: list[str] = Field(default_factory=list)
    error: str | None = None


def _pending_stages() -> dict[str, StageRecord]:
    return {stage.value: StageRecord() for stage in Stage}


class RunManifest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    stages: dict[str, StageRecord] = Field(default_factory=_pending_stages)
    warnings: list[str] = Field(default_factory=list)
    extraction: ExtractionStats | None = None

    @classmethod
    def load(cls, run_dir: Path) -> RunManifest:
        path = run_dir / MANIFEST_NAME
        if not path.exists():
            return cls()
        try:
            return cls.model_validate_json(path.read_text(encoding="utf-8"))
        except ValueError as e:
            raise ConfigError(f"{path} is not a valid run manifest: {e}") from e

    def save(self, run_dir: Path) -> None:
        self.warnings = [w for stage in Stage for w in self.stages[stage.value].warnings]
        write_json(run_dir / MANIFEST_NAME, self)

    def record(self, stage: Stage) -> StageRecord:
        return self.stages.setdefault(stage.value, StageRecord())

    def is_done(self, stage: Stage, run_dir: Path) -> bool:
        """Done and every recorded artifact still exists with the recorded digest."""
        record = self.record(stage)
        if record.status is not StageStatus.DONE or not record.artifacts:
            return False
        for name, digest in record.artifacts.items():
            path = run_dir / name
            if not path.is_file() or file_digest(path) != digest:
                logger.info(f"Stage {stage} artifact {name} is missing or changed; stage will rerun")
                return False
        return True

    def mark_done(self, stage: Stage, run_dir: Path, artifacts: list[str], warnings: list[str]) -> None:
        self.stages[stage.value] = StageRecord(
            status=StageStatus.DONE,
            artifacts={name: file_digest(run_dir / name) for name in artifacts},
            warnings=warnings,
        )

    def mark_failed(self, stage: Stage, error: BaseException, warnings: list[str]) -> None:
        self.stages[stage.value] = StageRecord(status=StageStatus.FAILED, warnings=warnings, error=str(error))


class RunLock:
    """Advisory lock: a ``run.lock`` file created exclusively for the lifetime of a run."""

    def __init__(self, run_dir: Path) -> None:
        self.path = run_dir / LOCK_NAME

    def __enter__(self) -> RunLock:
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError as e:
            raise RunLocked(f"{self.path} exists; another process is using this run directory") from e
        with os.fdopen(fd, "w") as f:
            f.write(f"{os.getpid()}\n")
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        self.path.unlink(missing_ok=True)
