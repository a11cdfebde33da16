"""Run directories: manifest, lock and stage driver."""

from .manifest import BUILD_STAGES, STAGE_ARTIFACTS, RunLock, RunManifest, Stage, StageRecord, StageStatus
from .pipeline import PREREQUISITES, PipelineRun, read_gold, write_tsv

__all__ = [
    "BUILD_STAGES",
    "PREREQUISITES",
    "STAGE_ARTIFACTS",
    "PipelineRun",
    "RunLock",
    "RunManifest",
    "Stage",
    "StageRecord",
    "StageStatus",
    "read_gold",
    "write_tsv",
]
