"""Deterministic JSON / JSONL writers shared by every artifact."""

from __future__ import annotations

from collections.abc import Iterable, Iterator
import hashlib
import json
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel

ModelT = TypeVar("ModelT", bound=BaseModel)


def write_jsonl(path: Path, records: Iterable[BaseModel]) -> None:
    """Write one compact JSON document per line, replacing the file atomically."""
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(record.model_dump_json() + "\n")
    tmp.replace(path)


def append_jsonl(path: Path, record: BaseModel) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as f:
        f.write(record.model_dump_json() + "\n")
        f.flush()


def read_jsonl(path: Path, model: type[ModelT]) -> Iterator[ModelT]:
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield model.model_validate_json(line)


def write_json(path: Path, data: BaseModel | dict[str, Any]) -> None:
    """Write indented JSON with a trailing newline, replacing the file atomically."""
    if isinstance(data, BaseModel):
        text = data.model_dump_json(indent=2)
    else:
        text = json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text + "\n", encoding="utf-8", newline="\n")
    tmp.replace(path)


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()
