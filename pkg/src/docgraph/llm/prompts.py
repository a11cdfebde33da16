"""Prompt templates and request construction."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
import re

from ..errors import ConfigError
from ..utils.resources import resource_path
from .models import ChatRequest

TEMPLATE_NAMES = (
    "system",
    "summary_initial",
    "summary_directory",
    "order_children",
    "summary_context",
    "entity_types",
    "type_definition",
    "entity_extraction",
    "relation_extraction",
    "judge_precision",
    "judge_equivalence",
)

EXTRACTION_TEMPLATES = frozenset({"entity_extraction", "relation_extraction"})

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


class TemplateSet:
    """Named prompt templates with ``{placeholder}`` fields.

    Substitution is a single pass, so placeholder-like text inside substituted
    values (documents, summaries) is left alone. Unknown placeholders are kept
    verbatim.
    """

    def __init__(self, templates: Mapping[str, str]) -> None:
        missing = [name for name in TEMPLATE_NAMES if name not in templates]
        if missing:
            raise ConfigError(f"missing prompt templates: {', '.join(missing)}")
        self._templates = dict(templates)

    @classmethod
    def load(cls, directory: str | Path | None = None) -> TemplateSet:
        base = Path(directory) if directory is not None else resource_path("templates")
        templates: dict[str, str] = {}
        for name in TEMPLATE_NAMES:
            path = base / f"{name}.txt"
            try:
                templates[name] = path.read_text(encoding="utf-8").strip("\n")
            except OSError as e:
                raise ConfigError(f"cannot read prompt template {path}: {e}") from e
        return cls(templates)

    def render(self, name: str, **values: str) -> str:
        template = self._templates[name]
        return _PLACEHOLDER.sub(lambda m: values.get(m.group(1), m.group(0)), template)


@dataclass(frozen=True)
class PromptKit:
    """Everything a pipeline stage needs to build and re-ask requests."""

    templates: TemplateSet
    temperature: float = 0.1
    retries: int = 2
    summary_max_tokens: int = 1024
    extraction_max_tokens: int = 2048

    def request(self, name: str, **values: str) -> ChatRequest:
        max_tokens = self.extraction_max_tokens if name in EXTRACTION_TEMPLATES else self.summary_max_tokens
        return ChatRequest(
            system_prompt=self.templates.render("system"),
            user_prompt=self.templates.render(name, **values),
            temperature=self.temperature,
            max_tokens=max_tokens,
        )


def format_reference(entries: list[tuple[str, str]]) -> str:
    """Render retrieved summaries as ``"path": summary`` lines."""
    if not entries:
        return "(none)"
    return "\n".join(f'"{path}": {text}' for path, text in entries)
