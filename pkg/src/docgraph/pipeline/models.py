"""Records produced by the three pipeline stages."""

from __future__ import annotations

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class SummaryPhase(StrEnum):
    INITIAL = "initial"
    DIRECTORY = "directory"
    CONTEXT_ENHANCED = "context_enhanced"


class SummaryRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    node_path: str
    phase: SummaryPhase
    text: str = Field(..., min_length=1)
    context_refs: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _initial_has_no_context(self) -> SummaryRecord:
        if self.phase is not SummaryPhase.CONTEXT_ENHANCED and self.context_refs:
            raise ValueError(f"{self.phase} summaries carry no context references")
        return self


class AccessOrder(BaseModel):
    """Leaf reading order and the per-directory child permutations that induce it."""

    model_config = ConfigDict(frozen=True)

    sequence: tuple[str, ...]
    per_level_orders: dict[str, tuple[str, ...]]


class TypedMention(BaseModel):
    model_config = ConfigDict(frozen=True)

    type_name: str = Field(..., min_length=1)
    source_path: str

    @field_validator("type_name", mode="before")
    @classmethod
    def _strip(cls, value: object) -> object:
        return value.strip() if isinstance(value, str) else value


class EntitySchema(BaseModel):
    """Canonical entity types with one-sentence definitions.

    `provenance` maps each canonical name to the raw type names merged into it.
    """

    model_config = ConfigDict(frozen=True)

    entries: dict[str, str]
    provenance: dict[str, list[str]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check(self) -> EntitySchema:
        folded: set[str] = set()
        for name, definition in self.entries.items():
            if not name.strip():
                raise ValueError("schema type names must be nonempty")
            if name.casefold() in folded:
                raise ValueError(f"duplicate schema type {name!r} (case-insensitive)")
            folded.add(name.casefold())
            if not definition.strip():
                raise ValueError(f"schema type {name!r} has an empty definition")
        seen_raw: set[str] = set()
        for name, raw_names in self.provenance.items():
            if name not in self.entries:
                raise ValueError(f"provenance for unknown type {name!r}")
            for raw in raw_names:
                if raw in seen_raw:
                    raise ValueError(f"raw type {raw!r} is merged into more than one type")
                seen_raw.add(raw)
        return self

    def lookup(self, name: str) -> str | None:
        """Canonical spelling of `name` (case-insensitive), if it is a schema type."""
        folded = name.strip().casefold()
        for canonical in self.entries:
            if canonical.casefold() == folded:
                return canonical
        return None


class ExtractedEntity(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    entity_type: str
    source_path: str


class Triple(BaseModel):
    model_config = ConfigDict(frozen=True)

    subject: str = Field(..., min_length=1)
    predicate: str = Field(..., min_length=1)
    object: str = Field(..., min_length=1)
    source_path: str
    subject_type: str | None = None
    object_type: str | None = None

    def key(self) -> tuple[str, str, str, str]:
        return (self.subject.casefold(), self.predicate.casefold(), self.object.casefold(), self.source_path)

    def spo(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


class ExtractionStats(BaseModel):
    """Counts that reconcile parsed triples with the assembled graph:
    triples_parsed - dangling - duplicates == len(graph.triples)."""

    entities_parsed: int = 0
    off_schema: int = 0
    triples_parsed: int = 0
    malformed: int = 0
    dangling: int = 0
    duplicates: int = 0
    documents_failed: int = 0

    def merge(self, other: ExtractionStats) -> ExtractionStats:
        return ExtractionStats(**{name: getattr(self, name) + getattr(other, name) for name in type(self).model_fields})


class KnowledgeGraph(BaseModel):
    model_config = ConfigDict(frozen=True)

    triples: tuple[Triple, ...] = ()
    entities: tuple[ExtractedEntity, ...] = ()
    entity_schema: EntitySchema
