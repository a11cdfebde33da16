"""Tree model of a document repository."""

from __future__ import annotations

from collections.abc import Iterator
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator

ROOT_PATH = "."


class NodeKind(StrEnum):
    LEAF = "leaf"
    DIRECTORY = "directory"


def child_path(parent_path: str, name: str) -> str:
    """Path of a child named `name` under `parent_path`."""
    return name if parent_path == ROOT_PATH else f"{parent_path}/{name}"


class DocumentNode(BaseModel):
    """A document (leaf) or directory in the repository tree."""

    model_config = ConfigDict(frozen=True)

    path: str = Field(..., min_length=1, description="'/'-separated path relative to the root; root is '.'")
    kind: NodeKind
    text: str | None = Field(None, description="Document text, leaves only")
    children: tuple[DocumentNode, ...] = ()

    @model_validator(mode="after")
    def _check_shape(self) -> DocumentNode:
        if self.kind is NodeKind.LEAF:
            if not self.text:
                raise ValueError(f"leaf {self.path!r} must carry nonempty text")
            if self.children:
                raise ValueError(f"leaf {self.path!r} cannot have children")
        else:
            if self.text is not None:
                raise ValueError(f"directory {self.path!r} cannot carry text")
            if not self.children:
                raise ValueError(f"directory {self.path!r} must have children")
            seen: set[str] = set()
            for child in self.children:
                if child_path(self.path, child.name) != child.path:
                    raise ValueError(f"child {child.path!r} does not extend parent {self.path!r}")
                if child.path in seen:
                    raise ValueError(f"duplicate child path {child.path!r}")
                seen.add(child.path)
        return self

    @property
    def name(self) -> str:
        return self.path.rsplit("/", 1)[-1]

    @property
    def is_leaf(self) -> bool:
        return self.kind is NodeKind.LEAF

    def iter_leaves(self) -> Iterator[DocumentNode]:
        """Leaves in child order (depth first)."""
        if self.is_leaf:
            yield self
            return
        for child in self.children:
            yield from child.iter_leaves()

    def iter_directories_postorder(self) -> Iterator[DocumentNode]:
        """Directories, each one after all of its descendants."""
        if self.is_leaf:
            return
        for child in self.children:
            yield from child.iter_directories_postorder()
        yield self

    def iter_nodes(self) -> Iterator[DocumentNode]:
        yield self
        for child in self.children:
            yield from child.iter_nodes()


DocumentNode.model_rebuild()


class CorpusTree(BaseModel):
    """A validated repository tree; immutable once built."""

    model_config = ConfigDict(frozen=True)

    root: DocumentNode
    leaf_count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def _check_root(self) -> CorpusTree:
        if self.root.kind is not NodeKind.DIRECTORY or self.root.path != ROOT_PATH:
            raise ValueError("corpus root must be the '.' directory")
        counted = sum(1 for _ in self.root.iter_leaves())
        if counted != self.leaf_count:
            raise ValueError(f"leaf_count {self.leaf_count} does not match {counted} leaves")
        return self

    @classmethod
    def from_root(cls, root: DocumentNode) -> CorpusTree:
        return cls(root=root, leaf_count=sum(1 for _ in root.iter_leaves()))

    def leaves(self) -> list[DocumentNode]:
        return list(self.root.iter_leaves())

    def directories(self) -> list[DocumentNode]:
        return list(self.root.iter_directories_postorder())

    def index(self) -> dict[str, DocumentNode]:
        """Map of every node path to its node."""
        return {node.path: node for node in self.root.iter_nodes()}
