"""Exception hierarchy shared by every docgraph module."""

from __future__ import annotations


class DocGraphError(Exception):
    """Base class for all docgraph errors.

    `stage` names the pipeline stage that raised it, once the stage driver has seen it.
    """

    stage: str | None = None


class ConfigError(DocGraphError):
    """Invalid or incomplete run configuration."""


# Corpus


class NotFound(DocGraphError):
    """A corpus path does not exist."""


class EmptyCorpus(DocGraphError):
    """No file with an included extension was found."""


class DecodeError(DocGraphError):
    """A corpus file is not valid UTF-8."""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"{path}: not valid UTF-8 ({reason})")
        self.path = path


class EmptyText(DocGraphError):
    """Flat text to be chunked is empty."""


# LLM gateway


class GatewayError(DocGraphError):
    """Base class for chat-completion failures."""


class TransportError(GatewayError):
    """The endpoint could not be reached, or kept failing after retries."""


class AuthError(GatewayError):
    """The endpoint rejected the credential."""


class ContextOverflow(GatewayError):
    """The endpoint rejected the request as too long."""


class ParseError(DocGraphError):
    """Structured model output could not be parsed."""


# Embeddings and vector store


class ProviderError(DocGraphError):
    """The embedding provider failed or was called with invalid input."""


class ZeroVector(DocGraphError):
    """An embedding has zero norm, so cosine distance is undefined."""


class DuplicateId(DocGraphError):
    """A vector-store id is already present."""


class DimensionMismatch(DocGraphError):
    """A vector does not match the expected dimension."""


# Clustering


class BadK(DocGraphError):
    """Cluster count outside [1, N]."""


class SingleCluster(DocGraphError):
    """Silhouette requested for fewer than two clusters."""


class BadRange(DocGraphError):
    """Invalid k sweep range."""


# Pipeline


class NodeError(DocGraphError):
    """A per-node failure, carrying the path of the offending node."""

    def __init__(self, node_path: str, message: str) -> None:
        super().__init__(f"{node_path}: {message}")
        self.node_path = node_path


class EmptySchema(DocGraphError):
    """No entity type survived singleton filtering."""


# Runner


class MissingArtifact(DocGraphError):
    """A stage input artifact is absent from the run directory."""


class PrerequisiteMissing(DocGraphError):
    """A stage was requested before the stages it depends on are done."""


class RunLocked(DocGraphError):
    """Another process holds the run directory lock."""
