"""Run configuration."""

from __future__ import annotations

from pathlib import Path
import tomllib
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .embedding.providers import DEFAULT_FASTEMBED_MODEL, Embedder, FastEmbedEmbedder, HashingEmbedder
from .errors import ConfigError
from .llm.gateway import RemoteGateway
from .llm.prompts import PromptKit, TemplateSet


class EndpointConfig(BaseModel):
    """An OpenAI-compatible chat endpoint. The credential is read from `api_key_env`."""

    model_config = ConfigDict(extra="forbid")

    base_url: str = "http://localhost:8000/v1"
    model: str = "meta-llama/Llama-3.1-70B-Instruct"
    api_key_env: str = "LKD_API_KEY"
    timeout: float = Field(120.0, gt=0)


class EmbeddingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    provider: Literal["fastembed", "hashing"] = "fastembed"
    model: str = DEFAULT_FASTEMBED_MODEL
    dimension: int = Field(384, ge=1)


class RunConfig(BaseSettings):
    """Effective configuration of one pipeline run.

    Values come from (highest first) explicit overrides, the TOML config file,
    ``DOCGRAPH_*`` environment variables and the defaults below.
    """

    model_config = SettingsConfigDict(env_prefix="DOCGRAPH_", env_nested_delimiter="__", extra="forbid")

    corpus_path: Path | None = None
    run_dir: Path = Path("run")
    generator: EndpointConfig = Field(default_factory=EndpointConfig)
    judge: EndpointConfig = Field(default_factory=lambda: EndpointConfig(api_key_env="LKD_JUDGE_API_KEY"))
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)

    temperature: float = Field(0.1, ge=0.0, le=2.0)
    retrieval_k: int = Field(10, ge=1)
    context_char_budget: int = Field(24000, ge=0)
    chunk_chars: int = Field(4000, ge=1)
    include_extensions: list[str] = Field(default_factory=lambda: ["md", "txt"])

    kmeans_seed: int = 0
    kmeans_restarts: int = Field(10, ge=1)
    sweep_k_min: int | None = Field(None, ge=2)
    sweep_k_max: int | None = Field(None, ge=2)

    parallelism: int = Field(4, ge=1)
    retries: int = Field(2, ge=0)
    summary_max_tokens: int = Field(1024, gt=0)
    extraction_max_tokens: int = Field(2048, gt=0)
    schema_char_budget: int = Field(16000, ge=1)
    export_tsv: bool = False
    templates_dir: Path | None = None

    @model_validator(mode="after")
    def _check_sweep(self) -> RunConfig:
        if (self.sweep_k_min is None) != (self.sweep_k_max is None):
            raise ValueError("sweep_k_min and sweep_k_max must be set together")
        if self.sweep_k_min is not None and self.sweep_k_max is not None and self.sweep_k_min > self.sweep_k_max:
            raise ValueError("sweep_k_min must not exceed sweep_k_max")
        return self

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides: Any) -> RunConfig:
        """Build a config from an optional TOML file plus overrides; invalid input raises ConfigError."""
        data: dict[str, Any] = {}
        if path is not None:
            try:
                with open(path, "rb") as f:
                    data = tomllib.load(f)
            except OSError as e:
                raise ConfigError(f"cannot read config {path}: {e}") from e
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"config {path} is not valid TOML: {e}") from e
        data.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls(**data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    @property
    def sweep(self) -> tuple[int, int] | None:
        if self.sweep_k_min is None or self.sweep_k_max is None:
            return None
        return (self.sweep_k_min, self.sweep_k_max)

    def snapshot(self) -> dict[str, Any]:
        """The effective configuration with every default materialized."""
        return self.model_dump(mode="json")

    def prompt_kit(self) -> PromptKit:
        return PromptKit(
            templates=TemplateSet.load(self.templates_dir),
            temperature=self.temperature,
            retries=self.retries,
            summary_max_tokens=self.summary_max_tokens,
            extraction_max_tokens=self.extraction_max_tokens,
        )

    def build_embedder(self) -> Embedder:
        if self.embedding.provider == "hashing":
            return HashingEmbedder(self.embedding.dimension)
        return FastEmbedEmbedder(self.embedding.model, self.embedding.dimension)

    def build_gateway(self, endpoint: EndpointConfig) -> RemoteGateway:
        return RemoteGateway.from_env(
            endpoint.base_url,
            endpoint.model,
            endpoint.api_key_env,
            timeout=endpoint.timeout,
            parallelism=self.parallelism,
        )
