"""Deterministic chat backend driven by substring rules."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path
import threading
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator
import yaml

from ..errors import ConfigError
from .models import ChatRequest, ChatResponse, Usage


class ScriptRule(BaseModel):
    """Respond with `response` when every pattern in `match` occurs in the user prompt."""

    model_config = ConfigDict(frozen=True)

    match: tuple[str, ...] = Field(..., min_length=1)
    response: str

    @field_validator("match", mode="before")
    @classmethod
    def _coerce_match(cls, value: Any) -> Any:
        if isinstance(value, str):
            return (value,)
        return value

    def matches(self, prompt: str) -> bool:
        return all(pattern in prompt for pattern in self.match)


class Script(BaseModel):
    model_config = ConfigDict(frozen=True)

    default_response: str = ""
    rules: tuple[ScriptRule, ...] = ()


class ScriptedBackend:
    """Chat gateway stand-in: first matching rule wins, every call is logged."""

    def __init__(self, rules: Sequence[ScriptRule | tuple[str | Sequence[str], str]] = (), default_response: str = "") -> None:
        self.rules: tuple[ScriptRule, ...] = tuple(
            rule if isinstance(rule, ScriptRule) else ScriptRule(match=rule[0], response=rule[1]) for rule in rules
        )
        self.default_response = default_response
        self._call_log: list[ChatRequest] = []
        self._lock = threading.Lock()

    @classmethod
    def from_script(cls, script: Script) -> ScriptedBackend:
        return cls(script.rules, script.default_response)

    @classmethod
    def from_yaml(cls, path: str | Path) -> ScriptedBackend:
        """Load ``{default_response: str, rules: [{match: str | [str], response: str}]}``."""
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"cannot read script {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"script {path} is not valid YAML: {e}") from e
        try:
            return cls.from_script(Script.model_validate(data))
        except ValueError as e:
            raise ConfigError(f"script {path} is malformed: {e}") from e

    @property
    def call_log(self) -> list[ChatRequest]:
        with self._lock:
            return list(self._call_log)

    def respond(self, request: ChatRequest) -> str:
        for rule in self.rules:
            if rule.matches(request.user_prompt):
                return rule.response
        return self.default_response

    async def complete(self, request: ChatRequest) -> ChatResponse:
        with self._lock:
            self._call_log.append(request)
        text = self.respond(request)
        return ChatResponse(
            text=text,
            usage=Usage(prompt_tokens=len(request.user_prompt.split()), completion_tokens=len(text.split())),
        )
