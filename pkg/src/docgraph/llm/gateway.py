"""Chat-completion gateways.

RemoteGateway speaks the OpenAI-compatible ``/chat/completions`` protocol over
httpx; the scripted backend in `docgraph.llm.scripted` stands in for it in tests
and offline runs.
"""

from __future__ import annotations

import asyncio
from collections.abc import Awaitable, Callable
import os
from typing import Any, Protocol, runtime_checkable

import httpx
from loguru import logger

from ..errors import AuthError, ContextOverflow, TransportError
from .models import ChatRequest, ChatResponse, Usage

MAX_ATTEMPTS = 5
BACKOFF_BASE_S = 1.0
BACKOFF_FACTOR = 2.0
DEFAULT_PARALLELISM = 4

_RETRYABLE_STATUS = frozenset({408, 409, 425, 429})
_OVERFLOW_MARKERS = ("context length", "context_length", "maximum context", "too long", "too many tokens")


@runtime_checkable
class ChatGateway(Protocol):
    async def complete(self, request: ChatRequest) -> ChatResponse: ...


def _is_overflow(response: httpx.Response) -> bool:
    if response.status_code == 413:
        return True
    if response.status_code != 400:
        return False
    body = response.text.lower()
    return any(marker in body for marker in _OVERFLOW_MARKERS)


def _usage(data: dict[str, Any]) -> Usage:
    usage = data.get("usage") or {}
    if not isinstance(usage, dict):
        raise TransportError(f"malformed usage in chat-completion response: {str(usage)[:200]}")
    try:
        return Usage(
            prompt_tokens=int(usage.get("prompt_tokens") or 0),
            completion_tokens=int(usage.get("completion_tokens") or 0),
        )
    except (TypeError, ValueError) as e:
        raise TransportError(f"malformed usage in chat-completion response: {str(usage)[:200]}") from e


def _response_text(data: dict[str, Any]) -> str:
    try:
        content = data["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as e:
        raise TransportError(f"malformed chat-completion response: {str(data)[:200]}") from e
    if content is None:
        raise TransportError("chat-completion response has no content")
    return str(content)


class RemoteGateway:
    """OpenAI-compatible chat-completion client with bounded parallelism and retries.

    Transport failures, 429 and 5xx responses are retried with exponential
    backoff (1 s, 2 s, 4 s, 8 s) for at most five attempts. A rejected credential
    fails immediately with AuthError; a request rejected as too long raises
    ContextOverflow so the caller can shrink it.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        *,
        api_key: str | None = None,
        timeout: float = 120.0,
        parallelism: int = DEFAULT_PARALLELISM,
        client: httpx.AsyncClient | None = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ) -> None:
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.AsyncClient(timeout=timeout)
        self._owns_client = client is None
        self._semaphore = asyncio.Semaphore(parallelism)
        self._sleep = sleep

    @classmethod
    def from_env(
        cls,
        base_url: str,
        model: str,
        api_key_env: str,
        **kwargs: Any,
    ) -> RemoteGateway:
        """Build a gateway whose credential is read from the environment variable `api_key_env`."""
        api_key = os.getenv(api_key_env) or None
        if api_key is None:
            logger.warning(f"{api_key_env} is not set; calling {base_url} without credentials")
        return cls(base_url, model, api_key=api_key, **kwargs)

    def _payload(self, request: ChatRequest) -> dict[str, Any]:
        return {
            "model": self.model,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    async def complete(self, request: ChatRequest) -> ChatResponse:
        url = f"{self.base_url}/chat/completions"
        payload = self._payload(request)
        last_error = "no attempt made"

        async with self._semaphore:
            for attempt in range(1, MAX_ATTEMPTS + 1):
                try:
                    response = await self._client.post(url, json=payload, headers=self._headers)
                except httpx.TransportError as e:
                    last_error = f"{type(e).__name__}: {e}"
                else:
                    if response.status_code in (401, 403):
                        raise AuthError(f"{url} rejected the credential (HTTP {response.status_code})")
                    if _is_overflow(response):
                        raise ContextOverflow(f"{url} rejected the request as too long: {response.text[:200]}")
                    if response.status_code in _RETRYABLE_STATUS or response.status_code >= 500:
                        last_error = f"HTTP {response.status_code}"
                    elif response.status_code >= 400:
                        raise TransportError(f"{url} returned HTTP {response.status_code}: {response.text[:200]}")
                    else:
                        try:
                            data = response.json()
                        except ValueError as e:
                            raise TransportError(f"{url} returned non-JSON body") from e
                        if not isinstance(data, dict):
                            raise TransportError(f"{url} returned a non-object JSON body: {str(data)[:200]}")
                        return ChatResponse(text=_response_text(data), usage=_usage(data))

                if attempt == MAX_ATTEMPTS:
                    break
                delay = BACKOFF_BASE_S * BACKOFF_FACTOR ** (attempt - 1)
                logger.debug(f"Chat completion attempt {attempt} failed ({last_error}); retrying in {delay:.0f}s")
                await self._sleep(delay)

        raise TransportError(f"{url} failed after {MAX_ATTEMPTS} attempts: {last_error}")

    async def aclose(self) -> None:
        if self._owns_client:
            await self._client.aclose()

    async def __aenter__(self) -> RemoteGateway:
        return self

    async def __aexit__(self, *exc_info: object) -> None:
        await self.aclose()
