"""Re-prompting when a reply does not parse."""

from __future__ import annotations

from collections.abc import Callable
from typing import TypeVar

from loguru import logger

from ..errors import ParseError
from .gateway import ChatGateway
from .models import ChatRequest

T = TypeVar("T")

DEFAULT_RETRIES = 2

CORRECTIVE_INSTRUCTION = (
    "\n\nYour previous answer could not be parsed ({error}). "
    "Answer again and reply only in exactly the requested format."
)


async def complete_parsed(
    gateway: ChatGateway,
    request: ChatRequest,
    parse: Callable[[str], T],
    retries: int = DEFAULT_RETRIES,
) -> T:
    """Complete `request` and parse the reply, re-asking at most `retries` times.

    Each retry re-issues the original prompt with a corrective instruction
    appended. The last ParseError propagates once the retries are used up.
    """
    current = request
    for attempt in range(retries + 1):
        response = await gateway.complete(current)
        try:
            return parse(response.text)
        except ParseError as e:
            if attempt == retries:
                raise
            logger.debug(f"Unparseable reply (attempt {attempt + 1}/{retries + 1}): {e}")
            current = request.model_copy(
                update={"user_prompt": request.user_prompt + CORRECTIVE_INSTRUCTION.format(error=e)}
            )
    raise AssertionError("unreachable")
