"""Collection of recorded (non-fatal) pipeline warnings."""

from __future__ import annotations

import threading

from loguru import logger


class Diagnostics:
    """Logs degraded-but-continuing events and keeps them for the run manifest."""

    def __init__(self) -> None:
        self._messages: list[str] = []
        self._lock = threading.Lock()

    def warn(self, message: str) -> None:
        logger.warning(message)
        with self._lock:
            self._messages.append(message)

    @property
    def messages(self) -> list[str]:
        with self._lock:
            return list(self._messages)

    def __len__(self) -> int:
        with self._lock:
            return len(self._messages)
