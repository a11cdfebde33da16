from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

import docgraph


@lru_cache(maxsize=1)
def get_package_root() -> Path:
    """Return the installed package directory (cached)."""
    return Path(os.path.dirname(os.path.abspath(docgraph.__file__)))


def resource_path(relative_path: str) -> Path:
    """Return absolute path to a packaged resource such as a prompt template.

    If `DOCGRAPH_RESOURCES_ROOT` is set, it is used as the base directory.
    Otherwise the package directory is used.

    `relative_path` is expected to look like `templates/...`.
    """
    base = Path(os.getenv("DOCGRAPH_RESOURCES_ROOT", str(get_package_root())))
    return base / relative_path
