"""Parsers for the structured parts of model replies.

Models wrap their answers in prose and markdown; every parser locates the first
structure of the expected shape and raises ParseError when there is none.
"""

from __future__ import annotations

import json
import re
from collections.abc import Iterable
from typing import Any, NamedTuple

from ..errors import ParseError

_LIST_RE = re.compile(r"\[([^\[\]]*)\]")
_TUPLE_RE = re.compile(r"\(([^()]*)\)")
_KEY_RE = re.compile(r'^\s*(?:"([^"]*)"|\'([^\']*)\'|([^"\'\[\]{}:,]+?))\s*:(?!//)')
_QUOTES = "\"'`“”‘’"


class TripleParse(NamedTuple):
    triples: list[tuple[str, str, str]]
    malformed: int


def _clean_item(item: str) -> str:
    return item.strip().strip(_QUOTES).strip()


def _split_items(body: str) -> list[str]:
    items = (_clean_item(part) for part in body.split(","))
    return [item for item in items if item]


def parse_string_list(text: str) -> list[str]:
    """Items of the first bracketed list in `text`, trimmed of whitespace and quotes."""
    match = _LIST_RE.search(text)
    if match is None:
        raise ParseError(f"no bracketed list found in: {text[:200]!r}")
    return _split_items(match.group(1))


def parse_triples(text: str) -> TripleParse:
    """All parenthesized 3-tuples in `text`; other tuples are counted as malformed.

    A reply that is an explicit empty list (``[]``) with no tuples is a valid
    empty answer.
    """
    triples: list[tuple[str, str, str]] = []
    malformed = 0
    for match in _TUPLE_RE.finditer(text):
        fields = [_clean_item(part) for part in match.group(1).split(",")]
        if len(fields) == 3 and all(fields):
            triples.append((fields[0], fields[1], fields[2]))
        else:
            malformed += 1

    if not triples:
        # A bare "[]" is the model saying the document holds no relation.
        if malformed == 0 and re.search(r"\[\s*\]", text):
            return TripleParse([], 0)
        raise ParseError(f"no well-formed (subject, predicate, object) tuple in: {text[:200]!r}")
    return TripleParse(triples, malformed)


def _find_balanced(text: str, *, open_char: str, close_char: str) -> str | None:
    """Return the first balanced {...} or [...] substring, respecting quoted strings."""
    start = text.find(open_char)
    if start < 0:
        return None

    depth = 0
    in_string = False
    escape = False
    for idx in range(start, len(text)):
        ch = text[idx]

        if in_string:
            if escape:
                escape = False
                continue
            if ch == "\\":
                escape = True
                continue
            if ch == '"':
                in_string = False
            continue

        if ch == '"':
            in_string = True
            continue
        if ch == open_char:
            depth += 1
            continue
        if ch == close_char:
            depth -= 1
            if depth == 0:
                return text[start : idx + 1]
            continue

    return None


def _split_top_level(body: str) -> list[str]:
    """Split on commas that are outside brackets and double quotes."""
    parts: list[str] = []
    depth = 0
    in_string = False
    current: list[str] = []
    for ch in body:
        if ch == '"':
            in_string = not in_string
        elif not in_string:
            if ch in "[(":
                depth += 1
            elif ch in "])" and depth > 0:
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append("".join(current))
                current = []
                continue
        current.append(ch)
    parts.append("".join(current))
    return parts


def _normalize_value(value: Any) -> str | list[str]:
    if isinstance(value, list):
        items = (_clean_item(str(v)) for v in value if v is not None)
        return [item for item in items if item]
    if isinstance(value, str):
        return value.strip()
    return "" if value is None else str(value)


def _parse_loose_value(raw: str) -> str | list[str]:
    value = raw.strip()
    if value.startswith("[") and value.endswith("]"):
        return _split_items(value[1:-1])
    return _clean_item(value)


def _starts_entry(match: re.Match[str], known: set[str], *, first: bool) -> bool:
    """Whether a `key:` prefix opens a new entry rather than sitting inside the previous value."""
    quoted = match.group(1) if match.group(1) is not None else match.group(2)
    if first or quoted is not None:
        return True
    key = match.group(3).strip()
    # Prose such as "such as env: prod" is lowercase-initial; type names are not.
    return key.casefold() in known or not key[:1].islower()


def _parse_loose_mapping(body: str, known: set[str]) -> dict[str, str | list[str]]:
    entries: list[tuple[str, list[str]]] = []
    for segment in _split_top_level(body):
        match = _KEY_RE.match(segment)
        if match is not None and _starts_entry(match, known, first=not entries):
            key = next(group for group in match.groups() if group is not None)
            entries.append((key, [segment[match.end() :]]))
        elif entries:
            # An unquoted value containing commas continues the previous entry.
            entries[-1][1].append(segment)
        elif segment.strip():
            raise ParseError(f"mapping entry without a key: {segment[:80]!r}")

    result: dict[str, str | list[str]] = {}
    for key, pieces in entries:
        key = key.strip()
        if key and key not in result:
            result[key] = _parse_loose_value(",".join(pieces))
    return result


def parse_name_map(text: str, known_names: Iterable[str] = ()) -> dict[str, str | list[str]]:
    """Parse the first brace-delimited mapping in `text`.

    Accepts strict JSON as well as the loose form models tend to produce, e.g.
    ``{Configuration:[Blackbox.yml, Prometheus.yml]}`` or
    ``{"Configuration": Prometheus is configured by YAML files, ...}``.

    In the loose form an unquoted, lowercase-initial `key:` after the first
    entry continues the previous value unless it is one of `known_names`.
    """
    block = _find_balanced(text, open_char="{", close_char="}")
    if block is None:
        start, end = text.find("{"), text.rfind("}")
        if start < 0 or end <= start:
            raise ParseError(f"no brace-delimited mapping found in: {text[:200]!r}")
        block = text[start : end + 1]

    try:
        parsed = json.loads(block)
    except (json.JSONDecodeError, RecursionError):
        parsed = None
    if isinstance(parsed, dict):
        result: dict[str, str | list[str]] = {}
        for key, value in parsed.items():
            name = str(key).strip()
            if name and name not in result:
                result[name] = _normalize_value(value)
        return result

    return _parse_loose_mapping(block[1:-1], {name.casefold() for name in known_names})
