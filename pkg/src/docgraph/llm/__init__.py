"""Chat-completion access and reply parsing."""

from .gateway import ChatGateway, RemoteGateway
from .models import ChatRequest, ChatResponse, Usage
from .parsing import TripleParse, parse_name_map, parse_string_list, parse_triples
from .prompts import PromptKit, TemplateSet, format_reference
from .repair import complete_parsed
from .scripted import Script, ScriptedBackend, ScriptRule

__all__ = [
    "ChatGateway",
    "ChatRequest",
    "ChatResponse",
    "PromptKit",
    "RemoteGateway",
    "Script",
    "ScriptRule",
    "ScriptedBackend",
    "TemplateSet",
    "TripleParse",
    "Usage",
    "complete_parsed",
    "format_reference",
    "parse_name_map",
    "parse_string_list",
    "parse_triples",
]
