"""toolweave: build tool-augmented SFT datasets and run the
token-interpreting inference loop.

Pipeline: normalize heterogeneous sources to ChatML, score and select by
value/quality, judge entries, weave in tool-code spans, execute and inject
results, and keep only entries whose outputs agree with their text. The
bench subpackage generates seeded QA benchmarks and scores sessions.
"""

from .chatml import (DEFAULT_TOKENS, Entry, Message, Segment, SpecialTokens, Text,
                     ToolCode, ToolResult, parse_entry, render, segment,
                     serialize_entry, strip_tool_spans)
from .errors import (AdapterMismatch, ConfigError, ContextTooLong, DataError,
                     EmptySample, EndpointError, MalformedJson, MissingField,
                     RequestFailed, ToolweaveError, UnbalancedTokens, UnknownRole)

__version__ = "0.1.0"

__all__ = [
    "AdapterMismatch", "ConfigError", "ContextTooLong", "DEFAULT_TOKENS",
    "DataError", "EmptySample", "EndpointError", "Entry", "MalformedJson",
    "Message", "MissingField", "RequestFailed", "Segment", "SpecialTokens",
    "Text", "ToolCode", "ToolResult", "ToolweaveError", "UnbalancedTokens",
    "UnknownRole", "parse_entry", "render", "segment", "serialize_entry",
    "strip_tool_spans",
]
