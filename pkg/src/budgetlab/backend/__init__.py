from .base import (
    THINK_CLOSE,
    THINK_OPEN,
    Backend,
    BackendError,
    CapabilityError,
    FinishReason,
    GenerationChunk,
    GenerationRequest,
    ProtocolError,
    Segment,
    StatusError,
    StreamSummary,
    TransportError,
    collect,
)
from .classify import RawDelta, classify_stream
from .mock import MockBackend, MockRule, MockScript, ScriptError
from .openai import API_KEY_ENV, ENDPOINT_ENV, OpenAIBackend, decode_event, encode_request, iter_sse

__all__ = [
    "API_KEY_ENV",
    "Backend",
    "BackendError",
    "CapabilityError",
    "ENDPOINT_ENV",
    "FinishReason",
    "GenerationChunk",
    "GenerationRequest",
    "MockBackend",
    "MockRule",
    "MockScript",
    "OpenAIBackend",
    "ProtocolError",
    "RawDelta",
    "ScriptError",
    "Segment",
    "StatusError",
    "StreamSummary",
    "THINK_CLOSE",
    "THINK_OPEN",
    "TransportError",
    "classify_stream",
    "collect",
    "decode_event",
    "encode_request",
    "iter_sse",
]
