"""Streaming client for OpenAI-compatible chat-completions servers (vLLM, SGLang, ...).

Assistant-prefix continuation uses the ``continue_final_message`` /
``add_generation_prompt`` pair understood by vLLM; disabling thinking sends
``chat_template_kwargs.enable_thinking = false``.
"""

from __future__ import annotations

import json
import logging
import time
from typing import Callable, Iterable, Iterator

import httpx

from .base import (
    THINK_CLOSE,
    THINK_OPEN,
    CapabilityError,
    GenerationChunk,
    GenerationRequest,
    ProtocolError,
    StatusError,
    TransportError,
)
from .classify import RawDelta, classify_stream

log = logging.getLogger(__name__)

ENDPOINT_ENV = "BUDGETLAB_ENDPOINT"
API_KEY_ENV = "BUDGETLAB_API_KEY"


def encode_request(model: str, request: GenerationRequest) -> dict:
    """Chat-completions JSON body for ``request``."""
    messages = [{"role": speaker, "content": text} for speaker, text in request.messages]
    body: dict = {
        "model": model,
        "messages": messages,
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
        "stream": True,
        "stream_options": {"include_usage": True},
        "seed": request.seed,
    }
    if request.assistant_prefix:
        messages.append({"role": "assistant", "content": request.assistant_prefix})
        body["continue_final_message"] = True
        body["add_generation_prompt"] = False
    if not request.enable_thinking:
        body["chat_template_kwargs"] = {"enable_thinking": False}
    return body


def decode_event(payload: str) -> RawDelta | None:
    """Decode one SSE ``data:`` payload; ``None`` for the ``[DONE]`` terminator."""
    if payload.strip() == "[DONE]":
        return None
    try:
        event = json.loads(payload)
    except json.JSONDecodeError:
        raise ProtocolError("malformed stream payload", payload[:120]) from None
    if not isinstance(event, dict):
        raise ProtocolError("stream payload is not an object", payload[:120])
    if "error" in event:
        err = event["error"]
        message = err.get("message", "") if isinstance(err, dict) else str(err)
        code = err.get("code") if isinstance(err, dict) else None
        raise StatusError(code if isinstance(code, int) else 500, message)
    usage = event.get("usage") or {}
    usage_tokens = usage.get("completion_tokens")
    choices = event.get("choices") or []
    if not choices:
        return RawDelta(usage_tokens=usage_tokens)
    choice = choices[0]
    delta = choice.get("delta")
    if not isinstance(delta, dict):
        raise ProtocolError("choice without delta object", payload[:120])
    reasoning = delta.get("reasoning_content") or delta.get("reasoning") or ""
    content = delta.get("content") or ""
    if not isinstance(reasoning, str) or not isinstance(content, str):
        raise ProtocolError("non-string delta field", payload[:120])
    return RawDelta(content, reasoning, choice.get("finish_reason"), usage_tokens)


def iter_sse(lines: Iterable[str]) -> Iterator[RawDelta]:
    """Decode SSE lines into raw deltas, stopping at ``[DONE]``."""
    for line in lines:
        if not line or line.startswith(":"):
            continue
        if not line.startswith("data:"):
            # event:, id:, retry: fields carry nothing we consume
            continue
        delta = decode_event(line[5:].lstrip())
        if delta is None:
            return
        yield delta


class OpenAIBackend:
    """OpenAI-compatible streaming backend.

    Transport failures before the first byte are retried with exponential
    backoff; protocol and status errors are raised immediately.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        *,
        timeout: float = 600.0,
        max_retries: int = 3,
        backoff: float = 0.25,
        template_opens_think: bool = False,
        injection_cost: int = 1,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff = backoff
        # Some chat templates (DeepSeek-R1 distills) put <think> into the prompt.
        self.template_opens_think = template_opens_think
        self.injection_cost = injection_cost
        self._sleep = sleep
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @classmethod
    def from_env(cls, model: str, **kwargs) -> "OpenAIBackend":
        import os

        url = os.environ.get(ENDPOINT_ENV)
        if not url:
            raise CapabilityError(f"{ENDPOINT_ENV} is not set")
        return cls(url, model, os.environ.get(API_KEY_ENV), **kwargs)

    def close(self) -> None:
        self._client.close()

    def injection_tokens(self, text: str) -> int:
        return self.injection_cost * max(1, len(text.split()))

    def probe(self) -> None:
        request = GenerationRequest(
            messages=(("user", "Say OK."),), assistant_prefix="O", max_tokens=1, enable_thinking=False
        )
        try:
            for _ in self.generate(request):
                pass
        except StatusError as exc:
            if 400 <= exc.status < 500:
                raise CapabilityError(
                    f"server rejected an assistant-prefix continuation: {exc}"
                ) from exc
            raise

    def _open(self, body: dict) -> httpx.Response:
        url = f"{self.base_url}/chat/completions"
        attempt = 0
        while True:
            attempt += 1
            try:
                req = self._client.build_request("POST", url, json=body)
                response = self._client.send(req, stream=True)
            except httpx.TransportError as exc:
                if attempt > self.max_retries:
                    raise TransportError(str(exc) or type(exc).__name__, attempt) from exc
                delay = self.backoff * 2 ** (attempt - 1)
                log.warning("transport error on attempt %d, retrying in %.2fs: %s", attempt, delay, exc)
                self._sleep(delay)
                continue
            if not 200 <= response.status_code < 300:
                text = response.read().decode("utf-8", "replace")
                response.close()
                raise StatusError(response.status_code, text)
            return response

    def generate(self, request: GenerationRequest) -> Iterator[GenerationChunk]:
        request.validate()
        body = encode_request(self.model, request)
        prefix = request.assistant_prefix
        if prefix:
            start_in_think = prefix.lstrip().startswith(THINK_OPEN) and THINK_CLOSE not in prefix
        else:
            start_in_think = self.template_opens_think and request.enable_thinking
        return self._stream(body, start_in_think, request.stop_on_think_close)

    def _stream(self, body: dict, start_in_think: bool, stop: bool) -> Iterator[GenerationChunk]:
        response = self._open(body)
        try:
            lines = _lines_or_transport_error(response)
            yield from classify_stream(
                iter_sse(lines), start_in_think=start_in_think, stop_on_think_close=stop
            )
        finally:
            response.close()


def _lines_or_transport_error(response: httpx.Response) -> Iterator[str]:
    try:
        yield from response.iter_lines()
    except httpx.TransportError as exc:
        raise TransportError(f"stream interrupted: {exc}", 1) from exc
