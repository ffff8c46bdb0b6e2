"""Chat-completions client with latency capture, and a local mock server.

The client speaks the OpenAI-compatible wire shape: POST
``<base_url>/v1/chat/completions`` with a system+user message list, read
``choices[0].message.content`` back. Timestamps come from the monotonic
clock, taken immediately before the request is sent and immediately
after the full body is received; the client never retries on its own,
since a hidden retry would corrupt latency statistics.

The mock server answers the same wire shape locally: it recovers the
transcript from the user prompt, interprets it with the deterministic
rule-based interpreter, and sleeps per a scripted latency schedule, so
benchmark runs reproduce recorded latency columns without any network.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Sequence

import requests

from .core import CommandIntent
from .interpreter import (
    DefaultsConfig,
    InterpretError,
    PromptPair,
    TRANSCRIPT_MARKER,
    format_intent,
    rule_based_interpret,
)

COMPLETIONS_PATH = "/v1/chat/completions"

# The mock answers this literal when the oracle cannot interpret the
# request, so the client-side parse fails and the bench records a FAIL.
UNINTERPRETABLE_RESPONSE = "uninterpretable"


class ProviderError(RuntimeError):
    """The provider endpoint failed (unreachable, HTTP error, bad body)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class GatewayTimeoutError(ProviderError):
    """No full response within the configured timeout."""

    def __init__(self, message: str, elapsed: float):
        super().__init__(message)
        self.elapsed = elapsed


class MalformedResponseError(ProviderError):
    """Response body did not carry a usable completion."""


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str
    model: str = "gpt-3.5-turbo"
    api_key: str | None = None
    timeout: float = 30.0
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout!r}")


@dataclass(frozen=True)
class RequestTiming:
    """Monotonic bracket around one completion request."""

    t_request: float
    t_response: float

    @property
    def latency(self) -> float:
        return self.t_response - self.t_request


@dataclass(frozen=True)
class LatencyRecord:
    """One benchmark trial."""

    command: str
    provider: str
    t_request: float
    t_response: float
    latency: float
    intent: CommandIntent | None
    error: str | None
    success: bool


def complete(config: ProviderConfig, prompts: PromptPair) -> tuple[str, RequestTiming]:
    """Send the two-role prompt, return (stripped content, timing)."""
    url = config.base_url.rstrip("/") + COMPLETIONS_PATH
    body = {
        "model": config.model,
        "temperature": config.temperature,
        "messages": [
            {"role": "system", "content": prompts.system},
            {"role": "user", "content": prompts.user},
        ],
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"

    t_request = time.monotonic()
    try:
        response = requests.post(url, json=body, headers=headers, timeout=config.timeout)
    except requests.exceptions.Timeout:
        elapsed = time.monotonic() - t_request
        raise GatewayTimeoutError(
            f"no response from {url} within {config.timeout} s", elapsed=elapsed
        ) from None
    except requests.exceptions.RequestException as exc:
        raise ProviderError(f"request to {url} failed: {exc}") from exc
    t_response = time.monotonic()

    if response.status_code >= 400:
        raise ProviderError(
            f"provider returned HTTP {response.status_code}", status=response.status_code
        )
    try:
        payload = response.json()
    except ValueError:
        raise MalformedResponseError("response body is not JSON") from None
    choices = payload.get("choices")
    if not choices:
        raise MalformedResponseError("response has no choices")
    message = choices[0].get("message") or {}
    content = message.get("content")
    if not isinstance(content, str) or not content.strip():
        raise MalformedResponseError("first choice has no content")
    return content.strip(), RequestTiming(t_request=t_request, t_response=t_response)


def extract_transcript(user_content: str) -> str:
    """Recover the raw utterance from a user prompt built by build_prompts."""
    marker_at = user_content.rfind(TRANSCRIPT_MARKER)
    if marker_at < 0:
        return user_content.strip()
    return user_content[marker_at + len(TRANSCRIPT_MARKER):].strip()


class _MockHTTPServer(ThreadingHTTPServer):
    """ThreadingHTTPServer that carries the mock's configuration."""

    daemon_threads = True

    def __init__(self, address, handler, defaults: DefaultsConfig, next_delay):
        super().__init__(address, handler)
        self.defaults = defaults
        self.next_delay = next_delay


class _MockHandler(BaseHTTPRequestHandler):
    server: _MockHTTPServer

    def log_message(self, fmt, *args):  # silence default stderr chatter
        pass

    def _fail(self, status: int, message: str) -> None:
        body = json.dumps({"error": {"message": message}}).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self) -> None:
        if self.path != COMPLETIONS_PATH:
            self._fail(404, f"unknown path {self.path}")
            return
        delay = self.server.next_delay()
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length))
        except (ValueError, TypeError):
            self._fail(400, "request body is not valid JSON")
            return
        messages = payload.get("messages")
        if not isinstance(messages, list) or not messages:
            self._fail(400, "messages must be a non-empty list")
            return
        user_content = None
        for message in messages:
            if isinstance(message, dict) and message.get("role") == "user":
                user_content = message.get("content")
        if not isinstance(user_content, str) or not user_content.strip():
            self._fail(400, "no user message content")
            return

        transcript = extract_transcript(user_content)
        try:
            content = format_intent(
                rule_based_interpret(transcript, self.server.defaults)
            )
        except InterpretError:
            content = UNINTERPRETABLE_RESPONSE

        if delay > 0:
            time.sleep(delay)
        body = json.dumps(
            {
                "model": payload.get("model", "mock"),
                "choices": [
                    {"message": {"role": "assistant", "content": content}}
                ],
            }
        ).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class MockServer:
    """Local chat-completions endpoint backed by the rule-based oracle.

    `latency_schedule` is a list of sleep durations in seconds, applied
    in request-arrival order and cycled when exhausted; an empty or None
    schedule means answer immediately.
    """

    def __init__(
        self,
        port: int = 0,
        latency_schedule: Sequence[float] | None = None,
        defaults: DefaultsConfig | None = None,
    ):
        self.defaults = defaults or DefaultsConfig()
        self._schedule = list(latency_schedule or [])
        if any(d < 0 for d in self._schedule):
            raise ValueError("latency schedule entries must be non-negative")
        self._counter = 0
        self._counter_lock = threading.Lock()
        self._httpd = _MockHTTPServer(
            ("127.0.0.1", port), _MockHandler, self.defaults, self.next_delay
        )
        self._thread: threading.Thread | None = None

    def next_delay(self) -> float:
        if not self._schedule:
            return 0.0
        with self._counter_lock:
            delay = self._schedule[self._counter % len(self._schedule)]
            self._counter += 1
        return delay

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def start(self) -> "MockServer":
        if self._thread is not None:
            raise RuntimeError("mock server already started")
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._thread is None:
            return
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5.0)
        self._thread = None

    def __enter__(self) -> "MockServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
