"""Session gateway: glues interpreter, provider, controller, and
simulator into one command pipeline and exposes it over HTTP/WebSocket.

Commands are queued and executed strictly one at a time; every stage of
a command's life is published as a SessionEvent to any number of
listeners, each of which sees events in emission order. The observable
lifecycle per command is a subsequence of:

    TRANSCRIPT_RECEIVED -> INTENT_PARSED -> MOTION_STARTED
        -> (MOTION_COMPLETED | ERROR) -> FEEDBACK_MESSAGE -> LATENCY_SAMPLE

and every command ends in exactly one of MOTION_COMPLETED or ERROR.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import queue
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable

from .bench import summarize
from .controller import (
    Clock,
    ControllerConfig,
    MotionCancelledError,
    MotionController,
    MotionError,
    MotionReport,
    WallClock,
)
from .core import STOP_TWIST, CommandIntent, RobotPose
from .interpreter import ChatExchange, DefaultsConfig, build_prompts, parse_response
from .llm_gateway import (
    LatencyRecord,
    ProviderConfig,
    ProviderError,
    RequestTiming,
    complete,
)
from .msgbus import CMD_VEL, MessageBus, standard_bus
from .simulator import SimClock, SimConfig, Simulator
from .speech import select_feedback

COMMAND_QUEUE_DEPTH = 16
STREAM_MAX_HZ = 20.0


class BackpressureError(RuntimeError):
    """Command queue is full."""


class SessionClosedError(RuntimeError):
    """Command submitted to a session that is not running."""


class EventKind(Enum):
    TRANSCRIPT_RECEIVED = "TranscriptReceived"
    INTENT_PARSED = "IntentParsed"
    MOTION_STARTED = "MotionStarted"
    MOTION_COMPLETED = "MotionCompleted"
    ERROR = "Error"
    FEEDBACK_MESSAGE = "FeedbackMessage"
    LATENCY_SAMPLE = "LatencySample"


@dataclass(frozen=True)
class SessionEvent:
    kind: EventKind
    command_id: int
    timestamp: float
    payload: dict[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "command_id": self.command_id,
            "timestamp": self.timestamp,
            "payload": self.payload,
        }


def _intent_payload(intent: CommandIntent) -> dict[str, Any]:
    return {
        "action": intent.action.value,
        "magnitude": intent.magnitude,
        "speed": intent.speed,
    }


def _report_payload(report: MotionReport) -> dict[str, Any]:
    data = dataclasses.asdict(report)
    data["action"] = report.action.value
    return data


def _pose_payload(pose: RobotPose) -> dict[str, Any]:
    return {"x": pose.x, "y": pose.y, "yaw": pose.yaw}


class Session:
    """One robot, one pipeline, any number of observers."""

    def __init__(
        self,
        provider: ProviderConfig,
        defaults: DefaultsConfig | None = None,
        sim_config: SimConfig | None = None,
        controller_config: ControllerConfig | None = None,
        realtime: bool = False,
        event_log_path: str | Path | None = None,
    ):
        self._provider = provider
        self._defaults = defaults or DefaultsConfig()
        self._bus: MessageBus = standard_bus()
        self._sim = Simulator(self._bus, sim_config)
        self._realtime = realtime
        self._clock: Clock
        if realtime:
            self._sim.start()
            self._clock = WallClock()
        else:
            self._clock = SimClock(self._sim)
        self._controller = MotionController(self._bus, self._clock, controller_config)
        self._queue: queue.Queue[tuple[int, str] | None] = queue.Queue(
            maxsize=COMMAND_QUEUE_DEPTH
        )
        self._ids = itertools.count(1)
        self._listeners: list[Callable[[SessionEvent], None]] = []
        self._listener_lock = threading.Lock()
        self._emit_lock = threading.Lock()
        self._state_lock = threading.Lock()
        self._busy = False
        self._last_intent: CommandIntent | None = None
        self._latency_records: list[LatencyRecord] = []
        self._running = True
        self._shutdown_done = False
        self._event_log_path = Path(event_log_path) if event_log_path else None
        self._worker = threading.Thread(target=self._work_loop, daemon=True)
        self._worker.start()

    # ------------------------------------------------------------- events

    def add_listener(self, listener: Callable[[SessionEvent], None]) -> Callable[[], None]:
        """Register an event callback; returns an unsubscribe function."""
        with self._listener_lock:
            self._listeners.append(listener)

        def remove() -> None:
            with self._listener_lock:
                if listener in self._listeners:
                    self._listeners.remove(listener)

        return remove

    def _emit(self, kind: EventKind, command_id: int, payload: dict[str, Any]) -> None:
        event = SessionEvent(
            kind=kind,
            command_id=command_id,
            timestamp=time.monotonic(),
            payload=payload,
        )
        with self._listener_lock:
            targets = list(self._listeners)
        # One emission at a time keeps every listener's view in order.
        with self._emit_lock:
            if self._event_log_path is not None:
                with self._event_log_path.open("a") as fh:
                    fh.write(json.dumps(event.to_json_dict()) + "\n")
            for listener in targets:
                listener(event)

    # ------------------------------------------------------------ pipeline

    def submit_command(self, text: str) -> int:
        """Queue a transcript for the full interpret-and-execute pipeline."""
        if not self._running:
            raise SessionClosedError("session is shut down")
        if not text or not text.strip():
            raise ValueError("command text must be non-empty")
        command_id = next(self._ids)
        try:
            self._queue.put_nowait((command_id, text.strip()))
        except queue.Full:
            raise BackpressureError(
                f"command queue is full ({COMMAND_QUEUE_DEPTH} pending)"
            ) from None
        return command_id

    def _work_loop(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                break
            command_id, text = item
            if not self._running:
                self._emit(
                    EventKind.ERROR,
                    command_id,
                    {"stage": "session", "error": "SessionClosedError",
                     "message": "session shut down before execution"},
                )
                continue
            with self._state_lock:
                self._busy = True
            try:
                self._run_pipeline(command_id, text)
            except Exception as exc:  # a pipeline bug must not kill the worker
                self._emit(
                    EventKind.ERROR,
                    command_id,
                    {"stage": "internal", "error": type(exc).__name__,
                     "message": str(exc)},
                )
            finally:
                with self._state_lock:
                    self._busy = False

    def _run_pipeline(self, command_id: int, text: str) -> None:
        self._emit(EventKind.TRANSCRIPT_RECEIVED, command_id, {"text": text})
        timing: RequestTiming | None = None
        intent: CommandIntent | None = None
        exchange: ChatExchange | None = None
        failure: tuple[str, Exception] | None = None

        try:
            prompts = build_prompts(text, self._defaults)
            content, timing = complete(self._provider, prompts)
            exchange = ChatExchange(prompts.system, prompts.user, content)
        except ProviderError as exc:
            failure = ("provider", exc)
        if exchange is not None:
            try:
                intent = parse_response(exchange.response_content)
            except ValueError as exc:
                failure = ("parse", exc)

        if intent is not None and exchange is not None:
            payload = _intent_payload(intent)
            payload["response"] = exchange.response_content
            self._emit(EventKind.INTENT_PARSED, command_id, payload)
            with self._state_lock:
                self._last_intent = intent
            self._emit(EventKind.MOTION_STARTED, command_id, _intent_payload(intent))
            try:
                report = self._controller.execute(intent)
            except MotionCancelledError as exc:
                failure = ("motion", exc)
            except MotionError as exc:
                failure = ("motion", exc)
            else:
                self._emit(
                    EventKind.MOTION_COMPLETED,
                    command_id,
                    {
                        "report": _report_payload(report),
                        "pose": _pose_payload(self._sim.snapshot()),
                    },
                )
                self._emit(
                    EventKind.FEEDBACK_MESSAGE,
                    command_id,
                    {"text": select_feedback()},
                )

        if failure is not None:
            stage, exc = failure
            self._emit(
                EventKind.ERROR,
                command_id,
                {"stage": stage, "error": type(exc).__name__, "message": str(exc)},
            )

        if timing is not None:
            record = LatencyRecord(
                command=text,
                provider=self._provider.model,
                t_request=timing.t_request,
                t_response=timing.t_response,
                latency=timing.latency,
                intent=intent,
                error=None if failure is None else type(failure[1]).__name__,
                success=failure is None,
            )
            with self._state_lock:
                self._latency_records.append(record)
            self._emit(
                EventKind.LATENCY_SAMPLE,
                command_id,
                {"latency": timing.latency, "provider": self._provider.model},
            )

    # --------------------------------------------------------------- state

    def state_snapshot(self) -> dict[str, Any]:
        pose = self._sim.snapshot()
        with self._state_lock:
            busy = self._busy or not self._queue.empty()
            intent = self._last_intent
        return {
            "pose": _pose_payload(pose),
            "yaw_deg": math.degrees(pose.yaw),
            "busy": busy,
            "last_intent": None if intent is None else _intent_payload(intent),
        }

    def metrics(self) -> dict[str, Any]:
        with self._state_lock:
            records = list(self._latency_records)
        if not records:
            return {"count": 0, "mean": None, "min": None, "max": None, "successes": 0}
        stats = summarize(records)
        return {
            "count": stats.count,
            "mean": stats.mean,
            "min": stats.min,
            "max": stats.max,
            "successes": stats.successes,
        }

    @property
    def bus(self) -> MessageBus:
        return self._bus

    @property
    def simulator(self) -> Simulator:
        return self._sim

    def shutdown(self) -> None:
        """Stop the pipeline, stop the robot, release everything. Idempotent."""
        if self._shutdown_done:
            return
        self._shutdown_done = True
        self._running = False
        self._controller.request_stop()
        self._queue.put(None)
        self._worker.join(timeout=10.0)
        self._bus.publish(CMD_VEL, STOP_TWIST)
        self._controller.close()
        self._sim.stop()


# The HTTP/WebSocket layer lives in webapp.py; imported lazily so the
# core stack works without the web dependencies.


def create_app(session: Session):
    from .webapp import create_app as _create_app

    return _create_app(session)


def serve(
    session: Session,
    host: str = "127.0.0.1",
    port: int = 8000,
    console_dir: str | Path | None = None,
) -> None:
    from .webapp import serve as _serve

    _serve(session, host=host, port=port, console_dir=console_dir)
