"""In-process topic bus with the ROS 2 publish/subscribe pattern.

Topics are registered with a payload type. Delivery guarantees, per
subscriber: FIFO in publish order, no loss between subscribe and cancel,
and the handler is never invoked concurrently with itself. Each
subscriber carries a bounded pending queue; overflowing it is an error,
never a silent drop.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable

from .core import Quaternion, Twist

# Conventional topic names used across the stack.
CMD_VEL = "cmd_vel"
IMU_DATA = "imu/data"

SUBSCRIBER_QUEUE_DEPTH = 256


class UnknownTopicError(KeyError):
    """Publish or subscribe on a topic that was never registered."""


class TopicTypeError(TypeError):
    """Payload does not match the topic's registered type."""


class QueueOverflowError(RuntimeError):
    """A subscriber's pending queue exceeded its bound."""


@dataclass(frozen=True)
class ImuSample:
    """One inertial sample: orientation plus a monotonic timestamp."""

    orientation: Quaternion
    stamp: float  # seconds, monotonic per publisher


class Subscription:
    """Handle returned by subscribe(); cancel() detaches the handler."""

    def __init__(self, topic: str, handler: Callable[[Any], None]):
        self.topic = topic
        self._handler = handler
        self._pending: deque[Any] = deque()
        self._queue_lock = threading.Lock()
        self._delivery_lock = threading.Lock()
        self._cancelled = False

    def cancel(self) -> None:
        """Stop receiving new messages. Idempotent; already-queued
        messages are still delivered (no loss before cancel)."""
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled

    def _enqueue(self, message: Any) -> None:
        with self._queue_lock:
            if len(self._pending) >= SUBSCRIBER_QUEUE_DEPTH:
                raise QueueOverflowError(
                    f"subscriber queue on {self.topic!r} exceeded "
                    f"{SUBSCRIBER_QUEUE_DEPTH} pending messages"
                )
            self._pending.append(message)

    def _drain(self) -> None:
        # Only one thread drains at a time; a publisher that loses the
        # race leaves its message queued for the current drainer. The
        # re-check after release closes the window where a message is
        # enqueued just as the drainer sees an empty queue.
        while True:
            if not self._delivery_lock.acquire(blocking=False):
                return
            try:
                while True:
                    with self._queue_lock:
                        if not self._pending:
                            break
                        message = self._pending.popleft()
                    self._handler(message)
            finally:
                self._delivery_lock.release()
            with self._queue_lock:
                if not self._pending:
                    return


class MessageBus:
    """Topic registry plus fan-out delivery."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._payload_types: dict[str, type] = {}
        self._subscribers: dict[str, list[Subscription]] = {}
        self._publish_locks: dict[str, threading.Lock] = {}

    def register_topic(self, name: str, payload_type: type) -> None:
        if not name:
            raise ValueError("topic name must be non-empty")
        with self._lock:
            existing = self._payload_types.get(name)
            if existing is not None and existing is not payload_type:
                raise TopicTypeError(
                    f"topic {name!r} already registered with {existing.__name__}"
                )
            self._payload_types.setdefault(name, payload_type)
            self._subscribers.setdefault(name, [])
            self._publish_locks.setdefault(name, threading.Lock())

    def topics(self) -> dict[str, type]:
        with self._lock:
            return dict(self._payload_types)

    def subscribe(self, topic: str, handler: Callable[[Any], None]) -> Subscription:
        with self._lock:
            if topic not in self._payload_types:
                raise UnknownTopicError(topic)
            sub = Subscription(topic, handler)
            self._subscribers[topic].append(sub)
        return sub

    def publish(self, topic: str, message: Any) -> None:
        with self._lock:
            payload_type = self._payload_types.get(topic)
            if payload_type is None:
                raise UnknownTopicError(topic)
            if not isinstance(message, payload_type):
                raise TopicTypeError(
                    f"topic {topic!r} carries {payload_type.__name__}, "
                    f"got {type(message).__name__}"
                )
            subs = [s for s in self._subscribers[topic] if not s.cancelled]
            self._subscribers[topic] = subs
            targets = list(subs)
            order_lock = self._publish_locks[topic]
        # The enqueue pass runs under a per-topic lock so concurrent
        # publishers produce one consistent order for every subscriber.
        with order_lock:
            for sub in targets:
                sub._enqueue(message)
        for sub in targets:
            sub._drain()


def standard_bus() -> MessageBus:
    """A bus with the stack's two conventional topics registered."""
    bus = MessageBus()
    bus.register_topic(CMD_VEL, Twist)
    bus.register_topic(IMU_DATA, ImuSample)
    return bus
