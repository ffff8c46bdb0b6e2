"""Motion execution: time-based straight moves and yaw-feedback rotations.

A move is open loop: publish a forward/backward velocity for
distance/speed seconds, then stop. A rotation publishes an angular
velocity and watches the orientation feed; the stopping condition is
evaluated on every incoming sample so the overshoot stays within one
integration step. Every execution path, including failures, ends by
publishing a zero twist.
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass
from typing import Protocol

from .core import (
    STOP_TWIST,
    Action,
    CommandIntent,
    Twist,
    wrap_angle,
    yaw_from_quaternion,
)
from .msgbus import CMD_VEL, IMU_DATA, ImuSample, MessageBus

# Longest gap between orientation samples before a rotation aborts.
STALE_SENSOR_SECONDS = 0.5


class MotionError(RuntimeError):
    """Base class for motion execution failures."""


class RotationTimeoutError(MotionError):
    """Rotation did not converge within its time budget."""


class SensorStaleError(MotionError):
    """Orientation feed went quiet while a rotation needed it."""


class MotionCancelledError(MotionError):
    """Motion aborted by an external stop request."""


class Clock(Protocol):
    def now(self) -> float: ...
    def sleep(self, seconds: float) -> None: ...


class WallClock:
    """Monotonic wall-clock time."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


@dataclass(frozen=True)
class ControllerConfig:
    publish_rate: float = 10.0        # Hz while a motion is active
    yaw_tolerance: float = 0.01       # rad
    rotation_timeout_factor: float = 2.0

    def __post_init__(self) -> None:
        if self.publish_rate <= 0 or self.yaw_tolerance <= 0 or self.rotation_timeout_factor <= 0:
            raise ValueError(f"controller config values must be positive: {self}")


@dataclass(frozen=True)
class MotionReport:
    """What a motion actually did."""

    action: Action
    elapsed: float
    publish_count: int
    distance: float | None = None      # commanded meters (moves)
    duration: float | None = None      # planned seconds (moves)
    target_yaw: float | None = None    # rad (rotations)
    achieved_yaw: float | None = None  # rad (rotations)


class _YawTracker:
    """Latest yaw from the orientation topic, plus an optional watch.

    The watch is the rotation stopping rule: when a sample lands inside
    the tolerance band the tracker publishes the stop twist itself, so
    the reaction happens at sample rate rather than at the controller's
    publish cadence.
    """

    def __init__(self, bus: MessageBus, clock: Clock):
        self._bus = bus
        self._clock = clock
        self._lock = threading.Lock()
        self._yaw: float | None = None
        self._arrival: float | None = None
        self._target: float | None = None
        self._tolerance = 0.0
        self._reached = threading.Event()
        self._achieved: float | None = None
        self._sub = bus.subscribe(IMU_DATA, self._on_sample)

    def _on_sample(self, sample: ImuSample) -> None:
        yaw = yaw_from_quaternion(sample.orientation)
        publish_stop = False
        with self._lock:
            self._yaw = yaw
            self._arrival = self._clock.now()
            if (
                self._target is not None
                and not self._reached.is_set()
                and abs(wrap_angle(self._target - yaw)) < self._tolerance
            ):
                self._achieved = yaw
                self._reached.set()
                publish_stop = True
        if publish_stop:
            self._bus.publish(CMD_VEL, STOP_TWIST)

    def latest(self) -> tuple[float, float] | None:
        with self._lock:
            if self._yaw is None or self._arrival is None:
                return None
            return self._yaw, self._arrival

    def arm(self, target: float, tolerance: float) -> None:
        with self._lock:
            self._target = target
            self._tolerance = tolerance
            self._achieved = None
            self._reached.clear()

    def disarm(self) -> None:
        with self._lock:
            self._target = None
            self._reached.clear()

    @property
    def reached(self) -> bool:
        return self._reached.is_set()

    @property
    def achieved(self) -> float | None:
        with self._lock:
            return self._achieved

    def close(self) -> None:
        self._sub.cancel()


class MotionController:
    """Executes one intent at a time against the command topic."""

    def __init__(
        self,
        bus: MessageBus,
        clock: Clock | None = None,
        config: ControllerConfig | None = None,
    ):
        self._bus = bus
        self._clock = clock or WallClock()
        self._config = config or ControllerConfig()
        self._tracker = _YawTracker(bus, self._clock)
        self._stop_requested = threading.Event()
        self._active = threading.Lock()

    @property
    def config(self) -> ControllerConfig:
        return self._config

    def request_stop(self) -> None:
        """Abort the current and any future motion (used at shutdown)."""
        self._stop_requested.set()

    def close(self) -> None:
        self._tracker.close()

    def execute(self, intent: CommandIntent) -> MotionReport:
        """Dispatch to move or rotate; always ends with a stop twist."""
        if intent.action is Action.MOVE:
            return self.move(intent)
        if intent.action is Action.ROTATE:
            return self.rotate(intent)
        raise ValueError(f"unknown action {intent.action!r}")

    def _stop(self) -> None:
        self._bus.publish(CMD_VEL, STOP_TWIST)

    def _check_cancelled(self) -> None:
        if self._stop_requested.is_set():
            raise MotionCancelledError("stop requested")

    def move(self, intent: CommandIntent) -> MotionReport:
        """Publish a constant forward/backward twist for distance/speed
        seconds, then stop. Negative magnitude drives backward."""
        if intent.action is not Action.MOVE:
            raise ValueError(f"move() requires a MOVE intent, got {intent.action}")
        if not self._active.acquire(blocking=False):
            raise MotionError("another motion is already executing")
        direction = -1.0 if intent.magnitude < 0 else 1.0
        velocity = Twist(direction * intent.speed, 0.0)
        duration = abs(intent.magnitude) / intent.speed
        period = 1.0 / self._config.publish_rate
        publishes = 0
        start = self._clock.now()
        try:
            while True:
                self._check_cancelled()
                remaining = duration - (self._clock.now() - start)
                if remaining <= 1e-12:
                    break
                self._bus.publish(CMD_VEL, velocity)
                publishes += 1
                self._clock.sleep(min(period, remaining))
        finally:
            self._stop()
            self._active.release()
        return MotionReport(
            action=Action.MOVE,
            elapsed=self._clock.now() - start,
            publish_count=publishes,
            distance=intent.magnitude,
            duration=duration,
        )

    def rotate(self, intent: CommandIntent) -> MotionReport:
        """Rotate toward yaw0 + magnitude using orientation feedback.

        Negative magnitude turns clockwise. Raises RotationTimeoutError
        if convergence takes longer than factor * ideal time + 1 s, and
        SensorStaleError if the orientation feed stops for too long.
        """
        if intent.action is not Action.ROTATE:
            raise ValueError(f"rotate() requires a ROTATE intent, got {intent.action}")
        if not self._active.acquire(blocking=False):
            raise MotionError("another motion is already executing")
        period = 1.0 / self._config.publish_rate
        publishes = 0
        start = self._clock.now()
        try:
            yaw0 = self._wait_for_yaw(start, period)
            delta = math.radians(intent.magnitude)
            target = wrap_angle(yaw0 + delta)
            if abs(wrap_angle(target - yaw0)) < self._config.yaw_tolerance:
                return MotionReport(
                    action=Action.ROTATE,
                    elapsed=self._clock.now() - start,
                    publish_count=0,
                    target_yaw=target,
                    achieved_yaw=yaw0,
                )
            direction = -1.0 if intent.magnitude < 0 else 1.0
            velocity = Twist(0.0, direction * intent.speed)
            budget = self._config.rotation_timeout_factor * (abs(delta) / intent.speed) + 1.0
            self._tracker.arm(target, self._config.yaw_tolerance)
            try:
                while not self._tracker.reached:
                    self._check_cancelled()
                    now = self._clock.now()
                    if now - start > budget:
                        raise RotationTimeoutError(
                            f"rotation exceeded {budget:.2f} s budget"
                        )
                    latest = self._tracker.latest()
                    last_seen = latest[1] if latest else start
                    if now - last_seen > STALE_SENSOR_SECONDS:
                        raise SensorStaleError(
                            f"no orientation sample for {now - last_seen:.2f} s"
                        )
                    self._bus.publish(CMD_VEL, velocity)
                    publishes += 1
                    self._clock.sleep(period)
                achieved = self._tracker.achieved
            finally:
                self._tracker.disarm()
            latest = self._tracker.latest()
            if achieved is None and latest is not None:
                achieved = latest[0]
            return MotionReport(
                action=Action.ROTATE,
                elapsed=self._clock.now() - start,
                publish_count=publishes,
                target_yaw=target,
                achieved_yaw=achieved,
            )
        finally:
            self._stop()
            self._active.release()

    def _wait_for_yaw(self, start: float, period: float) -> float:
        """Block until the first orientation sample, bounded by staleness."""
        while True:
            latest = self._tracker.latest()
            if latest is not None:
                return latest[0]
            self._check_cancelled()
            if self._clock.now() - start > STALE_SENSOR_SECONDS:
                raise SensorStaleError("no orientation samples received")
            self._clock.sleep(period)
