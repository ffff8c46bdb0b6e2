"""Shared domain types, angle math, and unit conversions.

Everything here is a pure function or an immutable value, safe to use
from any thread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# Safety limits on commanded velocities. Values outside these bounds are
# rejected at construction (never silently saturated) so a malformed
# interpretation can not command unbounded speed.
MAX_LINEAR_SPEED = 2.0  # m/s
MAX_ANGULAR_SPEED = 4.0  # rad/s


class UnitError(ValueError):
    """Raised for an unrecognized length or speed unit."""


class InvalidQuaternionError(ValueError):
    """Raised when a quaternion has non-finite or badly scaled components."""


class SpeedLimitError(ValueError):
    """Raised when a velocity command exceeds the safety limits."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle in radians to (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    wrapped = math.remainder(theta, math.tau)
    if wrapped <= -math.pi:
        wrapped += math.tau
    return wrapped


@dataclass(frozen=True)
class Twist:
    """Velocity command: forward speed and yaw rate.

    Only the two components a differential drive uses are modeled; the
    remaining ROS Twist fields are implicitly zero.
    """

    linear_x: float = 0.0   # m/s, signed
    angular_z: float = 0.0  # rad/s, signed

    def __post_init__(self) -> None:
        if not (math.isfinite(self.linear_x) and math.isfinite(self.angular_z)):
            raise SpeedLimitError(
                f"twist components must be finite: ({self.linear_x!r}, {self.angular_z!r})"
            )
        if abs(self.linear_x) > MAX_LINEAR_SPEED:
            raise SpeedLimitError(
                f"|linear_x| = {abs(self.linear_x):.3f} exceeds limit {MAX_LINEAR_SPEED}"
            )
        if abs(self.angular_z) > MAX_ANGULAR_SPEED:
            raise SpeedLimitError(
                f"|angular_z| = {abs(self.angular_z):.3f} exceeds limit {MAX_ANGULAR_SPEED}"
            )

    def is_stop(self) -> bool:
        return self.linear_x == 0.0 and self.angular_z == 0.0


STOP_TWIST = Twist(0.0, 0.0)


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z)."""

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        comps = (self.w, self.x, self.y, self.z)
        if not all(math.isfinite(c) for c in comps):
            raise InvalidQuaternionError(f"non-finite quaternion {comps!r}")
        norm = math.sqrt(sum(c * c for c in comps))
        if abs(norm - 1.0) > 1e-6:
            raise InvalidQuaternionError(f"quaternion norm {norm!r} is not 1")


IDENTITY_QUATERNION = Quaternion(1.0, 0.0, 0.0, 0.0)


def yaw_from_quaternion(q: Quaternion) -> float:
    """Extract the yaw angle (rotation about z) from a unit quaternion.

    Standard ZYX extraction; roll and pitch are assumed zero for the
    planar robot. Result is wrapped to (-pi, pi].
    """
    siny_cosp = 2.0 * (q.w * q.z + q.x * q.y)
    cosy_cosp = 1.0 - 2.0 * (q.y * q.y + q.z * q.z)
    return wrap_angle(math.atan2(siny_cosp, cosy_cosp))


def quaternion_from_yaw(yaw: float) -> Quaternion:
    """Build the unit quaternion for a pure rotation of `yaw` about z."""
    if not math.isfinite(yaw):
        raise ValueError(f"yaw must be finite, got {yaw!r}")
    half = 0.5 * yaw
    return Quaternion(math.cos(half), 0.0, 0.0, math.sin(half))


@dataclass(frozen=True)
class RobotPose:
    """Planar pose: position in meters, yaw in radians wrapped to (-pi, pi]."""

    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    def orientation(self) -> Quaternion:
        return quaternion_from_yaw(self.yaw)


class Action(Enum):
    MOVE = "move"
    ROTATE = "rotate"


@dataclass(frozen=True)
class CommandIntent:
    """Parsed command: what the robot should do.

    For MOVE the magnitude is signed meters (negative = backward); for
    ROTATE it is signed degrees (negative = clockwise). Speed is m/s for
    MOVE and rad/s for ROTATE, always positive.
    """

    action: Action
    magnitude: float
    speed: float

    def __post_init__(self) -> None:
        if not isinstance(self.action, Action):
            raise ValueError(f"unknown action {self.action!r}")
        if not (math.isfinite(self.magnitude) and math.isfinite(self.speed)):
            raise ValueError("intent magnitude and speed must be finite")
        if self.speed <= 0.0:
            raise ValueError(f"intent speed must be positive, got {self.speed!r}")


def intents_match(a: CommandIntent, b: CommandIntent, tol: float = 1e-9) -> bool:
    """True when two intents agree on action and numerics within `tol`."""
    return (
        a.action is b.action
        and abs(a.magnitude - b.magnitude) <= tol
        and abs(a.speed - b.speed) <= tol
    )


# Exact ratios to meters / (m/s).
_LENGTH_TO_METERS = {
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "km": 1e3,
}

_SPEED_TO_MPS = {
    "mps": 1.0,
    "kmh": 1.0 / 3.6,
    "cmps": 1e-2,
}


def convert_length(value: float, unit: str) -> float:
    """Convert a length in `unit` (m, cm, mm, km) to meters."""
    if not math.isfinite(value):
        raise ValueError(f"length value must be finite, got {value!r}")
    try:
        ratio = _LENGTH_TO_METERS[unit]
    except KeyError:
        raise UnitError(f"unknown length unit {unit!r}") from None
    return value * ratio


def convert_speed(value: float, unit: str) -> float:
    """Convert a speed in `unit` (mps, kmh, cmps) to m/s."""
    if not math.isfinite(value):
        raise ValueError(f"speed value must be finite, got {value!r}")
    try:
        ratio = _SPEED_TO_MPS[unit]
    except KeyError:
        raise UnitError(f"unknown speed unit {unit!r}") from None
    return value * ratio
