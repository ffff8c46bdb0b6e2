"""Natural-language teleoperation stack for a simulated mobile robot.

Spoken or typed commands are interpreted into a fixed single-line
grammar (by a chat-completions provider or an offline rule-based
interpreter), parsed into structured intents, and executed as velocity
commands on an in-process topic bus against a kinematic simulator. A
benchmark harness measures interpretation latency and success rate
against a bundled reference dataset.
"""

from .core import (
    Action,
    CommandIntent,
    Quaternion,
    RobotPose,
    Twist,
    convert_length,
    convert_speed,
    quaternion_from_yaw,
    wrap_angle,
    yaw_from_quaternion,
)

__all__ = [
    "Action",
    "CommandIntent",
    "Quaternion",
    "RobotPose",
    "Twist",
    "convert_length",
    "convert_speed",
    "quaternion_from_yaw",
    "wrap_angle",
    "yaw_from_quaternion",
]

__version__ = "0.1.0"
