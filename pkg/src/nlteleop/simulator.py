"""Fixed-timestep kinematic simulator for a differential-drive robot.

Consumes velocity commands from the `cmd_vel` topic, integrates the
planar pose with Euler steps, and publishes orientation samples on
`imu/data`. The last received command holds until replaced. Two clock
modes: `advance()` runs the simulation as fast as possible (tests,
benchmarks), `start()` paces it against the wall clock (live console).
"""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field

from .core import RobotPose, Twist, quaternion_from_yaw, wrap_angle
from .msgbus import CMD_VEL, IMU_DATA, ImuSample, MessageBus

# Slack for float accumulation when testing step/sample boundaries.
_TIME_EPS = 1e-12


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01          # integration step, seconds
    imu_rate: float = 100.0   # orientation samples per sim second
    initial_pose: RobotPose = field(default_factory=RobotPose)

    def __post_init__(self) -> None:
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if self.imu_rate <= 0.0:
            raise ValueError(f"imu_rate must be positive, got {self.imu_rate!r}")


def step(state: RobotPose, cmd: Twist, dt: float) -> RobotPose:
    """Advance one Euler step: translate along the heading, then wrap yaw."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not (math.isfinite(cmd.linear_x) and math.isfinite(cmd.angular_z)):
        raise ValueError(f"non-finite command {cmd!r}")
    return RobotPose(
        x=state.x + cmd.linear_x * math.cos(state.yaw) * dt,
        y=state.y + cmd.linear_x * math.sin(state.yaw) * dt,
        yaw=wrap_angle(state.yaw + cmd.angular_z * dt),
    )


class Simulator:
    """Owns the robot state; external access via snapshots and the bus."""

    def __init__(self, bus: MessageBus, config: SimConfig | None = None):
        self._bus = bus
        self._config = config or SimConfig()
        self._lock = threading.Lock()
        self._pose = self._config.initial_pose
        self._cmd = Twist(0.0, 0.0)
        self._sim_time = 0.0
        self._imu_count = 0
        self._thread: threading.Thread | None = None
        self._running = threading.Event()
        self._paused = threading.Event()
        self._stopped = False
        self._sub = bus.subscribe(CMD_VEL, self._on_cmd)

    @property
    def config(self) -> SimConfig:
        return self._config

    def _on_cmd(self, cmd: Twist) -> None:
        # Twist construction already rejects non-finite values; the guard
        # keeps a corrupted message from poisoning the integration state.
        if not (math.isfinite(cmd.linear_x) and math.isfinite(cmd.angular_z)):
            raise ValueError(f"rejected non-finite command {cmd!r}")
        with self._lock:
            self._cmd = cmd

    def snapshot(self) -> RobotPose:
        with self._lock:
            return self._pose

    @property
    def sim_time(self) -> float:
        with self._lock:
            return self._sim_time

    def _step_once(self, dt: float) -> ImuSample | None:
        """One integration step; returns an IMU sample when one is due."""
        with self._lock:
            self._pose = step(self._pose, self._cmd, dt)
            self._sim_time += dt
            due = (self._imu_count + 1) / self._config.imu_rate
            if self._sim_time + _TIME_EPS >= due:
                self._imu_count += 1
                return ImuSample(
                    orientation=quaternion_from_yaw(self._pose.yaw),
                    stamp=self._sim_time,
                )
        return None

    def advance(self, duration: float) -> None:
        """Run `duration` seconds of sim time synchronously (fast mode)."""
        if duration < 0.0:
            raise ValueError(f"duration must be non-negative, got {duration!r}")
        if self._stopped:
            raise RuntimeError("simulator is stopped")
        if self._thread is not None:
            raise RuntimeError("advance() is not allowed while the realtime loop runs")
        remaining = duration
        dt = self._config.dt
        while remaining > _TIME_EPS:
            h = dt if remaining >= dt else remaining
            sample = self._step_once(h)
            remaining -= h
            if sample is not None:
                self._bus.publish(IMU_DATA, sample)

    def start(self) -> None:
        """Begin the wall-clock-paced loop in a background thread."""
        if self._stopped:
            raise RuntimeError("simulator is stopped")
        if self._thread is not None:
            raise RuntimeError("simulator already started")
        self._running.set()
        self._thread = threading.Thread(target=self._run_loop, daemon=True)
        self._thread.start()

    def pause(self) -> None:
        self._paused.set()

    def resume(self) -> None:
        self._paused.clear()

    def stop(self) -> None:
        """Stop the simulator for good and cancel the command subscription."""
        self._stopped = True
        self._running.clear()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None
        self._sub.cancel()

    def _run_loop(self) -> None:
        dt = self._config.dt
        next_tick = time.monotonic() + dt
        while self._running.is_set():
            if self._paused.is_set():
                time.sleep(dt)
                next_tick = time.monotonic() + dt
                continue
            sample = self._step_once(dt)
            if sample is not None:
                self._bus.publish(IMU_DATA, sample)
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            next_tick += dt


class SimClock:
    """Clock backed by simulated time: sleeping advances the simulator.

    Lets the controller run motions in fast mode with the same code path
    it uses against the wall clock.
    """

    def __init__(self, sim: Simulator):
        self._sim = sim

    def now(self) -> float:
        return self._sim.sim_time

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._sim.advance(seconds)
