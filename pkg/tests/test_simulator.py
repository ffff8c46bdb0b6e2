"""Kinematic simulator behavior."""

import math
import time

import pytest

from nlteleop.core import RobotPose, Twist, yaw_from_quaternion
from nlteleop.msgbus import CMD_VEL, IMU_DATA, standard_bus
from nlteleop.simulator import SimClock, SimConfig, Simulator, step


class TestStep:
    def test_straight_line_200_steps(self):
        pose = RobotPose()
        cmd = Twist(0.5, 0.0)
        for _ in range(200):
            pose = step(pose, cmd, 0.01)
        assert pose.x == pytest.approx(1.0, abs=1e-9)  # v*t = 0.5 * 2.0
        assert pose.y == 0.0

    def test_heading_along_y(self):
        pose = step(RobotPose(0, 0, math.pi / 2), Twist(1.0, 0.0), 0.1)
        assert pose.x == pytest.approx(0.0, abs=1e-12)
        assert pose.y == pytest.approx(0.1, abs=1e-12)

    def test_rotation_matches_closed_form(self):
        # omega * t oracle: 0.5 rad/s for pi seconds -> pi/2, within one
        # step worth of discretization.
        pose = RobotPose()
        cmd = Twist(0.0, 0.5)
        dt = 0.01
        steps = int(math.pi / dt)
        for _ in range(steps):
            pose = step(pose, cmd, dt)
        assert abs(pose.yaw - math.pi / 2) <= 0.5 * dt + 1e-9

    def test_pure_rotation_preserves_position(self):
        pose = RobotPose(1.5, -2.5, 0.3)
        for _ in range(100):
            pose = step(pose, Twist(0.0, 1.0), 0.01)
        assert pose.x == 1.5
        assert pose.y == -2.5

    def test_pure_translation_preserves_yaw(self):
        pose = RobotPose(0, 0, 0.7)
        for _ in range(100):
            pose = step(pose, Twist(0.5, 0.0), 0.01)
        assert pose.yaw == pytest.approx(0.7, abs=0)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            step(RobotPose(), Twist(0, 0), 0.0)


class TestSimulator:
    def test_advance_integrates_commands(self):
        bus = standard_bus()
        sim = Simulator(bus)
        bus.publish(CMD_VEL, Twist(0.2, 0.0))
        sim.advance(5.0)
        assert sim.snapshot().x == pytest.approx(1.0, rel=0.01)

    def test_no_commands_pose_stays(self):
        bus = standard_bus()
        sim = Simulator(bus, SimConfig(initial_pose=RobotPose(1, 2, 0.5)))
        sim.advance(1.0)
        pose = sim.snapshot()
        assert (pose.x, pose.y) == (1, 2)
        assert pose.yaw == pytest.approx(0.5)

    def test_command_holds_until_replaced(self):
        bus = standard_bus()
        sim = Simulator(bus)
        bus.publish(CMD_VEL, Twist(0.5, 0.0))
        sim.advance(1.0)
        sim.advance(1.0)  # no new command; the last one still applies
        assert sim.snapshot().x == pytest.approx(1.0, abs=1e-9)

    def test_imu_samples_unit_norm_and_match_yaw(self):
        bus = standard_bus()
        sim = Simulator(bus)
        samples = []
        bus.subscribe(IMU_DATA, samples.append)
        bus.publish(CMD_VEL, Twist(0.0, 0.5))
        sim.advance(1.0)
        assert len(samples) == 100  # imu_rate 100 Hz for one sim second
        stamps = [s.stamp for s in samples]
        assert stamps == sorted(stamps)
        last_yaw = yaw_from_quaternion(samples[-1].orientation)
        assert last_yaw == pytest.approx(sim.snapshot().yaw, abs=1e-9)

    def test_deterministic_trajectories(self):
        def run():
            bus = standard_bus()
            sim = Simulator(bus)
            trace = []
            bus.publish(CMD_VEL, Twist(0.3, 0.2))
            for _ in range(50):
                sim.advance(0.05)
                pose = sim.snapshot()
                trace.append((pose.x, pose.y, pose.yaw))
            return trace

        assert run() == run()

    def test_stop_ends_publishing(self):
        bus = standard_bus()
        sim = Simulator(bus)
        samples = []
        bus.subscribe(IMU_DATA, samples.append)
        sim.advance(0.1)
        count = len(samples)
        sim.stop()
        with pytest.raises(RuntimeError):
            sim.advance(0.1)
        assert len(samples) == count

    def test_double_start_is_an_error(self):
        bus = standard_bus()
        sim = Simulator(bus)
        sim.start()
        try:
            with pytest.raises(RuntimeError):
                sim.start()
        finally:
            sim.stop()

    def test_realtime_mode_tracks_wall_clock(self):
        bus = standard_bus()
        sim = Simulator(bus)
        sim.start()
        try:
            bus.publish(CMD_VEL, Twist(1.0, 0.0))
            time.sleep(0.4)
        finally:
            sim.stop()
        # Generous bounds: CI schedulers jitter, the sim must just keep up.
        assert 0.1 < sim.snapshot().x < 1.0

    def test_advance_rejected_while_realtime(self):
        bus = standard_bus()
        sim = Simulator(bus)
        sim.start()
        try:
            with pytest.raises(RuntimeError):
                sim.advance(0.1)
        finally:
            sim.stop()

    def test_pause_resume(self):
        bus = standard_bus()
        sim = Simulator(bus)
        sim.start()
        try:
            bus.publish(CMD_VEL, Twist(1.0, 0.0))
            time.sleep(0.1)
            sim.pause()
            time.sleep(0.05)
            frozen = sim.snapshot().x
            time.sleep(0.15)
            assert sim.snapshot().x == frozen
            sim.resume()
            time.sleep(0.15)
            assert sim.snapshot().x > frozen
        finally:
            sim.stop()


class TestSimClock:
    def test_sleep_advances_sim_time(self):
        bus = standard_bus()
        sim = Simulator(bus)
        clock = SimClock(sim)
        t0 = clock.now()
        clock.sleep(0.5)
        assert clock.now() - t0 == pytest.approx(0.5, abs=1e-9)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SimConfig(dt=0.0)
        with pytest.raises(ValueError):
            SimConfig(imu_rate=-1.0)
