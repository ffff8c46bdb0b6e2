import type {
  ConnectionStatus,
  Pose,
  SessionEvent,
  StateSnapshot,
  StreamMessage,
} from "./types.js";

export const TRAIL_CAP = 2000;
export const EVENT_LOG_CAP = 200;
export const SPARKLINE_CAP = 120;

/**
 * Everything the console renders, fed exclusively by gateway messages.
 * No robot math happens here: poses, yaw, and latencies are displayed
 * as received.
 */
export class ConsoleViewModel {
  trail: Pose[] = [];
  pose: Pose | null = null;
  yawDeg = 0;
  busy = false;
  status: ConnectionStatus = "connecting";
  events: SessionEvent[] = [];
  latencies: number[] = [];
  lastError: string | null = null;

  applySnapshot(snapshot: StateSnapshot): void {
    this.pushPose(snapshot.pose);
    this.yawDeg = snapshot.yaw_deg;
    this.busy = snapshot.busy;
  }

  applyMessage(message: StreamMessage): void {
    if (message.type === "pose") {
      this.pushPose(message.pose);
      this.yawDeg = message.yaw_deg;
      this.busy = message.busy;
    } else {
      this.pushEvent(message.event);
    }
  }

  setStatus(status: ConnectionStatus): void {
    this.status = status;
  }

  private pushPose(pose: Pose): void {
    const previous = this.trail[this.trail.length - 1];
    // Skip exact duplicates so an idle robot does not flood the trail.
    if (!previous || previous.x !== pose.x || previous.y !== pose.y) {
      this.trail.push(pose);
      if (this.trail.length > TRAIL_CAP) {
        this.trail.splice(0, this.trail.length - TRAIL_CAP);
      }
    }
    this.pose = pose;
  }

  private pushEvent(event: SessionEvent): void {
    this.events.push(event);
    if (this.events.length > EVENT_LOG_CAP) {
      this.events.splice(0, this.events.length - EVENT_LOG_CAP);
    }
    if (event.kind === "LatencySample") {
      const latency = event.payload["latency"];
      if (typeof latency === "number") {
        this.latencies.push(latency);
        if (this.latencies.length > SPARKLINE_CAP) {
          this.latencies.splice(0, this.latencies.length - SPARKLINE_CAP);
        }
      }
    }
    if (event.kind === "Error") {
      const message = event.payload["message"];
      this.lastError = typeof message === "string" ? message : "command failed";
    }
  }

  eventsForCommand(commandId: number): SessionEvent[] {
    return this.events.filter((e) => e.command_id === commandId);
  }
}
