// Wire types for the gateway's HTTP and WebSocket APIs. Field names
// mirror the server JSON exactly.

export interface Pose {
  x: number;
  y: number;
  yaw: number;
}

export interface StateSnapshot {
  pose: Pose;
  yaw_deg: number;
  busy: boolean;
  last_intent: IntentPayload | null;
}

export interface IntentPayload {
  action: "move" | "rotate";
  magnitude: number;
  speed: number;
}

export type EventKind =
  | "TranscriptReceived"
  | "IntentParsed"
  | "MotionStarted"
  | "MotionCompleted"
  | "Error"
  | "FeedbackMessage"
  | "LatencySample";

export interface SessionEvent {
  kind: EventKind;
  command_id: number;
  timestamp: number;
  payload: Record<string, unknown>;
}

export interface EventMessage {
  type: "event";
  event: SessionEvent;
}

export interface PoseMessage {
  type: "pose";
  pose: Pose;
  yaw_deg: number;
  busy: boolean;
}

export type StreamMessage = EventMessage | PoseMessage;

export function parseStreamMessage(raw: string): StreamMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const msg = data as { type?: unknown };
  if (msg.type === "pose" || msg.type === "event") {
    return data as StreamMessage;
  }
  return null;
}

export type ConnectionStatus = "connecting" | "connected" | "disconnected";
