import { GatewayClient } from "./client.js";
import { PoseRenderer } from "./render.js";
import { ConsoleViewModel } from "./viewmodel.js";
import type { SessionEvent } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const view = new ConsoleViewModel();
const canvas = el<HTMLCanvasElement>("pose-canvas");
const renderer = new PoseRenderer(canvas, view);

const statusBanner = el<HTMLDivElement>("status-banner");
const eventLog = el<HTMLUListElement>("event-log");
const latencyCanvas = el<HTMLCanvasElement>("latency-sparkline");
const latencyLabel = el<HTMLSpanElement>("latency-label");
const input = el<HTMLInputElement>("command-input");
const sendButton = el<HTMLButtonElement>("send-button");
const errorChip = el<HTMLSpanElement>("error-chip");

const gatewayUrl = window.location.origin.startsWith("http")
  ? guessGatewayUrl()
  : "http://127.0.0.1:8000";

function guessGatewayUrl(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("gateway") ?? window.location.origin;
}

const client = new GatewayClient({
  baseUrl: gatewayUrl,
  onSnapshot: (snapshot) => view.applySnapshot(snapshot),
  onMessage: (message) => {
    view.applyMessage(message);
    if (message.type === "event") appendEvent(message.event);
  },
  onStatus: (status) => {
    view.setStatus(status);
    statusBanner.textContent =
      status === "connected"
        ? `connected to ${gatewayUrl}`
        : status === "connecting"
          ? "connecting…"
          : "disconnected, retrying…";
    statusBanner.className = `banner ${status}`;
  },
});

function appendEvent(event: SessionEvent): void {
  const item = document.createElement("li");
  item.className = `event ${event.kind}`;
  const detail = describeEvent(event);
  item.textContent = `#${event.command_id} ${event.kind}${detail ? ": " + detail : ""}`;
  eventLog.appendChild(item);
  while (eventLog.children.length > 200) {
    eventLog.removeChild(eventLog.firstChild as Node);
  }
  eventLog.scrollTop = eventLog.scrollHeight;
  drawSparkline();
}

function describeEvent(event: SessionEvent): string {
  const p = event.payload;
  switch (event.kind) {
    case "TranscriptReceived":
      return String(p["text"] ?? "");
    case "IntentParsed":
    case "MotionStarted":
      return `${p["action"]} ${Number(p["magnitude"]).toFixed(2)} @ ${Number(
        p["speed"],
      ).toFixed(2)}`;
    case "MotionCompleted": {
      const pose = p["pose"] as { x: number; y: number } | undefined;
      return pose ? `pose (${pose.x.toFixed(2)}, ${pose.y.toFixed(2)})` : "";
    }
    case "Error":
      return `${p["stage"]}: ${p["message"]}`;
    case "FeedbackMessage":
      return String(p["text"] ?? "");
    case "LatencySample":
      return `${(Number(p["latency"]) * 1000).toFixed(0)} ms`;
  }
}

function drawSparkline(): void {
  const ctx = latencyCanvas.getContext("2d");
  if (!ctx) return;
  const values = view.latencies;
  ctx.clearRect(0, 0, latencyCanvas.width, latencyCanvas.height);
  if (values.length === 0) {
    latencyLabel.textContent = "–";
    return;
  }
  const max = Math.max(...values, 0.001);
  ctx.strokeStyle = "#3d9bd1";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  values.forEach((v, i) => {
    const x = (i / Math.max(values.length - 1, 1)) * latencyCanvas.width;
    const y = latencyCanvas.height - (v / max) * (latencyCanvas.height - 4) - 2;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  latencyLabel.textContent = `${(values[values.length - 1] * 1000).toFixed(0)} ms`;
}

async function submit(): Promise<void> {
  const text = input.value.trim();
  if (!text) return;
  errorChip.textContent = "";
  sendButton.disabled = true;
  try {
    await client.sendCommand(text);
    input.value = ""; // only cleared on acceptance; errors keep it editable
  } catch (err) {
    errorChip.textContent = err instanceof Error ? err.message : String(err);
  } finally {
    sendButton.disabled = false;
    input.focus();
  }
}

sendButton.addEventListener("click", () => void submit());
input.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") void submit();
});

function frame(now: number): void {
  renderer.maybeRender(now);
  requestAnimationFrame(frame);
}

client.start();
requestAnimationFrame(frame);
