import type { ConsoleViewModel } from "./viewmodel.js";

const MAX_FPS = 20;
const FRAME_MS = 1000 / MAX_FPS;

/**
 * Canvas renderer: grid, pose trail, robot marker with heading arrow,
 * and a yaw dial. Pan by dragging, zoom with the wheel. Redraws are
 * throttled to 20 Hz regardless of how often state changes.
 */
export class PoseRenderer {
  private ctx: CanvasRenderingContext2D;
  private pixelsPerMeter = 80;
  private offsetX = 0; // world meters added to the view center
  private offsetY = 0;
  private lastFrame = 0;
  private dragging = false;
  private dragStart: { x: number; y: number } | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private view: ConsoleViewModel,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas context unavailable");
    this.ctx = ctx;
    this.bindInput();
  }

  private bindInput(): void {
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = ev.deltaY < 0 ? 1.15 : 1 / 1.15;
      this.pixelsPerMeter = Math.min(1200, Math.max(10, this.pixelsPerMeter * factor));
    });
    this.canvas.addEventListener("mousedown", (ev) => {
      this.dragging = true;
      this.dragStart = { x: ev.clientX, y: ev.clientY };
    });
    window.addEventListener("mouseup", () => {
      this.dragging = false;
      this.dragStart = null;
    });
    window.addEventListener("mousemove", (ev) => {
      if (!this.dragging || !this.dragStart) return;
      this.offsetX -= (ev.clientX - this.dragStart.x) / this.pixelsPerMeter;
      this.offsetY += (ev.clientY - this.dragStart.y) / this.pixelsPerMeter;
      this.dragStart = { x: ev.clientX, y: ev.clientY };
    });
  }

  /** Call from requestAnimationFrame; frames beyond 20 Hz are skipped. */
  maybeRender(now: number): void {
    if (now - this.lastFrame < FRAME_MS) return;
    this.lastFrame = now;
    this.render();
  }

  private toScreen(wx: number, wy: number): [number, number] {
    const cx = this.canvas.width / 2;
    const cy = this.canvas.height / 2;
    return [
      cx + (wx - this.offsetX) * this.pixelsPerMeter,
      cy - (wy - this.offsetY) * this.pixelsPerMeter,
    ];
  }

  render(): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "#10141a";
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    this.drawGrid();
    this.drawTrail();
    this.drawRobot();
    this.drawYawDial();
  }

  private drawGrid(): void {
    const { ctx, canvas } = this;
    const step = this.pixelsPerMeter >= 40 ? 1 : 5; // meters per line
    ctx.strokeStyle = "#1e2631";
    ctx.lineWidth = 1;
    const halfW = canvas.width / 2 / this.pixelsPerMeter;
    const halfH = canvas.height / 2 / this.pixelsPerMeter;
    const x0 = Math.floor(this.offsetX - halfW);
    const x1 = Math.ceil(this.offsetX + halfW);
    const y0 = Math.floor(this.offsetY - halfH);
    const y1 = Math.ceil(this.offsetY + halfH);
    for (let gx = x0; gx <= x1; gx += step) {
      const [sx] = this.toScreen(gx, 0);
      ctx.beginPath();
      ctx.moveTo(sx, 0);
      ctx.lineTo(sx, canvas.height);
      ctx.stroke();
    }
    for (let gy = y0; gy <= y1; gy += step) {
      const [, sy] = this.toScreen(0, gy);
      ctx.beginPath();
      ctx.moveTo(0, sy);
      ctx.lineTo(canvas.width, sy);
      ctx.stroke();
    }
    // origin marker
    const [ox, oy] = this.toScreen(0, 0);
    ctx.strokeStyle = "#3b4a5f";
    ctx.beginPath();
    ctx.moveTo(ox - 8, oy);
    ctx.lineTo(ox + 8, oy);
    ctx.moveTo(ox, oy - 8);
    ctx.lineTo(ox, oy + 8);
    ctx.stroke();
  }

  private drawTrail(): void {
    const { ctx } = this;
    const trail = this.view.trail;
    if (trail.length < 2) return;
    ctx.strokeStyle = "#3d9bd1";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [sx, sy] = this.toScreen(trail[0].x, trail[0].y);
    ctx.moveTo(sx, sy);
    for (let i = 1; i < trail.length; i++) {
      const [px, py] = this.toScreen(trail[i].x, trail[i].y);
      ctx.lineTo(px, py);
    }
    ctx.stroke();
  }

  private drawRobot(): void {
    const pose = this.view.pose;
    if (!pose) return;
    const { ctx } = this;
    const [sx, sy] = this.toScreen(pose.x, pose.y);
    ctx.fillStyle = this.view.busy ? "#e2a33b" : "#58c977";
    ctx.beginPath();
    ctx.arc(sx, sy, 9, 0, Math.PI * 2);
    ctx.fill();
    // heading arrow (screen y is flipped, so negate the sine component)
    const len = 22;
    ctx.strokeStyle = "#eef3f8";
    ctx.lineWidth = 3;
    ctx.beginPath();
    ctx.moveTo(sx, sy);
    ctx.lineTo(sx + len * Math.cos(pose.yaw), sy - len * Math.sin(pose.yaw));
    ctx.stroke();
  }

  private drawYawDial(): void {
    const { ctx, canvas } = this;
    const r = 28;
    const cx = canvas.width - r - 14;
    const cy = r + 14;
    ctx.strokeStyle = "#3b4a5f";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(cx, cy, r, 0, Math.PI * 2);
    ctx.stroke();
    const yaw = (this.view.yawDeg * Math.PI) / 180;
    ctx.strokeStyle = "#e2a33b";
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + r * 0.85 * Math.cos(yaw), cy - r * 0.85 * Math.sin(yaw));
    ctx.stroke();
    ctx.fillStyle = "#9fb2c8";
    ctx.font = "11px system-ui";
    ctx.textAlign = "center";
    ctx.fillText(`${this.view.yawDeg.toFixed(0)}°`, cx, cy + r + 12);
  }
}
