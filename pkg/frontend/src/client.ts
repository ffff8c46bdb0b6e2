import { parseStreamMessage } from "./types.js";
import type { ConnectionStatus, StateSnapshot, StreamMessage } from "./types.js";

// Minimal structural view of a WebSocket so node tests can substitute
// the `ws` package for the browser implementation.
export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  close(): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

export interface GatewayClientOptions {
  baseUrl: string; // e.g. http://127.0.0.1:8000
  onMessage: (message: StreamMessage) => void;
  onSnapshot: (snapshot: StateSnapshot) => void;
  onStatus: (status: ConnectionStatus) => void;
  wsFactory?: WebSocketFactory;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

function defaultFactory(url: string): WebSocketLike {
  return new WebSocket(url) as unknown as WebSocketLike;
}

/**
 * Connection to the gateway: hydrates from GET /api/state, then follows
 * the WebSocket stream, reconnecting with exponential backoff when the
 * link drops and rehydrating after every reconnect.
 */
export class GatewayClient {
  private readonly options: Required<Pick<GatewayClientOptions, "baseUrl">> &
    GatewayClientOptions;
  private ws: WebSocketLike | null = null;
  private closed = false;
  private backoffMs: number;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(options: GatewayClientOptions) {
    this.options = options;
    this.backoffMs = options.initialBackoffMs ?? 300;
  }

  get streamUrl(): string {
    return this.options.baseUrl.replace(/^http/, "ws") + "/api/stream";
  }

  start(): void {
    this.closed = false;
    void this.connectOnce();
  }

  stop(): void {
    this.closed = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    if (this.ws) this.ws.close();
    this.ws = null;
  }

  async sendCommand(text: string): Promise<number> {
    const response = await fetch(`${this.options.baseUrl}/api/command`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (!response.ok) {
      const body = await response.text();
      throw new Error(`command rejected (${response.status}): ${body}`);
    }
    const data = (await response.json()) as { command_id: number };
    return data.command_id;
  }

  async fetchState(): Promise<StateSnapshot> {
    const response = await fetch(`${this.options.baseUrl}/api/state`);
    if (!response.ok) throw new Error(`state fetch failed (${response.status})`);
    return (await response.json()) as StateSnapshot;
  }

  private async connectOnce(): Promise<void> {
    if (this.closed) return;
    this.options.onStatus("connecting");
    try {
      const snapshot = await this.fetchState();
      this.options.onSnapshot(snapshot);
    } catch {
      this.scheduleReconnect();
      return;
    }
    const factory = this.options.wsFactory ?? defaultFactory;
    let ws: WebSocketLike;
    try {
      ws = factory(this.streamUrl);
    } catch {
      this.scheduleReconnect();
      return;
    }
    this.ws = ws;
    ws.onopen = () => {
      this.backoffMs = this.options.initialBackoffMs ?? 300;
      this.options.onStatus("connected");
    };
    ws.onmessage = (ev) => {
      const message = parseStreamMessage(String(ev.data));
      if (message) this.options.onMessage(message);
    };
    ws.onerror = () => {
      // the close handler owns reconnection
    };
    ws.onclose = () => {
      this.ws = null;
      if (!this.closed) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    if (this.closed) return;
    this.options.onStatus("disconnected");
    const delay = this.backoffMs;
    this.backoffMs = Math.min(
      this.backoffMs * 2,
      this.options.maxBackoffMs ?? 3000,
    );
    this.reconnectTimer = setTimeout(() => void this.connectOnce(), delay);
  }
}
