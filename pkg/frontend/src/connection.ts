// WebSocket client: sequence-correlated sends, reconnect with backoff,
// and session resume via attach_session + full_state (never by
// replaying history). The socket is injectable so tests can run the
// whole command loop against a stub server.

import { Envelope, encode, parseEvent } from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "open" | "closed";

export class Connection {
  onEvent: (event: Envelope) => void = () => {};
  onStatus: (status: ConnectionStatus) => void = () => {};

  private socket: SocketLike | null = null;
  private seq = 0;
  private sessionId: string | null = null;
  private reconnectDelay = 500;
  private closedByUs = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private url: string,
    private factory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
  ) {}

  connect(): void {
    this.closedByUs = false;
    this.onStatus("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.reconnectDelay = 500;
      this.onStatus("open");
      if (this.sessionId === null) {
        this.send("create_session", {});
      } else {
        // resume: re-bind and ask for one full snapshot of session state
        this.send("attach_session", { session_id: this.sessionId });
      }
    };
    socket.onmessage = (event) => {
      const parsed = parseEvent(event.data);
      if (parsed.type === "session_created") {
        this.sessionId = (parsed.payload as { session_id: string }).session_id;
      }
      this.onEvent(parsed);
    };
    socket.onclose = () => {
      this.onStatus("closed");
      this.socket = null;
      if (!this.closedByUs) {
        this.timer = setTimeout(() => this.connect(), this.reconnectDelay);
        this.reconnectDelay = Math.min(this.reconnectDelay * 2, 15000);
      }
    };
  }

  send(type: string, payload: Record<string, unknown> = {}): number {
    if (!this.socket) {
      throw new Error("not connected");
    }
    this.seq += 1;
    this.socket.send(encode({ type, seq: this.seq, payload }));
    return this.seq;
  }

  get session(): string | null {
    return this.sessionId;
  }

  close(): void {
    this.closedByUs = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.socket?.close();
  }
}
