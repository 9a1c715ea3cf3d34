// Websocket client: schema version check at connect, auto-reconnect with
// backoff, and a last-frame buffer read by the render loop.

import { Frame, PROTOCOL_VERSION, ServerMessage } from "./protocol.js";

export type ConnectionState = "connecting" | "open" | "closed" | "version-mismatch";

export class SocketClient {
  private ws: WebSocket | null = null;
  private url: string;
  lastFrame: Frame | null = null;
  state: ConnectionState = "connecting";
  onStateChange: (s: ConnectionState) => void = () => {};

  constructor(url: string) {
    this.url = url;
    this.connect();
  }

  private connect(): void {
    this.setState("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onmessage = (event: MessageEvent) => {
      let msg: ServerMessage;
      try {
        msg = JSON.parse(event.data as string) as ServerMessage;
      } catch {
        return;
      }
      if (msg.type === "hello") {
        if (msg.v !== PROTOCOL_VERSION) {
          this.setState("version-mismatch");
          this.ws?.close();
        }
        return;
      }
      if (msg.type === "frame" && this.state === "open") {
        this.lastFrame = msg;
      } else if (msg.type === "frame") {
        this.setState("open");
        this.lastFrame = msg;
      }
    };
    this.ws.onopen = () => this.setState("open");
    this.ws.onclose = () => {
      if (this.state !== "version-mismatch") {
        this.setState("closed");
        setTimeout(() => this.connect(), 1000);
      }
      this.lastFrame = null; // never interact with a stale frame
    };
    this.ws.onerror = () => this.ws?.close();
  }

  private setState(s: ConnectionState): void {
    this.state = s;
    this.onStateChange(s);
  }

  send(payload: unknown): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify(payload));
    }
  }
}
