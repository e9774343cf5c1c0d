// WebSocket client: parse, dispatch, reconnect.

import type { ServerMessage, UserInput } from "./types.js";

export interface BridgeHandlers {
  onMessage(msg: ServerMessage): void;
  onConnect(): void;
  onDisconnect(): void;
}

const RECONNECT_MS = 1500;

export class BridgeClient {
  private ws: WebSocket | null = null;
  private url: string;
  private handlers: BridgeHandlers;
  private closed = false;

  constructor(url: string, handlers: BridgeHandlers) {
    this.url = url;
    this.handlers = handlers;
  }

  connect(): void {
    this.closed = false;
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.handlers.onConnect();
    ws.onmessage = (ev) => {
      let msg: ServerMessage;
      try {
        msg = JSON.parse(String(ev.data)) as ServerMessage;
      } catch {
        return; // not ours
      }
      this.handlers.onMessage(msg);
    };
    ws.onclose = () => {
      this.handlers.onDisconnect();
      if (!this.closed) {
        setTimeout(() => this.connect(), RECONNECT_MS);
      }
    };
    ws.onerror = () => ws.close();
  }

  send(device: string, input: UserInput): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(JSON.stringify({ type: "user_input", device, input }));
    }
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
