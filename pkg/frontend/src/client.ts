// HTTP + WebSocket client for the session service. All inputs are
// fire-and-forget posts; all state flows back through the event stream.

import type {
  SessionConfig,
  SessionHandle,
  Snapshot,
  WireEvent,
} from "./protocol.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service returned ${status}`);
  }
}

// Structural subset of the browser WebSocket so tests can inject a fake
// (or the "ws" package under node).
export interface WsLike {
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: ((event: unknown) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type WsFactory = (url: string) => WsLike;

export interface Subscription {
  close(): void;
}

export interface SubscribeOptions {
  since?: number;
  onEvent: (event: WireEvent) => void;
  onStatus?: (status: "live" | "reconnecting" | "closed") => void;
  retryMs?: number;
}

export class SessionClient {
  private fetchImpl: typeof fetch;
  private wsFactory: WsFactory;

  constructor(
    readonly baseUrl: string,
    options: { fetchImpl?: typeof fetch; wsFactory?: WsFactory } = {},
  ) {
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
    this.wsFactory =
      options.wsFactory ?? ((url) => new WebSocket(url) as unknown as WsLike);
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      throw new ServiceError(response.status, body);
    }
    return body;
  }

  private post(path: string, payload: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  createSession(config: SessionConfig): Promise<SessionHandle> {
    return this.post("/sessions", config) as Promise<SessionHandle>;
  }

  snapshot(id: string): Promise<Snapshot> {
    return this.request(`/sessions/${id}`) as Promise<Snapshot>;
  }

  sendGaze(id: string, x: number, y: number): Promise<unknown> {
    return this.post(`/sessions/${id}/gaze`, { x, y });
  }

  sendUtterance(id: string, text: string): Promise<unknown> {
    return this.post(`/sessions/${id}/utterance`, { text });
  }

  sendConfirmation(id: string, answer: boolean): Promise<unknown> {
    return this.post(`/sessions/${id}/confirmation`, { answer });
  }

  /**
   * Subscribe to the ordered event stream. The server replays the backlog
   * after `since` and then follows live; if the socket drops, the
   * subscription reconnects and resumes from the last delivered step, so
   * the consumer sees every step exactly once, in order.
   */
  subscribe(id: string, options: SubscribeOptions): Subscription {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const retryMs = options.retryMs ?? 500;
    let lastStep = options.since ?? -1;
    let closed = false;
    let doneSeen = false;
    let socket: WsLike | null = null;
    let timer: ReturnType<typeof setTimeout> | null = null;

    const open = () => {
      if (closed) return;
      socket = this.wsFactory(`${wsBase}/sessions/${id}/events?since=${lastStep}`);
      options.onStatus?.("live");
      socket.onmessage = (message) => {
        const event = JSON.parse(String(message.data)) as WireEvent;
        if (event.step <= lastStep) return; // duplicate after a resume
        lastStep = event.step;
        if (event.kind === "done") doneSeen = true;
        options.onEvent(event);
      };
      socket.onerror = () => {};
      socket.onclose = () => {
        if (closed) return;
        if (doneSeen) {
          // The server closes the stream after the final event.
          options.onStatus?.("closed");
          return;
        }
        options.onStatus?.("reconnecting");
        timer = setTimeout(open, retryMs);
      };
    };
    open();

    return {
      close() {
        closed = true;
        if (timer !== null) clearTimeout(timer);
        options.onStatus?.("closed");
        socket?.close();
      },
    };
  }
}
