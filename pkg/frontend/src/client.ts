/** HTTP client for the three service endpoints. */
import { LineSplitter } from "./ndjson.js";
import type { ControlAction, SubmitResult, TelemetryFrame } from "./types.js";

export interface StreamCallbacks {
  onFrame(frame: TelemetryFrame): void;
  /** Called whenever the stream ends or errors, before any reconnect. */
  onDrop?(reason: string): void;
}

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  async state(): Promise<TelemetryFrame> {
    const resp = await this.fetchFn(new URL("/state", this.baseUrl));
    if (!resp.ok) {
      throw new Error(`state: HTTP ${resp.status}`);
    }
    return (await resp.json()) as TelemetryFrame;
  }

  /** Post one control action; rejections come back as values, not throws. */
  async submit(action: ControlAction): Promise<SubmitResult> {
    let resp: Response;
    try {
      resp = await this.fetchFn(new URL("/control", this.baseUrl), {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(action),
      });
    } catch (e) {
      return { ok: false, status: 0, message: String(e) };
    }
    if (resp.ok) {
      await resp.json().catch(() => null);
      return { ok: true };
    }
    let message = `HTTP ${resp.status}`;
    const body = (await resp.json().catch(() => null)) as { error?: unknown } | null;
    if (body !== null && typeof body.error === "string") {
      message = body.error;
    }
    return { ok: false, status: resp.status, message };
  }

  /** Consume /stream until the server closes it. */
  async streamOnce(cb: StreamCallbacks, signal?: AbortSignal): Promise<void> {
    const resp = await this.fetchFn(new URL("/stream", this.baseUrl), { signal });
    if (!resp.ok || resp.body === null) {
      throw new Error(`stream: HTTP ${resp.status}`);
    }
    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    const splitter = new LineSplitter();
    for (;;) {
      const { done, value } = await reader.read();
      const lines = done
        ? splitter.flush()
        : splitter.push(decoder.decode(value, { stream: true }));
      for (const line of lines) {
        cb.onFrame(JSON.parse(line) as TelemetryFrame);
      }
      if (done) {
        return;
      }
    }
  }

  /** Keep a stream open, reconnecting after drops, until aborted. */
  async streamForever(
    cb: StreamCallbacks,
    signal: AbortSignal,
    retryDelayMs = 500,
  ): Promise<void> {
    while (!signal.aborted) {
      try {
        await this.streamOnce(cb, signal);
        cb.onDrop?.("stream closed");
      } catch (e) {
        cb.onDrop?.(String(e));
      }
      if (signal.aborted) {
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, retryDelayMs));
    }
  }
}
