/**
 * Gateway client: JSON endpoints plus the SSE log stream with
 * resume-from-last-seq reconnects. Transport is injectable so tests can
 * drive the client without a browser or a server.
 */

import type {
  AccessLogEntry,
  Alert,
  CoverageResponse,
  PackageInfo,
  PolicyDocument,
  ScenarioInfo,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface EventSourceLike {
  onmessage: ((ev: { data: string; lastEventId?: string }) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onopen: ((ev: unknown) => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const message = payload && payload.error ? payload.error : `HTTP ${response.status}`;
      throw new GatewayError(response.status, message);
    }
    return payload as T;
  }

  apps(): Promise<PackageInfo[]> {
    return this.request("GET", "/apps");
  }

  policies(): Promise<PolicyDocument> {
    return this.request("GET", "/policies");
  }

  putPolicies(doc: Omit<PolicyDocument, "version"> & { version?: number }) {
    return this.request<{ policy_version: number }>("PUT", "/policies", doc);
  }

  alerts(): Promise<Alert[]> {
    return this.request("GET", "/alerts");
  }

  applyAlert(id: string) {
    return this.request<{ applied: boolean; policy_version: number }>(
      "POST",
      `/alerts/${id}/apply`,
      {},
    );
  }

  coverage(): Promise<CoverageResponse> {
    return this.request("GET", "/coverage");
  }

  scenarios(): Promise<ScenarioInfo[]> {
    return this.request("GET", "/scenarios");
  }

  startScenario(name: string, pace = 0.02) {
    return this.request("POST", `/scenarios/${name}/start`, { pace });
  }

  stopScenario(name: string) {
    return this.request("POST", `/scenarios/${name}/stop`, {});
  }

  logsSince(seq: number): Promise<AccessLogEntry[]> {
    return this.request("GET", `/logs?since=${seq}`);
  }
}

export type ConnectionState = "connecting" | "open" | "lost";

export interface LogStreamHandlers {
  onEntry(entry: AccessLogEntry): void;
  onState(state: ConnectionState): void;
}

/**
 * Subscribes to /logs/stream and resumes from the last delivered seq on
 * reconnect, so one dropped connection never duplicates or skips a row.
 */
export class LogStream {
  private source: EventSourceLike | null = null;
  private lastSeq = 0;
  private stopped = false;

  constructor(
    private base: string,
    private factory: EventSourceFactory,
    private handlers: LogStreamHandlers,
    private reconnectDelayMs = 500,
  ) {}

  get resumeSeq(): number {
    return this.lastSeq;
  }

  start(since = 0): void {
    this.lastSeq = Math.max(this.lastSeq, since);
    this.stopped = false;
    this.connect();
  }

  private connect(): void {
    if (this.stopped) return;
    this.handlers.onState("connecting");
    const source = this.factory(`${this.base}/logs/stream?since=${this.lastSeq}`);
    this.source = source;
    source.onopen = () => this.handlers.onState("open");
    source.onmessage = (ev) => {
      const entry = JSON.parse(ev.data) as AccessLogEntry;
      if (entry.seq > this.lastSeq) {
        this.lastSeq = entry.seq;
        this.handlers.onEntry(entry);
      }
    };
    source.onerror = () => {
      source.close();
      if (this.source !== source || this.stopped) return;
      this.handlers.onState("lost");
      setTimeout(() => this.connect(), this.reconnectDelayMs);
    };
  }

  stop(): void {
    this.stopped = true;
    this.source?.close();
    this.source = null;
  }
}
