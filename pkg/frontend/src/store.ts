/**
 * View-model state and its pure update/selector logic. Rendering stays
 * dumb; everything testable lives here.
 */

import type {
  AccessLogEntry,
  ActionTaken,
  Alert,
  CoverageResponse,
  PackageInfo,
  PermissionName,
  PolicyDocument,
} from "./types.js";
import type { ConnectionState } from "./api.js";

export const LOG_CAPACITY = 500;

export interface LogFilters {
  app: string | null;
  permission: PermissionName | null;
  action: ActionTaken | null;
  backgroundOnly: boolean;
}

export interface ViewModel {
  apps: PackageInfo[];
  policies: PolicyDocument | null;
  liveLog: AccessLogEntry[]; // newest first, seq strictly decreasing
  alerts: Alert[];
  resolvedAlertIds: string[];
  coverage: CoverageResponse | null;
  connection: { state: ConnectionState; lastSeq: number };
  filters: LogFilters;
}

export function emptyModel(): ViewModel {
  return {
    apps: [],
    policies: null,
    liveLog: [],
    alerts: [],
    resolvedAlertIds: [],
    coverage: null,
    connection: { state: "connecting", lastSeq: 0 },
    filters: { app: null, permission: null, action: null, backgroundOnly: false },
  };
}

export class Store {
  model = emptyModel();
  private seen = new Set<number>();
  private knownAlerts = new Map<string, Alert>();
  private listeners: Array<() => void> = [];

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  /** Insert one streamed entry: dedupe by seq, keep newest first, bound. */
  pushEntry(entry: AccessLogEntry): void {
    if (this.seen.has(entry.seq)) return;
    this.seen.add(entry.seq);
    const log = this.model.liveLog;
    let at = 0;
    while (at < log.length && log[at].seq > entry.seq) at += 1;
    log.splice(at, 0, entry);
    if (log.length > LOG_CAPACITY) {
      for (const dropped of log.splice(LOG_CAPACITY)) this.seen.delete(dropped.seq);
    }
    this.model.connection.lastSeq = Math.max(this.model.connection.lastSeq, entry.seq);
    this.emit();
  }

  setConnection(state: ConnectionState): void {
    this.model.connection.state = state;
    this.emit();
  }

  setApps(apps: PackageInfo[]): void {
    this.model.apps = apps;
    this.emit();
  }

  setPolicies(doc: PolicyDocument): void {
    this.model.policies = doc;
    this.emit();
  }

  setCoverage(coverage: CoverageResponse): void {
    this.model.coverage = coverage;
    this.emit();
  }

  /**
   * Refresh the alert list. An alert we have seen before that no longer
   * fires is marked resolved (its mitigation took).
   */
  setAlerts(alerts: Alert[]): void {
    const active = new Set(alerts.map((a) => a.id));
    for (const alert of alerts) this.knownAlerts.set(alert.id, alert);
    this.model.alerts = alerts;
    this.model.resolvedAlertIds = [...this.knownAlerts.keys()].filter(
      (id) => !active.has(id),
    );
    this.emit();
  }

  setFilters(filters: Partial<LogFilters>): void {
    this.model.filters = { ...this.model.filters, ...filters };
    this.emit();
  }
}

export function visibleEntries(model: ViewModel): AccessLogEntry[] {
  const f = model.filters;
  return model.liveLog.filter(
    (e) =>
      (f.app === null || e.app_id === f.app) &&
      (f.permission === null || e.permission === f.permission) &&
      (f.action === null || e.action === f.action) &&
      (!f.backgroundOnly || e.state === "Background"),
  );
}

/** Rows that reproduce the indicator anomaly get a badge in the table. */
export function hasIndicatorBug(entry: AccessLogEntry): boolean {
  return entry.permission === "Microphone" && !entry.indicator_shown;
}

export function seqsStrictlyDecreasing(entries: AccessLogEntry[]): boolean {
  return entries.every((e, i) => i === 0 || entries[i - 1].seq > e.seq);
}
