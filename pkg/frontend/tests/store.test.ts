import { describe, expect, it } from "vitest";

import { LOG_CAPACITY, Store, hasIndicatorBug, seqsStrictlyDecreasing, visibleEntries } from "../src/store.js";
import type { AccessLogEntry, Alert } from "../src/types.js";

function entry(seq: number, overrides: Partial<AccessLogEntry> = {}): AccessLogEntry {
  return {
    seq,
    t: seq * 10,
    app_id: "app",
    permission: "Location",
    method: "android.location.LocationManager.getLastKnownLocation",
    state: "Foreground",
    action: "Original",
    latency_ns: 0,
    bytes: 0,
    indicator_shown: true,
    ...overrides,
  };
}

describe("live log ring buffer", () => {
  it("keeps newest first with seq strictly decreasing", () => {
    const store = new Store();
    for (const seq of [1, 2, 5, 3, 4]) store.pushEntry(entry(seq));
    expect(store.model.liveLog.map((e) => e.seq)).toEqual([5, 4, 3, 2, 1]);
    expect(seqsStrictlyDecreasing(store.model.liveLog)).toBe(true);
  });

  it("drops duplicate seqs", () => {
    const store = new Store();
    store.pushEntry(entry(1));
    store.pushEntry(entry(2));
    store.pushEntry(entry(1));
    store.pushEntry(entry(2));
    expect(store.model.liveLog.map((e) => e.seq)).toEqual([2, 1]);
  });

  it("is bounded at capacity", () => {
    const store = new Store();
    for (let seq = 1; seq <= LOG_CAPACITY + 50; seq += 1) store.pushEntry(entry(seq));
    expect(store.model.liveLog).toHaveLength(LOG_CAPACITY);
    expect(store.model.liveLog[0].seq).toBe(LOG_CAPACITY + 50);
  });

  it("tracks lastSeq for reconnects", () => {
    const store = new Store();
    store.pushEntry(entry(7));
    store.pushEntry(entry(3));
    expect(store.model.connection.lastSeq).toBe(7);
  });

  it("notifies subscribers synchronously on insert", () => {
    const store = new Store();
    let renders = 0;
    store.subscribe(() => (renders += 1));
    const started = performance.now();
    store.pushEntry(entry(1));
    const elapsed = performance.now() - started;
    expect(renders).toBe(1);
    expect(elapsed).toBeLessThan(1000); // render path well inside the 1 s budget
  });
});

describe("filters and badges", () => {
  it("filters by app, permission, action, background", () => {
    const store = new Store();
    store.pushEntry(entry(1, { app_id: "a" }));
    store.pushEntry(entry(2, { app_id: "b", state: "Background" }));
    store.pushEntry(entry(3, { app_id: "b", action: "Blocked", permission: "Internet" }));
    store.setFilters({ app: "b" });
    expect(visibleEntries(store.model).map((e) => e.seq)).toEqual([3, 2]);
    store.setFilters({ backgroundOnly: true });
    expect(visibleEntries(store.model).map((e) => e.seq)).toEqual([2]);
    store.setFilters({ backgroundOnly: false, action: "Blocked" });
    expect(visibleEntries(store.model).map((e) => e.seq)).toEqual([3]);
    store.setFilters({ action: null, permission: "Internet" });
    expect(visibleEntries(store.model).map((e) => e.seq)).toEqual([3]);
  });

  it("flags the indicator anomaly rows only", () => {
    expect(hasIndicatorBug(entry(1, { permission: "Microphone", indicator_shown: false }))).toBe(true);
    expect(hasIndicatorBug(entry(2, { permission: "Microphone", indicator_shown: true }))).toBe(false);
    expect(hasIndicatorBug(entry(3, { permission: "Camera", indicator_shown: false }))).toBe(false);
  });
});

describe("alert lifecycle", () => {
  const alert = (id: string): Alert => ({
    id,
    rule: "BgUpload",
    app: "pdf-scanner-like",
    evidence: [4, 5],
    t_raised: 2000,
    recommended: { policies: [], toggles: {} },
  });

  it("marks previously seen alerts resolved once they stop firing", () => {
    const store = new Store();
    store.setAlerts([alert("aaa"), alert("bbb")]);
    expect(store.model.resolvedAlertIds).toEqual([]);
    store.setAlerts([alert("bbb")]);
    expect(store.model.alerts.map((a) => a.id)).toEqual(["bbb"]);
    expect(store.model.resolvedAlertIds).toEqual(["aaa"]);
  });
});
