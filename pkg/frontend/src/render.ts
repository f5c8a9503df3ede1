/**
 * DOM rendering. Deliberately mechanical: every number and badge shown
 * here comes straight off a gateway response field held in the store.
 */

import { hasIndicatorBug, visibleEntries, type ViewModel } from "./store.js";
import { PERMISSIONS, type CoverageStatus, type ScenarioInfo } from "./types.js";

const STATUS_CLASS: Record<CoverageStatus, string> = {
  Deceived: "cov-deceived",
  GrantedNotUsed: "cov-unused",
  NotRequested: "cov-none",
  Failed: "cov-failed",
};

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderConnection(target: HTMLElement, model: ViewModel): void {
  const { state, lastSeq } = model.connection;
  target.className = `conn conn-${state}`;
  target.textContent =
    state === "open" ? `live · seq ${lastSeq}` :
    state === "lost" ? "connection lost · retrying" : "connecting";
}

export function renderApps(target: HTMLElement, model: ViewModel): void {
  target.replaceChildren();
  for (const app of model.apps) {
    const card = el("div", "card");
    card.appendChild(el("h3", undefined, app.app_id));
    card.appendChild(el("div", "muted", `granted: ${app.granted.join(", ") || "none"}`));
    const features = Object.entries(app.features)
      .map(([name, perms]) => `${name} → ${perms.join("+") || "-"}`)
      .join("; ");
    card.appendChild(el("div", "muted small", features || "no declared features"));
    target.appendChild(card);
  }
}

export function renderLog(target: HTMLElement, model: ViewModel): void {
  target.replaceChildren();
  for (const entry of visibleEntries(model).slice(0, 200)) {
    const row = el("tr", entry.state === "Background" ? "row-bg" : "");
    row.appendChild(el("td", "mono", String(entry.seq)));
    row.appendChild(el("td", "mono", String(entry.t)));
    row.appendChild(el("td", undefined, entry.app_id));
    const perm = el("td", undefined, entry.permission);
    if (hasIndicatorBug(entry)) {
      perm.appendChild(el("span", "badge badge-bug", "no indicator"));
    }
    row.appendChild(perm);
    row.appendChild(el("td", undefined, entry.state));
    row.appendChild(el("td", `action action-${entry.action.toLowerCase()}`, entry.action));
    row.appendChild(el("td", "mono", entry.bytes ? String(entry.bytes) : ""));
    target.appendChild(row);
  }
}

export function renderAlerts(
  target: HTMLElement,
  model: ViewModel,
  onApply: (id: string) => void,
): void {
  target.replaceChildren();
  if (model.alerts.length === 0 && model.resolvedAlertIds.length === 0) {
    target.appendChild(el("div", "empty", "No alerts. The catalog is behaving."));
    return;
  }
  for (const alert of model.alerts) {
    const card = el("div", "card alert-card");
    card.appendChild(el("h3", undefined, `${alert.rule} — ${alert.app}`));
    card.appendChild(
      el("div", "muted", `${alert.evidence.length} evidence entries · raised t=${alert.t_raised}`),
    );
    const suggestion = alert.recommended.policies
      .map((p) => `${p.action.kind}${p.action.transform ? ":" + p.action.transform.kind : ""} ${p.permission} (${p.context.kind})`)
      .join(", ");
    card.appendChild(el("div", "small", `recommended: ${suggestion}`));
    const button = el("button", "apply", "apply mitigation") as HTMLButtonElement;
    button.onclick = () => onApply(alert.id);
    card.appendChild(button);
    target.appendChild(card);
  }
  for (const id of model.resolvedAlertIds) {
    target.appendChild(el("div", "card resolved", `resolved · ${id}`));
  }
}

export function renderCoverage(target: HTMLElement, model: ViewModel): void {
  target.replaceChildren();
  if (!model.coverage || model.coverage.rows.length === 0) {
    target.appendChild(el("div", "empty", "Run a scenario to populate coverage."));
    return;
  }
  const byApp = new Map<string, Map<string, CoverageStatus>>();
  for (const row of model.coverage.rows) {
    if (!byApp.has(row.app)) byApp.set(row.app, new Map());
    byApp.get(row.app)!.set(row.permission, row.status);
  }
  const table = el("table", "heatmap");
  const head = el("tr");
  head.appendChild(el("th", undefined, "app"));
  for (const perm of PERMISSIONS) head.appendChild(el("th", "rot", perm));
  table.appendChild(head);
  for (const [app, cells] of byApp) {
    const row = el("tr");
    row.appendChild(el("td", undefined, app));
    for (const perm of PERMISSIONS) {
      const status = cells.get(perm) ?? "NotRequested";
      row.appendChild(el("td", `cell ${STATUS_CLASS[status]}`, ""));
    }
    table.appendChild(row);
  }
  target.appendChild(table);
  const s = model.coverage.summary;
  target.appendChild(
    el(
      "div",
      "muted",
      `requested ${s.requested} · deceived ${s.deceived} · fraction ${(s.deceived_fraction ?? 0).toFixed(3)}`,
    ),
  );
}

export function renderScenarios(
  target: HTMLElement,
  scenarios: ScenarioInfo[],
  onStart: (name: string) => void,
  onStop: (name: string) => void,
): void {
  target.replaceChildren();
  for (const s of scenarios) {
    const row = el("div", `scenario scenario-${s.tag}`);
    row.appendChild(el("span", "mono", s.name));
    row.appendChild(el("span", `tag tag-${s.tag}`, s.tag));
    if (s.designated_rule) row.appendChild(el("span", "muted small", s.designated_rule));
    const button = el("button", undefined, s.running ? "stop" : "run") as HTMLButtonElement;
    button.onclick = () => (s.running ? onStop(s.name) : onStart(s.name));
    row.appendChild(button);
    target.appendChild(row);
  }
}
