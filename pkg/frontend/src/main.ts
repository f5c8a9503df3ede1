/**
 * Dashboard bootstrap: wire the gateway client and SSE stream into the
 * store, the store into the renderers, and the form into PUT /policies.
 */

import { GatewayClient, LogStream, type EventSourceLike } from "./api.js";
import {
  buildPolicy,
  upsertPolicy,
  validateForm,
  type PolicyFormValues,
} from "./policyForm.js";
import {
  renderAlerts,
  renderApps,
  renderConnection,
  renderCoverage,
  renderLog,
  renderScenarios,
} from "./render.js";
import { Store } from "./store.js";
import { PERMISSIONS, type ActionKind, type ContextKind, type PermissionName } from "./types.js";

const client = new GatewayClient("");
const store = new Store();

const $ = (id: string) => document.getElementById(id)!;

function nativeEventSource(url: string): EventSourceLike {
  return new EventSource(url) as unknown as EventSourceLike;
}

const stream = new LogStream("", nativeEventSource, {
  onEntry: (entry) => store.pushEntry(entry),
  onState: (state) => store.setConnection(state),
});

async function refreshAlerts(): Promise<void> {
  store.setAlerts(await client.alerts());
}

async function refreshStatic(): Promise<void> {
  store.setApps(await client.apps());
  store.setPolicies(await client.policies());
  store.setCoverage(await client.coverage());
  renderScenarios(
    $("scenarios"),
    await client.scenarios(),
    async (name) => {
      await client.startScenario(name);
      setTimeout(refreshStatic, 500);
    },
    async (name) => {
      await client.stopScenario(name);
    },
  );
}

function showBanner(message: string): void {
  const banner = $("banner");
  banner.textContent = message;
  banner.className = message ? "form-error" : "";
}

async function applyMitigation(id: string): Promise<void> {
  try {
    await client.applyAlert(id);
    showBanner("");
  } catch (err) {
    showBanner(`mitigation failed: ${err}`); // e.g. 409 when the scenario stopped
  }
  await refreshAlerts();
}

// --- policy editor ---------------------------------------------------------

function formValues(): PolicyFormValues {
  return {
    app: ($("f-app") as HTMLInputElement).value,
    permission: ($("f-permission") as HTMLSelectElement).value as PermissionName,
    actionKind: ($("f-action") as HTMLSelectElement).value as ActionKind,
    staticValue: ($("f-static") as HTMLInputElement).value,
    poolId: ($("f-pool") as HTMLInputElement).value,
    transformKind: ($("f-transform") as HTMLSelectElement).value as never,
    constant: ($("f-constant") as HTMLInputElement).value,
    radius: ($("f-radius") as HTMLInputElement).value,
    fields: ($("f-fields") as HTMLInputElement).value,
    lat: ($("f-lat") as HTMLInputElement).value,
    lon: ($("f-lon") as HTMLInputElement).value,
    traceId: ($("f-trace") as HTMLInputElement).value,
    contextKind: ($("f-context") as HTMLSelectElement).value as ContextKind,
    toggleId: ($("f-toggle") as HTMLInputElement).value,
    enabled: ($("f-enabled") as HTMLInputElement).checked,
  };
}

async function submitPolicy(): Promise<void> {
  const values = formValues();
  const errors = validateForm(values);
  const errorBox = $("f-errors");
  errorBox.replaceChildren();
  if (Object.keys(errors).length > 0) {
    for (const [field, message] of Object.entries(errors)) {
      const line = document.createElement("div");
      line.className = "form-error";
      line.textContent = `${field}: ${message}`;
      errorBox.appendChild(line);
    }
    return; // nothing sent while the form is invalid
  }
  const doc = store.model.policies ?? {
    version: 0,
    policies: [],
    toggles: {},
    pools: {},
    traces: {},
  };
  const policy = buildPolicy(values);
  const next = {
    policies: upsertPolicy(doc.policies, policy),
    toggles:
      values.contextKind === "ManualToggle"
        ? { ...doc.toggles, [values.toggleId.trim()]: true }
        : doc.toggles,
    pools: doc.pools,
    traces: doc.traces,
  };
  try {
    await client.putPolicies(next);
  } catch (err) {
    const line = document.createElement("div");
    line.className = "form-error";
    line.textContent = String(err);
    errorBox.appendChild(line);
    return;
  }
  store.setPolicies(await client.policies());
}

function populateSelectors(): void {
  for (const id of ["f-permission", "f-filter-permission"]) {
    const select = $(id) as HTMLSelectElement;
    for (const perm of PERMISSIONS) {
      const option = document.createElement("option");
      option.value = perm;
      option.textContent = perm;
      select.appendChild(option);
    }
  }
  ($("f-filter-bg") as HTMLInputElement).onchange = (ev) =>
    store.setFilters({ backgroundOnly: (ev.target as HTMLInputElement).checked });
  ($("f-filter-app") as HTMLInputElement).oninput = (ev) => {
    const value = (ev.target as HTMLInputElement).value.trim();
    store.setFilters({ app: value || null });
  };
  ($("f-filter-permission") as HTMLSelectElement).onchange = (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    store.setFilters({ permission: (value || null) as never });
  };
  ($("f-filter-action") as HTMLSelectElement).onchange = (ev) => {
    const value = (ev.target as HTMLSelectElement).value;
    store.setFilters({ action: (value || null) as never });
  };
  ($("f-submit") as HTMLButtonElement).onclick = () => void submitPolicy();
}

function renderAll(): void {
  renderConnection($("connection"), store.model);
  renderApps($("apps"), store.model);
  renderLog($("log-body"), store.model);
  renderAlerts($("alerts"), store.model, (id) => void applyMitigation(id));
  renderCoverage($("coverage"), store.model);
  const doc = store.model.policies;
  $("policies-json").textContent = doc ? JSON.stringify(doc, null, 2) : "";
}

store.subscribe(renderAll);
populateSelectors();
stream.start();
void refreshStatic();
void refreshAlerts();
setInterval(() => void refreshAlerts(), 2000);
setInterval(() => void refreshStatic(), 5000);
