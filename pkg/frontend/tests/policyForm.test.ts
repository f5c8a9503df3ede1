import { describe, expect, it } from "vitest";

import { buildPolicy, emptyForm, upsertPolicy, validateForm } from "../src/policyForm.js";
import type { Policy } from "../src/types.js";

describe("policy form validation", () => {
  it("accepts a plain block policy", () => {
    const values = { ...emptyForm("uber-like"), actionKind: "Block" as const };
    expect(validateForm(values)).toEqual({});
    const policy = buildPolicy(values);
    expect(policy).toEqual({
      app: "uber-like",
      permission: "Location",
      action: { kind: "Block" },
      context: { kind: "Always" },
      enabled: true,
    });
  });

  it("rejects a negative blur radius inline and refuses to build", () => {
    const values = {
      ...emptyForm("cam-app", "Camera"),
      actionKind: "Transform" as const,
      transformKind: "BlurFrame" as const,
      radius: "-2",
    };
    const errors = validateForm(values);
    expect(errors.radius).toMatch(/>= 0/);
    expect(() => buildPolicy(values)).toThrow(/radius/);
  });

  it("rejects transforms that do not fit the permission", () => {
    const values = {
      ...emptyForm("a", "Contacts"),
      actionKind: "Transform" as const,
      transformKind: "BlurFrame" as const,
    };
    expect(validateForm(values).transformKind).toMatch(/not applicable/);
  });

  it("requires a toggle name for manual contexts", () => {
    const values = {
      ...emptyForm("a"),
      actionKind: "Block" as const,
      contextKind: "ManualToggle" as const,
      toggleId: " ",
    };
    expect(validateForm(values).toggleId).toBeTruthy();
  });

  it("validates static JSON and coordinate ranges", () => {
    const badJson = { ...emptyForm("a"), actionKind: "SpoofStatic" as const, staticValue: "{oops" };
    expect(validateForm(badJson).staticValue).toMatch(/JSON/);
    const badLat = {
      ...emptyForm("a"),
      actionKind: "Transform" as const,
      transformKind: "FixedLocation" as const,
      lat: "123",
    };
    expect(validateForm(badLat).lat).toMatch(/-90/);
  });

  it("builds a fixed-location transform with numbers", () => {
    const values = {
      ...emptyForm("uber-like"),
      actionKind: "Transform" as const,
      transformKind: "FixedLocation" as const,
      lat: "28.5459",
      lon: "77.1926",
    };
    const policy = buildPolicy(values);
    expect(policy.action.transform).toEqual({ kind: "FixedLocation", lat: 28.5459, lon: 77.1926 });
  });
});

describe("document upsert", () => {
  const block = (app: string): Policy => ({
    app,
    permission: "Location",
    action: { kind: "Block" },
    context: { kind: "Always" },
    enabled: true,
  });

  it("replaces by (app, permission, context) key", () => {
    const first = block("a");
    const second = { ...block("a"), enabled: false };
    const out = upsertPolicy([first, block("b")], second);
    expect(out).toHaveLength(2);
    expect(out.find((p) => p.app === "a")?.enabled).toBe(false);
  });
});
