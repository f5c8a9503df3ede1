/**
 * Schema-driven policy editor model: form values, validation, and the
 * policy JSON it produces. Validation failures render inline and nothing
 * is sent until the form is clean.
 */

import {
  PERMISSIONS,
  TRANSFORMS_FOR,
  type ActionKind,
  type ContextKind,
  type PermissionName,
  type Policy,
  type TransformKind,
} from "./types.js";

export interface PolicyFormValues {
  app: string;
  permission: PermissionName;
  actionKind: ActionKind;
  staticValue: string; // JSON text for SpoofStatic
  poolId: string;
  transformKind: TransformKind | "";
  constant: string; // "x, y, z"
  radius: string;
  fields: string; // comma separated
  lat: string;
  lon: string;
  traceId: string;
  contextKind: ContextKind;
  toggleId: string;
  enabled: boolean;
}

export function emptyForm(app = "", permission: PermissionName = "Location"): PolicyFormValues {
  return {
    app,
    permission,
    actionKind: "Allow",
    staticValue: "",
    poolId: "",
    transformKind: "",
    constant: "0, 0, 0",
    radius: "4",
    fields: "name, location",
    lat: "28.5459",
    lon: "77.1926",
    traceId: "",
    contextKind: "Always",
    toggleId: "",
    enabled: true,
  };
}

export type FormErrors = Partial<Record<keyof PolicyFormValues, string>>;

export function validateForm(values: PolicyFormValues): FormErrors {
  const errors: FormErrors = {};
  if (!values.app.trim()) errors.app = "app id required";
  if (!PERMISSIONS.includes(values.permission)) errors.permission = "unknown permission";

  if (values.actionKind === "SpoofStatic") {
    if (!values.staticValue.trim()) {
      errors.staticValue = "value required";
    } else {
      try {
        JSON.parse(values.staticValue);
      } catch {
        errors.staticValue = "not valid JSON";
      }
    }
  }
  if (values.actionKind === "SpoofPool" && !values.poolId.trim()) {
    errors.poolId = "pool id required";
  }
  if (values.actionKind === "Transform") {
    const allowed = TRANSFORMS_FOR[values.permission] ?? [];
    if (!values.transformKind) {
      errors.transformKind = "pick a transform";
    } else if (!allowed.includes(values.transformKind)) {
      errors.transformKind = `${values.transformKind} not applicable to ${values.permission}`;
    } else {
      switch (values.transformKind) {
        case "BlurFrame": {
          const radius = Number(values.radius);
          if (!Number.isInteger(radius) || radius < 0) {
            errors.radius = "radius must be an integer >= 0";
          }
          break;
        }
        case "ConstantSensor": {
          const parts = values.constant.split(",").map((p) => Number(p.trim()));
          if (parts.length !== 3 || parts.some((p) => Number.isNaN(p))) {
            errors.constant = "need three numbers";
          }
          break;
        }
        case "FixedLocation": {
          const lat = Number(values.lat);
          const lon = Number(values.lon);
          if (Number.isNaN(lat) || lat < -90 || lat > 90) errors.lat = "lat in [-90, 90]";
          if (Number.isNaN(lon) || lon < -180 || lon > 180) errors.lon = "lon in [-180, 180]";
          break;
        }
        case "MaskCalendarFields": {
          if (!values.fields.trim()) errors.fields = "list at least one field";
          break;
        }
        case "ReplayTrace": {
          if (!values.traceId.trim()) errors.traceId = "trace id required";
          break;
        }
      }
    }
  }
  if (values.contextKind === "ManualToggle" && !values.toggleId.trim()) {
    errors.toggleId = "toggle name required";
  }
  return errors;
}

/** Build the policy object; only valid forms get this far. */
export function buildPolicy(values: PolicyFormValues): Policy {
  const errors = validateForm(values);
  if (Object.keys(errors).length > 0) {
    throw new Error(`form has errors: ${Object.keys(errors).join(", ")}`);
  }
  const policy: Policy = {
    app: values.app.trim(),
    permission: values.permission,
    action: { kind: values.actionKind },
    context: { kind: values.contextKind },
    enabled: values.enabled,
  };
  if (values.actionKind === "SpoofStatic") {
    policy.action.value = JSON.parse(values.staticValue);
  } else if (values.actionKind === "SpoofPool") {
    policy.action.pool_id = values.poolId.trim();
  } else if (values.actionKind === "Transform") {
    const kind = values.transformKind as TransformKind;
    policy.action.transform = { kind };
    if (kind === "BlurFrame") policy.action.transform.radius = Number(values.radius);
    if (kind === "ConstantSensor") {
      policy.action.transform.value = values.constant
        .split(",")
        .map((p) => Number(p.trim()));
    }
    if (kind === "FixedLocation") {
      policy.action.transform.lat = Number(values.lat);
      policy.action.transform.lon = Number(values.lon);
    }
    if (kind === "MaskCalendarFields") {
      policy.action.transform.fields = values.fields
        .split(",")
        .map((f) => f.trim())
        .filter(Boolean);
    }
    if (kind === "ReplayTrace") policy.action.transform.trace_id = values.traceId.trim();
  }
  if (values.contextKind === "ManualToggle") {
    policy.context.toggle_id = values.toggleId.trim();
  }
  return policy;
}

/** Upsert into a policy document by the (app, permission, context) key. */
export function upsertPolicy(policies: Policy[], policy: Policy): Policy[] {
  const key = (p: Policy) =>
    `${p.app}|${p.permission}|${p.context.kind}|${p.context.toggle_id ?? ""}`;
  const out = policies.filter((p) => key(p) !== key(policy));
  out.push(policy);
  return out;
}
