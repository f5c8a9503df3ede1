/**
 * Gateway wire types, mirroring docs/schemas.md. The dashboard is a pure
 * client of these shapes: it never derives detections or resolutions.
 */

export type PermissionName =
  | "Location" | "Accelerometer" | "Gyroscope" | "Magnetometer" | "Light"
  | "Microphone" | "Camera" | "Contacts" | "Clipboard" | "SmsRead"
  | "SmsSend" | "Calendar" | "Storage" | "Internet" | "DeviceInfo" | "Tracking";

export const PERMISSIONS: PermissionName[] = [
  "Location", "Accelerometer", "Gyroscope", "Magnetometer", "Light",
  "Microphone", "Camera", "Contacts", "Clipboard", "SmsRead",
  "SmsSend", "Calendar", "Storage", "Internet", "DeviceInfo", "Tracking",
];

export type ActionTaken = "Original" | "Blocked" | "Spoofed";
export type ActivityState = "Foreground" | "Background" | "Stopped";

export interface AccessLogEntry {
  seq: number;
  t: number;
  app_id: string;
  permission: PermissionName;
  method: string;
  state: ActivityState;
  action: ActionTaken;
  latency_ns: number;
  bytes: number;
  indicator_shown: boolean;
}

export interface PackageInfo {
  app_id: string;
  requested: PermissionName[];
  granted: PermissionName[];
  features: Record<string, PermissionName[]>;
}

export type TransformKind =
  | "ConstantSensor" | "BlurFrame" | "NoiseAudio" | "MaskSmsBodyKeepSender"
  | "MaskCalendarFields" | "FixedLocation" | "ReplayTrace";

export interface Transform {
  kind: TransformKind;
  value?: number[];
  radius?: number;
  fields?: string[];
  lat?: number;
  lon?: number;
  trace_id?: string;
}

export type ActionKind = "Allow" | "Block" | "SpoofStatic" | "SpoofPool" | "Transform";

export interface DeceitAction {
  kind: ActionKind;
  value?: unknown;
  pool_id?: string;
  transform?: Transform;
}

export type ContextKind = "Always" | "BackgroundOnly" | "ForegroundOnly" | "ManualToggle";

export interface ContextCondition {
  kind: ContextKind;
  toggle_id?: string;
}

export interface Policy {
  app: string;
  permission: PermissionName;
  action: DeceitAction;
  context: ContextCondition;
  enabled: boolean;
}

export interface PolicyDocument {
  version: number;
  policies: Policy[];
  toggles: Record<string, boolean>;
  pools: Record<string, { permission: PermissionName; values: unknown[]; seed: number }>;
  traces: Record<string, number[][]>;
}

export interface PolicyChange {
  policies: Policy[];
  toggles: Record<string, boolean>;
}

export interface Alert {
  id: string;
  rule: string;
  app: string;
  evidence: number[];
  t_raised: number;
  recommended: PolicyChange;
}

export type CoverageStatus = "Deceived" | "GrantedNotUsed" | "NotRequested" | "Failed";

export interface CoverageRow {
  app: string;
  permission: PermissionName;
  status: CoverageStatus;
}

export interface CoverageResponse {
  rows: CoverageRow[];
  summary: Record<string, number>;
}

export interface ScenarioInfo {
  name: string;
  tag: "benign" | "malicious";
  seed: number;
  designated_rule: string | null;
  running: boolean;
}

/** Transform kinds valid per permission (from the documented schema). */
export const TRANSFORMS_FOR: Partial<Record<PermissionName, TransformKind[]>> = {
  Accelerometer: ["ConstantSensor", "ReplayTrace"],
  Gyroscope: ["ConstantSensor", "ReplayTrace"],
  Magnetometer: ["ConstantSensor", "ReplayTrace"],
  Light: ["ConstantSensor"],
  Camera: ["BlurFrame"],
  Microphone: ["NoiseAudio"],
  SmsRead: ["MaskSmsBodyKeepSender"],
  Calendar: ["MaskCalendarFields"],
  Location: ["FixedLocation"],
};
