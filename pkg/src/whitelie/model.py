"""Core domain types shared by every module: permissions, method ids,
resource values, manifests, and access-log entries.

Everything here is plain data. Value objects are either small frozen
dataclasses or raw numpy arrays (camera frames, audio chunks); use
``values_equal`` to compare across both.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

import numpy as np


class PermissionKind(str, Enum):
    Location = "Location"
    Accelerometer = "Accelerometer"
    Gyroscope = "Gyroscope"
    Magnetometer = "Magnetometer"
    Light = "Light"
    Microphone = "Microphone"
    Camera = "Camera"
    Contacts = "Contacts"
    Clipboard = "Clipboard"
    SmsRead = "SmsRead"
    SmsSend = "SmsSend"
    Calendar = "Calendar"
    Storage = "Storage"
    Internet = "Internet"
    DeviceInfo = "DeviceInfo"
    Tracking = "Tracking"

    @property
    def is_normal(self) -> bool:
        """True for non-runtime ("normal") permissions, granted silently."""
        return self in _NORMAL_PERMISSIONS

    @property
    def is_dangerous(self) -> bool:
        return not self.is_normal


_NORMAL_PERMISSIONS = frozenset(
    {
        PermissionKind.Accelerometer,
        PermissionKind.Gyroscope,
        PermissionKind.Magnetometer,
        PermissionKind.Light,
        PermissionKind.Tracking,
    }
)

SENSOR_PERMISSIONS = frozenset(
    {
        PermissionKind.Accelerometer,
        PermissionKind.Gyroscope,
        PermissionKind.Magnetometer,
        PermissionKind.Light,
    }
)

# Resources with a device-level "in use" indicator (the green dot).
INDICATOR_PERMISSIONS = frozenset({PermissionKind.Microphone, PermissionKind.Camera})


class ActivityState(str, Enum):
    Foreground = "Foreground"
    Background = "Background"
    Stopped = "Stopped"


class ActionTaken(str, Enum):
    Original = "Original"
    Blocked = "Blocked"
    Spoofed = "Spoofed"


@dataclass(frozen=True)
class MethodId:
    """Identity of one dispatch-table slot.

    ``hidden`` marks a non-SDK interface whose hooks need a bypass
    capability. ``indicator_setting`` is False only on the recorder-path
    microphone method that never lights the privacy indicator.
    """

    class_name: str
    method_name: str
    permission: PermissionKind
    hidden: bool = False
    indicator_setting: bool = True

    @property
    def qualified(self) -> str:
        return f"{self.class_name}.{self.method_name}"

    def __str__(self) -> str:  # pragma: no cover - repr convenience
        return self.qualified


@dataclass(frozen=True)
class AppManifest:
    """Declared permissions plus the feature -> permissions map used by the
    unnecessary-access detector rule."""

    app_id: str
    permissions: frozenset[PermissionKind]
    features: dict[str, tuple[PermissionKind, ...]] = field(default_factory=dict)

    @staticmethod
    def create(
        app_id: str,
        permissions: Iterable[PermissionKind | str],
        features: dict[str, Iterable[PermissionKind | str]] | None = None,
    ) -> "AppManifest":
        perms = frozenset(PermissionKind(p) for p in permissions)
        feats = {
            name: tuple(PermissionKind(p) for p in ps)
            for name, ps in (features or {}).items()
        }
        return AppManifest(app_id=app_id, permissions=perms, features=feats)

    def feature_permissions(self) -> frozenset[PermissionKind]:
        out: set[PermissionKind] = set()
        for perms in self.features.values():
            out.update(perms)
        return frozenset(out)

    def to_json(self) -> dict[str, Any]:
        return {
            "app_id": self.app_id,
            "permissions": sorted(p.value for p in self.permissions),
            "features": {
                name: [p.value for p in perms]
                for name, perms in sorted(self.features.items())
            },
        }

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "AppManifest":
        return AppManifest.create(
            doc["app_id"], doc.get("permissions", ()), doc.get("features")
        )


class InteractionKind(str, Enum):
    Touch = "Touch"
    Scroll = "Scroll"
    ButtonPress = "ButtonPress"


@dataclass(frozen=True)
class UserInteractionEvent:
    t: int  # virtual ms
    app_id: str
    kind: InteractionKind
    cell: tuple[int, int] | None = None  # Touch only

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"t": self.t, "app_id": self.app_id, "kind": self.kind.value}
        if self.cell is not None:
            doc["cell"] = list(self.cell)
        return doc

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "UserInteractionEvent":
        return UserInteractionEvent(
            t=int(doc["t"]),
            app_id=str(doc["app_id"]),
            kind=InteractionKind(doc["kind"]),
            cell=tuple(doc["cell"]) if doc.get("cell") is not None else None,
        )


# --- resource values -------------------------------------------------------


@dataclass(frozen=True)
class LocationFix:
    lat: float
    lon: float


@dataclass(frozen=True)
class SensorReading:
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class SensorInfo:
    """Metadata object built by the hidden sensor-info constructor."""

    name: str
    vendor: str
    resolution: float


@dataclass(frozen=True)
class ClipData:
    label: str
    text: str


@dataclass(frozen=True)
class Contact:
    name: str
    number: str


@dataclass(frozen=True)
class SmsMessage:
    sender: str
    body: str


@dataclass(frozen=True)
class CalendarEvent:
    name: str
    location: str
    start_ms: int
    end_ms: int


def values_equal(a: Any, b: Any) -> bool:
    """Equality across value objects, numpy arrays, and containers."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return (
            isinstance(a, np.ndarray)
            and isinstance(b, np.ndarray)
            and a.shape == b.shape
            and a.dtype == b.dtype
            and bool(np.array_equal(a, b))
        )
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    return bool(a == b)


def value_to_json(value: Any) -> Any:
    """Canonical JSON form for step results and reports.

    Arrays and byte blobs collapse to shape + digest so reports stay small
    while remaining bitwise-comparable across runs.
    """
    if value is None:
        return None
    if isinstance(value, np.ndarray):
        return {
            "kind": "array",
            "dtype": str(value.dtype),
            "shape": list(value.shape),
            "sha256": hashlib.sha256(value.tobytes()).hexdigest(),
        }
    if isinstance(value, bytes):
        return {
            "kind": "bytes",
            "len": len(value),
            "sha256": hashlib.sha256(value).hexdigest(),
        }
    if isinstance(value, (list, tuple)):
        return [value_to_json(v) for v in value]
    if isinstance(value, LocationFix):
        return {"kind": "location", "lat": value.lat, "lon": value.lon}
    if isinstance(value, SensorReading):
        return {"kind": "sensor", "xyz": [value.x, value.y, value.z]}
    if isinstance(value, SensorInfo):
        return {
            "kind": "sensor_info",
            "name": value.name,
            "vendor": value.vendor,
            "resolution": value.resolution,
        }
    if isinstance(value, ClipData):
        return {"kind": "clip", "label": value.label, "text": value.text}
    if isinstance(value, Contact):
        return {"kind": "contact", "name": value.name, "number": value.number}
    if isinstance(value, SmsMessage):
        return {"kind": "sms", "sender": value.sender, "body": value.body}
    if isinstance(value, CalendarEvent):
        return {
            "kind": "event",
            "name": value.name,
            "location": value.location,
            "start_ms": value.start_ms,
            "end_ms": value.end_ms,
        }
    if isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, dict):
        return {k: value_to_json(v) for k, v in value.items()}
    raise TypeError(f"no JSON form for {type(value)!r}")


@dataclass(frozen=True)
class AccessLogEntry:
    """One sensitive-API invocation, the unit the detector and reporter consume."""

    seq: int
    t: int  # virtual ms
    app_id: str
    permission: PermissionKind
    method: MethodId
    state: ActivityState
    action: ActionTaken
    latency_ns: int
    bytes: int  # network sends only, 0 elsewhere
    indicator_shown: bool

    CSV_HEADER = "seq,t,app_id,permission,method,state,action,latency_ns,bytes,indicator_shown"

    def to_json(self) -> dict[str, Any]:
        return {
            "seq": self.seq,
            "t": self.t,
            "app_id": self.app_id,
            "permission": self.permission.value,
            "method": self.method.qualified,
            "state": self.state.value,
            "action": self.action.value,
            "latency_ns": self.latency_ns,
            "bytes": self.bytes,
            "indicator_shown": self.indicator_shown,
        }

    def to_csv_row(self) -> str:
        d = self.to_json()
        return ",".join(
            str(d[k]).lower() if isinstance(d[k], bool) else str(d[k])
            for k in self.CSV_HEADER.split(",")
        )
