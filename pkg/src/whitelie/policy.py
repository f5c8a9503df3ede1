"""Deceit policies: storage, context-aware resolution, spoof-value
synthesis, and the query bridge hooks use at call time.

A policy binds (app or wildcard, permission, context condition) to an
action: allow, block, a static spoof, a pool pick, or a data transform.
Hooks resolve the action per call through the bridge, so edits and manual
toggles take effect on the very next invocation.

The store is a single versioned JSON document written atomically; reads go
through immutable snapshots so concurrent queries always see one coherent
version.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from scipy import ndimage

from .device import (
    AUDIO_CHUNK_SAMPLES,
    CAMERA_FRAME_SHAPE,
    METHODS_BY_PERMISSION,
    generate_contacts,
)
from .errors import EmptyPool, EmptyTrace, IncompatibleTransform, MissingOriginal
from .hooking import HookDescriptor
from .model import (
    ActivityState,
    CalendarEvent,
    ClipData,
    Contact,
    LocationFix,
    PermissionKind,
    SensorInfo,
    SensorReading,
    SmsMessage,
)

WILDCARD_APP = "*"

SMS_BODY_MASK = "(redacted)"
CALENDAR_FIELD_MASK = "(masked)"

# How many contacts a pool-backed contacts query returns per call.
CONTACT_SAMPLE_SIZE = 10

BUILTIN_CONTACT_POOL_ID = "contacts-100"
_BUILTIN_CONTACT_POOL_SEED = 4242


class DeceitActionKind(str, Enum):
    Allow = "Allow"
    Block = "Block"
    SpoofStatic = "SpoofStatic"
    SpoofPool = "SpoofPool"
    Transform = "Transform"


class TransformKind(str, Enum):
    ConstantSensor = "ConstantSensor"
    BlurFrame = "BlurFrame"
    NoiseAudio = "NoiseAudio"
    MaskSmsBodyKeepSender = "MaskSmsBodyKeepSender"
    MaskCalendarFields = "MaskCalendarFields"
    FixedLocation = "FixedLocation"
    ReplayTrace = "ReplayTrace"


# Transform kinds are only meaningful for specific permissions.
TRANSFORM_PERMISSIONS: dict[TransformKind, frozenset[PermissionKind]] = {
    TransformKind.ConstantSensor: frozenset(
        {
            PermissionKind.Accelerometer,
            PermissionKind.Gyroscope,
            PermissionKind.Magnetometer,
            PermissionKind.Light,
        }
    ),
    TransformKind.BlurFrame: frozenset({PermissionKind.Camera}),
    TransformKind.NoiseAudio: frozenset({PermissionKind.Microphone}),
    TransformKind.MaskSmsBodyKeepSender: frozenset({PermissionKind.SmsRead}),
    TransformKind.MaskCalendarFields: frozenset({PermissionKind.Calendar}),
    TransformKind.FixedLocation: frozenset({PermissionKind.Location}),
    TransformKind.ReplayTrace: frozenset(
        {
            PermissionKind.Accelerometer,
            PermissionKind.Gyroscope,
            PermissionKind.Magnetometer,
        }
    ),
}


@dataclass(frozen=True)
class Transform:
    kind: TransformKind
    value: tuple[float, float, float] | None = None  # ConstantSensor
    radius: int | None = None  # BlurFrame
    fields: tuple[str, ...] | None = None  # MaskCalendarFields
    lat: float | None = None  # FixedLocation
    lon: float | None = None
    trace_id: str | None = None  # ReplayTrace

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind.value}
        if self.value is not None:
            doc["value"] = list(self.value)
        if self.radius is not None:
            doc["radius"] = self.radius
        if self.fields is not None:
            doc["fields"] = list(self.fields)
        if self.lat is not None:
            doc["lat"] = self.lat
            doc["lon"] = self.lon
        if self.trace_id is not None:
            doc["trace_id"] = self.trace_id
        return doc

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "Transform":
        kind = TransformKind(doc["kind"])
        return Transform(
            kind=kind,
            value=tuple(doc["value"]) if "value" in doc else None,
            radius=doc.get("radius"),
            fields=tuple(doc["fields"]) if "fields" in doc else None,
            lat=doc.get("lat"),
            lon=doc.get("lon"),
            trace_id=doc.get("trace_id"),
        )


@dataclass(frozen=True)
class DeceitAction:
    kind: DeceitActionKind
    value: Any = None  # SpoofStatic payload (JSON form)
    pool_id: str | None = None
    transform: Transform | None = None

    @property
    def severity(self) -> int:
        if self.kind == DeceitActionKind.Block:
            return 3
        if self.kind == DeceitActionKind.Allow:
            return 1
        return 2

    @property
    def is_spoofing(self) -> bool:
        return self.kind in (
            DeceitActionKind.SpoofStatic,
            DeceitActionKind.SpoofPool,
            DeceitActionKind.Transform,
        )

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind.value}
        if self.kind == DeceitActionKind.SpoofStatic:
            doc["value"] = self.value
        elif self.kind == DeceitActionKind.SpoofPool:
            doc["pool_id"] = self.pool_id
        elif self.kind == DeceitActionKind.Transform:
            doc["transform"] = self.transform.to_json() if self.transform else None
        return doc

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "DeceitAction":
        kind = DeceitActionKind(doc["kind"])
        if kind == DeceitActionKind.SpoofStatic:
            return DeceitAction(kind, value=doc.get("value"))
        if kind == DeceitActionKind.SpoofPool:
            return DeceitAction(kind, pool_id=doc["pool_id"])
        if kind == DeceitActionKind.Transform:
            return DeceitAction(kind, transform=Transform.from_json(doc["transform"]))
        return DeceitAction(kind)


ALLOW = DeceitAction(DeceitActionKind.Allow)
BLOCK = DeceitAction(DeceitActionKind.Block)


def transform_action(kind: TransformKind, **params: Any) -> DeceitAction:
    return DeceitAction(
        DeceitActionKind.Transform, transform=Transform(kind=kind, **params)
    )


class ContextKind(str, Enum):
    Always = "Always"
    BackgroundOnly = "BackgroundOnly"
    ForegroundOnly = "ForegroundOnly"
    ManualToggle = "ManualToggle"


@dataclass(frozen=True)
class ContextCondition:
    kind: ContextKind
    toggle_id: str | None = None

    def matches(self, state: ActivityState, toggles: dict[str, bool]) -> bool:
        if self.kind == ContextKind.Always:
            return True
        if self.kind == ContextKind.BackgroundOnly:
            return state == ActivityState.Background
        if self.kind == ContextKind.ForegroundOnly:
            return state == ActivityState.Foreground
        return bool(toggles.get(self.toggle_id or "", False))

    @property
    def specificity(self) -> int:
        return 0 if self.kind == ContextKind.Always else 1

    def key(self) -> tuple[str, str]:
        return (self.kind.value, self.toggle_id or "")

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind.value}
        if self.toggle_id is not None:
            doc["toggle_id"] = self.toggle_id
        return doc

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "ContextCondition":
        return ContextCondition(ContextKind(doc["kind"]), doc.get("toggle_id"))


ALWAYS = ContextCondition(ContextKind.Always)
BACKGROUND_ONLY = ContextCondition(ContextKind.BackgroundOnly)
FOREGROUND_ONLY = ContextCondition(ContextKind.ForegroundOnly)


@dataclass(frozen=True)
class DeceitPolicy:
    app: str  # app id or "*"
    permission: PermissionKind
    action: DeceitAction
    context: ContextCondition = ALWAYS
    enabled: bool = True

    def key(self) -> tuple[str, str, tuple[str, str]]:
        return (self.app, self.permission.value, self.context.key())

    def to_json(self) -> dict[str, Any]:
        return {
            "app": self.app,
            "permission": self.permission.value,
            "action": self.action.to_json(),
            "context": self.context.to_json(),
            "enabled": self.enabled,
        }

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "DeceitPolicy":
        return DeceitPolicy(
            app=doc["app"],
            permission=PermissionKind(doc["permission"]),
            action=DeceitAction.from_json(doc["action"]),
            context=ContextCondition.from_json(doc.get("context", {"kind": "Always"})),
            enabled=bool(doc.get("enabled", True)),
        )


@dataclass(frozen=True)
class SpoofPool:
    pool_id: str
    permission: PermissionKind
    values: tuple[Any, ...]  # JSON-form values
    seed: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "permission": self.permission.value,
            "values": list(self.values),
            "seed": self.seed,
        }

    @staticmethod
    def from_json(pool_id: str, doc: dict[str, Any]) -> "SpoofPool":
        return SpoofPool(
            pool_id=pool_id,
            permission=PermissionKind(doc["permission"]),
            values=tuple(doc.get("values", ())),
            seed=int(doc.get("seed", 0)),
        )


def builtin_contact_pool() -> SpoofPool:
    """100 generated contacts fed in place of the real contact book.

    Number prefix differs from the truth generator so pool and truth books
    never intersect.
    """
    contacts = generate_contacts(
        100, seed=_BUILTIN_CONTACT_POOL_SEED, number_prefix="+91-70"
    )
    return SpoofPool(
        pool_id=BUILTIN_CONTACT_POOL_ID,
        permission=PermissionKind.Contacts,
        values=tuple({"name": c.name, "number": c.number} for c in contacts),
        seed=_BUILTIN_CONTACT_POOL_SEED,
    )


# --- static spoof value validation / decoding ---------------------------------


def decode_spoof_static(permission: PermissionKind, value: Any) -> Any:
    """Turn a policy's JSON payload into the resource value an app receives.

    Raises IncompatibleTransform when the payload cannot represent a value
    of the permission's type.
    """
    P = PermissionKind
    try:
        if permission == P.Location:
            return LocationFix(lat=float(value["lat"]), lon=float(value["lon"]))
        if permission in (P.Accelerometer, P.Gyroscope, P.Magnetometer):
            x, y, z = value
            return SensorReading(float(x), float(y), float(z))
        if permission == P.Light:
            return float(value)
        if permission == P.Clipboard:
            return ClipData(label=str(value["label"]), text=str(value["text"]))
        if permission == P.Contacts:
            return [Contact(name=str(v["name"]), number=str(v["number"])) for v in value]
        if permission == P.SmsRead:
            return [SmsMessage(sender=str(v["sender"]), body=str(v["body"])) for v in value]
        if permission == P.Calendar:
            return [
                CalendarEvent(
                    name=str(v["name"]),
                    location=str(v["location"]),
                    start_ms=int(v["start_ms"]),
                    end_ms=int(v["end_ms"]),
                )
                for v in value
            ]
        if permission == P.Storage:
            return str(value).encode("utf-8")
        if permission == P.Microphone:
            return np.asarray(value, dtype=np.int16)
        if permission == P.Camera:
            return np.full(CAMERA_FRAME_SHAPE, int(value), dtype=np.uint8)
        if permission in (P.DeviceInfo, P.Tracking):
            return str(value)
        # Internet / SmsSend: opaque receipt object.
        return value
    except (KeyError, TypeError, ValueError) as exc:
        raise IncompatibleTransform(
            f"static value {value!r} not usable for {permission.value}"
        ) from exc


def validate_policy(policy: DeceitPolicy) -> None:
    action = policy.action
    if action.kind == DeceitActionKind.Transform:
        assert action.transform is not None
        allowed = TRANSFORM_PERMISSIONS[action.transform.kind]
        if policy.permission not in allowed:
            raise IncompatibleTransform(
                f"{action.transform.kind.value} not applicable to {policy.permission.value}"
            )
    elif action.kind == DeceitActionKind.SpoofStatic:
        decode_spoof_static(policy.permission, action.value)


# --- the store -----------------------------------------------------------------


@dataclass(frozen=True)
class StoreSnapshot:
    """Immutable view of the policy store at one version."""

    version: int
    policies: tuple[DeceitPolicy, ...]
    stamps: tuple[int, ...]  # per-policy update stamp, parallel to policies
    toggles: dict[str, bool]
    pools: dict[str, SpoofPool]
    traces: dict[str, tuple[tuple[float, ...], ...]]

    def resolve(self, app_id: str, permission: PermissionKind, state: ActivityState) -> DeceitAction:
        """Most specific enabled policy whose context matches.

        App-specific beats wildcard; among residual matches Block beats any
        spoof which beats Allow; then context-specific beats Always; the
        newest policy wins last ties. No match resolves to Allow.
        """
        best: DeceitPolicy | None = None
        best_rank: tuple[int, int, int, int] | None = None
        for policy, stamp in zip(self.policies, self.stamps):
            if not policy.enabled:
                continue
            if policy.permission != permission:
                continue
            if policy.app != app_id and policy.app != WILDCARD_APP:
                continue
            if not policy.context.matches(state, self.toggles):
                continue
            rank = (
                1 if policy.app == app_id else 0,
                policy.action.severity,
                policy.context.specificity,
                stamp,
            )
            if best_rank is None or rank > best_rank:
                best, best_rank = policy, rank
        return best.action if best is not None else ALLOW

    def to_json(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "policies": [p.to_json() for p in self.policies],
            "toggles": dict(self.toggles),
            "pools": {pid: pool.to_json() for pid, pool in self.pools.items()},
            "traces": {tid: [list(s) for s in t] for tid, t in self.traces.items()},
        }


class PolicyStore:
    """Versioned policy database with atomic JSON persistence.

    Mutations are serialized; readers always see an immutable snapshot, so
    a query observes either the pre- or post-update state, never a mix.
    """

    def __init__(self, path: str | Path | None = None, with_builtin_pool: bool = True):
        self._path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        pools = {}
        if with_builtin_pool:
            pool = builtin_contact_pool()
            pools[pool.pool_id] = pool
        self._snapshot = StoreSnapshot(
            version=0, policies=(), stamps=(), toggles={}, pools=pools, traces={}
        )
        self._stamp = 0
        if self._path is not None and self._path.exists():
            self.load(self._path)

    @property
    def snapshot(self) -> StoreSnapshot:
        return self._snapshot

    @property
    def version(self) -> int:
        return self._snapshot.version

    def _commit(self, **changes: Any) -> int:
        snap = self._snapshot
        fields = {
            "version": snap.version + 1,
            "policies": snap.policies,
            "stamps": snap.stamps,
            "toggles": snap.toggles,
            "pools": snap.pools,
            "traces": snap.traces,
        }
        fields.update(changes)
        self._snapshot = StoreSnapshot(**fields)
        if self._path is not None:
            self._write_file(self._path)
        return self._snapshot.version

    def set_policy(self, policy: DeceitPolicy) -> int:
        """Upsert one policy; returns the new store version."""
        validate_policy(policy)
        if policy.action.kind == DeceitActionKind.SpoofPool:
            pool = self._snapshot.pools.get(policy.action.pool_id or "")
            if pool is not None and pool.permission != policy.permission:
                raise IncompatibleTransform(
                    f"pool {policy.action.pool_id!r} holds {pool.permission.value} values"
                )
        with self._lock:
            self._stamp += 1
            key = policy.key()
            policies = list(self._snapshot.policies)
            stamps = list(self._snapshot.stamps)
            for i, existing in enumerate(policies):
                if existing.key() == key:
                    policies[i] = policy
                    stamps[i] = self._stamp
                    break
            else:
                policies.append(policy)
                stamps.append(self._stamp)
            return self._commit(policies=tuple(policies), stamps=tuple(stamps))

    def remove_policy(self, app: str, permission: PermissionKind, context: ContextCondition | None = None) -> int:
        with self._lock:
            keep = [
                (p, s)
                for p, s in zip(self._snapshot.policies, self._snapshot.stamps)
                if not (
                    p.app == app
                    and p.permission == permission
                    and (context is None or p.context.key() == context.key())
                )
            ]
            return self._commit(
                policies=tuple(p for p, _ in keep), stamps=tuple(s for _, s in keep)
            )

    def set_toggle(self, name: str, value: bool) -> int:
        with self._lock:
            toggles = dict(self._snapshot.toggles)
            toggles[name] = bool(value)
            return self._commit(toggles=toggles)

    def add_pool(self, pool: SpoofPool) -> int:
        with self._lock:
            pools = dict(self._snapshot.pools)
            pools[pool.pool_id] = pool
            return self._commit(pools=pools)

    def add_trace(self, trace_id: str, samples: list[tuple[float, ...]] | np.ndarray) -> int:
        samples = tuple(tuple(float(v) for v in s) for s in np.asarray(samples))
        with self._lock:
            traces = dict(self._snapshot.traces)
            traces[trace_id] = samples
            return self._commit(traces=traces)

    def replace_all(self, doc: dict[str, Any]) -> int:
        """Install a whole policy document (version is server-assigned)."""
        policies = tuple(DeceitPolicy.from_json(p) for p in doc.get("policies", ()))
        for p in policies:
            validate_policy(p)
        pools = {
            pid: SpoofPool.from_json(pid, pdoc)
            for pid, pdoc in doc.get("pools", {}).items()
        }
        traces = {
            tid: tuple(tuple(float(v) for v in s) for s in t)
            for tid, t in doc.get("traces", {}).items()
        }
        with self._lock:
            stamps = []
            for _ in policies:
                self._stamp += 1
                stamps.append(self._stamp)
            return self._commit(
                policies=policies,
                stamps=tuple(stamps),
                toggles={k: bool(v) for k, v in doc.get("toggles", {}).items()},
                pools=pools,
                traces=traces,
            )

    # --- persistence -------------------------------------------------------

    def _write_file(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        doc = self._snapshot.to_json()
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def save(self, path: str | Path | None = None) -> None:
        target = Path(path) if path is not None else self._path
        if target is None:
            raise ValueError("no store path configured")
        self._write_file(target)

    def load(self, path: str | Path) -> None:
        with open(path) as fh:
            doc = json.load(fh)
        with self._lock:
            policies = tuple(DeceitPolicy.from_json(p) for p in doc.get("policies", ()))
            stamps = []
            for _ in policies:
                self._stamp += 1
                stamps.append(self._stamp)
            self._snapshot = StoreSnapshot(
                version=int(doc.get("version", 0)),
                policies=policies,
                stamps=tuple(stamps),
                toggles={k: bool(v) for k, v in doc.get("toggles", {}).items()},
                pools={
                    pid: SpoofPool.from_json(pid, pdoc)
                    for pid, pdoc in doc.get("pools", {}).items()
                },
                traces={
                    tid: tuple(tuple(float(v) for v in s) for s in t)
                    for tid, t in doc.get("traces", {}).items()
                },
            )


# --- spoof-value synthesis -------------------------------------------------


def spoof_value(
    permission: PermissionKind,
    resolved: DeceitAction,
    original: Any = None,
    rng: np.random.Generator | None = None,
    *,
    pools: dict[str, SpoofPool] | None = None,
    traces: dict[str, tuple[tuple[float, ...], ...]] | None = None,
    trace_cursors: dict[str, int] | None = None,
) -> Any:
    """Synthesize the deceived value for a resolved spoof/transform action.

    Edit transforms (blur, mask) require the original value; pool picks and
    noise draw from ``rng``; replay reads the next sample of a stored trace
    (cursor state in ``trace_cursors``, wrapping at the end).
    """
    if not resolved.is_spoofing:
        raise ValueError(f"{resolved.kind.value} is not a spoofing action")
    rng = rng if rng is not None else np.random.default_rng(0)

    if resolved.kind == DeceitActionKind.SpoofStatic:
        return decode_spoof_static(permission, resolved.value)

    if resolved.kind == DeceitActionKind.SpoofPool:
        pool = (pools or {}).get(resolved.pool_id or "")
        if pool is None or not pool.values:
            raise EmptyPool(str(resolved.pool_id))
        if permission == PermissionKind.Contacts:
            k = min(CONTACT_SAMPLE_SIZE, len(pool.values))
            idx = rng.choice(len(pool.values), size=k, replace=False)
            return [decode_spoof_static(permission, [pool.values[i]])[0] for i in idx]
        pick = pool.values[int(rng.integers(len(pool.values)))]
        return decode_spoof_static(permission, pick)

    tf = resolved.transform
    assert tf is not None
    if tf.kind == TransformKind.ConstantSensor:
        value = tf.value or (0.0, 0.0, 0.0)
        if isinstance(original, SensorInfo):
            # Hidden-constructor path: rebuild the metadata object with
            # generic, non-identifying fields.
            return SensorInfo(name="sensor", vendor="generic", resolution=float(value[0]))
        if permission == PermissionKind.Light:
            return float(value[0])
        return SensorReading(*(float(v) for v in value))

    if tf.kind == TransformKind.BlurFrame:
        if original is None:
            raise MissingOriginal("BlurFrame needs the captured frame")
        radius = int(tf.radius or 0)
        if radius == 0:
            return np.array(original, copy=True)
        size = 2 * radius + 1
        blurred = ndimage.uniform_filter(
            np.asarray(original, dtype=np.float64), size=size, mode="nearest"
        )
        return np.clip(np.rint(blurred), 0, 255).astype(np.uint8)

    if tf.kind == TransformKind.NoiseAudio:
        n = len(original) if isinstance(original, np.ndarray) else AUDIO_CHUNK_SAMPLES
        return rng.integers(-8000, 8000, n, dtype=np.int16)

    if tf.kind == TransformKind.MaskSmsBodyKeepSender:
        if original is None:
            raise MissingOriginal("SMS mask needs the inbox")
        return [SmsMessage(sender=m.sender, body=SMS_BODY_MASK) for m in original]

    if tf.kind == TransformKind.MaskCalendarFields:
        if original is None:
            raise MissingOriginal("calendar mask needs the events")
        fields = set(tf.fields or ("name", "location"))
        out = []
        for ev in original:
            out.append(
                CalendarEvent(
                    name=CALENDAR_FIELD_MASK if "name" in fields else ev.name,
                    location=CALENDAR_FIELD_MASK if "location" in fields else ev.location,
                    start_ms=0 if "start_ms" in fields else ev.start_ms,
                    end_ms=0 if "end_ms" in fields else ev.end_ms,
                )
            )
        return out

    if tf.kind == TransformKind.FixedLocation:
        return LocationFix(lat=float(tf.lat or 0.0), lon=float(tf.lon or 0.0))

    assert tf.kind == TransformKind.ReplayTrace
    trace = (traces or {}).get(tf.trace_id or "")
    if not trace:
        raise EmptyTrace(str(tf.trace_id))
    cursors = trace_cursors if trace_cursors is not None else {}
    i = cursors.get(tf.trace_id or "", 0)
    sample = trace[i % len(trace)]
    cursors[tf.trace_id or ""] = i + 1
    return SensorReading(*sample)


# --- query bridge and hook installation ---------------------------------------


@dataclass(frozen=True)
class DeceitQuery:
    app_id: str
    permission: PermissionKind
    activity_state: ActivityState


@dataclass(frozen=True)
class DeceitResponse:
    resolved: DeceitAction
    policy_version: int


DECEIT_HOOK_OWNER = "whitelie"


class DeceitModule:
    """Call-time decision point: hooks query it per call, it resolves the
    stored policies and synthesizes spoofed values."""

    def __init__(self, store: PolicyStore, seed: int = 0):
        self.store = store
        self._rng = np.random.default_rng(seed)
        self._trace_cursors: dict[str, int] = {}
        self.query_count = 0
        self.recent_queries: deque[DeceitQuery] = deque(maxlen=1000)

    def resolve(
        self, app_id: str, permission: PermissionKind, state: ActivityState
    ) -> DeceitAction:
        return self.store.snapshot.resolve(app_id, permission, state)

    def query_bridge(self, query: DeceitQuery) -> DeceitResponse:
        """One content-provider style round trip: resolve against a single
        store snapshot and report its version (monotonic reads)."""
        snap = self.store.snapshot
        self.query_count += 1
        self.recent_queries.append(query)
        return DeceitResponse(
            resolved=snap.resolve(query.app_id, query.permission, query.activity_state),
            policy_version=snap.version,
        )

    def spoof_value(
        self, permission: PermissionKind, resolved: DeceitAction, original: Any = None
    ) -> Any:
        snap = self.store.snapshot
        return spoof_value(
            permission,
            resolved,
            original,
            self._rng,
            pools=snap.pools,
            traces=snap.traces,
            trace_cursors=self._trace_cursors,
        )

    def install_deceiving_hooks(self, engine: Any, process: Any) -> list[Any]:
        """One hook per permission-guarded method the manifest grants.

        Decisions are pulled through the bridge at call time, not install
        time, so policy edits and manual toggles apply to the next call.
        """
        handles = []
        for permission in sorted(process.manifest.permissions, key=lambda p: p.value):
            for method in METHODS_BY_PERMISSION[permission]:
                handles.append(
                    engine.install_hook(
                        process,
                        HookDescriptor(
                            target=method,
                            owner=DECEIT_HOOK_OWNER,
                            before=self._make_before(permission),
                            after=self._make_after(permission),
                        ),
                    )
                )
        return handles

    def _make_before(self, permission: PermissionKind):
        def before(param: Any) -> None:
            resp = self.query_bridge(
                DeceitQuery(param.app_id, permission, param.activity_state)
            )
            if resp.resolved.kind == DeceitActionKind.Block:
                param.set_result(None)

        return before

    def _make_after(self, permission: PermissionKind):
        def after(param: Any) -> None:
            resp = self.query_bridge(
                DeceitQuery(param.app_id, permission, param.activity_state)
            )
            if resp.resolved.is_spoofing:
                param.set_result(
                    self.spoof_value(permission, resp.resolved, original=param.result)
                )

        return after


# --- defaults ------------------------------------------------------------------

DEFAULT_FIXED_LOCATION = (28.5459, 77.1926)


def default_spoof_action(permission: PermissionKind) -> DeceitAction:
    """The natural deceit for each permission, used by one-click mitigations
    and the deceive-everything helper."""
    P = PermissionKind
    if permission == P.Location:
        return transform_action(
            TransformKind.FixedLocation,
            lat=DEFAULT_FIXED_LOCATION[0],
            lon=DEFAULT_FIXED_LOCATION[1],
        )
    if permission in (P.Accelerometer, P.Gyroscope, P.Magnetometer, P.Light):
        return transform_action(TransformKind.ConstantSensor, value=(0.0, 0.0, 0.0))
    if permission == P.Microphone:
        return transform_action(TransformKind.NoiseAudio)
    if permission == P.Camera:
        return transform_action(TransformKind.BlurFrame, radius=4)
    if permission == P.Contacts:
        return DeceitAction(DeceitActionKind.SpoofPool, pool_id=BUILTIN_CONTACT_POOL_ID)
    if permission == P.Clipboard:
        return DeceitAction(
            DeceitActionKind.SpoofStatic, value={"label": "dummyLabel", "text": "dummyText"}
        )
    if permission == P.SmsRead:
        return transform_action(TransformKind.MaskSmsBodyKeepSender)
    if permission == P.Calendar:
        return transform_action(TransformKind.MaskCalendarFields, fields=("name", "location"))
    if permission == P.Storage:
        return DeceitAction(DeceitActionKind.SpoofStatic, value="deceived-file-content")
    if permission == P.DeviceInfo:
        return DeceitAction(DeceitActionKind.SpoofStatic, value="000000000000000")
    if permission == P.Tracking:
        return DeceitAction(
            DeceitActionKind.SpoofStatic, value="00000000-0000-0000-0000-000000000000"
        )
    # SmsSend / Internet: the only deceit that protects is refusing the send.
    return BLOCK


def enable_deceit_everywhere(store: PolicyStore) -> int:
    """Wildcard default deceit for every permission (the spoof-all run)."""
    version = store.version
    for permission in PermissionKind:
        version = store.set_policy(
            DeceitPolicy(
                app=WILDCARD_APP,
                permission=permission,
                action=default_spoof_action(permission),
                context=ALWAYS,
            )
        )
    return version
