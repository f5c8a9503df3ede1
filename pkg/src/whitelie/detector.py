"""Resource-access log reporter and rule-based abuse detection.

The access log is an append-only, gap-free stream fanned out to
subscribers, exportable as JSONL or CSV. Rules are pure functions of an
immutable log window plus manifests and the interaction log; each alert
carries the evidence entries and a recommended policy change.

Rules target undeceived accesses (action == Original): once a mitigation
spoofs or blocks the data, the access is no longer privacy-affecting and
the rule goes quiet, which is exactly the replay check the mitigation
tests use.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Sequence

from .errors import SequenceGap
from .model import (
    AccessLogEntry,
    ActionTaken,
    ActivityState,
    AppManifest,
    MethodId,
    PermissionKind,
    SENSOR_PERMISSIONS,
    UserInteractionEvent,
)
from .policy import (
    ALWAYS,
    BACKGROUND_ONLY,
    BLOCK,
    ContextCondition,
    ContextKind,
    DeceitPolicy,
    PolicyStore,
    default_spoof_action,
    transform_action,
    TransformKind,
    DEFAULT_FIXED_LOCATION,
)


class AccessLog:
    """Append-only access-log stream with strict sequence continuity."""

    def __init__(self) -> None:
        self.entries: list[AccessLogEntry] = []
        self._subscribers: list[Callable[[AccessLogEntry], None]] = []

    def append(self, entry: AccessLogEntry) -> None:
        last = self.entries[-1].seq if self.entries else 0
        if entry.seq != last + 1:
            raise SequenceGap(f"expected seq {last + 1}, got {entry.seq}")
        self.entries.append(entry)
        for fn in self._subscribers:
            fn(entry)

    def subscribe(self, fn: Callable[[AccessLogEntry], None]) -> None:
        self._subscribers.append(fn)

    def window(self, t0: int | None = None, t1: int | None = None) -> list[AccessLogEntry]:
        return [
            e
            for e in self.entries
            if (t0 is None or e.t >= t0) and (t1 is None or e.t <= t1)
        ]

    # --- export / import ----------------------------------------------------

    def export_jsonl(self) -> str:
        return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in self.entries)

    def export_csv(self) -> str:
        out = io.StringIO()
        out.write(AccessLogEntry.CSV_HEADER + "\n")
        for e in self.entries:
            out.write(e.to_csv_row() + "\n")
        return out.getvalue()

    @staticmethod
    def import_jsonl(text: str) -> "AccessLog":
        log = AccessLog()
        for line in text.splitlines():
            if line.strip():
                log.append(entry_from_json(json.loads(line)))
        return log


def entry_from_json(doc: dict[str, Any]) -> AccessLogEntry:
    from .device import resolve_method

    return AccessLogEntry(
        seq=int(doc["seq"]),
        t=int(doc["t"]),
        app_id=str(doc["app_id"]),
        permission=PermissionKind(doc["permission"]),
        method=resolve_method(doc["method"]),
        state=ActivityState(doc["state"]),
        action=ActionTaken(doc["action"]),
        latency_ns=int(doc["latency_ns"]),
        bytes=int(doc["bytes"]),
        indicator_shown=bool(doc["indicator_shown"]),
    )


class DetectionRule(str, Enum):
    BgSensorAccess = "BgSensorAccess"
    MicWithoutIndicator = "MicWithoutIndicator"
    BgUpload = "BgUpload"
    SmsSendNoInteraction = "SmsSendNoInteraction"
    LocationPolling = "LocationPolling"
    UnnecessaryAccess = "UnnecessaryAccess"
    BgCameraAccess = "BgCameraAccess"


@dataclass(frozen=True)
class DetectorConfig:
    """Default thresholds separate the scripted benign catalog from the
    malicious one with margin; all overridable."""

    bg_sensor_reads: int = 20  # per window below
    bg_sensor_window_ms: int = 60_000
    bg_upload_bytes: int = 64 * 1024  # per window below
    bg_upload_window_ms: int = 60_000
    interaction_window_ms: int = 5_000
    location_reads_per_min: int = 6  # strictly more than this per minute
    location_sustain_minutes: int = 3


@dataclass(frozen=True)
class PolicyChange:
    """Mitigation template: the policies (and toggles) one click applies."""

    policies: tuple[DeceitPolicy, ...]
    toggles: dict[str, bool] = field(default_factory=dict)

    def apply(self, store: PolicyStore) -> int:
        version = store.version
        for name, value in self.toggles.items():
            version = store.set_toggle(name, value)
        for policy in self.policies:
            version = store.set_policy(policy)
        return version

    def to_json(self) -> dict[str, Any]:
        return {
            "policies": [p.to_json() for p in self.policies],
            "toggles": dict(self.toggles),
        }


@dataclass(frozen=True)
class Alert:
    rule: DetectionRule
    app_id: str
    evidence: tuple[int, ...]  # log seq numbers
    t_raised: int
    recommended: PolicyChange

    @property
    def id(self) -> str:
        perm = self.recommended.policies[0].permission.value if self.recommended.policies else ""
        raw = f"{self.rule.value}:{self.app_id}:{perm}"
        return hashlib.sha1(raw.encode()).hexdigest()[:12]

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "rule": self.rule.value,
            "app": self.app_id,
            "evidence": list(self.evidence),
            "t_raised": self.t_raised,
            "recommended": self.recommended.to_json(),
        }


def _original(entries: Iterable[AccessLogEntry]) -> list[AccessLogEntry]:
    return [e for e in entries if e.action == ActionTaken.Original]


def _by_app(entries: Iterable[AccessLogEntry]) -> dict[str, list[AccessLogEntry]]:
    out: dict[str, list[AccessLogEntry]] = {}
    for e in entries:
        out.setdefault(e.app_id, []).append(e)
    return out


class Detector:
    """Applies every rule over a log window. Stateless between calls."""

    def __init__(self, config: DetectorConfig | None = None):
        self.config = config or DetectorConfig()

    def evaluate(
        self,
        entries: Sequence[AccessLogEntry],
        manifests: dict[str, AppManifest],
        interactions: Sequence[UserInteractionEvent],
        t0: int | None = None,
        t1: int | None = None,
    ) -> list[Alert]:
        window = [
            e
            for e in entries
            if (t0 is None or e.t >= t0) and (t1 is None or e.t <= t1)
        ]
        alerts: list[Alert] = []
        alerts += self._bg_sensor(window)
        alerts += self._mic_without_indicator(window)
        alerts += self._bg_upload(window)
        alerts += self._sms_send_no_interaction(window, interactions)
        alerts += self._location_polling(window)
        alerts += self._unnecessary_access(window, manifests)
        alerts += self._bg_camera(window)
        alerts.sort(key=lambda a: (a.t_raised, a.rule.value, a.app_id))
        return alerts

    # --- rules -------------------------------------------------------------

    def _bg_sensor(self, window: Sequence[AccessLogEntry]) -> list[Alert]:
        cfg = self.config
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            hits = [
                e
                for e in entries
                if e.permission in SENSOR_PERMISSIONS and e.state == ActivityState.Background
            ]
            evidence = _first_burst(hits, cfg.bg_sensor_reads, cfg.bg_sensor_window_ms)
            if evidence:
                perms = sorted({e.permission for e in evidence}, key=lambda p: p.value)
                alerts.append(
                    Alert(
                        rule=DetectionRule.BgSensorAccess,
                        app_id=app,
                        evidence=tuple(e.seq for e in evidence),
                        t_raised=evidence[-1].t,
                        recommended=PolicyChange(
                            policies=tuple(
                                DeceitPolicy(
                                    app=app,
                                    permission=p,
                                    action=transform_action(
                                        TransformKind.ConstantSensor, value=(0.0, 0.0, 0.0)
                                    ),
                                    context=BACKGROUND_ONLY,
                                )
                                for p in perms
                            )
                        ),
                    )
                )
        return alerts

    def _mic_without_indicator(self, window: Sequence[AccessLogEntry]) -> list[Alert]:
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            hits = [
                e
                for e in entries
                if e.permission == PermissionKind.Microphone and not e.indicator_shown
            ]
            if hits:
                alerts.append(
                    Alert(
                        rule=DetectionRule.MicWithoutIndicator,
                        app_id=app,
                        evidence=tuple(e.seq for e in hits),
                        t_raised=hits[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=PermissionKind.Microphone,
                                    action=transform_action(TransformKind.NoiseAudio),
                                    context=ALWAYS,
                                ),
                            )
                        ),
                    )
                )
        return alerts

    def _bg_upload(self, window: Sequence[AccessLogEntry]) -> list[Alert]:
        cfg = self.config
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            sends = [
                e
                for e in entries
                if e.permission == PermissionKind.Internet
                and e.state == ActivityState.Background
            ]
            evidence = _first_byte_burst(sends, cfg.bg_upload_bytes, cfg.bg_upload_window_ms)
            if evidence:
                alerts.append(
                    Alert(
                        rule=DetectionRule.BgUpload,
                        app_id=app,
                        evidence=tuple(e.seq for e in evidence),
                        t_raised=evidence[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=PermissionKind.Internet,
                                    action=BLOCK,
                                    context=BACKGROUND_ONLY,
                                ),
                            )
                        ),
                    )
                )
        return alerts

    def _sms_send_no_interaction(
        self,
        window: Sequence[AccessLogEntry],
        interactions: Sequence[UserInteractionEvent],
    ) -> list[Alert]:
        cfg = self.config
        by_app_inter: dict[str, list[int]] = {}
        for ev in interactions:
            by_app_inter.setdefault(ev.app_id, []).append(ev.t)
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            times = by_app_inter.get(app, [])
            hits = [
                e
                for e in entries
                if e.permission == PermissionKind.SmsSend
                and not any(e.t - cfg.interaction_window_ms <= t <= e.t for t in times)
            ]
            if hits:
                alerts.append(
                    Alert(
                        rule=DetectionRule.SmsSendNoInteraction,
                        app_id=app,
                        evidence=tuple(e.seq for e in hits),
                        t_raised=hits[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=PermissionKind.SmsSend,
                                    action=BLOCK,
                                    context=ALWAYS,
                                ),
                            )
                        ),
                    )
                )
        return alerts

    def _location_polling(self, window: Sequence[AccessLogEntry]) -> list[Alert]:
        cfg = self.config
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            reads = [e for e in entries if e.permission == PermissionKind.Location]
            if not reads:
                continue
            buckets: dict[int, list[AccessLogEntry]] = {}
            for e in reads:
                buckets.setdefault(e.t // 60_000, []).append(e)
            run: list[int] = []
            found: list[int] | None = None
            for minute in sorted(buckets):
                if len(buckets[minute]) > cfg.location_reads_per_min and (
                    not run or minute == run[-1] + 1
                ):
                    run.append(minute)
                    if len(run) >= cfg.location_sustain_minutes:
                        found = run
                        break
                elif len(buckets[minute]) > cfg.location_reads_per_min:
                    run = [minute]
                else:
                    run = []
            if found:
                evidence = [e for m in found for e in buckets[m]]
                toggle = f"deceive-location-{app}"
                alerts.append(
                    Alert(
                        rule=DetectionRule.LocationPolling,
                        app_id=app,
                        evidence=tuple(e.seq for e in evidence),
                        t_raised=evidence[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=PermissionKind.Location,
                                    action=transform_action(
                                        TransformKind.FixedLocation,
                                        lat=DEFAULT_FIXED_LOCATION[0],
                                        lon=DEFAULT_FIXED_LOCATION[1],
                                    ),
                                    context=ContextCondition(
                                        ContextKind.ManualToggle, toggle_id=toggle
                                    ),
                                ),
                            ),
                            toggles={toggle: True},
                        ),
                    )
                )
        return alerts

    def _unnecessary_access(
        self, window: Sequence[AccessLogEntry], manifests: dict[str, AppManifest]
    ) -> list[Alert]:
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            manifest = manifests.get(app)
            if manifest is None:
                continue
            declared = manifest.feature_permissions()
            used = {}
            for e in entries:
                if e.permission not in declared:
                    used.setdefault(e.permission, []).append(e)
            for permission in sorted(used, key=lambda p: p.value):
                hits = used[permission]
                alerts.append(
                    Alert(
                        rule=DetectionRule.UnnecessaryAccess,
                        app_id=app,
                        evidence=tuple(e.seq for e in hits),
                        t_raised=hits[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=permission,
                                    action=default_spoof_action(permission),
                                    context=ALWAYS,
                                ),
                            )
                        ),
                    )
                )
        return alerts

    def _bg_camera(self, window: Sequence[AccessLogEntry]) -> list[Alert]:
        alerts = []
        for app, entries in _by_app(_original(window)).items():
            hits = [
                e
                for e in entries
                if e.permission == PermissionKind.Camera
                and e.state == ActivityState.Background
            ]
            if hits:
                alerts.append(
                    Alert(
                        rule=DetectionRule.BgCameraAccess,
                        app_id=app,
                        evidence=tuple(e.seq for e in hits),
                        t_raised=hits[-1].t,
                        recommended=PolicyChange(
                            policies=(
                                DeceitPolicy(
                                    app=app,
                                    permission=PermissionKind.Camera,
                                    action=transform_action(TransformKind.BlurFrame, radius=4),
                                    context=BACKGROUND_ONLY,
                                ),
                            )
                        ),
                    )
                )
        return alerts

    def check_evidence(
        self,
        alert: Alert,
        entries: Sequence[AccessLogEntry],
        manifests: dict[str, AppManifest],
        interactions: Sequence[UserInteractionEvent],
    ) -> bool:
        """Re-check an alert's evidence against its rule predicate."""
        by_seq = {e.seq: e for e in entries}
        cfg = self.config
        for seq in alert.evidence:
            e = by_seq.get(seq)
            if e is None or e.app_id != alert.app_id or e.action != ActionTaken.Original:
                return False
            if alert.rule == DetectionRule.BgSensorAccess:
                ok = e.permission in SENSOR_PERMISSIONS and e.state == ActivityState.Background
            elif alert.rule == DetectionRule.MicWithoutIndicator:
                ok = e.permission == PermissionKind.Microphone and not e.indicator_shown
            elif alert.rule == DetectionRule.BgUpload:
                ok = (
                    e.permission == PermissionKind.Internet
                    and e.state == ActivityState.Background
                    and e.bytes > 0
                )
            elif alert.rule == DetectionRule.SmsSendNoInteraction:
                ok = e.permission == PermissionKind.SmsSend and not any(
                    e.t - cfg.interaction_window_ms <= ev.t <= e.t
                    for ev in interactions
                    if ev.app_id == e.app_id
                )
            elif alert.rule == DetectionRule.LocationPolling:
                ok = e.permission == PermissionKind.Location
            elif alert.rule == DetectionRule.UnnecessaryAccess:
                manifest = manifests.get(e.app_id)
                ok = manifest is not None and e.permission not in manifest.feature_permissions()
            else:
                ok = (
                    e.permission == PermissionKind.Camera
                    and e.state == ActivityState.Background
                )
            if not ok:
                return False
        return True


def recommend_action(alert: Alert) -> PolicyChange:
    """The mitigation template instantiated for the alert's app."""
    return alert.recommended


def _first_burst(
    hits: list[AccessLogEntry], threshold: int, window_ms: int
) -> list[AccessLogEntry]:
    """First sliding window holding at least ``threshold`` entries."""
    hits = sorted(hits, key=lambda e: e.t)
    lo = 0
    for hi in range(len(hits)):
        while hits[hi].t - hits[lo].t > window_ms:
            lo += 1
        if hi - lo + 1 >= threshold:
            return hits[lo : hi + 1]
    return []


def _first_byte_burst(
    sends: list[AccessLogEntry], threshold_bytes: int, window_ms: int
) -> list[AccessLogEntry]:
    """First sliding window whose summed payload exceeds ``threshold_bytes``."""
    sends = sorted(sends, key=lambda e: e.t)
    lo = 0
    total = 0
    for hi in range(len(sends)):
        total += sends[hi].bytes
        while sends[hi].t - sends[lo].t > window_ms:
            total -= sends[lo].bytes
            lo += 1
        if total > threshold_bytes:
            return sends[lo : hi + 1]
    return []
