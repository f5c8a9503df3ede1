"""Overhead instrumentation: per-call latency benchmarks, the energy ledger
behind battery-saver accounting, and the per-app/per-permission coverage
matrix.

Absolute reference numbers measured on a physical handset deployment are
reported alongside results for comparison; they are never asserted, since
they reflect real IPC and hardware costs this simulation does not model.
Ordering and arithmetic properties are the testable contract here.
"""

from __future__ import annotations

import io
import resource
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Sequence

from .model import (
    AccessLogEntry,
    ActionTaken,
    AppManifest,
    PermissionKind,
)

# Reference per-call added latency from the handset deployment (ms).
REFERENCE_OVERHEAD_MS = {
    "average": 1.64,
    "Contacts": 3.87,
    "Camera": 3.23,
    "Tracking": 0.83,
    "Clipboard": 1.07,
}
# Reference battery-saver outcome: blocking the original call saved
# 4.08 uAh (60.83%) per call; memory overhead observed was 5.2 MB.
REFERENCE_SAVED_UAH_PER_CALL = 4.08
REFERENCE_SAVINGS_PCT = 60.83
REFERENCE_MEMORY_OVERHEAD_MB = 5.2


@dataclass(frozen=True)
class EnergyModel:
    """Per-call energy accounting in microamp-hours.

    ``resource_uah`` is what the resource itself draws when the original
    behavior runs; ``hook_overhead_uah`` is the added cost of dispatching a
    hooked call. Stored at nano-amp-hour granularity internally so ledger
    arithmetic is exact.
    """

    resource_uah: dict[PermissionKind, float] = field(default_factory=dict)
    hook_overhead_uah: float = 0.0

    def resource_nah(self, permission: PermissionKind) -> int:
        return round(self.resource_uah.get(permission, 0.0) * 1000)

    @property
    def hook_nah(self) -> int:
        return round(self.hook_overhead_uah * 1000)


def zero_model() -> EnergyModel:
    return EnergyModel()


def reference_model() -> EnergyModel:
    """Calibrated so a blocked call saves 4.08 uAh of a 6.708 uAh total."""
    return EnergyModel(
        resource_uah={p: REFERENCE_SAVED_UAH_PER_CALL for p in PermissionKind},
        hook_overhead_uah=6.708 - REFERENCE_SAVED_UAH_PER_CALL,
    )


@dataclass
class AppEnergy:
    resource_nah: int = 0
    hook_nah: int = 0
    saved_nah: int = 0


class EnergyLedger:
    """Per-app running totals. ``saved`` grows only on blocked calls, by
    exactly the blocked resource's per-call cost."""

    def __init__(self, model: EnergyModel | None = None):
        self.model = model or zero_model()
        self.apps: dict[str, AppEnergy] = {}

    def _acct(self, app_id: str) -> AppEnergy:
        return self.apps.setdefault(app_id, AppEnergy())

    def charge_resource(self, app_id: str, permission: PermissionKind) -> None:
        self._acct(app_id).resource_nah += self.model.resource_nah(permission)

    def charge_hook(self, app_id: str, permission: PermissionKind) -> None:
        self._acct(app_id).hook_nah += self.model.hook_nah

    def credit_block(self, app_id: str, permission: PermissionKind) -> None:
        self._acct(app_id).saved_nah += self.model.resource_nah(permission)

    def totals_nah(self, app_id: str | None = None) -> AppEnergy:
        if app_id is not None:
            return self.apps.get(app_id, AppEnergy())
        total = AppEnergy()
        for acct in self.apps.values():
            total.resource_nah += acct.resource_nah
            total.hook_nah += acct.hook_nah
            total.saved_nah += acct.saved_nah
        return total

    def total_uah(self, app_id: str | None = None) -> float:
        acct = self.totals_nah(app_id)
        return (acct.resource_nah + acct.hook_nah) / 1000.0


# --- coverage matrix -----------------------------------------------------------


class CoverageStatus(str, Enum):
    Deceived = "Deceived"
    GrantedNotUsed = "GrantedNotUsed"
    NotRequested = "NotRequested"
    Failed = "Failed"


@dataclass
class CoverageMatrix:
    """Rows are app ids, columns the full permission set."""

    cells: dict[tuple[str, PermissionKind], CoverageStatus]

    @property
    def apps(self) -> list[str]:
        return sorted({app for app, _ in self.cells})

    def status(self, app: str, permission: PermissionKind) -> CoverageStatus:
        return self.cells.get((app, permission), CoverageStatus.NotRequested)

    def summary(self) -> dict[str, Any]:
        counts = {status: 0 for status in CoverageStatus}
        for status in self.cells.values():
            counts[status] += 1
        requested = (
            counts[CoverageStatus.Deceived]
            + counts[CoverageStatus.Failed]
            + counts[CoverageStatus.GrantedNotUsed]
        )
        exercised = counts[CoverageStatus.Deceived] + counts[CoverageStatus.Failed]
        return {
            "requested": requested,
            "deceived": counts[CoverageStatus.Deceived],
            "failed": counts[CoverageStatus.Failed],
            "granted_not_used": counts[CoverageStatus.GrantedNotUsed],
            "deceived_fraction": (
                counts[CoverageStatus.Deceived] / requested if requested else 0.0
            ),
            "exercised_deceived_fraction": (
                counts[CoverageStatus.Deceived] / exercised if exercised else 0.0
            ),
            "reference_success_rate_pct": 78.32,
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("app,permission,status\n")
        for app in self.apps:
            for permission in PermissionKind:
                out.write(f"{app},{permission.value},{self.status(app, permission).value}\n")
        return out.getvalue()

    @staticmethod
    def from_csv(text: str) -> "CoverageMatrix":
        cells: dict[tuple[str, PermissionKind], CoverageStatus] = {}
        lines = [l for l in text.splitlines() if l.strip()]
        if not lines or lines[0] != "app,permission,status":
            raise ValueError("bad coverage CSV header")
        for line in lines[1:]:
            app, perm, status = line.split(",")
            cells[(app, PermissionKind(perm))] = CoverageStatus(status)
        return CoverageMatrix(cells)

    @staticmethod
    def from_rows(rows: Iterable[dict[str, str]]) -> "CoverageMatrix":
        return CoverageMatrix(
            {
                (r["app"], PermissionKind(r["permission"])): CoverageStatus(r["status"])
                for r in rows
            }
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "rows": [
                {
                    "app": app,
                    "permission": permission.value,
                    "status": self.status(app, permission).value,
                }
                for app in self.apps
                for permission in PermissionKind
            ],
            "summary": self.summary(),
        }


def coverage_from(
    manifests: dict[str, AppManifest], entries: Sequence[AccessLogEntry]
) -> CoverageMatrix:
    """Aggregate log entries into per-(app, permission) statuses."""
    seen: dict[tuple[str, PermissionKind], set[ActionTaken]] = {}
    for e in entries:
        seen.setdefault((e.app_id, e.permission), set()).add(e.action)
    cells: dict[tuple[str, PermissionKind], CoverageStatus] = {}
    for app, manifest in manifests.items():
        for permission in PermissionKind:
            if permission not in manifest.permissions:
                cells[(app, permission)] = CoverageStatus.NotRequested
                continue
            actions = seen.get((app, permission))
            if not actions:
                cells[(app, permission)] = CoverageStatus.GrantedNotUsed
            elif actions & {ActionTaken.Spoofed, ActionTaken.Blocked}:
                cells[(app, permission)] = CoverageStatus.Deceived
            else:
                cells[(app, permission)] = CoverageStatus.Failed
    return CoverageMatrix(cells)


def merge_coverage(matrices: Iterable[CoverageMatrix]) -> CoverageMatrix:
    """Best status wins: any deception marks the pair Deceived."""
    rank = {
        CoverageStatus.NotRequested: 0,
        CoverageStatus.GrantedNotUsed: 1,
        CoverageStatus.Failed: 2,
        CoverageStatus.Deceived: 3,
    }
    cells: dict[tuple[str, PermissionKind], CoverageStatus] = {}
    for matrix in matrices:
        for key, status in matrix.cells.items():
            if key not in cells or rank[status] > rank[cells[key]]:
                cells[key] = status
    return CoverageMatrix(cells)


# --- benchmarks ----------------------------------------------------------------

BENCH_APP_ID = "bench-app"

# Data-retrieval methods cycled by the battery benchmark.
BENCH_RETRIEVAL_METHODS = (
    "android.location.LocationManager.getLastKnownLocation",
    "android.provider.ContactsContract.queryContacts",
    "android.content.ClipData.createFromParcel",
    "com.google.android.gms.ads.identifier.AdvertisingIdClient.getAdvertisingIdInfo",
    "android.telephony.TelephonyManager.getDeviceId",
    "android.provider.CalendarContract.queryEvents",
)

BENCH_OVERHEAD_PERMISSIONS = (
    PermissionKind.Contacts,
    PermissionKind.Camera,
    PermissionKind.Tracking,
    PermissionKind.Clipboard,
)

_PERMISSION_BENCH_METHOD = {
    PermissionKind.Contacts: "android.provider.ContactsContract.queryContacts",
    PermissionKind.Camera: "android.hardware.camera2.CameraDevice.captureFrame",
    PermissionKind.Tracking: (
        "com.google.android.gms.ads.identifier.AdvertisingIdClient.getAdvertisingIdInfo"
    ),
    PermissionKind.Clipboard: "android.content.ClipData.createFromParcel",
    PermissionKind.Location: "android.location.LocationManager.getLastKnownLocation",
    PermissionKind.DeviceInfo: "android.telephony.TelephonyManager.getDeviceId",
}


def bench_api_overhead(
    n_per_permission: int = 400,
    permissions: Sequence[PermissionKind] = BENCH_OVERHEAD_PERMISSIONS,
    warmup: int = 50,
) -> dict[str, Any]:
    """Wall-clock latency of hooked (spoofing) vs unhooked calls.

    The monotonic timer wraps the dispatch boundary only; script think-time
    never counts. Returns per-permission mean/p95 added nanoseconds plus the
    handset reference numbers as metadata.
    """
    if n_per_permission < 100:
        raise ValueError("need at least 100 calls per permission")
    unhooked = timed_latency_run(False, permissions, n_per_permission, warmup)
    hooked = timed_latency_run(True, permissions, n_per_permission, warmup)
    results: dict[str, Any] = {"per_permission": {}, "reference_ms": REFERENCE_OVERHEAD_MS}
    for permission in permissions:
        h, u = hooked[permission], unhooked[permission]
        mean_added = statistics.fmean(h) - statistics.fmean(u)
        p95_added = _p95(h) - _p95(u)
        results["per_permission"][permission.value] = {
            "mean_added_ns": mean_added,
            "p95_added_ns": p95_added,
            "mean_hooked_ns": statistics.fmean(h),
            "mean_unhooked_ns": statistics.fmean(u),
        }
    results["max_rss_kb"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return results


def timed_latency_run(
    spoofing: bool,
    permissions: Sequence[PermissionKind] = BENCH_OVERHEAD_PERMISSIONS,
    n_per_permission: int = 400,
    warmup: int = 50,
) -> dict[PermissionKind, list[int]]:
    """Per-call dispatch latencies for a dedicated benchmark app, hooked
    (spoof-everything policies) or bare."""
    from .policy import enable_deceit_everywhere
    from .sandbox import Sandbox

    sandbox = Sandbox(seed=7)
    if spoofing:
        enable_deceit_everywhere(sandbox.store)
    process = sandbox.spawn(
        AppManifest.create(BENCH_APP_ID, [p.value for p in permissions]),
        install_hooks=spoofing,
    )
    sandbox.device.measure_latency = True
    samples: dict[PermissionKind, list[int]] = {p: [] for p in permissions}
    for permission in permissions:
        method = _PERMISSION_BENCH_METHOD[permission]
        for i in range(warmup + n_per_permission):
            sandbox.device.invoke(process, method)
            if i >= warmup:
                samples[permission].append(sandbox.log.entries[-1].latency_ns)
    return samples


def _p95(samples: Sequence[int]) -> float:
    ordered = sorted(samples)
    idx = max(0, min(len(ordered) - 1, round(0.95 * (len(ordered) - 1))))
    return float(ordered[idx])


def bench_battery_saver(n: int = 1000, model: EnergyModel | None = None) -> dict[str, Any]:
    """Run the retrieval benchmark twice, allow-all vs block-all, and report
    ledger totals. savings_pct = (baseline - saver) / baseline."""
    if n < 1:
        raise ValueError("n must be positive")
    from .device import METHODS_BY_NAME
    from .policy import ALLOW, ALWAYS, BLOCK, DeceitPolicy, WILDCARD_APP
    from .sandbox import Sandbox

    model = model or reference_model()
    perms = sorted(
        {METHODS_BY_NAME[m].permission for m in BENCH_RETRIEVAL_METHODS},
        key=lambda p: p.value,
    )

    def run(action: Any) -> int:
        sandbox = Sandbox(seed=11, energy_model=model)
        for p in perms:
            sandbox.store.set_policy(
                DeceitPolicy(app=WILDCARD_APP, permission=p, action=action, context=ALWAYS)
            )
        process = sandbox.spawn(
            AppManifest.create(BENCH_APP_ID, [p.value for p in perms])
        )
        for i in range(n):
            method = BENCH_RETRIEVAL_METHODS[i % len(BENCH_RETRIEVAL_METHODS)]
            sandbox.device.invoke(process, method)
        acct = sandbox.ledger.totals_nah(BENCH_APP_ID)
        return acct.resource_nah + acct.hook_nah

    baseline_nah = run(ALLOW)
    saver_nah = run(BLOCK)
    savings = (baseline_nah - saver_nah) / baseline_nah if baseline_nah else 0.0
    return {
        "n": n,
        "baseline_uah": baseline_nah / 1000.0,
        "saver_uah": saver_nah / 1000.0,
        "savings_pct": savings * 100.0,
        "saved_uah_per_call": (baseline_nah - saver_nah) / 1000.0 / n,
        "reference_saved_uah_per_call": REFERENCE_SAVED_UAH_PER_CALL,
        "reference_savings_pct": REFERENCE_SAVINGS_PCT,
        "reference_memory_overhead_mb": REFERENCE_MEMORY_OVERHEAD_MB,
        "max_rss_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
    }
