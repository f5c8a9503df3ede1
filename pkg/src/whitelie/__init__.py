"""whitelie: a simulated mobile-device privacy sandbox.

Reimplements a data-spoofing system against scripted apps: per-process
dispatch tables with runtime call diversion, deceit policies resolved per
call, privacy-abuse detection with one-click mitigations, and the
side-channel / battery / latency experiments.
"""

from .detector import (
    AccessLog,
    Alert,
    DetectionRule,
    Detector,
    DetectorConfig,
    PolicyChange,
    recommend_action,
)
from .device import (
    AppProcess,
    DeviceConfig,
    DispatchTable,
    VirtualDevice,
    ZYGOTE_METHODS,
)
from .errors import SandboxError
from .hooking import HookDescriptor, HookEngine, HookHandle, MethodHookParam
from .metrics import (
    CoverageMatrix,
    EnergyLedger,
    EnergyModel,
    bench_api_overhead,
    bench_battery_saver,
    coverage_from,
    merge_coverage,
    reference_model,
)
from .model import (
    AccessLogEntry,
    ActionTaken,
    ActivityState,
    AppManifest,
    MethodId,
    PermissionKind,
)
from .policy import (
    DeceitAction,
    DeceitModule,
    DeceitPolicy,
    PolicyStore,
    SpoofPool,
    TransformKind,
    enable_deceit_everywhere,
    spoof_value,
)
from .sandbox import Sandbox

__version__ = "0.1.0"

__all__ = [
    "AccessLog",
    "AccessLogEntry",
    "ActionTaken",
    "ActivityState",
    "Alert",
    "AppManifest",
    "AppProcess",
    "CoverageMatrix",
    "DeceitAction",
    "DeceitModule",
    "DeceitPolicy",
    "DetectionRule",
    "Detector",
    "DetectorConfig",
    "DeviceConfig",
    "DispatchTable",
    "EnergyLedger",
    "EnergyModel",
    "HookDescriptor",
    "HookEngine",
    "HookHandle",
    "MethodHookParam",
    "MethodId",
    "PermissionKind",
    "PolicyChange",
    "PolicyStore",
    "Sandbox",
    "SandboxError",
    "SpoofPool",
    "TransformKind",
    "VirtualDevice",
    "ZYGOTE_METHODS",
    "bench_api_overhead",
    "bench_battery_saver",
    "coverage_from",
    "enable_deceit_everywhere",
    "merge_coverage",
    "recommend_action",
    "reference_model",
    "spoof_value",
]
