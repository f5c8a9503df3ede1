"""The simulated device: app processes with per-process dispatch tables,
permission-guarded resource APIs backed by seeded ground-truth sources, an
activity manager with a single foreground slot, privacy indicators, and a
virtual clock.

Every resource API is a slot in a process's dispatch table, copied at spawn
from the pristine template. Calls route through the slot: an empty hook
chain runs the original behavior against ground truth; a non-empty chain is
delegated to the installed dispatcher (the hooking engine). Each
permission-guarded call emits exactly one access-log entry.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

import numpy as np

from .errors import (
    DuplicateAppId,
    ForegroundConflict,
    OutOfGrid,
    PermissionDenied,
    UnknownMethod,
    UnknownProcess,
)
from .model import (
    INDICATOR_PERMISSIONS,
    AccessLogEntry,
    ActionTaken,
    ActivityState,
    AppManifest,
    CalendarEvent,
    ClipData,
    Contact,
    InteractionKind,
    LocationFix,
    MethodId,
    PermissionKind,
    SensorInfo,
    SensorReading,
    SmsMessage,
    UserInteractionEvent,
)

# Touch-perturbation signal model. A touch adds a cell-specific unit vector
# (amplitude 1.0 on accelerometer axes, 0.6 on gyroscope axes) to sensor
# readings for a 120 ms window; baseline is zero-mean Gaussian noise.
TOUCH_WINDOW_MS = 120
TOUCH_SAMPLE_HZ = 100
SENSOR_NOISE_SIGMA = 0.25
ACCEL_TOUCH_AMPLITUDE = 1.0
GYRO_TOUCH_AMPLITUDE = 0.6

CAMERA_FRAME_SHAPE = (64, 64)  # 8-bit grayscale
AUDIO_CHUNK_SAMPLES = 1024  # int16 PCM

_P = PermissionKind

# The pristine method table every process table is copied from.
ZYGOTE_METHODS: tuple[MethodId, ...] = (
    MethodId("android.location.LocationManager", "getLastKnownLocation", _P.Location),
    MethodId("android.hardware.SensorManager", "readAccelerometer", _P.Accelerometer),
    MethodId("android.hardware.SensorManager", "readGyroscope", _P.Gyroscope),
    MethodId("android.hardware.SensorManager", "readMagnetometer", _P.Magnetometer),
    MethodId("android.hardware.SensorManager", "readLight", _P.Light),
    MethodId("android.hardware.input.InputSensorInfo", "<init>", _P.Accelerometer, hidden=True),
    MethodId("android.media.AudioRecord", "read", _P.Microphone),
    # Recorder path that never lights the green dot (the indicator anomaly).
    MethodId("android.media.MediaRecorder", "record", _P.Microphone, indicator_setting=False),
    MethodId("android.hardware.camera2.CameraDevice", "captureFrame", _P.Camera),
    MethodId("android.provider.ContactsContract", "queryContacts", _P.Contacts),
    MethodId("android.content.ClipData", "createFromParcel", _P.Clipboard),
    MethodId("android.provider.Telephony", "querySmsInbox", _P.SmsRead),
    MethodId("android.telephony.SmsManager", "sendTextMessage", _P.SmsSend),
    MethodId("android.provider.CalendarContract", "queryEvents", _P.Calendar),
    MethodId("android.os.storage.StorageManager", "readFile", _P.Storage),
    MethodId("java.net.HttpURLConnection", "send", _P.Internet),
    MethodId("android.telephony.TelephonyManager", "getDeviceId", _P.DeviceInfo),
    MethodId(
        "com.google.android.gms.ads.identifier.AdvertisingIdClient",
        "getAdvertisingIdInfo",
        _P.Tracking,
    ),
)

METHODS_BY_NAME: dict[str, MethodId] = {m.qualified: m for m in ZYGOTE_METHODS}

METHODS_BY_PERMISSION: dict[PermissionKind, tuple[MethodId, ...]] = {
    perm: tuple(m for m in ZYGOTE_METHODS if m.permission == perm)
    for perm in PermissionKind
}


def resolve_method(method: MethodId | str) -> MethodId:
    if isinstance(method, MethodId):
        return method
    found = METHODS_BY_NAME.get(method)
    if found is None:
        raise UnknownMethod(method)
    return found


@dataclass
class FunctionSlot:
    """One dispatch-table entry: the original behavior plus its hook chain."""

    original_target: str  # behavior key, resolved in _BEHAVIORS
    hook_chain: list[Any] = field(default_factory=list)

    def copy(self) -> "FunctionSlot":
        return FunctionSlot(self.original_target, list(self.hook_chain))


class DispatchTable:
    """Per-process method-slot table. Fresh tables are structural copies of
    the template; no slot state is shared between processes."""

    def __init__(self, slots: dict[MethodId, FunctionSlot]):
        self.slots = slots

    @staticmethod
    def from_template() -> "DispatchTable":
        return DispatchTable(
            {m: FunctionSlot(original_target=m.qualified) for m in ZYGOTE_METHODS}
        )

    def slot(self, method: MethodId) -> FunctionSlot:
        try:
            return self.slots[method]
        except KeyError:
            raise UnknownMethod(method.qualified) from None

    def matches_template(self, method: MethodId) -> bool:
        slot = self.slot(method)
        return slot.original_target == method.qualified and not slot.hook_chain


@dataclass
class AppProcess:
    app_id: str
    manifest: AppManifest
    state: ActivityState
    table: DispatchTable
    script_handle: str = ""

    @property
    def live(self) -> bool:
        return self.state != ActivityState.Stopped


@dataclass(frozen=True)
class DeviceConfig:
    seed: int = 0
    grid: tuple[int, int] = (3, 3)
    location: tuple[float, float] = (12.9716, 77.5946)
    clipboard: tuple[str, str] = ("truth-label", "s3cret token 9911")
    contact_count: int = 20
    # Per-axis accelerometer bias modeling the device holder's behavioral
    # signature; None means an unbiased device.
    profile_seed: int | None = None


_FIRST_NAMES = (
    "Asha", "Bilal", "Chitra", "Dev", "Esha", "Farhan", "Gita", "Hari",
    "Indira", "Jai", "Kavya", "Lakshmi", "Mohan", "Nisha", "Om", "Priya",
    "Qasim", "Ravi", "Sita", "Tarun",
)
_LAST_NAMES = (
    "Agarwal", "Bose", "Chopra", "Das", "Elangovan", "Fernandes", "Gupta",
    "Hegde", "Iyer", "Joshi",
)


def generate_contacts(count: int, seed: int, number_prefix: str = "+91-98") -> list[Contact]:
    """Deterministic synthetic contact book; prefixes keep truth and spoof
    pools disjoint."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        first = _FIRST_NAMES[int(rng.integers(len(_FIRST_NAMES)))]
        last = _LAST_NAMES[int(rng.integers(len(_LAST_NAMES)))]
        number = f"{number_prefix}{int(rng.integers(10**7)):07d}"
        out.append(Contact(name=f"{first} {last} {i:02d}", number=number))
    return out


class TruthSources:
    """Ground-truth data sources, all derived from one seeded stream.

    Reads are counted per permission so tests can prove a blocked call never
    touched the truth (block soundness).
    """

    def __init__(self, cfg: DeviceConfig):
        self._rng = np.random.default_rng(cfg.seed)
        self.location = LocationFix(*cfg.location)
        self.clipboard = ClipData(*cfg.clipboard)
        self.contacts = generate_contacts(cfg.contact_count, seed=cfg.seed + 1)
        self.sms_inbox = [
            SmsMessage(sender="+91-9810000001", body="OTP 4321 do not share"),
            SmsMessage(sender="SPAM-PROMO", body="You won a prize, click now"),
            SmsMessage(sender="+91-9810000002", body="Lunch at noon?"),
        ]
        self.calendar = [
            CalendarEvent("Dentist", "Clinic A", 9 * 3600_000, 10 * 3600_000),
            CalendarEvent("Board meeting", "HQ floor 4", 14 * 3600_000, 15 * 3600_000),
        ]
        self.files: dict[str, bytes] = {
            "/sdcard/docs/scan1.pdf": bytes(self._rng.integers(0, 256, 4096, dtype=np.uint8)),
            "/sdcard/notes/todo.txt": b"buy milk\ncall plumber\n",
        }
        self.device_id = "358240051111110"
        self.ad_id = "ad-" + "".join(f"{b:02x}" for b in self._rng.integers(0, 256, 8, dtype=np.uint8))
        if cfg.profile_seed is None:
            self.profile_bias = np.zeros(3)
        else:
            self.profile_bias = np.random.default_rng(cfg.profile_seed).normal(0.0, 1.0, 3)

        self.access_counts: Counter[PermissionKind] = Counter()
        self.net_sent_bytes = 0
        self.net_sends: list[tuple[str, int]] = []  # (app_id, bytes)
        self.sms_outbox: list[tuple[str, str, str]] = []  # (app_id, to, body)

    def count(self, permission: PermissionKind) -> None:
        self.access_counts[permission] += 1

    def noise(self, n: int = 3, sigma: float = SENSOR_NOISE_SIGMA) -> np.ndarray:
        return self._rng.normal(0.0, sigma, n)

    def camera_frame(self) -> np.ndarray:
        return self._rng.integers(0, 256, CAMERA_FRAME_SHAPE, dtype=np.uint8)

    def mic_chunk(self) -> np.ndarray:
        return self._rng.integers(-2000, 2000, AUDIO_CHUNK_SAMPLES, dtype=np.int16)


class Dispatcher(Protocol):
    """Installed by the hooking module; handles calls whose slot has hooks."""

    def dispatch(
        self,
        process: AppProcess,
        method: MethodId,
        args: dict[str, Any],
        run_original: Callable[[], Any],
    ) -> tuple[Any, ActionTaken]: ...


class EnergyAccount(Protocol):
    def charge_resource(self, app_id: str, permission: PermissionKind) -> None: ...
    def charge_hook(self, app_id: str, permission: PermissionKind) -> None: ...
    def credit_block(self, app_id: str, permission: PermissionKind) -> None: ...


class VirtualDevice:
    """Single logical owner of truth state and the virtual clock."""

    def __init__(self, config: DeviceConfig | None = None):
        self.config = config or DeviceConfig()
        self.truth = TruthSources(self.config)
        self.clock_ms = 0
        self.touch_grid = self.config.grid
        self.processes: dict[str, AppProcess] = {}
        self.interaction_log: list[UserInteractionEvent] = []
        self.state_transitions: list[tuple[int, str, ActivityState]] = []
        self.active_indicators: set[PermissionKind] = set()
        self.indicator_events: list[tuple[int, PermissionKind, bool]] = []
        # Currently-open resource sessions: (app_id, method). A session is
        # live while the original behavior of an indicator-class resource
        # (microphone, camera) executes.
        self.open_sessions: list[tuple[str, MethodId]] = []
        self.session_history: list[tuple[int, str, str, bool]] = []
        self._touch_windows: list[tuple[int, tuple[int, int]]] = []
        self._next_seq = 1
        self._spawn_listeners: list[Callable[[AppProcess], None]] = []
        self.log_sink: Callable[[AccessLogEntry], None] | None = None
        self.dispatcher: Dispatcher | None = None
        self.energy: EnergyAccount | None = None
        self.measure_latency = False
        # Per-call scratch, reset by invoke().
        self._call_net_bytes = 0
        self._call_indicator_shown = False

    # --- clock ------------------------------------------------------------

    def advance(self, ms: int) -> None:
        if ms < 0:
            raise ValueError("virtual time is non-decreasing")
        self.clock_ms += ms

    def advance_to(self, t_ms: int) -> None:
        if t_ms < self.clock_ms:
            raise ValueError("virtual time is non-decreasing")
        self.clock_ms = t_ms

    # --- process lifecycle --------------------------------------------------

    def on_spawn(self, listener: Callable[[AppProcess], None]) -> None:
        self._spawn_listeners.append(listener)

    def spawn_process(self, manifest: AppManifest, script_handle: str = "") -> AppProcess:
        existing = self.processes.get(manifest.app_id)
        if existing is not None and existing.live:
            raise DuplicateAppId(manifest.app_id)
        process = AppProcess(
            app_id=manifest.app_id,
            manifest=manifest,
            state=ActivityState.Background,
            table=DispatchTable.from_template(),
            script_handle=script_handle,
        )
        self.processes[manifest.app_id] = process
        self.state_transitions.append((self.clock_ms, process.app_id, process.state))
        for listener in self._spawn_listeners:
            listener(process)
        return process

    @property
    def foreground_app(self) -> str | None:
        for p in self.processes.values():
            if p.state == ActivityState.Foreground:
                return p.app_id
        return None

    def set_activity_state(self, process: AppProcess, state: ActivityState) -> None:
        if not process.live and state != ActivityState.Stopped:
            raise UnknownProcess(process.app_id)
        if state == ActivityState.Foreground:
            holder = self.foreground_app
            if holder is not None and holder != process.app_id:
                raise ForegroundConflict(f"{holder} is already foreground")
        process.state = state
        self.state_transitions.append((self.clock_ms, process.app_id, state))

    # --- user interaction ----------------------------------------------------

    def inject_touch(self, cell: tuple[int, int], at: int | None = None) -> None:
        """Screen touch on the foreground app; perturbs the sensor stream for
        the touch window."""
        rows, cols = self.touch_grid
        r, c = cell
        if not (0 <= r < rows and 0 <= c < cols):
            raise OutOfGrid(f"cell {cell} outside {rows}x{cols} grid")
        if at is not None:
            self.advance_to(at)
        app = self.foreground_app or "device"
        self._record_interaction(app, InteractionKind.Touch, cell)

    def emit_interaction(
        self,
        process: AppProcess,
        kind: InteractionKind,
        cell: tuple[int, int] | None = None,
    ) -> None:
        if kind == InteractionKind.Touch:
            if cell is None:
                raise ValueError("Touch interaction requires a cell")
            rows, cols = self.touch_grid
            if not (0 <= cell[0] < rows and 0 <= cell[1] < cols):
                raise OutOfGrid(f"cell {cell} outside {rows}x{cols} grid")
        self._record_interaction(process.app_id, kind, cell)

    def _record_interaction(
        self, app_id: str, kind: InteractionKind, cell: tuple[int, int] | None
    ) -> None:
        self.interaction_log.append(
            UserInteractionEvent(t=self.clock_ms, app_id=app_id, kind=kind, cell=cell)
        )
        if kind == InteractionKind.Touch and cell is not None:
            self._touch_windows.append((self.clock_ms, cell))

    def cell_signature(self, cell: tuple[int, int]) -> np.ndarray:
        """Fixed unit vector for one grid cell."""
        rows, cols = self.touch_grid
        v = np.array(
            [cell[0] - (rows - 1) / 2.0, cell[1] - (cols - 1) / 2.0, 1.0]
        )
        return v / np.linalg.norm(v)

    def _touch_component(self) -> np.ndarray:
        t = self.clock_ms
        self._touch_windows = [
            (t0, cell) for t0, cell in self._touch_windows if t - t0 < TOUCH_WINDOW_MS * 4
        ]
        total = np.zeros(3)
        for t0, cell in self._touch_windows:
            if 0 <= t - t0 < TOUCH_WINDOW_MS:
                total += self.cell_signature(cell)
        return total

    # --- invocation -----------------------------------------------------------

    def invoke(
        self, process: AppProcess, method: MethodId | str, args: dict[str, Any] | None = None
    ) -> Any:
        """Call a resource API through the process's dispatch table.

        Follows the slot: empty hook chain runs the original behavior;
        otherwise the installed dispatcher takes over. Emits exactly one
        access-log entry whatever the hooks decide.
        """
        if not process.live:
            raise UnknownProcess(process.app_id)
        method = resolve_method(method)
        slot = process.table.slot(method)
        if method.permission not in process.manifest.permissions:
            raise PermissionDenied(process.app_id, method.permission.value)
        args = args or {}
        self._call_net_bytes = 0
        self._call_indicator_shown = False

        def run_original() -> Any:
            return self._run_original(process, method, args, slot)

        started = time.perf_counter_ns() if self.measure_latency else 0
        if slot.hook_chain and self.dispatcher is not None:
            if self.energy is not None:
                self.energy.charge_hook(process.app_id, method.permission)
            value, action = self.dispatcher.dispatch(process, method, args, run_original)
            if action == ActionTaken.Blocked and self.energy is not None:
                self.energy.credit_block(process.app_id, method.permission)
        else:
            value = run_original()
            action = ActionTaken.Original
        latency = (time.perf_counter_ns() - started) if self.measure_latency else 0

        entry = AccessLogEntry(
            seq=self._next_seq,
            t=self.clock_ms,
            app_id=process.app_id,
            permission=method.permission,
            method=method,
            state=process.state,
            action=action,
            latency_ns=latency,
            bytes=self._call_net_bytes,
            indicator_shown=self._call_indicator_shown,
        )
        self._next_seq += 1
        if self.log_sink is not None:
            self.log_sink(entry)
        return value

    def _run_original(
        self,
        process: AppProcess,
        method: MethodId,
        args: dict[str, Any],
        slot: FunctionSlot,
    ) -> Any:
        behavior = _BEHAVIORS.get(slot.original_target)
        if behavior is None:
            raise UnknownMethod(slot.original_target)
        if self.energy is not None:
            self.energy.charge_resource(process.app_id, method.permission)
        indicator = method.permission in INDICATOR_PERMISSIONS
        if indicator:
            self.open_sessions.append((process.app_id, method))
            self.session_history.append(
                (self.clock_ms, process.app_id, method.qualified, method.indicator_setting)
            )
            if method.indicator_setting:
                self.active_indicators.add(method.permission)
                self.indicator_events.append((self.clock_ms, method.permission, True))
                self._call_indicator_shown = True
        try:
            return behavior(self, process, args)
        finally:
            if indicator:
                self.open_sessions.remove((process.app_id, method))
                if method.indicator_setting and not any(
                    m.permission == method.permission and m.indicator_setting
                    for _, m in self.open_sessions
                ):
                    self.active_indicators.discard(method.permission)
                    self.indicator_events.append((self.clock_ms, method.permission, False))


# --- original behaviors -------------------------------------------------------

Behavior = Callable[[VirtualDevice, AppProcess, dict[str, Any]], Any]


def _read_sensor_axes(device: VirtualDevice, amplitude: float, bias: np.ndarray) -> SensorReading:
    sample = bias + amplitude * device._touch_component() + device.truth.noise()
    return SensorReading(*(float(v) for v in sample))


def _b_location(device: VirtualDevice, process: AppProcess, args: dict) -> LocationFix:
    device.truth.count(PermissionKind.Location)
    return device.truth.location


def _b_accel(device: VirtualDevice, process: AppProcess, args: dict) -> SensorReading:
    device.truth.count(PermissionKind.Accelerometer)
    return _read_sensor_axes(device, ACCEL_TOUCH_AMPLITUDE, device.truth.profile_bias)


def _b_gyro(device: VirtualDevice, process: AppProcess, args: dict) -> SensorReading:
    device.truth.count(PermissionKind.Gyroscope)
    return _read_sensor_axes(device, GYRO_TOUCH_AMPLITUDE, np.zeros(3))


_EARTH_FIELD = np.array([22.0, 5.0, -42.0])  # microtesla


def _b_magnet(device: VirtualDevice, process: AppProcess, args: dict) -> SensorReading:
    device.truth.count(PermissionKind.Magnetometer)
    sample = _EARTH_FIELD + device.truth.noise()
    return SensorReading(*(float(v) for v in sample))


def _b_light(device: VirtualDevice, process: AppProcess, args: dict) -> float:
    device.truth.count(PermissionKind.Light)
    return float(300.0 + device.truth.noise(1, sigma=5.0)[0])


def _b_sensor_info(device: VirtualDevice, process: AppProcess, args: dict) -> SensorInfo:
    device.truth.count(PermissionKind.Accelerometer)
    return SensorInfo(name="lsm6dso-accel", vendor="STMicro", resolution=0.0024)


def _b_audio_read(device: VirtualDevice, process: AppProcess, args: dict) -> np.ndarray:
    device.truth.count(PermissionKind.Microphone)
    return device.truth.mic_chunk()


def _b_camera(device: VirtualDevice, process: AppProcess, args: dict) -> np.ndarray:
    device.truth.count(PermissionKind.Camera)
    return device.truth.camera_frame()


def _b_contacts(device: VirtualDevice, process: AppProcess, args: dict) -> list[Contact]:
    device.truth.count(PermissionKind.Contacts)
    return list(device.truth.contacts)


def _b_clipboard(device: VirtualDevice, process: AppProcess, args: dict) -> ClipData:
    device.truth.count(PermissionKind.Clipboard)
    return device.truth.clipboard


def _b_sms_inbox(device: VirtualDevice, process: AppProcess, args: dict) -> list[SmsMessage]:
    device.truth.count(PermissionKind.SmsRead)
    return list(device.truth.sms_inbox)


def _b_sms_send(device: VirtualDevice, process: AppProcess, args: dict) -> dict[str, str]:
    device.truth.count(PermissionKind.SmsSend)
    to = str(args.get("to", ""))
    body = str(args.get("body", ""))
    device.truth.sms_outbox.append((process.app_id, to, body))
    return {"to": to, "status": "sent"}


def _b_calendar(device: VirtualDevice, process: AppProcess, args: dict) -> list[CalendarEvent]:
    device.truth.count(PermissionKind.Calendar)
    return list(device.truth.calendar)


def _b_read_file(device: VirtualDevice, process: AppProcess, args: dict) -> bytes:
    device.truth.count(PermissionKind.Storage)
    path = str(args.get("path", ""))
    blob = device.truth.files.get(path)
    if blob is None:
        raise FileNotFoundError(path)
    return blob


def _b_net_send(device: VirtualDevice, process: AppProcess, args: dict) -> dict[str, Any]:
    device.truth.count(PermissionKind.Internet)
    n = int(args.get("bytes", 0))
    device.truth.net_sent_bytes += n
    device.truth.net_sends.append((process.app_id, n))
    device._call_net_bytes = n
    return {"status": "ok", "bytes": n}


def _b_device_id(device: VirtualDevice, process: AppProcess, args: dict) -> str:
    device.truth.count(PermissionKind.DeviceInfo)
    return device.truth.device_id


def _b_ad_id(device: VirtualDevice, process: AppProcess, args: dict) -> str:
    device.truth.count(PermissionKind.Tracking)
    return device.truth.ad_id


_BEHAVIORS: dict[str, Behavior] = {
    "android.location.LocationManager.getLastKnownLocation": _b_location,
    "android.hardware.SensorManager.readAccelerometer": _b_accel,
    "android.hardware.SensorManager.readGyroscope": _b_gyro,
    "android.hardware.SensorManager.readMagnetometer": _b_magnet,
    "android.hardware.SensorManager.readLight": _b_light,
    "android.hardware.input.InputSensorInfo.<init>": _b_sensor_info,
    "android.media.AudioRecord.read": _b_audio_read,
    "android.media.MediaRecorder.record": _b_audio_read,
    "android.hardware.camera2.CameraDevice.captureFrame": _b_camera,
    "android.provider.ContactsContract.queryContacts": _b_contacts,
    "android.content.ClipData.createFromParcel": _b_clipboard,
    "android.provider.Telephony.querySmsInbox": _b_sms_inbox,
    "android.telephony.SmsManager.sendTextMessage": _b_sms_send,
    "android.provider.CalendarContract.queryEvents": _b_calendar,
    "android.os.storage.StorageManager.readFile": _b_read_file,
    "java.net.HttpURLConnection.send": _b_net_send,
    "android.telephony.TelephonyManager.getDeviceId": _b_device_id,
    "com.google.android.gms.ads.identifier.AdvertisingIdClient.getAdvertisingIdInfo": _b_ad_id,
}
