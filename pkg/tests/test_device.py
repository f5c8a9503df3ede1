import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from whitelie.device import (
    DeviceConfig,
    TOUCH_WINDOW_MS,
    VirtualDevice,
    ZYGOTE_METHODS,
    resolve_method,
)
from whitelie.errors import (
    DuplicateAppId,
    ForegroundConflict,
    OutOfGrid,
    PermissionDenied,
    UnknownProcess,
)
from whitelie.hooking import HookDescriptor
from whitelie.model import (
    ActionTaken,
    ActivityState,
    AppManifest,
    PermissionKind,
)
from whitelie.sandbox import Sandbox

LOC = "android.location.LocationManager.getLastKnownLocation"
ACCEL = "android.hardware.SensorManager.readAccelerometer"
AUDIO = "android.media.AudioRecord.read"
RECORDER = "android.media.MediaRecorder.record"
CLIP = "android.content.ClipData.createFromParcel"


def manifest(app_id="app", perms=("Location", "Accelerometer", "Microphone", "Clipboard")):
    return AppManifest.create(app_id, perms)


def test_permission_classification_total():
    normal = {p for p in PermissionKind if p.is_normal}
    assert normal == {
        PermissionKind.Accelerometer,
        PermissionKind.Gyroscope,
        PermissionKind.Magnetometer,
        PermissionKind.Light,
        PermissionKind.Tracking,
    }
    for p in PermissionKind:
        assert p.is_normal != p.is_dangerous


def test_exactly_one_indicator_bypass_method():
    bypassing = [m for m in ZYGOTE_METHODS if not m.indicator_setting]
    assert len(bypassing) == 1
    assert bypassing[0].qualified == RECORDER
    assert bypassing[0].permission == PermissionKind.Microphone


def test_spawn_manifest_echo():
    device = VirtualDevice()
    process = device.spawn_process(AppManifest.create("uber", ["Location", "Internet"]))
    assert process.state == ActivityState.Background
    assert device.invoke(process, LOC) is not None
    assert device.invoke(process, "java.net.HttpURLConnection.send", {"bytes": 10})


def test_spawn_duplicate_app_id():
    device = VirtualDevice()
    device.spawn_process(manifest("a"))
    with pytest.raises(DuplicateAppId):
        device.spawn_process(manifest("a"))


def test_spawn_fires_process_created_event():
    device = VirtualDevice()
    created = []
    device.on_spawn(created.append)
    process = device.spawn_process(manifest("a"))
    assert created == [process]


def test_tables_are_independent_copies():
    sandbox = Sandbox()
    p1 = sandbox.spawn(manifest("a"), install_hooks=False)
    p2 = sandbox.spawn(manifest("b"), install_hooks=False)
    target = resolve_method(CLIP)
    sandbox.engine.install_hook(
        p1, HookDescriptor(target, owner="t", before=lambda param: None)
    )
    assert p1.table.slot(target).hook_chain
    assert not p2.table.slot(target).hook_chain
    for method in ZYGOTE_METHODS:
        assert p2.table.matches_template(method)


def test_invoke_unknown_permission_denied():
    device = VirtualDevice()
    process = device.spawn_process(AppManifest.create("a", ["Location"]))
    with pytest.raises(PermissionDenied):
        device.invoke(process, ACCEL)


def test_permission_denied_emits_no_log_entry():
    sandbox = Sandbox()
    process = sandbox.spawn(AppManifest.create("a", ["Location"]))
    with pytest.raises(PermissionDenied):
        sandbox.device.invoke(process, ACCEL)
    assert sandbox.log.entries == []


def test_every_guarded_invoke_logs_exactly_one_entry():
    sandbox = Sandbox()
    process = sandbox.spawn(manifest("a"))
    for method in (LOC, ACCEL, AUDIO, CLIP):
        sandbox.device.invoke(process, method)
    assert [e.seq for e in sandbox.log.entries] == [1, 2, 3, 4]
    assert all(e.action == ActionTaken.Original for e in sandbox.log.entries)


def test_recorder_path_returns_audio_without_indicator():
    sandbox = Sandbox()
    process = sandbox.spawn(manifest("fb"))
    chunk = sandbox.device.invoke(process, RECORDER)
    assert isinstance(chunk, np.ndarray) and chunk.dtype == np.int16
    entry = sandbox.log.entries[-1]
    assert entry.permission == PermissionKind.Microphone
    assert entry.indicator_shown is False
    # The session existed, but no indicator transition was recorded.
    assert sandbox.device.session_history[-1][3] is False
    assert all(perm != PermissionKind.Microphone for _, perm, _ in sandbox.device.indicator_events)
    assert PermissionKind.Microphone not in sandbox.device.active_indicators


def test_indicator_lights_for_regular_audio_read():
    sandbox = Sandbox()
    process = sandbox.spawn(manifest("fb"))
    observed = []

    def spy(param):
        observed.append(set(sandbox.device.active_indicators))

    sandbox.engine.register_owner("spy")
    sandbox.engine.install_hook(
        process, HookDescriptor(resolve_method(AUDIO), owner="spy", after=spy)
    )
    sandbox.device.invoke(process, AUDIO)
    entry = sandbox.log.entries[-1]
    assert entry.indicator_shown is True
    events = [
        (perm, on) for _, perm, on in sandbox.device.indicator_events
        if perm == PermissionKind.Microphone
    ]
    assert events == [(PermissionKind.Microphone, True), (PermissionKind.Microphone, False)]
    assert PermissionKind.Microphone not in sandbox.device.active_indicators


def test_state_transitions_reflected_in_log():
    sandbox = Sandbox()
    process = sandbox.spawn(manifest("a"))
    sandbox.device.set_activity_state(process, ActivityState.Foreground)
    sandbox.device.invoke(process, LOC)
    sandbox.device.set_activity_state(process, ActivityState.Background)
    sandbox.device.invoke(process, LOC)
    states = [e.state for e in sandbox.log.entries]
    assert states == [ActivityState.Foreground, ActivityState.Background]


def test_stopped_process_cannot_invoke():
    device = VirtualDevice()
    process = device.spawn_process(manifest("a"))
    device.set_activity_state(process, ActivityState.Stopped)
    with pytest.raises(UnknownProcess):
        device.invoke(process, LOC)


def test_single_foreground_invariant():
    device = VirtualDevice()
    p1 = device.spawn_process(manifest("a"))
    p2 = device.spawn_process(manifest("b"))
    device.set_activity_state(p1, ActivityState.Foreground)
    with pytest.raises(ForegroundConflict):
        device.set_activity_state(p2, ActivityState.Foreground)
    device.set_activity_state(p1, ActivityState.Background)
    device.set_activity_state(p2, ActivityState.Foreground)
    assert device.foreground_app == "b"


@given(
    transitions=st.lists(
        st.tuples(st.integers(0, 3), st.sampled_from(["Foreground", "Background"])),
        max_size=25,
    )
)
@settings(max_examples=60, deadline=None)
def test_property_at_most_one_foreground(transitions):
    device = VirtualDevice()
    processes = [device.spawn_process(manifest(f"app{i}")) for i in range(4)]
    for index, state in transitions:
        try:
            device.set_activity_state(processes[index], ActivityState(state))
        except ForegroundConflict:
            pass
        foreground = [p for p in processes if p.state == ActivityState.Foreground]
        assert len(foreground) <= 1


def test_touch_out_of_grid():
    device = VirtualDevice()
    with pytest.raises(OutOfGrid):
        device.inject_touch((3, 0))


def test_touch_shifts_sensor_mean():
    device = VirtualDevice(DeviceConfig(seed=5))
    process = device.spawn_process(manifest("a"))
    cell = (0, 0)
    device.inject_touch(cell, at=0)
    samples = []
    for _ in range(12):
        r = device.invoke(process, ACCEL)
        samples.append([r.x, r.y, r.z])
        device.advance(10)
    mean = np.array(samples).mean(axis=0)
    signature = device.cell_signature(cell)
    # Noise on a 12-sample mean stays well under 0.3 per axis.
    assert np.all(np.abs(mean - signature) < 0.3)


def test_no_touch_baseline_zero_mean():
    device = VirtualDevice(DeviceConfig(seed=6))
    process = device.spawn_process(manifest("a"))
    samples = []
    for _ in range(200):
        r = device.invoke(process, ACCEL)
        samples.append([r.x, r.y, r.z])
        device.advance(10)
    mean = np.array(samples).mean(axis=0)
    assert np.all(np.abs(mean) < 0.1)


def test_touch_window_expires():
    device = VirtualDevice(DeviceConfig(seed=7))
    process = device.spawn_process(manifest("a"))
    device.inject_touch((2, 2), at=0)
    device.advance(TOUCH_WINDOW_MS + 10)
    samples = []
    for _ in range(50):
        r = device.invoke(process, ACCEL)
        samples.append([r.x, r.y, r.z])
        device.advance(10)
    assert np.all(np.abs(np.array(samples).mean(axis=0)) < 0.2)


def test_clock_never_goes_backwards():
    device = VirtualDevice()
    device.advance_to(100)
    with pytest.raises(ValueError):
        device.advance_to(50)
    with pytest.raises(ValueError):
        device.advance(-1)


def test_replay_same_seed_identical_log_stream():
    def run():
        sandbox = Sandbox(seed=42)
        process = sandbox.spawn(manifest("a"))
        for method in (LOC, ACCEL, AUDIO, CLIP, ACCEL):
            sandbox.device.invoke(process, method)
            sandbox.device.advance(10)
        return sandbox.log.export_jsonl(), [
            tuple(x) for x in np.array(
                [sandbox.device.truth.noise() for _ in range(3)]
            )
        ]

    first, noise1 = run()
    second, noise2 = run()
    assert first == second
    assert noise1 == noise2
