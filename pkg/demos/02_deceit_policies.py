"""
Deceit policies
===============

Policies bind (app, permission, context) to an action: allow, block, or a
spoofing transform. Hooks resolve them per call through the query bridge,
so edits and toggles take effect on the very next invocation.
"""

from whitelie import AppManifest, PermissionKind, Sandbox
from whitelie.policy import (
    ALWAYS,
    BACKGROUND_ONLY,
    ContextCondition,
    ContextKind,
    DeceitPolicy,
    TransformKind,
    transform_action,
)
from whitelie.model import ActivityState

P = PermissionKind
LOC = "android.location.LocationManager.getLastKnownLocation"
CAM = "android.hardware.camera2.CameraDevice.captureFrame"

sandbox = Sandbox(seed=2)
app = sandbox.spawn(AppManifest.create("ride-app", ["Location", "Camera"]))

print("truth location:  ", sandbox.device.invoke(app, LOC))

# Pin the location the app sees.
sandbox.store.set_policy(
    DeceitPolicy(
        "ride-app",
        P.Location,
        transform_action(TransformKind.FixedLocation, lat=28.5459, lon=77.1926),
        context=ALWAYS,
    )
)
print("spoofed location:", sandbox.device.invoke(app, LOC))

# Blur camera frames only while the app is backgrounded.
sandbox.store.set_policy(
    DeceitPolicy(
        "ride-app",
        P.Camera,
        transform_action(TransformKind.BlurFrame, radius=4),
        context=BACKGROUND_ONLY,
    )
)
sandbox.device.set_activity_state(app, ActivityState.Foreground)
fg_frame = sandbox.device.invoke(app, CAM)
sandbox.device.set_activity_state(app, ActivityState.Background)
bg_frame = sandbox.device.invoke(app, CAM)
print(f"foreground frame variance {fg_frame.var():8.1f} (sharp)")
print(f"background frame variance {bg_frame.var():8.1f} (blurred)")

# A manual toggle gates deceiving when context alone cannot decide.
toggle = ContextCondition(ContextKind.ManualToggle, "deceive-ride-app")
sandbox.store.set_policy(
    DeceitPolicy(
        "ride-app",
        P.Location,
        transform_action(TransformKind.FixedLocation, lat=0.0, lon=0.0),
        context=toggle,
    )
)
sandbox.store.set_toggle("deceive-ride-app", True)
print("toggle on: ", sandbox.device.invoke(app, LOC))
sandbox.store.set_toggle("deceive-ride-app", False)
print("toggle off:", sandbox.device.invoke(app, LOC))

print("policy store version:", sandbox.store.version)
print("actions logged:", [e.action.value for e in sandbox.log.entries])
