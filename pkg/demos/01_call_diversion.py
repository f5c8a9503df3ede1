"""
Call diversion basics
=====================

Every simulated app process gets its own dispatch table, copied from the
pristine template at spawn. Installing a hook rewrites one slot; the app's
next call routes through the hook chain instead of the original behavior.
"""

from whitelie import AppManifest, HookDescriptor, Sandbox
from whitelie.device import resolve_method
from whitelie.model import ClipData

CLIP = "android.content.ClipData.createFromParcel"

sandbox = Sandbox(seed=1)
app = sandbox.spawn(AppManifest.create("notes-app", ["Clipboard"]), install_hooks=False)

# Unhooked: the call lands on ground truth.
print("unhooked:", sandbox.device.invoke(app, CLIP))

# A before-hook that sets a result short-circuits the original entirely —
# the truth source is never read.
sandbox.engine.register_owner("demo")
blocker = sandbox.engine.install_hook(
    app,
    HookDescriptor(resolve_method(CLIP), owner="demo", before=lambda p: p.set_result(None)),
)
print("blocked: ", sandbox.device.invoke(app, CLIP))
print("truth reads so far:", sandbox.device.truth.access_counts)

# Swap blocking for rewriting: the original runs, the after-hook replaces
# its return value on the way out.
sandbox.engine.uninstall_hook(blocker)
sandbox.engine.install_hook(
    app,
    HookDescriptor(
        resolve_method(CLIP),
        owner="demo",
        after=lambda p: p.set_result(ClipData("dummyLabel", "dummyText")),
    ),
)
print("spoofed: ", sandbox.device.invoke(app, CLIP))

# A hook that throws never crashes the app; the call falls back to the
# original path and the fault is recorded.
def bomb(param):
    raise RuntimeError("misbehaving module")

sandbox.engine.install_hook(
    app, HookDescriptor(resolve_method(CLIP), owner="demo", before=bomb, priority=10)
)
print("fault fallback:", sandbox.device.invoke(app, CLIP))
print("faults:", [f.cause for f in sandbox.engine.fault_log])

# The access log recorded one entry per call, with the action taken.
for entry in sandbox.log.entries:
    print(f"  log #{entry.seq} {entry.method.method_name}: {entry.action.value}")
