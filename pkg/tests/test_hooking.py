import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hookprops import build_sandbox, chains, make_descriptor, role_of, target_method, truth_reads
from whitelie.errors import HiddenApiDenied, UnknownHandle, UnknownMethod
from whitelie.hooking import HookDescriptor
from whitelie.model import ActionTaken, AppManifest, ClipData, PermissionKind
from whitelie.sandbox import Sandbox

CLIP = "android.content.ClipData.createFromParcel"
HIDDEN = "android.hardware.input.InputSensorInfo.<init>"


def clipboard_sandbox():
    sandbox = Sandbox(seed=1)
    process = sandbox.spawn(
        AppManifest.create("app", ["Clipboard", "Accelerometer"]), install_hooks=False
    )
    sandbox.engine.register_owner("test")
    return sandbox, process


def test_descriptor_requires_a_behavior():
    with pytest.raises(ValueError):
        HookDescriptor(target_method(), owner="x")


def test_install_routes_calls_through_hook():
    sandbox, process = clipboard_sandbox()
    sandbox.engine.install_hook(
        process,
        HookDescriptor(target_method(), owner="test", before=lambda p: p.set_result(None)),
    )
    assert sandbox.device.invoke(process, CLIP) is None
    assert sandbox.log.entries[-1].action == ActionTaken.Blocked


def test_install_unknown_method():
    sandbox, process = clipboard_sandbox()
    from whitelie.device import resolve_method

    with pytest.raises(UnknownMethod):
        resolve_method("android.nope.Class.method")


def test_hidden_install_requires_bypass():
    sandbox, process = clipboard_sandbox()
    from whitelie.device import resolve_method

    hidden = resolve_method(HIDDEN)
    descriptor = HookDescriptor(hidden, owner="test", before=lambda p: None)
    with pytest.raises(HiddenApiDenied):
        sandbox.engine.install_hook(process, descriptor)
    sandbox.engine.bypass_hidden_api("test")
    sandbox.engine.install_hook(process, descriptor)


def test_bypass_is_scoped_per_owner():
    sandbox, process = clipboard_sandbox()
    from whitelie.device import resolve_method

    sandbox.engine.register_owner("other")
    sandbox.engine.bypass_hidden_api("test")
    hidden = resolve_method(HIDDEN)
    with pytest.raises(HiddenApiDenied):
        sandbox.engine.install_hook(
            process, HookDescriptor(hidden, owner="other", before=lambda p: None)
        )


def test_install_then_uninstall_restores_baseline():
    sandbox, process = clipboard_sandbox()
    baseline = sandbox.device.invoke(process, CLIP)
    handle = sandbox.engine.install_hook(
        process,
        HookDescriptor(
            target_method(), owner="test", after=lambda p: p.set_result(ClipData("x", "y"))
        ),
    )
    assert sandbox.device.invoke(process, CLIP) == ClipData("x", "y")
    sandbox.engine.uninstall_hook(handle)
    assert sandbox.device.invoke(process, CLIP) == baseline
    assert process.table.matches_template(target_method())


def test_double_uninstall():
    sandbox, process = clipboard_sandbox()
    handle = sandbox.engine.install_hook(
        process, HookDescriptor(target_method(), owner="test", before=lambda p: None)
    )
    sandbox.engine.uninstall_hook(handle)
    with pytest.raises(UnknownHandle):
        sandbox.engine.uninstall_hook(handle)


def test_uninstall_one_of_two_keeps_other():
    sandbox, process = clipboard_sandbox()
    h1 = sandbox.engine.install_hook(
        process,
        HookDescriptor(target_method(), owner="a", after=lambda p: p.set_result(ClipData("a", "a"))),
    )
    sandbox.engine.install_hook(
        process,
        HookDescriptor(target_method(), owner="b", before=lambda p: None),
    )
    sandbox.engine.uninstall_hook(h1)
    assert sandbox.device.invoke(process, CLIP) == sandbox.device.truth.clipboard


def test_chain_order_priority_then_lifo():
    sandbox, process = clipboard_sandbox()
    order = []

    def make(tag):
        def before(param):
            order.append(tag)

        return before

    sandbox.engine.install_hook(
        process, HookDescriptor(target_method(), owner="t", before=make("low-first"), priority=0)
    )
    sandbox.engine.install_hook(
        process, HookDescriptor(target_method(), owner="t", before=make("low-second"), priority=0)
    )
    sandbox.engine.install_hook(
        process, HookDescriptor(target_method(), owner="t", before=make("high"), priority=5)
    )
    sandbox.device.invoke(process, CLIP)
    assert order == ["high", "low-second", "low-first"]


def test_short_circuit_skips_original_side_effects():
    sandbox, process = clipboard_sandbox()
    sandbox.engine.install_hook(
        process,
        HookDescriptor(target_method(), owner="t", before=lambda p: p.set_result(None)),
    )
    before = truth_reads(sandbox)
    sandbox.device.invoke(process, CLIP)
    assert truth_reads(sandbox) == before


def test_after_composition_g_of_f():
    sandbox, process = clipboard_sandbox()

    def f(param):
        param.set_result(("f", param.result))

    def g(param):
        param.set_result(("g", param.result))

    # Equal priority: chain order is [g, f]; after-hooks run reversed, f then g.
    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="t", after=f))
    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="t", after=g))
    value = sandbox.device.invoke(process, CLIP)
    assert value == ("g", ("f", sandbox.device.truth.clipboard))
    assert sandbox.log.entries[-1].action == ActionTaken.Spoofed


def test_return_early_iff_before_hook_set_result():
    sandbox, process = clipboard_sandbox()
    seen = {}

    def after(param):
        param.set_result(ClipData("new", "new"))
        seen["return_early"] = param.return_early

    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="t", after=after))
    sandbox.device.invoke(process, CLIP)
    assert seen["return_early"] is False  # after-phase set never short-circuits


def test_after_hook_replacing_with_equal_value_stays_original():
    sandbox, process = clipboard_sandbox()
    sandbox.engine.install_hook(
        process,
        HookDescriptor(target_method(), owner="t", after=lambda p: p.set_result(p.result)),
    )
    sandbox.device.invoke(process, CLIP)
    assert sandbox.log.entries[-1].action == ActionTaken.Original


def test_faulting_before_hook_falls_back_to_original():
    sandbox, process = clipboard_sandbox()

    def bomb(param):
        raise RuntimeError("boom")

    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="t", before=bomb))
    value = sandbox.device.invoke(process, CLIP)
    assert value == sandbox.device.truth.clipboard
    assert sandbox.log.entries[-1].action == ActionTaken.Original
    assert len(sandbox.engine.fault_log) == 1
    assert sandbox.engine.fault_log[0].owner == "t"
    assert process.live


def test_faulting_after_hook_returns_original_value():
    sandbox, process = clipboard_sandbox()

    def bomb(param):
        raise RuntimeError("boom")

    def replace(param):
        param.set_result(ClipData("swapped", "swapped"))

    # replace installs first, bomb second: after order is [replace, bomb];
    # replace rewrites the value, then bomb aborts the chain.
    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="r", after=replace))
    sandbox.engine.install_hook(process, HookDescriptor(target_method(), owner="b", after=bomb))
    value = sandbox.device.invoke(process, CLIP)
    assert value == sandbox.device.truth.clipboard
    assert sandbox.log.entries[-1].action == ActionTaken.Original


@settings(max_examples=120, deadline=None)
@given(chain=chains)
def test_property_chain_dispatch(chain):
    """Randomized chains: short-circuit, fault fallback, classification."""
    sandbox, process = build_sandbox()
    trace: list[str] = []
    handles = [
        sandbox.engine.install_hook(process, make_descriptor(spec, trace))
        for spec in chain
    ]
    reads_before = truth_reads(sandbox)
    value = sandbox.device.invoke(process, CLIP)
    reads_after = truth_reads(sandbox)
    entry = sandbox.log.entries[-1]

    ordered = sandbox.engine.chain_order(process.table.slot(target_method()))

    # Walk the chain the way dispatch must have.
    blocked = False
    faulted = False
    for installed in ordered:
        spec_role = role_of(installed)
        if not spec_role.startswith("before"):
            continue
        if spec_role == "before_fault":
            faulted = True
            break
        if spec_role == "before_block":
            blocked = True
            break
    if blocked and not faulted:
        assert value is None
        assert entry.action == ActionTaken.Blocked
        assert reads_after == reads_before  # original side effects skipped
    else:
        assert reads_after == reads_before + 1  # original ran exactly once

    # Uninstall everything: slot restored to template behavior.
    for handle in handles:
        sandbox.engine.uninstall_hook(handle)
    assert process.table.matches_template(target_method())
    restored = sandbox.device.invoke(process, CLIP)
    assert restored == sandbox.device.truth.clipboard
    assert sandbox.log.entries[-1].action == ActionTaken.Original

