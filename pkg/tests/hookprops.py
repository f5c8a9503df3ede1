"""Shared machinery for randomized hook-chain properties.

Builds arbitrary chains of before/after hooks (pass-through, blocking,
replacing, faulting) over a real device slot, tracking side effects through
the truth-access counter so short-circuit claims are observable.
"""

from __future__ import annotations

from dataclasses import dataclass

from hypothesis import strategies as st

from whitelie.hooking import HookDescriptor
from whitelie.model import AppManifest, PermissionKind
from whitelie.sandbox import Sandbox

TARGET = "android.content.ClipData.createFromParcel"


@dataclass(frozen=True)
class HookSpec:
    role: str  # before_pass | before_block | after_pass | after_replace | before_fault | after_fault
    priority: int
    tag: str


hook_specs = st.builds(
    HookSpec,
    role=st.sampled_from(
        ["before_pass", "before_block", "after_pass", "after_replace", "before_fault", "after_fault"]
    ),
    priority=st.integers(min_value=-2, max_value=2),
    tag=st.text(alphabet="abcdef", min_size=1, max_size=3),
)

chains = st.lists(hook_specs, min_size=0, max_size=6)


def build_sandbox() -> tuple[Sandbox, object]:
    sandbox = Sandbox(seed=99)
    process = sandbox.spawn(
        AppManifest.create("prop-app", ["Clipboard"]), install_hooks=False
    )
    return sandbox, process


def make_descriptor(spec: HookSpec, trace: list[str]) -> HookDescriptor:
    def before_pass(param):
        trace.append(f"b:{spec.tag}")

    def before_block(param):
        trace.append(f"B:{spec.tag}")
        param.set_result(None)

    def after_pass(param):
        trace.append(f"a:{spec.tag}")

    def after_replace(param):
        trace.append(f"A:{spec.tag}")
        param.set_result((param.result, spec.tag))

    def fault(param):
        trace.append(f"!:{spec.tag}")
        raise RuntimeError(f"hook {spec.tag} exploded")

    if spec.role == "before_pass":
        return HookDescriptor(target_method(), owner=spec.tag, before=before_pass, priority=spec.priority)
    if spec.role == "before_block":
        return HookDescriptor(target_method(), owner=spec.tag, before=before_block, priority=spec.priority)
    if spec.role == "after_pass":
        return HookDescriptor(target_method(), owner=spec.tag, after=after_pass, priority=spec.priority)
    if spec.role == "after_replace":
        return HookDescriptor(target_method(), owner=spec.tag, after=after_replace, priority=spec.priority)
    if spec.role == "before_fault":
        return HookDescriptor(target_method(), owner=spec.tag, before=fault, priority=spec.priority)
    return HookDescriptor(target_method(), owner=spec.tag, after=fault, priority=spec.priority)


def target_method():
    from whitelie.device import resolve_method

    return resolve_method(TARGET)


def truth_reads(sandbox: Sandbox) -> int:
    return sandbox.device.truth.access_counts[PermissionKind.Clipboard]


def role_of(installed) -> str:
    """Recover a HookSpec role from the installed descriptor's closure."""
    d = installed.descriptor
    if d.before is not None:
        return {
            "before_pass": "before_pass",
            "before_block": "before_block",
            "fault": "before_fault",
        }[d.before.__name__]
    return {
        "after_pass": "after_pass",
        "after_replace": "after_replace",
        "fault": "after_fault",
    }[d.after.__name__]
