"""Dynamic hook installation and dispatch: the call-diversion mechanism.

A hook descriptor carries an optional before behavior (may set the result
and short-circuit the original) and an optional after behavior (may replace
the result). Chains run highest priority first; equal priorities run the
most recently installed hook first. Hooks on hidden methods require a
bypass capability granted per installer identity.

A hook that raises never takes the app down: the call falls back to the
original behavior and the fault is recorded.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable

from .device import AppProcess, FunctionSlot
from .errors import HiddenApiDenied, UnknownHandle, UnknownMethod
from .model import ActionTaken, ActivityState, MethodId, PermissionKind, values_equal

logger = logging.getLogger(__name__)


@dataclass
class MethodHookParam:
    """Mutable call context handed to each hook behavior."""

    args: dict[str, Any]
    app_id: str
    permission: PermissionKind
    activity_state: ActivityState
    t_ms: int
    result: Any = None
    return_early: bool = False
    _phase: str = "before"

    def set_result(self, value: Any) -> None:
        """Set (before phase: and short-circuit) or replace (after phase)
        the call result."""
        self.result = value
        if self._phase == "before":
            self.return_early = True


HookBehavior = Callable[[MethodHookParam], None]


@dataclass(frozen=True)
class HookDescriptor:
    target: MethodId
    owner: str
    before: HookBehavior | None = None
    after: HookBehavior | None = None
    priority: int = 0

    def __post_init__(self) -> None:
        if self.before is None and self.after is None:
            raise ValueError("hook needs a before or an after behavior")


@dataclass(frozen=True)
class HookHandle:
    id: int
    app_id: str
    target: MethodId


@dataclass(frozen=True)
class HiddenApiBypass:
    owner: str


@dataclass(frozen=True)
class HookFault:
    owner: str
    app_id: str
    method: MethodId
    cause: str


@dataclass
class _Installed:
    descriptor: HookDescriptor
    seq: int
    handle: HookHandle


class _FallBack(Exception):
    """Internal: abandon the hook chain and complete via the original."""


class HookEngine:
    """Owns hook installation state and the hooked-call dispatch path."""

    def __init__(self, clock: Callable[[], int] | None = None) -> None:
        self._owners: set[str] = set()
        self._bypass: set[str] = set()
        self._handles: dict[int, tuple[AppProcess, _Installed]] = {}
        self._ids = itertools.count(1)
        self._install_seq = itertools.count(1)
        self._clock = clock or (lambda: 0)
        self.fault_log: list[HookFault] = []

    # --- capabilities -----------------------------------------------------

    def register_owner(self, owner: str) -> str:
        self._owners.add(owner)
        return owner

    def bypass_hidden_api(self, owner: str) -> HiddenApiBypass:
        """Grant the owner the capability to hook hidden methods."""
        if owner not in self._owners:
            raise ValueError(f"unregistered installer {owner!r}")
        self._bypass.add(owner)
        return HiddenApiBypass(owner)

    def has_bypass(self, owner: str) -> bool:
        return owner in self._bypass

    # --- install / uninstall ------------------------------------------------

    def install_hook(self, process: AppProcess, descriptor: HookDescriptor) -> HookHandle:
        slot = process.table.slot(descriptor.target)  # raises UnknownMethod
        if descriptor.target.hidden and not self.has_bypass(descriptor.owner):
            raise HiddenApiDenied(
                f"{descriptor.owner!r} may not hook hidden {descriptor.target.qualified}"
            )
        handle = HookHandle(
            id=next(self._ids), app_id=process.app_id, target=descriptor.target
        )
        installed = _Installed(
            descriptor=descriptor, seq=next(self._install_seq), handle=handle
        )
        slot.hook_chain.append(installed)
        self._handles[handle.id] = (process, installed)
        return handle

    def uninstall_hook(self, handle: HookHandle) -> None:
        found = self._handles.pop(handle.id, None)
        if found is None:
            raise UnknownHandle(f"handle {handle.id}")
        process, installed = found
        slot = process.table.slot(handle.target)
        slot.hook_chain.remove(installed)

    @staticmethod
    def chain_order(slot: FunctionSlot) -> list[_Installed]:
        """Higher priority first; ties run the later install first (LIFO)."""
        return sorted(slot.hook_chain, key=lambda h: (-h.descriptor.priority, -h.seq))

    # --- dispatch ---------------------------------------------------------------

    def dispatch(
        self,
        process: AppProcess,
        method: MethodId,
        args: dict[str, Any],
        run_original: Callable[[], Any],
    ) -> tuple[Any, ActionTaken]:
        """Run the slot's hook chain around the original behavior.

        Before-hooks run in chain order; the first to set a result
        short-circuits the original (Blocked). Otherwise the original runs
        and after-hooks run in reverse chain order, each free to replace the
        result. A faulting hook aborts the chain and the call completes with
        the original value.
        """
        chain = self.chain_order(process.table.slot(method))
        param = MethodHookParam(
            args=args,
            app_id=process.app_id,
            permission=method.permission,
            activity_state=process.state,
            t_ms=self._clock(),
        )
        original_ran = False
        original_value: Any = None
        try:
            param._phase = "before"
            for installed in chain:
                before = installed.descriptor.before
                if before is None:
                    continue
                try:
                    before(param)
                except Exception as exc:
                    self._record_fault(installed, process, method, exc)
                    raise _FallBack from exc
                if param.return_early:
                    return param.result, ActionTaken.Blocked

            original_value = run_original()
            original_ran = True
            param._phase = "after"
            param.result = original_value
            for installed in reversed(chain):
                after = installed.descriptor.after
                if after is None:
                    continue
                try:
                    after(param)
                except Exception as exc:
                    self._record_fault(installed, process, method, exc)
                    raise _FallBack from exc
        except _FallBack:
            if not original_ran:
                original_value = run_original()
            return original_value, ActionTaken.Original

        if values_equal(param.result, original_value):
            return param.result, ActionTaken.Original
        return param.result, ActionTaken.Spoofed

    def _record_fault(
        self, installed: _Installed, process: AppProcess, method: MethodId, exc: Exception
    ) -> None:
        fault = HookFault(
            owner=installed.descriptor.owner,
            app_id=process.app_id,
            method=method,
            cause=f"{type(exc).__name__}: {exc}",
        )
        self.fault_log.append(fault)
        logger.warning("hook fault, falling back to original: %s", fault)
