"""Exception taxonomy for the sandbox.

Every error a caller can act on is a distinct class; all inherit from
SandboxError so scripts and the gateway can catch the family.
"""

from __future__ import annotations


class SandboxError(Exception):
    """Base class for all sandbox errors."""


class DuplicateAppId(SandboxError):
    """An app with this id is already live on the device."""


class UnknownProcess(SandboxError):
    """Process is not live (stopped or never spawned)."""


class PermissionDenied(SandboxError):
    """Invoked a resource API for a permission absent from the manifest."""

    def __init__(self, app_id: str, permission: str):
        super().__init__(f"{app_id} lacks permission {permission}")
        self.app_id = app_id
        self.permission = permission


class UnknownMethod(SandboxError):
    """Method slot not present in the dispatch table."""


class ForegroundConflict(SandboxError):
    """A different process already holds the (single) foreground slot."""


class OutOfGrid(SandboxError):
    """Touch cell outside the configured screen grid."""


class HiddenApiDenied(SandboxError):
    """Hook install on a hidden method without a bypass capability."""


class UnknownHandle(SandboxError):
    """Hook handle already uninstalled or never issued."""


class IncompatibleTransform(SandboxError):
    """Transform kind not applicable to the policy's permission."""


class MissingOriginal(SandboxError):
    """Edit transform (blur, mask) invoked without an original value."""


class EmptyPool(SandboxError):
    """Spoof pool missing or has no values."""


class EmptyTrace(SandboxError):
    """Replay trace missing or has no samples."""


class SequenceGap(SandboxError):
    """Access-log append skipped a sequence number."""


class UnknownScenario(SandboxError):
    """Scenario name not present in the catalog."""


class AssertionFailed(SandboxError):
    """A scenario script assertion did not hold."""

    def __init__(self, app_id: str, step_index: int, detail: str):
        super().__init__(f"{app_id} step {step_index}: {detail}")
        self.app_id = app_id
        self.step_index = step_index
        self.detail = detail
