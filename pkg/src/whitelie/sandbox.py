"""Wires one simulated device to the hook engine, policy store, deceiving
module, access log, energy ledger, and detector.

Spawning an app fires the device's process-created event; the sandbox
listens and installs the deceiving hooks for every granted permission, so
apps are instrumented the moment they exist.
"""

from __future__ import annotations

from .detector import AccessLog, Detector, DetectorConfig
from .device import AppProcess, DeviceConfig, VirtualDevice
from .hooking import HookEngine
from .metrics import EnergyLedger, EnergyModel
from .model import AppManifest
from .policy import DECEIT_HOOK_OWNER, DeceitModule, PolicyStore


class Sandbox:
    def __init__(
        self,
        seed: int = 0,
        device_config: DeviceConfig | None = None,
        store: PolicyStore | None = None,
        energy_model: EnergyModel | None = None,
        detector_config: DetectorConfig | None = None,
    ):
        self.device = VirtualDevice(device_config or DeviceConfig(seed=seed))
        self.engine = HookEngine(clock=lambda: self.device.clock_ms)
        self.store = store if store is not None else PolicyStore()
        self.deceit = DeceitModule(self.store, seed=seed + 1000)
        self.log = AccessLog()
        self.ledger = EnergyLedger(energy_model)
        self.detector = Detector(detector_config)
        self.manifests: dict[str, AppManifest] = {}
        self.hook_handles: dict[str, list] = {}

        self.device.dispatcher = self.engine
        self.device.log_sink = self.log.append
        self.device.energy = self.ledger
        self.engine.register_owner(DECEIT_HOOK_OWNER)
        self.engine.bypass_hidden_api(DECEIT_HOOK_OWNER)

        self._auto_install = True
        self.device.on_spawn(self._on_process_created)

    def _on_process_created(self, process: AppProcess) -> None:
        if self._auto_install:
            self.hook_handles[process.app_id] = self.deceit.install_deceiving_hooks(
                self.engine, process
            )

    def spawn(
        self, manifest: AppManifest, install_hooks: bool = True, script_handle: str = ""
    ) -> AppProcess:
        self._auto_install = install_hooks
        try:
            process = self.device.spawn_process(manifest, script_handle)
        finally:
            self._auto_install = True
        self.manifests[manifest.app_id] = manifest
        return process

    def evaluate_alerts(self, t0: int | None = None, t1: int | None = None):
        return self.detector.evaluate(
            self.log.entries,
            self.manifests,
            self.device.interaction_log,
            t0=t0,
            t1=t1,
        )
