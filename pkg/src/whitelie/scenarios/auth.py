"""Toy continuous authenticator and the replay bypass.

The device's motion stream carries a per-user bias (the behavioral
signature). Enrollment summarizes a sensor trace into per-axis mean and
variance; verification accepts a trace whose features sit within a fixed
distance of the template. Feeding the authenticator a replayed recording of
the genuine user's trace defeats it outright.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..device import DeviceConfig
from ..errors import EmptyTrace
from ..model import AppManifest, ActivityState, PermissionKind
from ..policy import ALWAYS, DeceitPolicy, TransformKind, transform_action
from ..sandbox import Sandbox

AUTH_APP_ID = "sensor-auth"
AUTH_TRACE_LEN = 200
AUTH_SAMPLE_INTERVAL_MS = 10
# Acceptance threshold in feature space, calibrated offline against the
# signal model: genuine-trace distances stay under ~0.09 and independent
# users land beyond ~0.53, so 0.25 splits them with wide margin.
AUTH_TAU = 0.25

REPLAY_TRACE_ID = "enrolled-user-trace"

_READ_ACCEL = "android.hardware.SensorManager.readAccelerometer"


@dataclass(frozen=True)
class AuthTemplate:
    features: tuple[float, ...]  # per-axis mean then variance
    tau: float = AUTH_TAU


def trace_features(trace: np.ndarray) -> np.ndarray:
    trace = np.asarray(trace, dtype=float)
    return np.concatenate([trace.mean(axis=0), trace.var(axis=0)])


def auth_enroll(trace: np.ndarray, tau: float = AUTH_TAU) -> AuthTemplate:
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise EmptyTrace("enrollment trace is empty")
    return AuthTemplate(features=tuple(trace_features(trace)), tau=tau)


def auth_verify(template: AuthTemplate, trace: np.ndarray) -> bool:
    trace = np.asarray(trace, dtype=float)
    if trace.size == 0:
        raise EmptyTrace("verification trace is empty")
    distance = float(np.linalg.norm(trace_features(trace) - np.array(template.features)))
    return distance <= template.tau


def _auth_sandbox(seed: int, profile_seed: int) -> tuple[Sandbox, object]:
    sandbox = Sandbox(
        seed=seed, device_config=DeviceConfig(seed=seed, profile_seed=profile_seed)
    )
    process = sandbox.spawn(
        AppManifest.create(
            AUTH_APP_ID,
            [PermissionKind.Accelerometer],
            features={"continuous-auth": ["Accelerometer"]},
        )
    )
    sandbox.device.set_activity_state(process, ActivityState.Foreground)
    return sandbox, process


def collect_trace(sandbox: Sandbox, process, n: int = AUTH_TRACE_LEN) -> np.ndarray:
    """The authenticator samples the accelerometer through its hooks."""
    out = np.empty((n, 3))
    for i in range(n):
        r = sandbox.device.invoke(process, _READ_ACCEL)
        out[i] = (r.x, r.y, r.z)
        sandbox.device.advance(AUTH_SAMPLE_INTERVAL_MS)
    return out


def run_auth_round(seed: int) -> dict:
    """One full round: enroll the genuine user, verify a fresh genuine trace,
    reject an independent user, then bypass via trace replay.

    The replay configures a sensor-replay policy feeding the recorded
    enrollment trace to the authenticator while a different user holds the
    device.
    """
    genuine_profile = seed
    impostor_profile = seed + 50_000

    sandbox, process = _auth_sandbox(seed, genuine_profile)
    enrollment = collect_trace(sandbox, process)
    template = auth_enroll(enrollment)
    genuine_ok = auth_verify(template, collect_trace(sandbox, process))

    impostor_box, impostor_proc = _auth_sandbox(seed + 1, impostor_profile)
    impostor_ok = auth_verify(template, collect_trace(impostor_box, impostor_proc))

    replay_ok = auth_replay_attack(template, enrollment, seed=seed + 2,
                                   impostor_profile=impostor_profile)
    return {
        "seed": seed,
        "genuine_accepted": genuine_ok,
        "impostor_accepted": impostor_ok,
        "replay_accepted": replay_ok,
        "tau": template.tau,
    }


def auth_replay_attack(
    template: AuthTemplate,
    recorded_trace: np.ndarray,
    seed: int,
    impostor_profile: int,
) -> bool:
    """Feed the enrolled user's recorded trace to the authenticator via a
    replay policy and return its verification outcome."""
    recorded_trace = np.asarray(recorded_trace, dtype=float)
    if recorded_trace.size == 0:
        raise EmptyTrace("recorded trace is empty")
    sandbox, process = _auth_sandbox(seed, impostor_profile)
    sandbox.store.add_trace(REPLAY_TRACE_ID, recorded_trace)
    sandbox.store.set_policy(
        DeceitPolicy(
            app=AUTH_APP_ID,
            permission=PermissionKind.Accelerometer,
            action=transform_action(TransformKind.ReplayTrace, trace_id=REPLAY_TRACE_ID),
            context=ALWAYS,
        )
    )
    observed = collect_trace(sandbox, process, n=len(recorded_trace))
    return auth_verify(template, observed)
