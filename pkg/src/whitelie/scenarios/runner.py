"""Scripted app catalog and the deterministic scenario runner.

A scenario is a JSON document naming one or more apps, each with a manifest
and an ordered step list. Apps run as cooperative tasks on virtual time:
non-sleep steps are instantaneous, sleeps yield, and ties resolve in app
declaration order, so a (name, seed) pair always produces an identical
report.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..detector import Alert
from ..device import DeviceConfig, resolve_method
from ..errors import AssertionFailed, UnknownScenario
from ..metrics import CoverageMatrix, coverage_from
from ..model import (
    ActivityState,
    AppManifest,
    InteractionKind,
    value_to_json,
)
from ..policy import PolicyStore
from ..sandbox import Sandbox

CATALOG_DIR = Path(__file__).parent / "catalog"


@dataclass(frozen=True)
class ScriptStep:
    op: str  # call | sleep | foreground | background | interact | assert
    method: str | None = None
    args: dict[str, Any] = field(default_factory=dict)
    ms: int = 0
    kind: str | None = None
    cell: tuple[int, int] | None = None
    predicate: dict[str, Any] | None = None

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "ScriptStep":
        return ScriptStep(
            op=doc["op"],
            method=doc.get("method"),
            args=doc.get("args", {}),
            ms=int(doc.get("ms", 0)),
            kind=doc.get("kind"),
            cell=tuple(doc["cell"]) if "cell" in doc else None,
            predicate=doc.get("predicate"),
        )


@dataclass(frozen=True)
class AppScript:
    manifest: AppManifest
    steps: tuple[ScriptStep, ...]


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    tag: str  # benign | malicious
    seed: int
    apps: tuple[AppScript, ...]
    designated_rule: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @staticmethod
    def from_json(doc: dict[str, Any]) -> "ScenarioScript":
        apps = tuple(
            AppScript(
                manifest=AppManifest.from_json(app["manifest"]),
                steps=tuple(ScriptStep.from_json(s) for s in app["steps"]),
            )
            for app in doc["apps"]
        )
        script = ScenarioScript(
            name=doc["name"],
            tag=doc["tag"],
            seed=int(doc.get("seed", 0)),
            apps=apps,
            designated_rule=doc.get("designated_rule"),
            metadata=doc.get("metadata", {}),
        )
        _validate(script)
        return script


def _validate(script: ScenarioScript) -> None:
    for app in script.apps:
        for i, step in enumerate(app.steps):
            if step.op == "call":
                method = resolve_method(step.method or "")
                if method.permission not in app.manifest.permissions:
                    raise ValueError(
                        f"{script.name}/{app.manifest.app_id} step {i}: "
                        f"{method.qualified} needs {method.permission.value}"
                    )


# --- assertion predicates ---------------------------------------------------


def _get_field(value: Any, name: str) -> Any:
    if isinstance(value, dict):
        return value[name]
    return getattr(value, name)


def check_predicate(predicate: dict[str, Any], value: Any) -> tuple[bool, str]:
    op = predicate["op"]
    if op == "not_null":
        return value is not None, "expected a value, got null"
    if op == "is_null":
        return value is None, f"expected null, got {value!r}"
    if op == "len_ge":
        n = len(value) if value is not None else 0
        return n >= predicate["value"], f"len {n} < {predicate['value']}"
    if op == "eq":
        got = value_to_json(value)
        return got == predicate["value"], f"{got!r} != {predicate['value']!r}"
    if op == "field_eq":
        got = _get_field(value, predicate["field"])
        return got == predicate["value"], f"{predicate['field']}={got!r}"
    if op == "numeric_between":
        v = value if "field" not in predicate else _get_field(value, predicate["field"])
        ok = predicate["lo"] <= float(v) <= predicate["hi"]
        return ok, f"{v} outside [{predicate['lo']}, {predicate['hi']}]"
    if op == "any_field_in":
        values = set(predicate["values"])
        ok = any(_get_field(item, predicate["field"]) in values for item in value)
        return ok, f"no {predicate['field']} in {sorted(values)}"
    raise ValueError(f"unknown predicate op {op!r}")


# --- catalog --------------------------------------------------------------------


def load_catalog(directory: Path | None = None) -> dict[str, ScenarioScript]:
    directory = directory or CATALOG_DIR
    catalog: dict[str, ScenarioScript] = {}
    for path in sorted(directory.glob("*.json")):
        script = ScenarioScript.from_json(json.loads(path.read_text()))
        catalog[script.name] = script
    return catalog


def get_scenario(name: str, directory: Path | None = None) -> ScenarioScript:
    catalog = load_catalog(directory)
    if name not in catalog:
        raise UnknownScenario(name)
    return catalog[name]


# --- runner ---------------------------------------------------------------------


@dataclass
class ScenarioReport:
    name: str
    tag: str
    seed: int
    designated_rule: str | None
    manifests: dict[str, AppManifest]
    entries: list
    interactions: list
    step_results: dict[str, list[dict[str, Any]]]
    assertions_passed: int
    alerts: list[Alert]
    coverage: CoverageMatrix
    metadata: dict[str, Any]
    policy_version: int

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "tag": self.tag,
            "seed": self.seed,
            "designated_rule": self.designated_rule,
            "manifests": {app: m.to_json() for app, m in sorted(self.manifests.items())},
            "log": [e.to_json() for e in self.entries],
            "interactions": [ev.to_json() for ev in self.interactions],
            "step_results": self.step_results,
            "assertions_passed": self.assertions_passed,
            "alerts": [a.to_json() for a in self.alerts],
            "coverage": self.coverage.to_json(),
            "metadata": self.metadata,
            "policy_version": self.policy_version,
        }


@dataclass
class _Task:
    index: int
    script: AppScript
    process: Any
    cursor: int = 0
    wake_t: int = 0
    done: bool = False
    last_value: Any = None


def run_scenario(
    name_or_script: str | ScenarioScript,
    seed: int | None = None,
    store: PolicyStore | None = None,
    sandbox: Sandbox | None = None,
    on_step: Any = None,
) -> ScenarioReport:
    """Execute one catalog scenario deterministically.

    Spawns every app (installing deceiving hooks per the current policy
    store), interleaves scripts on virtual time, and returns the full
    report: log slice, alerts, assertion count, and coverage rows.
    """
    script = (
        name_or_script
        if isinstance(name_or_script, ScenarioScript)
        else get_scenario(name_or_script)
    )
    run_seed = script.seed if seed is None else seed
    if sandbox is None:
        sandbox = Sandbox(
            seed=run_seed,
            device_config=DeviceConfig(
                seed=run_seed,
                profile_seed=script.metadata.get("profile_seed"),
            ),
            store=store,
        )
    device = sandbox.device

    tasks = []
    step_results: dict[str, list[dict[str, Any]]] = {}
    for i, app in enumerate(script.apps):
        process = sandbox.spawn(app.manifest, script_handle=script.name)
        tasks.append(_Task(index=i, script=app, process=process, wake_t=device.clock_ms))
        step_results[app.manifest.app_id] = []

    assertions_passed = 0
    # Min-heap on (wake time, declaration order): deterministic interleaving.
    ready = [(t.wake_t, t.index) for t in tasks]
    heapq.heapify(ready)
    while ready:
        wake_t, index = heapq.heappop(ready)
        task = tasks[index]
        device.advance_to(max(device.clock_ms, wake_t))
        last_value = task.last_value
        while task.cursor < len(task.script.steps):
            step = task.script.steps[task.cursor]
            task.cursor += 1
            app_id = task.script.manifest.app_id
            if step.op == "call":
                last_value = device.invoke(task.process, step.method, dict(step.args))
                step_results[app_id].append(
                    {
                        "step": task.cursor - 1,
                        "op": "call",
                        "method": step.method,
                        "value": value_to_json(last_value),
                    }
                )
            elif step.op == "assert":
                ok, detail = check_predicate(step.predicate or {}, last_value)
                if not ok:
                    raise AssertionFailed(app_id, task.cursor - 1, detail)
                assertions_passed += 1
            elif step.op == "foreground":
                device.set_activity_state(task.process, ActivityState.Foreground)
            elif step.op == "background":
                device.set_activity_state(task.process, ActivityState.Background)
            elif step.op == "interact":
                device.emit_interaction(
                    task.process, InteractionKind(step.kind or "Scroll"), step.cell
                )
            elif step.op == "sleep":
                task.wake_t = device.clock_ms + step.ms
                task.last_value = last_value
                heapq.heappush(ready, (task.wake_t, task.index))
                break
            else:
                raise ValueError(f"unknown step op {step.op!r}")
            if on_step is not None:
                on_step(device.clock_ms)
        else:
            task.done = True

    alerts = sandbox.evaluate_alerts()
    coverage = coverage_from(sandbox.manifests, sandbox.log.entries)
    return ScenarioReport(
        name=script.name,
        tag=script.tag,
        seed=run_seed,
        designated_rule=script.designated_rule,
        manifests=dict(sandbox.manifests),
        entries=list(sandbox.log.entries),
        interactions=list(device.interaction_log),
        step_results=step_results,
        assertions_passed=assertions_passed,
        alerts=alerts,
        coverage=coverage,
        metadata=dict(script.metadata),
        policy_version=sandbox.store.version,
    )
