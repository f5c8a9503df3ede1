"""Scripted app catalog, the scenario runner, and the two experiment
drivers (touch side-channel, continuous-auth replay)."""

from .auth import (
    AUTH_TAU,
    AuthTemplate,
    auth_enroll,
    auth_replay_attack,
    auth_verify,
    collect_trace,
    run_auth_round,
)
from .runner import (
    ScenarioReport,
    ScenarioScript,
    ScriptStep,
    get_scenario,
    load_catalog,
    run_scenario,
)
from .sidechannel import (
    ClassifierModel,
    gyrosec_collect,
    gyrosec_experiment,
)

__all__ = [
    "AUTH_TAU",
    "AuthTemplate",
    "ClassifierModel",
    "ScenarioReport",
    "ScenarioScript",
    "ScriptStep",
    "auth_enroll",
    "auth_replay_attack",
    "auth_verify",
    "collect_trace",
    "get_scenario",
    "gyrosec_collect",
    "gyrosec_experiment",
    "load_catalog",
    "run_auth_round",
    "run_scenario",
]
