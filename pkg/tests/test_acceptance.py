"""Acceptance suite: one test per release criterion, each printing a
PASS line at its stated tolerance (run with -s to see them live).

Expected values come from independent oracles: the hook-chain checker
replays chain semantics in a pure model, the side-channel and auth gates
were pinned by a standalone pre-build calibration run, and the battery
numbers are exact ledger arithmetic.
"""

import json
import statistics
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hookprops import build_sandbox, chains, make_descriptor, role_of, target_method, truth_reads
from whitelie.detector import DetectionRule
from whitelie.metrics import (
    bench_battery_saver,
    merge_coverage,
    reference_model,
    timed_latency_run,
)
from whitelie.model import ActionTaken, AppManifest, ClipData, PermissionKind
from whitelie.policy import (
    BLOCK,
    DeceitPolicy,
    PolicyStore,
    default_spoof_action,
    enable_deceit_everywhere,
)
from whitelie.sandbox import Sandbox
from whitelie.scenarios import gyrosec_experiment, load_catalog, run_auth_round, run_scenario
from whitelie.scenarios.runner import ScenarioScript

P = PermissionKind
CLIP = "android.content.ClipData.createFromParcel"


def _pass(name: str, detail: str = "") -> None:
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {name}: PASS{suffix}")


# --- 1. hook semantics property suite -------------------------------------------


def _expected_outcome(ordered_roles, truth_value):
    """Independent model of chain semantics: returns (value, action, ran)."""
    for role, tag in ordered_roles:
        if role == "before_fault":
            return truth_value, ActionTaken.Original, True
        if role == "before_block":
            return None, ActionTaken.Blocked, False
    value = truth_value
    for role, tag in reversed(ordered_roles):
        if role == "after_fault":
            return truth_value, ActionTaken.Original, True
        if role == "after_replace":
            value = (value, tag)
    if value == truth_value:
        return value, ActionTaken.Original, True
    return value, ActionTaken.Spoofed, True


_suite_started = time.monotonic()


@settings(max_examples=200, deadline=None)
@given(chain=chains)
def test_acceptance_hook_semantics_property_suite(chain):
    sandbox, process = build_sandbox()
    trace: list[str] = []
    handles = [
        sandbox.engine.install_hook(process, make_descriptor(spec, trace))
        for spec in chain
    ]
    ordered = [
        (role_of(h), h.descriptor.owner)
        for h in sandbox.engine.chain_order(process.table.slot(target_method()))
    ]
    truth_value = sandbox.device.truth.clipboard
    expected_value, expected_action, expected_ran = _expected_outcome(ordered, truth_value)

    reads_before = truth_reads(sandbox)
    value = sandbox.device.invoke(process, CLIP)  # never raises: crash-proofing
    assert process.live
    assert value == expected_value
    assert sandbox.log.entries[-1].action == expected_action
    assert truth_reads(sandbox) - reads_before == (1 if expected_ran else 0)

    # Install; uninstall is observationally identity.
    for handle in handles:
        sandbox.engine.uninstall_hook(handle)
    assert process.table.matches_template(target_method())
    assert sandbox.device.invoke(process, CLIP) == truth_value


def test_acceptance_hook_suite_runtime_budget():
    elapsed = time.monotonic() - _suite_started
    assert elapsed < 10.0, f"hook property suite took {elapsed:.1f}s"
    _pass("hook-semantics", f"200 random chains in {elapsed:.1f}s")


# --- 2. Listing-1 clipboard equivalence ---------------------------------------------


def test_acceptance_clipboard_equivalence():
    def fresh():
        sandbox = Sandbox(seed=21)
        process = sandbox.spawn(AppManifest.create("app", ["Clipboard"]))
        return sandbox, process

    sandbox, process = fresh()
    assert sandbox.device.invoke(process, CLIP) == ClipData("truth-label", "s3cret token 9911")

    sandbox, process = fresh()
    sandbox.store.set_policy(DeceitPolicy("app", P.Clipboard, BLOCK))
    assert sandbox.device.invoke(process, CLIP) is None

    sandbox, process = fresh()
    sandbox.store.set_policy(
        DeceitPolicy("app", P.Clipboard, default_spoof_action(P.Clipboard))
    )
    assert sandbox.device.invoke(process, CLIP) == ClipData("dummyLabel", "dummyText")
    _pass("clipboard-equivalence")


# --- 3. side-channel collapse ---------------------------------------------------------


def test_acceptance_side_channel_collapse():
    started = time.monotonic()
    results = []
    for seed in range(1, 6):
        unspoofed = gyrosec_experiment(n_train=45, n_test=90, spoofed=False, seed=seed)
        spoofed = gyrosec_experiment(n_train=45, n_test=90, spoofed=True, seed=seed)
        results.append((seed, unspoofed["accuracy"], spoofed["accuracy"]))
        assert unspoofed["accuracy"] >= 0.70, results[-1]
        assert spoofed["accuracy"] <= 0.15, results[-1]
        assert unspoofed["reference_unspoofed_pct"] == 81.22  # metadata only
        assert unspoofed["reference_spoofed_pct"] == 5.36
    elapsed = time.monotonic() - started
    assert elapsed < 60.0
    detail = ", ".join(f"s{s}:{u:.2f}/{v:.2f}" for s, u, v in results)
    _pass("side-channel-collapse", f"{detail} in {elapsed:.1f}s")


# --- 4. continuous-auth bypass ----------------------------------------------------------


def test_acceptance_continuous_auth_bypass():
    rounds = [run_auth_round(seed) for seed in range(1, 21)]
    genuine_rate = statistics.fmean(r["genuine_accepted"] for r in rounds)
    impostor_reject_rate = statistics.fmean(not r["impostor_accepted"] for r in rounds)
    assert genuine_rate >= 0.95, genuine_rate
    assert impostor_reject_rate >= 0.95, impostor_reject_rate
    assert all(r["replay_accepted"] for r in rounds)  # bypass on every seed
    _pass(
        "continuous-auth-bypass",
        f"genuine={genuine_rate:.2f} impostor_reject={impostor_reject_rate:.2f} replay=20/20",
    )


# --- 5. detector completeness, silence, mitigation --------------------------------------


DESIGNATED = {
    "pdf-scanner-like": DetectionRule.BgUpload,
    "bus-sim-like": DetectionRule.BgSensorAccess,
    "camera-translator-like": DetectionRule.BgCameraAccess,
    "geospot-like": DetectionRule.LocationPolling,
    "private-sms-like": DetectionRule.SmsSendNoInteraction,
    "video-editor-like": DetectionRule.UnnecessaryAccess,
    "facebook-like": DetectionRule.MicWithoutIndicator,
    "gyrosec-like": DetectionRule.BgSensorAccess,
}


def test_acceptance_detector_completeness_and_mitigation():
    catalog = load_catalog()

    for name, script in catalog.items():
        if script.tag == "benign":
            report = run_scenario(name)
            assert report.alerts == [], f"benign {name} alerted"

    for name, rule in DESIGNATED.items():
        report = run_scenario(name)
        matching = [a for a in report.alerts if a.rule == rule]
        assert matching, f"{name} did not raise {rule.value}"

        store = PolicyStore()
        alert = matching[0]
        alert.recommended.apply(store)
        replay = run_scenario(name, store=store)
        assert not [a for a in replay.alerts if a.rule == rule], (
            f"{name}: {rule.value} fired again after mitigation"
        )
        targeted = {p.permission for p in alert.recommended.policies}
        for permission in targeted:
            offending = [
                e
                for e in replay.entries
                if e.app_id == alert.app_id
                and e.permission == permission
                and e.action == ActionTaken.Original
                and _privacy_affecting(rule, e)
            ]
            assert offending == [], f"{name}: Original {permission.value} entries remain"
        if rule == DetectionRule.SmsSendNoInteraction:
            sends = [e for e in replay.entries if e.permission == P.SmsSend]
            reads = [e for e in replay.entries if e.permission == P.SmsRead]
            assert sends and all(e.action == ActionTaken.Blocked for e in sends)
            assert reads and all(e.action == ActionTaken.Original for e in reads)
    _pass("detector-completeness", f"{len(DESIGNATED)} malicious + benign silence + mitigations")


def _privacy_affecting(rule, entry):
    from whitelie.model import ActivityState

    if rule in (DetectionRule.BgSensorAccess, DetectionRule.BgCameraAccess,
                DetectionRule.BgUpload):
        return entry.state == ActivityState.Background
    return True


# --- 6. battery-saver arithmetic ------------------------------------------------------------


def test_acceptance_battery_saver_arithmetic():
    result = bench_battery_saver(n=1000, model=reference_model())
    assert result["savings_pct"] == pytest.approx(60.83, abs=0.01)
    assert result["saver_uah"] == result["baseline_uah"] - 1000 * 4.08
    _pass(
        "battery-saver",
        f"savings={result['savings_pct']:.4f}% saver={result['saver_uah']} uAh",
    )


# --- 7. overhead ordering ---------------------------------------------------------------------


def test_acceptance_overhead_ordering():
    runs = []
    for _ in range(3):
        unhooked = timed_latency_run(False, n_per_permission=300, warmup=50)
        hooked = timed_latency_run(True, n_per_permission=300, warmup=50)
        added = {
            p: statistics.fmean(hooked[p]) - statistics.fmean(unhooked[p])
            for p in hooked
        }
        assert added[P.Contacts] > added[P.Clipboard], added
        assert added[P.Camera] > added[P.Tracking], added
        runs.append(added)
    means = {
        p.value: statistics.fmean(r[p] for r in runs) / 1e6 for p in runs[0]
    }
    detail = " ".join(f"{k}={v:.3f}ms" for k, v in means.items())
    _pass("overhead-ordering", f"3 runs, added latency {detail}")


# --- 8. crash-proof coverage ----------------------------------------------------------------


def test_acceptance_crash_proof_coverage():
    catalog = load_catalog()
    reports = []
    for name in sorted(catalog):
        store = PolicyStore()
        enable_deceit_everywhere(store)
        reports.append(run_scenario(name, store=store))  # any assert failure raises

    merged = merge_coverage([r.coverage for r in reports])
    exercised = {
        (e.app_id, e.permission) for r in reports for e in r.entries
    }
    for app, permission in exercised:
        assert merged.status(app, permission).value == "Deceived", (app, permission)

    granted_not_used = {
        (app, permission)
        for r in reports
        for app, manifest in r.manifests.items()
        for permission in manifest.permissions
        if (app, permission) not in exercised
    }
    assert ("uber-like", P.Microphone) in granted_not_used
    for app, permission in granted_not_used:
        assert merged.status(app, permission).value == "GrantedNotUsed", (app, permission)

    from whitelie.metrics import CoverageMatrix

    round_tripped = CoverageMatrix.from_csv(merged.to_csv())
    assert round_tripped.cells == merged.cells
    summary = merged.summary()
    assert summary["exercised_deceived_fraction"] == 1.0
    total_asserts = sum(r.assertions_passed for r in reports)
    _pass(
        "crash-proof-coverage",
        f"{len(reports)} scenarios, {total_asserts} assertions, "
        f"{len(exercised)} exercised pairs all Deceived",
    )


# --- 9. isolation ------------------------------------------------------------------------------


def test_acceptance_isolation_zero_outbound(outbound_audit):
    # The session fixture re-asserts at teardown, covering tests that run
    # after this one; here we lock in everything so far.
    assert outbound_audit.outbound_connections == 0, outbound_audit.attempts
    _pass("isolation", "0 outbound connections")
