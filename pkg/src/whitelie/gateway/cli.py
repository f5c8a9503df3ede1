"""Command-line interface.

State lives under WHITELIE_HOME (default ~/.whitelie): the policy store,
the most recent run's access log, and one report per scenario. Exit codes:
0 success, 1 scenario assertion or runtime failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import http.client
import json
import os
import sys
from pathlib import Path
from typing import Any

from ..detector import Detector, entry_from_json
from ..errors import AssertionFailed, SandboxError
from ..metrics import (
    CoverageMatrix,
    bench_api_overhead,
    bench_battery_saver,
    merge_coverage,
    reference_model,
)
from ..model import AppManifest, PermissionKind, UserInteractionEvent
from ..policy import ContextCondition, ContextKind, DeceitPolicy, PolicyStore
from ..scenarios.runner import run_scenario


def default_home() -> Path:
    return Path(os.environ.get("WHITELIE_HOME", "~/.whitelie")).expanduser()


def _reports_dir(home: Path) -> Path:
    return home / "reports"


def _load_reports(home: Path) -> list[dict[str, Any]]:
    out = []
    directory = _reports_dir(home)
    if directory.exists():
        for path in sorted(directory.glob("*.json")):
            out.append(json.loads(path.read_text()))
    return out


def _print(payload: Any, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(payload if isinstance(payload, str) else json.dumps(payload, indent=2))


# --- subcommands ----------------------------------------------------------------


def cmd_sim_run(args: argparse.Namespace) -> int:
    home = default_home()
    store = PolicyStore(home / "policies.json")
    report = run_scenario(args.scenario, seed=args.seed, store=store)
    home.mkdir(parents=True, exist_ok=True)
    (home / "logs.jsonl").write_text(
        "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in report.entries)
    )
    _reports_dir(home).mkdir(parents=True, exist_ok=True)
    doc = report.to_json()
    (_reports_dir(home) / f"{report.name}.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True)
    )
    if args.json:
        _print(doc, as_json=True)
    else:
        rules = sorted({a.rule.value for a in report.alerts})
        print(
            f"{report.name}: seed={report.seed} entries={len(report.entries)} "
            f"assertions={report.assertions_passed} alerts={rules or 'none'}"
        )
    return 0


def cmd_policy(args: argparse.Namespace) -> int:
    home = default_home()
    store = PolicyStore(home / "policies.json")
    if args.policy_cmd == "list":
        _print(store.snapshot.to_json(), as_json=True)
        return 0
    if args.policy_cmd == "set":
        if args.file:
            raw = Path(args.file).read_text()
        elif args.policy_json:
            raw = args.policy_json
        else:
            raw = sys.stdin.read()
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            print(f"malformed policy JSON: {exc}", file=sys.stderr)
            return 2
        try:
            if isinstance(doc, list):
                for p in doc:
                    version = store.set_policy(DeceitPolicy.from_json(p))
            elif "policies" in doc:
                version = store.replace_all(doc)
            else:
                version = store.set_policy(DeceitPolicy.from_json(doc))
        except (SandboxError, KeyError, ValueError, TypeError) as exc:
            print(f"invalid policy: {exc}", file=sys.stderr)
            return 2
        print(f"policy_version={version}")
        return 0
    # rm
    context = None
    if args.context:
        context = ContextCondition(ContextKind(args.context), args.toggle_id)
    version = store.remove_policy(args.app, PermissionKind(args.permission), context)
    print(f"policy_version={version}")
    return 0


def cmd_logs(args: argparse.Namespace) -> int:
    if args.follow:
        return _follow(args.port)
    home = default_home()
    path = home / "logs.jsonl"
    if not path.exists():
        print("no logs recorded yet", file=sys.stderr)
        return 0
    text = path.read_text()
    if args.export == "jsonl":
        sys.stdout.write(text)
        return 0
    for line in text.splitlines():
        e = json.loads(line)
        print(
            f"#{e['seq']:<5} t={e['t']:<8} {e['app_id']:<24} {e['permission']:<14} "
            f"{e['state']:<10} {e['action']:<8} bytes={e['bytes']}"
        )
    return 0


def _follow(port: int) -> int:
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=None)
    conn.request("GET", "/logs/stream", headers={"Accept": "text/event-stream"})
    response = conn.getresponse()
    try:
        for raw in response:
            line = raw.decode().rstrip("\n")
            if line.startswith("data: "):
                print(line[len("data: "):], flush=True)
    except KeyboardInterrupt:
        pass
    finally:
        conn.close()
    return 0


def cmd_alerts(args: argparse.Namespace) -> int:
    home = default_home()
    detector = Detector()
    alerts = []
    for doc in _load_reports(home):
        entries = [entry_from_json(e) for e in doc["log"]]
        manifests = {
            app: AppManifest.from_json(m) for app, m in doc["manifests"].items()
        }
        interactions = [UserInteractionEvent.from_json(i) for i in doc["interactions"]]
        alerts.extend(detector.evaluate(entries, manifests, interactions))
    payload = [a.to_json() for a in alerts]
    if args.json:
        _print(payload, as_json=True)
    else:
        if not alerts:
            print("no alerts")
        for a in alerts:
            print(f"[{a.id}] {a.rule.value:22s} app={a.app_id} evidence={len(a.evidence)}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    if args.bench_cmd == "overhead":
        result = bench_api_overhead(n_per_permission=max(args.n, 100))
        if args.json:
            _print(result, as_json=True)
        else:
            for perm, d in result["per_permission"].items():
                print(
                    f"{perm:12s} mean_added={d['mean_added_ns'] / 1e6:8.3f} ms  "
                    f"p95_added={d['p95_added_ns'] / 1e6:8.3f} ms"
                )
        return 0
    result = bench_battery_saver(n=args.n, model=reference_model())
    if args.json:
        _print(result, as_json=True)
    else:
        print(
            f"baseline={result['baseline_uah']:.3f} uAh  saver={result['saver_uah']:.3f} uAh  "
            f"savings_pct={result['savings_pct']:.2f}  "
            f"saved_per_call={result['saved_uah_per_call']:.3f} uAh"
        )
    return 0


def cmd_heatmap(args: argparse.Namespace) -> int:
    home = default_home()
    matrices = [
        CoverageMatrix.from_rows(doc["coverage"]["rows"]) for doc in _load_reports(home)
    ]
    merged = merge_coverage(matrices)
    Path(args.out).write_text(merged.to_csv())
    summary = merged.summary()
    print(
        f"wrote {args.out}: requested={summary['requested']} "
        f"deceived={summary['deceived']} fraction={summary['deceived_fraction']:.4f}"
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path(__file__).resolve().parents[3] / "frontend" / "dist"
        ui_dir = bundled if bundled.exists() else None
    server, _hub = serve(default_home(), port=args.port, host=args.host, ui_dir=ui_dir)
    print(f"gateway on http://{args.host}:{args.port} (home={default_home()})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whitelie", description="simulated mobile privacy sandbox"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    sim = sub.add_parser("sim", help="run scripted scenarios")
    sim_sub = sim.add_subparsers(dest="sim_cmd", required=True)
    run = sim_sub.add_parser("run", help="run one catalog scenario")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--json", action="store_true")
    run.set_defaults(func=cmd_sim_run)

    policy = sub.add_parser("policy", help="manage deceit policies")
    policy_sub = policy.add_subparsers(dest="policy_cmd", required=True)
    pset = policy_sub.add_parser("set", help="upsert policy JSON (arg, --file, or stdin)")
    pset.add_argument("policy_json", nargs="?")
    pset.add_argument("--file")
    pset.set_defaults(func=cmd_policy)
    plist = policy_sub.add_parser("list")
    plist.set_defaults(func=cmd_policy)
    prm = policy_sub.add_parser("rm")
    prm.add_argument("--app", required=True)
    prm.add_argument("--permission", required=True)
    prm.add_argument("--context")
    prm.add_argument("--toggle-id")
    prm.set_defaults(func=cmd_policy)

    logs = sub.add_parser("logs", help="inspect the last run's access log")
    logs.add_argument("--export", choices=["jsonl"])
    logs.add_argument("--follow", action="store_true")
    logs.add_argument("--port", type=int, default=8320)
    logs.set_defaults(func=cmd_logs)

    alerts = sub.add_parser("alerts", help="evaluate detection rules over saved reports")
    alerts.add_argument("--json", action="store_true")
    alerts.set_defaults(func=cmd_alerts)

    bench = sub.add_parser("bench", help="overhead benchmarks")
    bench_sub = bench.add_subparsers(dest="bench_cmd", required=True)
    overhead = bench_sub.add_parser("overhead")
    overhead.add_argument("--n", type=int, default=400)
    overhead.add_argument("--json", action="store_true")
    overhead.set_defaults(func=cmd_bench)
    battery = bench_sub.add_parser("battery")
    battery.add_argument("--n", type=int, default=1000)
    battery.add_argument("--json", action="store_true")
    battery.set_defaults(func=cmd_bench)

    heatmap = sub.add_parser("heatmap", help="write the coverage CSV")
    heatmap.add_argument("--out", required=True)
    heatmap.set_defaults(func=cmd_heatmap)

    serve_p = sub.add_parser("serve", help="start the loopback HTTP gateway")
    serve_p.add_argument("--port", type=int, default=8320)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--ui", default=None, help="directory with the built dashboard")
    serve_p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 1
    except SandboxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
