"""Loopback HTTP + SSE gateway.

Endpoints:
    GET  /apps                      installed-package listing
    GET  /policies                  policy document
    PUT  /policies                  replace policy document
    GET  /alerts                    current alerts
    POST /alerts/{id}/apply         apply an alert's recommended mitigation
    GET  /logs                      access-log entries seen this session
    GET  /logs/stream               SSE stream of entries (?since=seq resumes)
    POST /scenarios/{name}/start    run a catalog scenario (409 if busy)
    POST /scenarios/{name}/stop     stop the running scenario
    GET  /coverage                  merged coverage matrix (?format=csv)

The server binds loopback only; every mutation funnels through one lock so
policy versioning stays linear. Scenario runs stream entries onto a single
gapless session sequence, which is what reconnecting clients resume from.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any

from ..detector import Alert, Detector
from ..device import DeviceConfig
from ..errors import AssertionFailed, SandboxError, UnknownScenario
from ..metrics import CoverageMatrix, merge_coverage
from ..model import AccessLogEntry, AppManifest
from ..policy import PolicyStore
from ..sandbox import Sandbox
from ..scenarios.runner import ScenarioReport, load_catalog, run_scenario

logger = logging.getLogger(__name__)


class ScenarioStopped(Exception):
    pass


class GatewayHub:
    """Shared state behind the HTTP API (and reusable by tests directly)."""

    def __init__(self, home: str | Path, ui_dir: str | Path | None = None):
        self.home = Path(home)
        self.home.mkdir(parents=True, exist_ok=True)
        self.store = PolicyStore(self.home / "policies.json")
        self.catalog = load_catalog()
        self.detector = Detector()
        self.ui_dir = Path(ui_dir) if ui_dir else None

        self.mutation_lock = threading.RLock()
        self.log_cond = threading.Condition()
        self.entries: list[AccessLogEntry] = []  # session stream, gapless seq
        self.manifests: dict[str, AppManifest] = {}
        self.reports: dict[str, ScenarioReport] = {}
        self.last_error: str | None = None

        self._seq = 0
        self._runner: threading.Thread | None = None
        self._running_name: str | None = None
        self._stop_flag = threading.Event()
        self._active_sandbox: Sandbox | None = None

    # --- log stream -------------------------------------------------------

    def publish(self, entry: AccessLogEntry) -> None:
        with self.log_cond:
            self._seq += 1
            self.entries.append(dataclasses.replace(entry, seq=self._seq))
            self.log_cond.notify_all()

    def entries_since(self, since: int) -> list[AccessLogEntry]:
        with self.log_cond:
            return [e for e in self.entries if e.seq > since]

    # --- scenarios -----------------------------------------------------------

    @property
    def running_scenario(self) -> str | None:
        return self._running_name

    def start_scenario(self, name: str, seed: int | None = None, pace: float = 0.0) -> None:
        if name not in self.catalog:
            raise UnknownScenario(name)
        with self.mutation_lock:
            if self._runner is not None and self._runner.is_alive():
                raise RuntimeError("scenario already running")
            self._stop_flag.clear()
            self._running_name = name
            self._runner = threading.Thread(
                target=self._run, args=(name, seed, pace), daemon=True
            )
            self._runner.start()

    def stop_scenario(self) -> bool:
        runner = self._runner
        if runner is None or not runner.is_alive():
            return False
        self._stop_flag.set()
        runner.join(timeout=10)
        return True

    def wait_idle(self, timeout: float = 30.0) -> None:
        runner = self._runner
        if runner is not None:
            runner.join(timeout=timeout)

    def _run(self, name: str, seed: int | None, pace: float) -> None:
        script = self.catalog[name]
        run_seed = script.seed if seed is None else seed
        last_t = {"ms": 0}

        def on_step(clock_ms: int) -> None:
            if self._stop_flag.is_set():
                raise ScenarioStopped()
            if pace > 0:
                delta = clock_ms - last_t["ms"]
                last_t["ms"] = clock_ms
                if delta > 0:
                    time.sleep(delta * pace / 1000.0)

        try:
            sandbox = Sandbox(
                seed=run_seed,
                device_config=DeviceConfig(
                    seed=run_seed, profile_seed=script.metadata.get("profile_seed")
                ),
                store=self.store,
            )
            sandbox.log.subscribe(self.publish)
            self._active_sandbox = sandbox
            report = run_scenario(script, seed=run_seed, sandbox=sandbox, on_step=on_step)
            with self.mutation_lock:
                self.reports[name] = report
                self.manifests.update(report.manifests)
                self.last_error = None
        except ScenarioStopped:
            logger.info("scenario %s stopped", name)
            if self._active_sandbox is not None:
                self.manifests.update(self._active_sandbox.manifests)
        except (AssertionFailed, SandboxError) as exc:
            logger.warning("scenario %s failed: %s", name, exc)
            self.last_error = str(exc)
        finally:
            self._running_name = None

    # --- queries ---------------------------------------------------------------

    def packages(self) -> list[dict[str, Any]]:
        apps: dict[str, AppManifest] = {}
        for script in self.catalog.values():
            for app in script.apps:
                apps[app.manifest.app_id] = app.manifest
        apps.update(self.manifests)
        out = []
        for app_id in sorted(apps):
            manifest = apps[app_id]
            perm_list = sorted(p.value for p in manifest.permissions)
            out.append(
                {
                    "app_id": app_id,
                    "requested": perm_list,
                    "granted": perm_list,
                    "features": {
                        name: [p.value for p in perms]
                        for name, perms in sorted(manifest.features.items())
                    },
                }
            )
        return out

    def current_alerts(self) -> list[Alert]:
        sandbox = self._active_sandbox
        interactions = list(sandbox.device.interaction_log) if sandbox else []
        manifests = dict(self.manifests)
        if sandbox is not None:
            manifests.update(sandbox.manifests)
        with self.log_cond:
            entries = list(self.entries)
        return self.detector.evaluate(entries, manifests, interactions)

    def apply_alert(self, alert_id: str) -> dict[str, Any] | None:
        for alert in self.current_alerts():
            if alert.id == alert_id:
                with self.mutation_lock:
                    version = alert.recommended.apply(self.store)
                return {"applied": True, "id": alert_id, "policy_version": version}
        return None

    def coverage(self) -> CoverageMatrix:
        return merge_coverage([r.coverage for r in self.reports.values()])


# --- HTTP plumbing ----------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    hub: GatewayHub  # set by serve()

    # Quieter than the default stderr-per-request logging.
    def log_message(self, fmt: str, *args: Any) -> None:
        logger.debug("%s - %s", self.address_string(), fmt % args)

    # --- helpers ------------------------------------------------------------

    def _json(self, code: int, payload: Any) -> None:
        body = json.dumps(payload).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str) -> None:
        self._json(code, {"error": message, "code": code})

    def _text(self, code: int, text: str, content_type: str) -> None:
        body = text.encode()
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_body(self) -> Any:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        return json.loads(self.rfile.read(length).decode())

    @property
    def _path_and_query(self) -> tuple[str, dict[str, str]]:
        path, _, query = self.path.partition("?")
        params = {}
        for part in query.split("&"):
            if "=" in part:
                k, _, v = part.partition("=")
                params[k] = v
        return path.rstrip("/") or "/", params

    # --- verbs -------------------------------------------------------------------

    def do_OPTIONS(self) -> None:  # CORS preflight for dev setups
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        path, params = self._path_and_query
        hub = self.hub
        if path == "/apps":
            return self._json(200, hub.packages())
        if path == "/policies":
            return self._json(200, hub.store.snapshot.to_json())
        if path == "/alerts":
            return self._json(200, [a.to_json() for a in hub.current_alerts()])
        if path == "/logs":
            since = int(params.get("since", 0))
            return self._json(200, [e.to_json() for e in hub.entries_since(since)])
        if path == "/logs/stream":
            return self._stream(params)
        if path == "/coverage":
            matrix = hub.coverage()
            if params.get("format") == "csv":
                return self._text(200, matrix.to_csv(), "text/csv")
            return self._json(200, matrix.to_json())
        if path == "/scenarios":
            return self._json(
                200,
                [
                    {
                        "name": s.name,
                        "tag": s.tag,
                        "seed": s.seed,
                        "designated_rule": s.designated_rule,
                        "running": hub.running_scenario == s.name,
                    }
                    for s in sorted(hub.catalog.values(), key=lambda s: s.name)
                ],
            )
        if path == "/status":
            return self._json(
                200,
                {
                    "running": hub.running_scenario,
                    "entries": len(hub.entries),
                    "policy_version": hub.store.version,
                    "last_error": hub.last_error,
                },
            )
        if self._serve_ui(path):
            return
        return self._error(404, f"unknown path {path}")

    def do_PUT(self) -> None:
        path, _ = self._path_and_query
        hub = self.hub
        if path == "/policies":
            try:
                doc = self._read_body()
                with hub.mutation_lock:
                    version = hub.store.replace_all(doc)
            except (SandboxError, ValueError, KeyError, TypeError) as exc:
                return self._error(400, f"invalid policy document: {exc}")
            return self._json(200, {"policy_version": version})
        return self._error(404, f"unknown path {path}")

    def do_POST(self) -> None:
        path, _ = self._path_and_query
        hub = self.hub
        apply_match = re.fullmatch(r"/alerts/([0-9a-f]+)/apply", path)
        if apply_match:
            result = hub.apply_alert(apply_match.group(1))
            if result is None:
                return self._error(404, "unknown alert id")
            return self._json(200, result)
        start_match = re.fullmatch(r"/scenarios/([\w-]+)/start", path)
        if start_match:
            try:
                body = self._read_body()
            except ValueError as exc:
                return self._error(400, f"bad body: {exc}")
            try:
                hub.start_scenario(
                    start_match.group(1),
                    seed=body.get("seed"),
                    pace=float(body.get("pace", 0.0)),
                )
            except UnknownScenario:
                return self._error(404, "unknown scenario")
            except RuntimeError:
                return self._error(409, "scenario already running")
            return self._json(200, {"started": start_match.group(1)})
        stop_match = re.fullmatch(r"/scenarios/([\w-]+)/stop", path)
        if stop_match:
            stopped = hub.stop_scenario()
            return self._json(200, {"stopped": stopped})
        return self._error(404, f"unknown path {path}")

    # --- SSE -------------------------------------------------------------------

    def _stream(self, params: dict[str, str]) -> None:
        since = int(params.get("since") or self.headers.get("Last-Event-ID") or 0)
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        hub = self.hub
        try:
            while True:
                batch = hub.entries_since(since)
                for entry in batch:
                    payload = json.dumps(entry.to_json())
                    self.wfile.write(f"id: {entry.seq}\ndata: {payload}\n\n".encode())
                    since = entry.seq
                self.wfile.flush()
                with hub.log_cond:
                    if not hub.entries_since(since):
                        got_new = hub.log_cond.wait(timeout=1.0)
                        if not got_new:
                            self.wfile.write(b": keep-alive\n\n")
                            self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            return

    # --- static dashboard --------------------------------------------------------

    _MIME = {
        ".html": "text/html",
        ".js": "text/javascript",
        ".css": "text/css",
        ".map": "application/json",
        ".svg": "image/svg+xml",
    }

    def _serve_ui(self, path: str) -> bool:
        ui = self.hub.ui_dir
        if ui is None or not ui.exists():
            return False
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (ui / rel).resolve()
        if not str(target).startswith(str(ui.resolve())) or not target.is_file():
            return False
        self._text(
            200,
            target.read_text(),
            self._MIME.get(target.suffix, "application/octet-stream"),
        )
        return True


def serve(
    home: str | Path,
    port: int = 8320,
    host: str = "127.0.0.1",
    ui_dir: str | Path | None = None,
) -> tuple[ThreadingHTTPServer, GatewayHub]:
    """Start the gateway on loopback; returns (server, hub).

    Callers own the server lifecycle: run serve_forever() on a thread and
    shutdown() when done.
    """
    hub = GatewayHub(home, ui_dir=ui_dir)
    handler = type("BoundHandler", (_Handler,), {"hub": hub})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server, hub
