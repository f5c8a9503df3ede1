"""
Driving the gateway API
=======================

The loopback HTTP gateway is what the dashboard talks to: package listing,
policy document round trips, scenario start/stop, alerts with one-click
mitigation, and a server-sent-event stream of access-log entries.
"""

import http.client
import json
import tempfile
import threading

from whitelie.gateway.server import serve

server, hub = serve(tempfile.mkdtemp(prefix="wl-demo-"), port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
port = server.server_address[1]
print(f"gateway on 127.0.0.1:{port}")


def call(method, path, body=None):
    conn = http.client.HTTPConnection("127.0.0.1", port, timeout=10)
    conn.request(method, path, body=json.dumps(body) if body else None)
    response = conn.getresponse()
    data = response.read().decode()
    conn.close()
    return json.loads(data) if data.startswith(("{", "[")) else data


apps = call("GET", "/apps")
print(f"{len(apps)} packages; first: {apps[0]['app_id']} perms={apps[0]['granted']}")

call("POST", "/scenarios/facebook-like/start", {})
hub.wait_idle()
print("entries streamed:", call("GET", "/status")["entries"])

alerts = call("GET", "/alerts")
print("alerts:", [(a["rule"], a["app"]) for a in alerts])
mic = next(a for a in alerts if a["rule"] == "MicWithoutIndicator")
print("apply:", call("POST", f"/alerts/{mic['id']}/apply", {}))

call("POST", "/scenarios/facebook-like/start", {})
hub.wait_idle()
tail = call("GET", "/logs")[-6:]
for e in tail:
    print(f"  #{e['seq']} {e['permission']:10s} {e['action']}")

server.shutdown()
