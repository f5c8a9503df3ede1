"""
Abuse detection and one-click mitigation
========================================

Scripted malicious apps reproduce the banned-app behavior classes. The
detector evaluates pure rules over the access log; each alert ships a
recommended policy change, and replaying the scenario after applying it
shows the offending accesses deceived or blocked.
"""

from whitelie import PolicyStore
from whitelie.scenarios import run_scenario

# None of the benign catalog trips a rule.
for name in ("uber-like", "snapchat-like", "truecaller-like", "benign-notes"):
    report = run_scenario(name)
    print(f"{name:18s} alerts: {[a.rule.value for a in report.alerts] or 'none'}")

# The covert uploader moves 120 KiB of storage scans while backgrounded.
report = run_scenario("pdf-scanner-like")
alert = next(a for a in report.alerts if a.rule.value == "BgUpload")
print(f"\npdf-scanner-like raised {alert.rule.value}; evidence seq {list(alert.evidence)}")
print("recommended:", alert.recommended.to_json())

# Apply the mitigation and replay: background sends flip to Blocked.
store = PolicyStore()
alert.recommended.apply(store)
replay = run_scenario("pdf-scanner-like", store=store)
bg_sends = [
    (e.seq, e.action.value, e.bytes)
    for e in replay.entries
    if e.permission.value == "Internet" and e.state.value == "Background"
]
print("background sends after mitigation:", bg_sends)
print("alerts after mitigation:", [a.rule.value for a in replay.alerts] or "none")

# SMS fraud: the send API is blocked, reading the inbox still works.
report = run_scenario("private-sms-like")
alert = next(a for a in report.alerts if a.rule.value == "SmsSendNoInteraction")
store = PolicyStore()
alert.recommended.apply(store)
replay = run_scenario("private-sms-like", store=store)
for e in replay.entries:
    if e.permission.value in ("SmsSend", "SmsRead"):
        print(f"  {e.permission.value:8s} -> {e.action.value}")
