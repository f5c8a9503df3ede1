"""
Continuous-authentication bypass via sensor replay
==================================================

The toy authenticator enrolls a template from the device holder's motion
signature and verifies fresh traces by feature distance. An impostor's
trace lands far outside the threshold — until a replay policy feeds the
authenticator the recorded genuine trace.
"""

from whitelie.scenarios import run_auth_round

accepted_replays = 0
for seed in range(1, 11):
    result = run_auth_round(seed)
    accepted_replays += result["replay_accepted"]
    print(
        f"seed {seed:2d}: genuine={'accept' if result['genuine_accepted'] else 'reject'}  "
        f"impostor={'accept' if result['impostor_accepted'] else 'reject'}  "
        f"replay={'accept' if result['replay_accepted'] else 'reject'}"
    )

print(f"\nreplay bypass succeeded on {accepted_replays}/10 seeds (tau={result['tau']})")
