"""
Overhead benchmarks
===================

Two views of the cost of deceiving:

- per-call latency added by the hook path, measured with a monotonic timer
  around the dispatch boundary only (absolute handset numbers are metadata,
  not targets — ordering is the contract);
- the battery-saver ledger, where blocking a call from the before-hook
  saves exactly the resource's modeled draw.
"""

from whitelie.metrics import bench_api_overhead, bench_battery_saver, reference_model

overhead = bench_api_overhead(n_per_permission=300)
print("added latency per hooked call (this process):")
for perm, stats in overhead["per_permission"].items():
    reference = overhead["reference_ms"].get(perm)
    print(
        f"  {perm:10s} mean {stats['mean_added_ns'] / 1e6:7.3f} ms   "
        f"p95 {stats['p95_added_ns'] / 1e6:7.3f} ms   (handset reference: {reference} ms)"
    )

battery = bench_battery_saver(n=1000, model=reference_model())
print(
    f"\nbattery saver over {battery['n']} calls: "
    f"baseline {battery['baseline_uah']:.1f} uAh -> saver {battery['saver_uah']:.1f} uAh"
)
print(
    f"saved {battery['saved_uah_per_call']:.2f} uAh per call "
    f"({battery['savings_pct']:.2f}%); reference {battery['reference_saved_uah_per_call']} uAh "
    f"({battery['reference_savings_pct']}%)"
)
print(f"process max RSS: {battery['max_rss_kb'] / 1024:.1f} MB")
