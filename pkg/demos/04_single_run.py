"""One full initialization run, narrated from the event trace.

Deploys the paper-scale scenario (50 nodes in a 200 m cube) in coastal
water, runs the engine once, and walks through what happened: the first
handshakes, any dual-hop rescues, and the final topology.
"""

from uwoan import SimConfig, export_topology, simulate

cfg = SimConfig(c0=0.120, seed=7)
result = simulate(cfg, collect_trace=True)
report = result.report

print(f"scenario: {cfg.n_uwn} nodes, c0={cfg.c0}, seed={cfg.seed}, "
      f"{cfg.t_max_s:.0f} s budget")
print()
print("first events on the wire:")
for line in result.trace_lines[:6]:
    print("  " + line[:110])
print("  ...")
print()

beams = [l for l in result.trace_lines
         if "OPTICAL_ARRIVAL bs" in l and "relayed=0" in l]
relayed = [l for l in result.trace_lines
           if "OPTICAL_ARRIVAL bs" in l and "relayed=1" in l]
print(f"optical arrivals at the base station: {len(beams)} direct beams, "
      f"{len(relayed)} relayed")
print()

print("outcome:")
print(f"  accessed    {report.n_accessed:3d}  "
      f"({report.access_rate:.0%}, {report.dual_hop_rate:.0%} via relay)")
print(f"  failed      {report.n_failed:3d}")
print(f"  unresolved  {report.n_unresolved:3d}")
print(f"  mean one-way acoustic delay {report.avg_sound_delay_s * 1000:.1f} ms")
print(f"  worst decomposition delay   {report.max_decomp_delay_s:.1f} s")
print()

dual = [n for n in report.nodes if n.via_relay]
if dual:
    n = dual[0]
    print(f"example dual-hop rescue: {n.node} could not reach the base "
          f"station directly;")
    print(f"  accessed at t={n.access_time:.2f} s through relay {n.relay}")
    print()

dot = export_topology(report, "dot")
print(f"topology as DOT ({len(report.edges)} edges; dashed = relay leg):")
for line in dot.splitlines()[:8]:
    print("  " + line)
print("  ...")
