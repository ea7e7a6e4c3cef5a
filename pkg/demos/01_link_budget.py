"""Optical link budget walk-through.

Shows how Beer-Lambert attenuation and conical beam spreading shape the
usable link length in the three reference water types, and how the
acoustic side compares: sound reaches everything, light does not.
"""

import math

from uwoan import (
    OpticalLinkBudget,
    Position,
    WaterProfile,
    acoustic_delay,
    max_optical_range,
    optical_received_power,
    path_transmittance,
)

budget = OpticalLinkBudget()
print("default transmitter/receiver:")
print(f"  tx power          {budget.tx_power} W")
print(f"  divergence        {math.degrees(budget.divergence_half_angle):.1f} deg half-angle")
print(f"  aperture          {budget.rx_aperture_area * 1e4:.1f} cm^2")
print(f"  sensitivity       {budget.rx_sensitivity} W")
print()

waters = [("clear ocean", 0.056), ("coastal", 0.120), ("turbid harbor", 0.151)]

print("transmittance over a horizontal path (surface water):")
print("  length   " + "".join(f"{name:>14}" for name, _ in waters))
for L in (10, 50, 100, 200):
    row = [path_transmittance(Position(0, 0, 0), Position(L, 0, 0),
                              WaterProfile(c0=c)) for _, c in waters]
    print(f"  {L:4d} m  " + "".join(f"{t:14.3e}" for t in row))
print()

print("received power at 100 m vs the sensitivity floor:")
for name, c in waters:
    p = optical_received_power(Position(0, 0, 0), Position(100, 0, 0),
                               budget, WaterProfile(c0=c))
    verdict = "link closes" if p >= budget.rx_sensitivity else "too dim"
    print(f"  {name:14} {p:10.3e} W  ({verdict})")
print()

print("maximum optical range (bisection on the closed form):")
for name, c in waters:
    reach = max_optical_range(budget, WaterProfile(c0=c))
    print(f"  {name:14} c={c:5.3f}  ->  {reach:6.1f} m")
print()

d = 200.0
print(f"acoustic propagation over the same {d:.0f} m: "
      f"{acoustic_delay(d, WaterProfile()) * 1000:.1f} ms one way "
      "(reach is never the problem; latency is)")
