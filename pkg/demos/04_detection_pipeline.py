"""
From clicks back to a distribution
==================================

In the fibre-loop experiment a lattice site is an arrival time. This script
runs the full chain: check the time bins cannot collide, sample lossy
detector clicks, map arrival times back to sites, and compare with theory.
"""

import numpy as np

from latticewalk import (
    MEASURED_LOSS,
    LOOP_TIMING,
    TimingConfig,
    check_no_overlap,
    evolve,
    expected_events,
    named_coin,
    new_localized_state,
    position_distribution,
    reconstruct_distribution,
    run_detection,
    similarity,
    time_bins,
)
from latticewalk.hardware import coin_weights_of, ideal_coin_probabilities

STEPS = 6
coin = named_coin("hadamard")

# %%
# Step-one bins sit 3.11 ns and 46.42 ns apart, one round trip in.
pos, t = time_bins(1, LOOP_TIMING)
for (x1, x2), ti in zip(pos, t):
    print(f"site ({x1:2d},{x2:2d}) -> {ti:8.2f} ns")

# %%
# A loop that is too short mixes consecutive steps.
print(check_no_overlap(LOOP_TIMING, 12).describe())
print(check_no_overlap(TimingConfig(t_min=300.0), 12).describe())

# %%
# Two million pulses with the measured losses. Only 3% get in and about half
# survive each round trip, so late steps are starved of counts.
run = run_detection(coin, MEASURED_LOSS, LOOP_TIMING, STEPS, 2_000_000, seed=1)
weights = coin_weights_of(ideal_coin_probabilities(coin, STEPS))
expected = expected_events(MEASURED_LOSS, STEPS, 2_000_000, weights)

# The x1 - 1 loop taps out 12% and the x1 + 1 loop 4%, so clicks over-represent
# c1 = -1 threefold. Reconstruction divides that back out.
calibration = MEASURED_LOSS.click_probabilities()
ideal = evolve(new_localized_state(0, 0, -1, -1), coin, 0)
print("step  clicks  expected  similarity")
for n in range(1, STEPS + 1):
    ideal = evolve(ideal, coin, 1)
    clicks = int(np.sum(run.records["step"] == n))
    rec = reconstruct_distribution(run.records, LOOP_TIMING, n, calibration)
    s = similarity(position_distribution(ideal), rec.distribution)
    print(f"{n:4d}  {clicks:6d}  {expected[n - 1]:8.0f}  {s:10.4f}")
