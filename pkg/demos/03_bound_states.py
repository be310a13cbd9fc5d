"""
Bound states from a contact interaction
=======================================

Applying an extra controlled-Z only where x1 = x2 mimics a short-range
interaction between two particles. Part of the wave packet then stays stuck
to the diagonal, a two-particle bound state, which shows up as a larger
probability of finding both particles at the same site.
"""

from latticewalk import (
    diagonal_confinement,
    evolve,
    named_coin,
    new_localized_state,
    position_distribution,
)
from latticewalk.coins import EOM_CROSSTALK

start = new_localized_state(0, 0, -1, -1)

# %%
# Confinement after each step, free walk against interacting walk.
print("step  hadamard  interacting")
for n in range(1, 11):
    free = diagonal_confinement(position_distribution(evolve(start, named_coin("hadamard"), n)))
    bound = diagonal_confinement(
        position_distribution(evolve(start, named_coin("nonlinear_cz_diagonal"), n)))
    print(f"{n:4d}  {free:8.4f}  {bound:11.4f}")

# %%
# The modulator that supplies the phase also leaks a fraction of it onto the
# other polarisation. That weakens the effect without removing it.
for crosstalk in (0.0, EOM_CROSSTALK):
    p = position_distribution(
        evolve(start, named_coin("nonlinear_cz_diagonal", crosstalk=crosstalk), 7))
    print(f"crosstalk {crosstalk:.3f}: confinement after 7 steps {diagonal_confinement(p):.4f}")

# %%
# The diagonal profile after 7 steps.
p = position_distribution(evolve(start, named_coin("nonlinear_cz_diagonal"), 7))
for x in range(-7, 8, 2):
    print(f"P({x:2d},{x:2d}) = {p.get(x, x):.4f} {'#' * int(200 * p.get(x, x))}")
