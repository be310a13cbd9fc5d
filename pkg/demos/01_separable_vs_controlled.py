"""
Separable and controlled coins
==============================

A single walker on a square lattice with a Hadamard coin on each axis is just
two independent one-dimensional walks. Swapping in a controlled coin couples
the axes, and the position distribution stops factorising.
"""

import numpy as np

from latticewalk import (
    evolve,
    factorization_residual,
    marginal,
    named_coin,
    new_localized_state,
    position_distribution,
)

STEPS = 10
start = new_localized_state(0, 0, -1, -1)


def shade(p, extent=STEPS):
    """Crude text heat map of P(x1, x2), x1 down and x2 across."""
    grid = p.to_array(extent)
    ramp = " .:-=+*#%@"
    top = grid.max()
    rows = []
    for row in grid[::2] if extent % 2 == 0 else grid[1::2]:
        cells = row[::2] if extent % 2 == 0 else row[1::2]
        rows.append("".join(ramp[min(int(9 * v / top + 0.999), 9)] * 2 for v in cells))
    return "\n".join(rows)


# %%
# Hadamard on both axes.
hadamard = position_distribution(evolve(start, named_coin("hadamard"), STEPS))
print(shade(hadamard))
print("factorisation residual:", factorization_residual(hadamard))

# %%
# The marginal along x1 is the familiar lopsided one-dimensional Hadamard walk.
for x, v in marginal(hadamard, 1).items():
    print(f"{x:4d} {v:.4f} {'#' * int(60 * v)}")

# %%
# Controlled-XZ: c2 is flipped (with a sign) only when c1 = -1.
cxz = position_distribution(evolve(start, named_coin("controlled_xz"), STEPS))
print(shade(cxz))
print("factorisation residual:", factorization_residual(cxz))

# %%
# Product of the marginals against the actual distribution, on the diagonal.
m1, m2 = marginal(cxz, 1), marginal(cxz, 2)
for x in range(-STEPS, STEPS + 1, 2):
    print(f"P({x:3d},{x:3d}) = {cxz.get(x, x):.4f}   P1*P2 = {m1.get(x, 0) * m2.get(x, 0):.4f}")

assert np.isclose(hadamard.total(), 1) and np.isclose(cxz.total(), 1)
