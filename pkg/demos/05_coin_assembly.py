"""
Building coins from wave plates
===============================

Each coin is a product of four half-wave plates acting on pairs of the four
polarisation/spatial modes. Multiplying the plate matrices exactly as written
at 22.5 degrees does not give H x H on its own: the product carries fixed
signs on two modes at either end, and those make it entangling. Undoing these
static signs, which a real setup absorbs into the path phases, recovers the
textbook coins.
"""

import numpy as np

from latticewalk import HwpAngles, coin_from_angles, stage_coins
from latticewalk.coins import (
    compose,
    hadamard_2x2,
    hwp_matrix,
    kron_coin,
    operator_schmidt_values,
)

np.set_printoptions(precision=3, suppress=True)
t = np.pi / 8
hh = kron_coin(hadamard_2x2(), hadamard_2x2())

# %%
raw = compose([hwp_matrix(3, t), hwp_matrix(4, t), hwp_matrix(2, t), hwp_matrix(1, t)])
print(raw.matrix.real)
print("operator Schmidt values:", operator_schmidt_values(raw.matrix))
print("raw == diag(1,1,1,-1) HH diag(1,-1,1,1):",
      np.allclose(raw.matrix, np.diag([1, 1, 1, -1]) @ hh @ np.diag([1, -1, 1, 1])))

# %%
# With the sign corrections each half of the step acts on one axis only.
c1, c2 = stage_coins(HwpAngles.uniform(t))
print("C1 == H x I:", c1.allclose(kron_coin(hadamard_2x2(), np.eye(2))))
print("C2 == I x H:", c2.allclose(kron_coin(np.eye(2), hadamard_2x2())))

# %%
# Turning the first plate to -22.5 degrees gives the controlled-XZ coin.
cxz = coin_from_angles(HwpAngles(-t, t, t, t))
print((np.linalg.inv(hh) @ cxz.matrix).real)
