"""
Brute-force reference implementations used to check the sparse simulator.

Nothing here calls into ``latticewalk.walk``. The dense oracle builds the full
step matrix on a box that is one site larger than the walk can reach, and the
two-walker oracle evolves two coined walkers on one line with a joint coin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from .coins import COIN_INDEX, COIN_ORDER, CoinOperator, CoinSchedule, to_tensor_order

__all__ = [
    "DENSE_MAX_STEPS",
    "DenseState",
    "dense_evolve",
    "step_matrix",
    "TwoWalkerState",
    "two_walker_evolve",
    "one_dimensional_walk",
]

DENSE_MAX_STEPS = 8


@dataclass(frozen=True)
class DenseState:
    """Amplitudes ``vector[((x1 + L) * W + (x2 + L)) * 4 + k]`` on the box [-L, L]^2, W = 2L + 1."""

    vector: NDArray[np.complex128]
    half_width: int

    @property
    def width(self) -> int:
        return 2 * self.half_width + 1

    def as_grid(self) -> NDArray[np.complex128]:
        """Amplitudes reshaped to ``[x1 + L, x2 + L, coin index]``."""
        return self.vector.reshape(self.width, self.width, 4)

    def amplitudes(self, atol: float = 0.0) -> dict[tuple[int, int, int, int], complex]:
        g = self.as_grid()
        L = self.half_width
        out = {}
        for i, j, k in zip(*np.nonzero(np.abs(g) > atol)):
            c1, c2 = COIN_ORDER[k]
            out[(int(i) - L, int(j) - L, c1, c2)] = complex(g[i, j, k])
        return out

    def position_probabilities(self) -> NDArray[np.float64]:
        return (np.abs(self.as_grid()) ** 2).sum(axis=-1)


def step_matrix(schedule: CoinSchedule, step: int, half_width: int) -> sparse.csr_matrix:
    """Full ``S @ C`` for one step on the box [-L, L]^2 (shifts leaving the box are dropped)."""
    L = half_width
    W = 2 * L + 1
    dim = W * W * 4
    coin_blocks = []
    for i in range(W):
        for j in range(W):
            coin_blocks.append(schedule.coin_at(i - L, j - L, step).matrix)
    C = sparse.block_diag(coin_blocks, format="csr")

    rows, cols = [], []
    for i in range(W):
        for j in range(W):
            for k, (c1, c2) in enumerate(COIN_ORDER):
                ti, tj = i + c1, j + c2
                if 0 <= ti < W and 0 <= tj < W:
                    rows.append((ti * W + tj) * 4 + k)
                    cols.append((i * W + j) * 4 + k)
    S = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(dim, dim))
    return S @ C


def dense_evolve(
    initial: tuple[int, int, int, int] | NDArray,
    schedule: CoinSchedule,
    n: int,
    half_width: Optional[int] = None,
) -> DenseState:
    """
    Evolve by explicit matrix multiplication for ``n <= DENSE_MAX_STEPS`` steps.

    ``initial`` is a basis label ``(x1, x2, c1, c2)`` or a full vector on the
    box. The box half-width defaults to ``max(|x|) + n + 1`` so the boundary
    layer stays empty; this is asserted after evolution.
    """
    if n > DENSE_MAX_STEPS:
        raise ValueError(
            f"dense oracle limited to n <= {DENSE_MAX_STEPS} (state dimension grows as 4(2n+3)^2)"
        )
    if n < 0:
        raise ValueError("n must be non-negative")
    if isinstance(initial, tuple):
        x1, x2, c1, c2 = initial
        L = half_width if half_width is not None else max(abs(x1), abs(x2)) + n + 1
        W = 2 * L + 1
        psi = np.zeros(W * W * 4, np.complex128)
        psi[((x1 + L) * W + (x2 + L)) * 4 + COIN_INDEX[(c1, c2)]] = 1.0
    else:
        if half_width is None:
            raise ValueError("half_width is required for a vector initial state")
        L = half_width
        psi = np.asarray(initial, np.complex128).copy()
    for step in range(n):
        psi = step_matrix(schedule, step, L) @ psi
    state = DenseState(psi, L)
    g = state.as_grid()
    edge = np.concatenate([g[0].ravel(), g[-1].ravel(), g[:, 0].ravel(), g[:, -1].ravel()])
    if np.abs(edge).max() > 0:
        raise ArithmeticError("walk reached the box boundary; increase half_width")
    return state


@dataclass(frozen=True)
class TwoWalkerState:
    """
    Two coined walkers on one line: ``psi[x1 + L, c1, x2 + L, c2]``.

    Coin axes use index ``(c + 1) // 2``, i.e. the order (-1, +1).
    """

    psi: NDArray[np.complex128]
    half_width: int

    def amplitude(self, x1: int, c1: int, x2: int, c2: int) -> complex:
        L = self.half_width
        return complex(self.psi[x1 + L, (c1 + 1) // 2, x2 + L, (c2 + 1) // 2])

    def coincidence_distribution(self) -> dict[tuple[int, int], float]:
        """``P(x1, x2) = sum_{c1, c2} |psi|^2`` over nonzero entries."""
        p = (np.abs(self.psi) ** 2).sum(axis=(1, 3))
        L = self.half_width
        return {
            (int(i) - L, int(j) - L): float(p[i, j]) for i, j in zip(*np.nonzero(p))
        }

    def norm_squared(self) -> float:
        return float((np.abs(self.psi) ** 2).sum())


JointCoin = Union[CoinOperator, Callable[[int, int, int], CoinOperator]]


def two_walker_evolve(
    initial: tuple[int, int, int, int] | dict[tuple[int, int, int, int], complex],
    joint_coin: JointCoin,
    n: int,
) -> TwoWalkerState:
    """
    Evolve two walkers with a joint 4x4 coin on their coins (c1, c2).

    ``initial`` is ``(x1, c1, x2, c2)`` or a dict of such labels to amplitudes.
    ``joint_coin`` is a fixed operator or a rule ``(x1, x2, step) -> operator``,
    which allows coins that act only when the walkers meet. After the coin
    both walkers move simultaneously, each by its own coin value.
    """
    if not isinstance(initial, dict):
        initial = {tuple(initial): 1.0}
    reach = max(max(abs(k[0]), abs(k[2])) for k in initial) + n + 1
    L = reach
    W = 2 * L + 1
    psi = np.zeros((W, 2, W, 2), np.complex128)
    for (x1, c1, x2, c2), a in initial.items():
        psi[x1 + L, (c1 + 1) // 2, x2 + L, (c2 + 1) // 2] += a

    rule = joint_coin if callable(joint_coin) and not isinstance(joint_coin, CoinOperator) else None
    for step in range(n):
        if rule is None:
            u = to_tensor_order(joint_coin.matrix).reshape(2, 2, 2, 2)
            psi = _apply_joint(psi, u)
        else:
            out = np.empty_like(psi)
            for i in range(W):
                for j in range(W):
                    u = to_tensor_order(rule(i - L, j - L, step).matrix).reshape(2, 2, 2, 2)
                    out[i, :, j, :] = np.einsum("abcd,cd->ab", u, psi[i, :, j, :])
            psi = out
        shifted = np.zeros_like(psi)
        for ci, c in ((0, -1), (1, 1)):
            for di, d in ((0, -1), (1, 1)):
                shifted[:, ci, :, di] = np.roll(np.roll(psi[:, ci, :, di], c, axis=0), d, axis=1)
        psi = shifted
    return TwoWalkerState(psi, L)


def _apply_joint(psi: NDArray, u: NDArray) -> NDArray:
    # u[a, b, c, d]: output coins (a, b) from input coins (c, d).
    return np.einsum("abcd,icjd->iajb", u, psi)


def one_dimensional_walk(
    initial: tuple[int, int], coin: NDArray, n: int
) -> dict[int, float]:
    """
    Position distribution of a 1D coined walk after ``n`` steps.

    ``coin`` is a 2x2 unitary in the coin order (-1, +1); ``initial`` is ``(x, c)``.
    """
    coin = np.asarray(coin, np.complex128)
    if np.abs(coin @ coin.conj().T - np.eye(2)).max() > 1e-12:
        raise ValueError("coin is not unitary")
    x0, c0 = initial
    L = abs(x0) + n + 1
    psi = np.zeros((2 * L + 1, 2), np.complex128)
    psi[x0 + L, (c0 + 1) // 2] = 1.0
    for _ in range(n):
        psi = psi @ coin.T
        psi = np.stack([np.roll(psi[:, 0], -1), np.roll(psi[:, 1], 1)], axis=1)
    p = (np.abs(psi) ** 2).sum(axis=1)
    return {int(i) - L: float(p[i]) for i in np.nonzero(p)[0]}
