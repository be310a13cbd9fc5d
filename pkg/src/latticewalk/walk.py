"""
Sparse state-vector evolution of a single walker on the diagonal-neighbour square lattice.

A state maps each occupied lattice site (x1, x2) to a length-4 complex vector
of coin amplitudes in ``COIN_ORDER``. One step is the coin followed by the
shift ``|x1, x2, c1, c2> -> |x1 + c1, x2 + c2, c1, c2>``.
"""

from __future__ import annotations

from collections.abc import Mapping
from types import MappingProxyType
from typing import Iterator, Literal

import numpy as np
from numpy.typing import NDArray

from .coins import COIN_INDEX, COIN_ORDER, CoinSchedule

__all__ = [
    "NORM_ATOL",
    "NormalizationError",
    "WalkState",
    "new_localized_state",
    "apply_coin",
    "apply_step",
    "apply_shift",
    "evolve",
    "trajectory",
    "position_distribution",
]

NORM_ATOL = 1e-9

Position = tuple[int, int]
BasisLabel = tuple[int, int, int, int]


class NormalizationError(ArithmeticError):
    """Raised when evolution leaves the unit sphere, i.e. a coin is broken."""


def _check_coin_value(c) -> int:
    if c not in (-1, 1) or isinstance(c, bool):
        raise ValueError(f"coin value must be -1 or +1, got {c!r}")
    return int(c)


class WalkState:
    """
    Immutable pure state of the walker.

    Parameters
    ----------
    sites : mapping (x1, x2) -> complex array of shape (4,)
        Coin amplitudes per occupied site, in ``COIN_ORDER``.
    step_count : int
        Number of walk steps already applied.
    """

    __slots__ = ("_sites", "step_count")

    def __init__(self, sites: Mapping[Position, NDArray], step_count: int = 0):
        frozen = {}
        for pos, vec in sites.items():
            v = np.array(vec, dtype=np.complex128)
            if v.shape != (4,):
                raise ValueError(f"site {pos} needs 4 coin amplitudes, got {v.shape}")
            v.setflags(write=False)
            frozen[(int(pos[0]), int(pos[1]))] = v
        self._sites = MappingProxyType(frozen)
        self.step_count = int(step_count)

    @classmethod
    def from_amplitudes(
        cls, amplitudes: Mapping[BasisLabel, complex], step_count: int = 0
    ) -> "WalkState":
        """Build a state from ``{(x1, x2, c1, c2): amplitude}``."""
        sites: dict[Position, NDArray] = {}
        for (x1, x2, c1, c2), a in amplitudes.items():
            k = COIN_INDEX[(_check_coin_value(c1), _check_coin_value(c2))]
            v = sites.setdefault((x1, x2), np.zeros(4, np.complex128))
            v[k] += a
        return cls(sites, step_count)

    @property
    def sites(self) -> Mapping[Position, NDArray]:
        return self._sites

    @property
    def amplitudes(self) -> dict[BasisLabel, complex]:
        """Nonzero amplitudes keyed by ``(x1, x2, c1, c2)``."""
        out = {}
        for (x1, x2), v in self._sites.items():
            for k, (c1, c2) in enumerate(COIN_ORDER):
                if v[k] != 0:
                    out[(x1, x2, c1, c2)] = complex(v[k])
        return out

    def amplitude(self, x1: int, x2: int, c1: int, c2: int) -> complex:
        v = self._sites.get((x1, x2))
        return 0j if v is None else complex(v[COIN_INDEX[(c1, c2)]])

    def norm_squared(self) -> float:
        return float(sum(np.vdot(v, v).real for v in self._sites.values()))

    def support(self) -> list[BasisLabel]:
        return sorted(self.amplitudes)

    def __iter__(self) -> Iterator[tuple[BasisLabel, complex]]:
        return iter(sorted(self.amplitudes.items()))

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __repr__(self) -> str:
        return f"WalkState(sites={len(self._sites)}, step_count={self.step_count})"


def new_localized_state(x1: int, x2: int, c1: int, c2: int) -> WalkState:
    """Walker at (x1, x2) in coin state (c1, c2) with amplitude 1."""
    return WalkState.from_amplitudes({(x1, x2, c1, c2): 1.0})


def _assert_normalized(state: WalkState, where: str) -> None:
    dev = abs(state.norm_squared() - 1.0)
    if dev >= NORM_ATOL:
        raise NormalizationError(f"norm drifted by {dev:.3e} after {where}")


def apply_coin(state: WalkState, schedule: CoinSchedule, step_index: int) -> WalkState:
    """Multiply the coin vector at each site by ``schedule.coin_at(x1, x2, step_index)``."""
    out = {
        pos: schedule.coin_at(pos[0], pos[1], step_index).matrix @ v
        for pos, v in state.sites.items()
    }
    new = WalkState(out, state.step_count)
    _assert_normalized(new, f"coin at step {step_index}")
    return new


def apply_shift(state: WalkState, axes: tuple[int, ...] = (0, 1)) -> WalkState:
    """Move each coin component along the listed axes (0 -> x1, 1 -> x2) by its coin value."""
    out: dict[Position, NDArray] = {}
    for (x1, x2), v in state.sites.items():
        for k, (c1, c2) in enumerate(COIN_ORDER):
            if v[k] == 0:
                continue
            dest = (x1 + c1 if 0 in axes else x1, x2 + c2 if 1 in axes else x2)
            w = out.get(dest)
            if w is None:
                w = out[dest] = np.zeros(4, np.complex128)
            w[k] += v[k]
    return WalkState(out, state.step_count)


def apply_step(state: WalkState) -> WalkState:
    """Shift ``x_i -> x_i + c_i`` for every component and advance ``step_count``."""
    shifted = apply_shift(state)
    return WalkState(shifted.sites, state.step_count + 1)


def _staged_step(state: WalkState, schedule: CoinSchedule, step_index: int) -> WalkState:
    c1_sched, c2_sched = schedule.stages
    s = apply_coin(state, c2_sched, step_index)
    s = apply_shift(s, axes=(1,))
    s = apply_coin(s, c1_sched, step_index)
    s = apply_shift(s, axes=(0,))
    return WalkState(s.sites, state.step_count + 1)


def evolve(
    state: WalkState,
    schedule: CoinSchedule,
    n: int,
    mode: Literal["combined", "staged"] = "combined",
) -> WalkState:
    """
    Apply ``n`` walk steps.

    In ``"combined"`` mode each step is coin then full shift. In ``"staged"``
    mode the hardware order is used: C2, x2 shift, C1, x1 shift; this needs a
    schedule built by ``staged_schedule`` or ``named_coin``.

    The step index passed to the schedule is the absolute ``step_count`` of
    the state, starting at 0 for the first step.
    """
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    if mode == "staged" and schedule.stages is None:
        raise ValueError("staged evolution needs a schedule with hardware stages")
    if mode not in ("combined", "staged"):
        raise ValueError(f"unknown evolution mode {mode!r}")
    for _ in range(n):
        if mode == "staged":
            state = _staged_step(state, schedule, state.step_count)
        else:
            state = apply_step(apply_coin(state, schedule, state.step_count))
        _assert_normalized(state, f"step {state.step_count}")
    return state


def trajectory(
    state: WalkState, schedule: CoinSchedule, n: int, mode: str = "combined"
) -> list[WalkState]:
    """States after 0, 1, ..., n steps."""
    states = [state]
    for _ in range(n):
        states.append(evolve(states[-1], schedule, 1, mode))
    return states


def position_distribution(state: WalkState):
    """Probability of each site, traced over the coin."""
    from .analysis import Distribution

    coin = {}
    for (x1, x2), v in state.sites.items():
        p = np.abs(v) ** 2
        for k, (c1, c2) in enumerate(COIN_ORDER):
            if p[k] > 0:
                coin[(x1, x2, c1, c2)] = float(p[k])
    return Distribution.from_coin_resolved(coin)
