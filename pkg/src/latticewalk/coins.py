"""
Coin operators for the 2D walk, assembled from wave-plate and modulator primitives.

All 4x4 matrices are written in the coin order fixed by ``COIN_ORDER``::

    index 0: (c1, c2) = (-1, -1)   horizontal, spatial mode a
    index 1: (c1, c2) = (-1, +1)   vertical,   spatial mode a
    index 2: (c1, c2) = (+1, +1)   horizontal, spatial mode b
    index 3: (c1, c2) = (+1, -1)   vertical,   spatial mode b

This order is not the Kronecker order of the two coin factors; use
``kron_coin`` / ``to_tensor_order`` to move between the two.

Raw wave-plate products differ from the logical two-particle coins by fixed
+-1 phases on individual coin states (static phases picked up around the
loop). ``coin_from_angles`` and ``stage_coins`` apply those fixed corrections,
so that all plates at pi/8 give exactly H (x) H.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "COIN_ORDER",
    "COIN_INDEX",
    "TENSOR_TO_COIN",
    "UNITARY_ATOL",
    "EOM_CROSSTALK",
    "CoinOperator",
    "CoinSchedule",
    "HwpAngles",
    "hadamard_2x2",
    "kron_coin",
    "to_tensor_order",
    "from_tensor_order",
    "operator_schmidt_values",
    "hwp_matrix",
    "eom_matrix",
    "compose",
    "coin_from_angles",
    "stage_coins",
    "staged_schedule",
    "diagonal",
    "named_coin",
    "NAMED_ANGLES",
    "COIN_NAMES",
]

COIN_ORDER: tuple[tuple[int, int], ...] = ((-1, -1), (-1, 1), (1, 1), (1, -1))
COIN_INDEX: dict[tuple[int, int], int] = {c: i for i, c in enumerate(COIN_ORDER)}

# Kronecker index 2*i1 + i2 with i = (c + 1) // 2, mapped to the coin index above.
TENSOR_TO_COIN = np.array([COIN_INDEX[(c1, c2)] for c1 in (-1, 1) for c2 in (-1, 1)])

UNITARY_ATOL = 1e-12

# Fraction of the modulator phase leaking onto the vertical polarisation.
EOM_CROSSTALK = 1 / 3.5

# Static sign corrections (see module docstring). Output of C1, input of C2,
# and the junction between the two stages.
_OUT_SIGNS = np.array([1.0, 1.0, 1.0, -1.0])
_IN_SIGNS = np.array([1.0, -1.0, 1.0, 1.0])
_MID_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])


def _as_matrix(m) -> NDArray[np.complex128]:
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ValueError(f"coin matrix must be 4x4, got shape {m.shape}")
    return m


@dataclass(frozen=True, eq=False)
class CoinOperator:
    """
    Unitary 4x4 coin in ``COIN_ORDER``.

    Unitarity is checked on construction (max entry of ``U U^dagger - I``
    below ``UNITARY_ATOL``); a non-unitary matrix raises ``ValueError``.
    """

    matrix: NDArray[np.complex128]
    label: str = ""

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        dev = np.abs(m @ m.conj().T - np.eye(4)).max()
        if dev >= UNITARY_ATOL:
            raise ValueError(
                f"coin {self.label!r} is not unitary (max |UU^+ - I| = {dev:.3e})"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "CoinOperator") -> "CoinOperator":
        return CoinOperator(self.matrix @ other.matrix, f"{self.label}*{other.label}")

    @property
    def is_separable(self) -> bool:
        """True if the coin factorises as U1 (x) U2 over (c1, c2)."""
        s = operator_schmidt_values(self.matrix)
        return bool(s[1] < 1e-9 * s[0])

    def allclose(self, other, atol: float = UNITARY_ATOL) -> bool:
        other = other.matrix if isinstance(other, CoinOperator) else other
        return bool(np.abs(self.matrix - np.asarray(other)).max() < atol)

    def __repr__(self) -> str:
        return f"CoinOperator(label={self.label!r})"


def hadamard_2x2() -> NDArray[np.complex128]:
    """
    Single-coin Hadamard in the order (-1, +1).

    H|+1> = (|+1> + |-1>)/sqrt2 and H|-1> = (|+1> - |-1>)/sqrt2.
    """
    return np.array([[-1.0, 1.0], [1.0, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


def to_tensor_order(m: NDArray) -> NDArray:
    """Reorder a coin-order 4x4 matrix into Kronecker (c1, c2) order."""
    m = np.asarray(m)
    return m[np.ix_(TENSOR_TO_COIN, TENSOR_TO_COIN)]


def from_tensor_order(m: NDArray) -> NDArray:
    """Inverse of ``to_tensor_order``."""
    m = np.asarray(m)
    out = np.empty_like(m)
    out[np.ix_(TENSOR_TO_COIN, TENSOR_TO_COIN)] = m
    return out


def kron_coin(u1: NDArray, u2: NDArray) -> NDArray[np.complex128]:
    """
    U1 (x) U2 written in ``COIN_ORDER``.

    ``u1`` acts on c1 and ``u2`` on c2; both are 2x2 in the order (-1, +1).
    """
    return from_tensor_order(np.kron(np.asarray(u1, complex), np.asarray(u2, complex)))


def operator_schmidt_values(m: NDArray) -> NDArray[np.float64]:
    """Operator Schmidt coefficients of a coin across the c1 | c2 cut."""
    t = to_tensor_order(m).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    return np.linalg.svd(t, compute_uv=False)


def hwp_matrix(slot: int, theta: float) -> CoinOperator:
    """
    Half-wave plate ``slot`` (1..4) rotated by ``theta`` radians.

    Each plate is a reflection ``[[cos 2t, sin 2t], [sin 2t, -cos 2t]]`` on one
    pair of coin states: slot 1 on (0, 1), slot 2 on (2, 3), slot 3 on (0, 3)
    and slot 4 on (1, 2). Slot 4 carries the sign on its first index, i.e.
    ``-cos 2t`` at (1, 1) and ``+cos 2t`` at (2, 2).
    """
    if slot not in (1, 2, 3, 4):
        raise ValueError(f"wave-plate slot must be 1..4, got {slot!r}")
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    i, j = {1: (0, 1), 2: (2, 3), 3: (0, 3), 4: (1, 2)}[slot]
    m = np.eye(4, dtype=np.complex128)
    if slot == 4:
        m[i, i], m[j, j] = -c, c
    else:
        m[i, i], m[j, j] = c, -c
    m[i, j] = m[j, i] = s
    return CoinOperator(m, f"HWP{slot}({theta:.6g})")


def eom_matrix(phi: float, crosstalk: float = 0.0) -> CoinOperator:
    """
    Modulator phase ``exp(i phi)`` on (H, a), leaking ``phi * crosstalk`` onto (V, a).

    ``crosstalk=0`` is the ideal device; the measured device has ``EOM_CROSSTALK``.
    """
    if crosstalk < 0:
        raise ValueError("crosstalk must be non-negative")
    d = np.array([np.exp(1j * phi), np.exp(1j * phi * crosstalk), 1.0, 1.0])
    return CoinOperator(np.diag(d), f"EOM({phi:.6g},{crosstalk:.6g})")


def compose(ops: Sequence[CoinOperator]) -> CoinOperator:
    """
    Operator product ``ops[0] @ ops[1] @ ... @ ops[-1]``.

    The last operator in the list acts first, as in written operator products.
    """
    ops = list(ops)
    if not ops:
        raise ValueError("compose needs at least one operator")
    m = ops[0].matrix
    for op in ops[1:]:
        m = m @ op.matrix
    return CoinOperator(m, "*".join(op.label for op in ops))


@dataclass(frozen=True)
class HwpAngles:
    """Rotation angles (radians) of the four half-wave plates."""

    theta1: float
    theta2: float
    theta3: float
    theta4: float

    @classmethod
    def uniform(cls, theta: float) -> "HwpAngles":
        return cls(theta, theta, theta, theta)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.theta3, self.theta4)


def stage_coins(
    angles: HwpAngles, eom: Optional[CoinOperator] = None
) -> tuple[CoinOperator, CoinOperator]:
    """
    Return the pair ``(C1, C2)`` applied in the two halves of a hardware step.

    C2 = HWP2 HWP1 EOM acts before the x2 shift, C1 = HWP3 HWP4 before the x1
    shift; both include the static sign corrections, so ``C1 @ C2`` equals
    ``coin_from_angles(angles, eom)``.
    """
    t1, t2, t3, t4 = angles.as_tuple()
    c2 = hwp_matrix(2, t2).matrix @ hwp_matrix(1, t1).matrix
    if eom is not None:
        c2 = c2 @ eom.matrix
    c2 = _MID_SIGNS[:, None] * c2 * _IN_SIGNS[None, :]
    c1 = hwp_matrix(3, t3).matrix @ hwp_matrix(4, t4).matrix
    c1 = _OUT_SIGNS[:, None] * c1 * _MID_SIGNS[None, :]
    tag = f"{t1:.6g},{t2:.6g},{t3:.6g},{t4:.6g}"
    eom_tag = f"|{eom.label}" if eom is not None else ""
    return CoinOperator(c1, f"C1[{tag}]"), CoinOperator(c2, f"C2[{tag}{eom_tag}]")


def coin_from_angles(
    angles: HwpAngles, eom: Optional[CoinOperator] = None
) -> CoinOperator:
    """Logical coin C1 C2 for a wave-plate setting and optional modulator."""
    c1, c2 = stage_coins(angles, eom)
    return CoinOperator(c1.matrix @ c2.matrix, f"coin[{c1.label}|{c2.label}]")


PositionPredicate = Callable[[int, int], bool]
StepPredicate = Callable[[int], bool]


def diagonal(x1: int, x2: int) -> bool:
    """Position predicate for the lattice diagonal x1 == x2."""
    return x1 == x2


def every_step(step: int) -> bool:
    return True


@dataclass(frozen=True)
class CoinSchedule:
    """
    Rule assigning a coin to every (position, step).

    ``overrides`` are tried in order and the first matching entry wins; any
    position/step not matched gets ``default``. ``stages``, when present, holds
    the hardware pair ``(C1 schedule, C2 schedule)`` whose product reproduces
    the combined coins.
    """

    default: CoinOperator
    overrides: tuple[tuple[PositionPredicate, StepPredicate, CoinOperator], ...] = ()
    stages: Optional[tuple["CoinSchedule", "CoinSchedule"]] = None
    label: str = ""

    def coin_at(self, x1: int, x2: int, step: int) -> CoinOperator:
        for pos_pred, step_pred, op in self.overrides:
            if pos_pred(x1, x2) and step_pred(step):
                return op
        return self.default

    def operators(self) -> list[CoinOperator]:
        """Every operator reachable from this schedule (combined mode)."""
        return [self.default] + [op for _, _, op in self.overrides]

    @property
    def separable(self) -> bool:
        return all(op.is_separable for op in self.operators())

    @classmethod
    def constant(cls, op: CoinOperator, label: str = "") -> "CoinSchedule":
        return cls(default=op, label=label or op.label)

    def with_override(
        self,
        op: CoinOperator,
        where: PositionPredicate,
        when: StepPredicate = every_step,
    ) -> "CoinSchedule":
        return CoinSchedule(self.default, self.overrides + ((where, when, op),), None, self.label)


EomRule = Union[None, CoinOperator, tuple[PositionPredicate, CoinOperator]]


def staged_schedule(angles: HwpAngles, eom: EomRule = None, label: str = "") -> CoinSchedule:
    """
    Schedule carrying both the combined coin and the hardware stage pair.

    ``eom`` is either ``None``, a modulator operator applied everywhere, or a
    ``(position predicate, operator)`` pair switching the modulator on only
    where the predicate holds. The modulator is part of C2 and therefore sees
    the position before the x2 shift.
    """
    if eom is None or isinstance(eom, CoinOperator):
        c1, c2 = stage_coins(angles, eom)
        s1 = CoinSchedule.constant(c1)
        s2 = CoinSchedule.constant(c2)
        return CoinSchedule(c1 @ c2, stages=(s1, s2), label=label)
    where, op = eom
    c1, c2_off = stage_coins(angles, None)
    _, c2_on = stage_coins(angles, op)
    s1 = CoinSchedule.constant(c1)
    s2 = CoinSchedule(c2_off, ((where, every_step, c2_on),))
    return CoinSchedule(
        c1 @ c2_off,
        ((where, every_step, c1 @ c2_on),),
        stages=(s1, s2),
        label=label,
    )


_PI8 = np.pi / 8

NAMED_ANGLES: dict[str, HwpAngles] = {
    "hadamard": HwpAngles.uniform(_PI8),
    "controlled_xz": HwpAngles(-_PI8, _PI8, _PI8, _PI8),
    "controlled_hadamard_23": HwpAngles(_PI8, 0.0, 0.0, _PI8),
    "controlled_hadamard_24": HwpAngles(_PI8, 0.0, _PI8, 0.0),
    "nonlinear_cz_diagonal": HwpAngles.uniform(_PI8),
}

COIN_NAMES = tuple(NAMED_ANGLES)


def named_coin(name: str, crosstalk: float = 0.0) -> CoinSchedule:
    """
    Schedule for one of the experiment's coin settings.

    ``nonlinear_cz_diagonal`` is the Hadamard setting with the modulator at
    phi = pi switched on only for x1 == x2; ``crosstalk`` only matters there.
    """
    if name not in NAMED_ANGLES:
        raise ValueError(f"unknown coin {name!r}; choose from {', '.join(COIN_NAMES)}")
    angles = NAMED_ANGLES[name]
    if name == "nonlinear_cz_diagonal":
        return staged_schedule(angles, (diagonal, eom_matrix(np.pi, crosstalk)), label=name)
    return staged_schedule(angles, None, label=name)
