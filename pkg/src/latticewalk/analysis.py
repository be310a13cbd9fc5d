"""
Figures of merit for simulated and reconstructed walk data.

Distributions are sparse maps over lattice sites. Similarity is the squared
Bhattacharyya coefficient. Entanglement is the von Neumann entropy of the
reduced state of "particle 1", i.e. the (x1, c1) degrees of freedom after
tracing out (x2, c2).
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .coins import COIN_INDEX

__all__ = [
    "NORM_TOL",
    "Distribution",
    "EntropyReport",
    "similarity",
    "diagonal_confinement",
    "marginal",
    "factorization_residual",
    "entropy_from_amplitudes",
    "von_neumann_entropy",
    "entropy_lower_bound",
    "phase_model",
    "coin_probabilities",
]

NORM_TOL = 1e-9
CLIP_TOL = 1e-9

Position = tuple[int, int]
BasisLabel = tuple[int, int, int, int]


@dataclass(frozen=True)
class Distribution:
    """
    Non-negative weights over lattice sites, optionally resolved by coin state.

    ``weights`` maps ``(x1, x2)`` to a probability. ``coin_weights``, when
    present, maps ``(x1, x2, c1, c2)`` and sums to ``weights`` site by site.
    """

    weights: Mapping[Position, float]
    coin_weights: Optional[Mapping[BasisLabel, float]] = None

    def __post_init__(self):
        w = {(int(k[0]), int(k[1])): float(v) for k, v in self.weights.items()}
        if any(v < 0 for v in w.values()):
            raise ValueError("distribution weights must be non-negative")
        object.__setattr__(self, "weights", MappingProxyType(w))
        if self.coin_weights is not None:
            cw = {tuple(int(i) for i in k): float(v) for k, v in self.coin_weights.items()}
            if any(v < 0 for v in cw.values()):
                raise ValueError("distribution weights must be non-negative")
            object.__setattr__(self, "coin_weights", MappingProxyType(cw))

    @classmethod
    def from_coin_resolved(cls, coin_weights: Mapping[BasisLabel, float]) -> "Distribution":
        sites: dict[Position, float] = {}
        for (x1, x2, _c1, _c2), p in coin_weights.items():
            sites[(x1, x2)] = sites.get((x1, x2), 0.0) + p
        return cls(sites, dict(coin_weights))

    @classmethod
    def from_counts(
        cls,
        counts: Mapping[BasisLabel, float],
        calibration: Optional[Sequence[float]] = None,
    ) -> "Distribution":
        """
        Normalised distribution from coin-resolved event counts.

        ``calibration`` holds the four detection efficiencies in ``COIN_ORDER``;
        each count is divided by the efficiency of its coin state first.
        """
        eff = np.ones(4) if calibration is None else np.asarray(calibration, float)
        if eff.shape != (4,) or np.any(eff <= 0):
            raise ValueError("calibration needs four positive efficiencies")
        corrected = {
            k: c / eff[COIN_INDEX[(k[2], k[3])]] for k, c in counts.items() if c > 0
        }
        total = sum(corrected.values())
        if total <= 0:
            raise ValueError("no counts to normalise")
        return cls.from_coin_resolved({k: v / total for k, v in corrected.items()})

    def total(self) -> float:
        return float(sum(self.weights.values()))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.total() - 1.0) < tol

    def normalized(self) -> "Distribution":
        t = self.total()
        if t <= 0:
            raise ValueError("cannot normalise an empty distribution")
        cw = None
        if self.coin_weights is not None:
            cw = {k: v / t for k, v in self.coin_weights.items()}
        return Distribution({k: v / t for k, v in self.weights.items()}, cw)

    def get(self, x1: int, x2: int) -> float:
        return self.weights.get((x1, x2), 0.0)

    def support(self) -> list[Position]:
        return sorted(k for k, v in self.weights.items() if v > 0)

    def to_array(self, extent: Optional[int] = None) -> NDArray[np.float64]:
        """Dense array ``P[x1 + extent, x2 + extent]`` over ``[-extent, extent]^2``."""
        if extent is None:
            extent = max((max(abs(a), abs(b)) for a, b in self.weights), default=0)
        n = 2 * extent + 1
        out = np.zeros((n, n))
        for (x1, x2), p in self.weights.items():
            out[x1 + extent, x2 + extent] = p
        return out


def _require_normalized(p: Distribution, name: str) -> None:
    if not p.is_normalized():
        raise ValueError(f"{name} is not normalised (total {p.total():.12g})")


def similarity(p: Distribution, q: Distribution) -> float:
    """
    Squared Bhattacharyya coefficient ``(sum_x sqrt(P(x) Q(x)))**2``.

    Both inputs must be normalised; the result lies in [0, 1] and is 1 only
    for identical distributions.
    """
    _require_normalized(p, "first distribution")
    _require_normalized(q, "second distribution")
    common = sorted(set(p.weights) & set(q.weights))
    pq = [p.weights[k] * q.weights[k] for k in common]
    roots = [math.sqrt(v) for v in pq]
    bc = math.fsum(roots)
    # bc**2 = sum(pq) + cross terms; keep the diagonal exact so that e.g. a
    # single shared site gives p*q rather than sqrt(p*q)**2.
    cross = bc * bc - math.fsum(r * r for r in roots)
    return float(min(max(math.fsum(pq) + cross, 0.0), 1.0))


def diagonal_confinement(p: Distribution) -> float:
    """Probability that both coordinates coincide, ``sum_x P(x, x)``."""
    return math.fsum(v for (x1, x2), v in p.weights.items() if x1 == x2)


def marginal(p: Distribution, axis: int) -> dict[int, float]:
    """One-dimensional marginal over ``x1`` (axis=1) or ``x2`` (axis=2)."""
    if axis not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    out: dict[int, float] = {}
    for pos, v in p.weights.items():
        x = pos[axis - 1]
        out[x] = out.get(x, 0.0) + v
    return dict(sorted(out.items()))


def factorization_residual(p: Distribution) -> float:
    """``max |P(x1, x2) - P1(x1) P2(x2)|`` over the product of the marginal supports."""
    m1, m2 = marginal(p, 1), marginal(p, 2)
    return max(
        (abs(p.get(a, b) - pa * pb) for a, pa in m1.items() for b, pb in m2.items()),
        default=0.0,
    )


@dataclass(frozen=True)
class EntropyReport:
    """
    Entropy in bits of the reduced state of particle 1.

    ``kind`` is ``"exact"`` for a known pure state and ``"lower_bound"`` when
    the coin-sector phases were minimised over; ``optimizer_trace`` then holds
    every evaluated ``((phi_a, phi_b, phi_c), entropy)`` pair.
    """

    value: float
    kind: Literal["exact", "lower_bound"]
    subsystem_dim: int
    phases: Optional[tuple[float, float, float]] = None
    optimizer_trace: list = field(default_factory=list, repr=False)

    @property
    def max_value(self) -> float:
        return float(np.log2(self.subsystem_dim)) if self.subsystem_dim > 0 else 0.0

    @property
    def fraction_of_max(self) -> float:
        return self.value / self.max_value if self.max_value > 0 else 0.0


def _bipartite_layout(labels: Sequence[BasisLabel]):
    """Row index (x1, c1) and column index (x2, c2) for each basis label."""
    rows = sorted({(l[0], l[2]) for l in labels})
    cols = sorted({(l[1], l[3]) for l in labels})
    ri = {k: i for i, k in enumerate(rows)}
    ci = {k: i for i, k in enumerate(cols)}
    r = np.array([ri[(l[0], l[2])] for l in labels], dtype=np.intp)
    c = np.array([ci[(l[1], l[3])] for l in labels], dtype=np.intp)
    return r, c, len(rows), len(cols)


def _entropy_bits(m: NDArray[np.complex128]) -> float:
    """Entropy of ``rho1 = M M^dagger`` for a coefficient matrix with unit Frobenius norm."""
    rho1 = m @ m.conj().T
    lam = np.linalg.eigvalsh(rho1)
    clipped = np.clip(lam, 0.0, 1.0)
    clip = np.abs(clipped - lam).max() if lam.size else 0.0
    if clip >= CLIP_TOL:
        raise ArithmeticError(f"reduced-state eigenvalues out of [0, 1] by {clip:.3e}")
    nz = clipped[clipped > 0]
    e = float(-np.sum(nz * np.log2(nz)))
    return e if e > 0 else 0.0


def entropy_from_amplitudes(amplitudes: Mapping[BasisLabel, complex]) -> EntropyReport:
    """Exact entropy of a pure state given as ``{(x1, x2, c1, c2): amplitude}``."""
    labels = [k for k, a in amplitudes.items() if a != 0]
    if not labels:
        raise ValueError("empty state")
    r, c, nr, nc = _bipartite_layout(labels)
    m = np.zeros((nr, nc), np.complex128)
    m[r, c] = [amplitudes[k] for k in labels]
    dim = 2 * len({l[0] for l in labels})
    return EntropyReport(_entropy_bits(m), "exact", dim)


def von_neumann_entropy(state) -> EntropyReport:
    """
    Exact entanglement entropy of a ``WalkState`` across (x1, c1) | (x2, c2).

    ``subsystem_dim`` counts two coin states per occupied x1 value.
    """
    return entropy_from_amplitudes(state.amplitudes)


def coin_probabilities(state) -> dict[BasisLabel, float]:
    """``|a(x1, x2, c1, c2)|**2`` for every nonzero amplitude."""
    return {k: abs(a) ** 2 for k, a in state.amplitudes.items()}


def phase_model(state) -> dict[BasisLabel, float]:
    """Phase of every nonzero amplitude, as reconstructed from a theory state."""
    return {k: float(np.angle(a)) for k, a in state.amplitudes.items()}


def entropy_lower_bound(
    probabilities: Mapping[BasisLabel, float],
    model_phases: Mapping[BasisLabel, float],
    grid: int = 16,
    fatol: float = 1e-6,
) -> EntropyReport:
    """
    Smallest entropy compatible with measured moduli and known in-sector phases.

    Candidate amplitudes are ``sqrt(p) * exp(i (model phase + sector phase))``
    where the sector phases of coin states 2, 3, 4 of ``COIN_ORDER`` are free
    (state 1 is the reference). The minimum is found by a ``grid**3`` scan of
    ``[0, 2 pi)^3`` followed by Nelder-Mead from the best grid point.

    Probabilities are renormalised; the two maps must share their support.
    """
    support = sorted(k for k, p in probabilities.items() if p > 0)
    if not support:
        raise ValueError("no probability mass")
    phase_keys = set(model_phases)
    missing = [k for k in support if k not in phase_keys]
    if missing:
        raise ValueError(f"phase model lacks {len(missing)} supported states, e.g. {missing[0]}")
    p = np.array([probabilities[k] for k in support], float)
    p = p / p.sum()
    base = np.sqrt(p) * np.exp(1j * np.array([model_phases[k] for k in support]))
    sector = np.array([COIN_INDEX[(k[2], k[3])] for k in support])

    r, c, nr, nc = _bipartite_layout(support)
    blocks = np.zeros((4, nr, nc), np.complex128)
    blocks[sector, r, c] = base
    dim = 2 * len({k[0] for k in support})

    trace: list[tuple[tuple[float, float, float], float]] = []

    def objective(phi) -> float:
        ph = np.exp(1j * np.asarray(phi, float))
        m = blocks[0] + ph[0] * blocks[1] + ph[1] * blocks[2] + ph[2] * blocks[3]
        e = _entropy_bits(m)
        trace.append((tuple(float(x) for x in phi), e))
        return e

    axis = 2 * np.pi * np.arange(grid) / grid
    best_val, best_phi = np.inf, None
    # itertools.product is lexicographic, so strict < keeps the smallest tied triple.
    for phi in itertools.product(axis, repeat=3):
        e = objective(phi)
        if e < best_val:
            best_val, best_phi = e, phi

    res = minimize(
        objective,
        np.asarray(best_phi),
        method="Nelder-Mead",
        options={"xatol": 1e-8, "fatol": fatol, "maxiter": 2000},
    )
    if res.fun < best_val:
        best_val, best_phi = float(res.fun), tuple(float(x) for x in res.x)
    phases = tuple(float(np.mod(x, 2 * np.pi)) for x in best_phi)
    return EntropyReport(float(best_val), "lower_bound", dim, phases, trace)
