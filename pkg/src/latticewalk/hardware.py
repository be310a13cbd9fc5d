"""
Time-multiplexed fibre-loop model: arrival-time bins, overlap safety, losses and detection sampling.

Sites are encoded as arrival times. With the default axis convention a step
with ``c_i = +1`` takes the short path and ``c_i = -1`` the long one, adding
``dtau1`` (x1) or ``dtau2`` (x2); each round trip adds ``t_min``. So after
``n`` steps site (x1, x2) arrives at::

    n * t_min + (n - x1) / 2 * dtau1 + (n - x2) / 2 * dtau2

Losses thin the ideal walk probabilities: each walking pulse is tapped out at
every step with a probability set by its x1 loop and coin state, and keeps
walking with probability ``step_survival``. The quantum evolution itself stays
unitary.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .analysis import Distribution
from .coins import COIN_ORDER, CoinSchedule
from .walk import WalkState, evolve, new_localized_state

__all__ = [
    "TimingConfig",
    "LossModel",
    "LOOP_TIMING",
    "MEASURED_LOSS",
    "MEASURED_LOSS_EOM",
    "RECORD_DTYPE",
    "DetectionRecord",
    "DetectionRun",
    "OverlapReport",
    "Reconstruction",
    "arrival_time",
    "time_bins",
    "check_no_overlap",
    "ideal_coin_probabilities",
    "run_detection",
    "simulate_detections",
    "reconstruct_distribution",
    "expected_events",
    "write_records",
    "read_records",
    "format_records",
    "thread_count",
    "coin_weights_of",
]

THREADS_ENV = "LATTICEWALK_THREADS"
CHUNK_TRIALS = 65536


@dataclass(frozen=True)
class TimingConfig:
    """
    Loop timing in nanoseconds.

    ``axis_swap`` pairs ``dtau1`` with x2 and ``dtau2`` with x1 instead.
    ``eom_delay`` is an extra insertion delay added to every round trip.
    """

    t_min: float = 676.0
    dtau1: float = 3.11
    dtau2: float = 46.42
    pulse_width: float = 0.088
    axis_swap: bool = False
    eom_delay: float = 0.0

    def __post_init__(self):
        for name in ("t_min", "dtau1", "dtau2", "pulse_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.eom_delay < 0:
            raise ValueError("eom_delay must be non-negative")

    @property
    def round_trip(self) -> float:
        return self.t_min + self.eom_delay

    @property
    def delays(self) -> tuple[float, float]:
        """Delay added by a -1 coin along x1 and along x2."""
        return (self.dtau2, self.dtau1) if self.axis_swap else (self.dtau1, self.dtau2)


@dataclass(frozen=True)
class LossModel:
    """
    Per-step loss and detection probabilities.

    ``outcouple_minus`` / ``outcouple_plus`` are the tap-out probabilities of
    the x1 - 1 and x1 + 1 loops, i.e. for c1 = -1 and c1 = +1.
    ``detection_efficiency`` lists one efficiency per coin state in ``COIN_ORDER``.
    """

    input_coupling: float = 1.0
    outcouple_minus: float = 1.0
    outcouple_plus: float = 1.0
    step_survival: float = 1.0
    detection_efficiency: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        eff = tuple(float(e) for e in self.detection_efficiency)
        if len(eff) != 4:
            raise ValueError("detection_efficiency needs four values")
        object.__setattr__(self, "detection_efficiency", eff)
        values = (self.input_coupling, self.outcouple_minus, self.outcouple_plus,
                  self.step_survival) + eff
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("loss-model probabilities must lie in [0, 1]")

    def click_probabilities(self) -> NDArray[np.float64]:
        """Probability that a walking pulse in each coin state is detected at a step."""
        oc = np.array([self.outcouple_minus if c1 < 0 else self.outcouple_plus
                       for c1, _ in COIN_ORDER])
        return oc * np.array(self.detection_efficiency)


LOOP_TIMING = TimingConfig()
MEASURED_LOSS = LossModel(
    input_coupling=0.03, outcouple_minus=0.12, outcouple_plus=0.04, step_survival=0.52
)
MEASURED_LOSS_EOM = replace(MEASURED_LOSS, step_survival=0.12)


def _check_parity(x1: int, x2: int, n: int) -> None:
    if n < 0:
        raise ValueError("step number must be non-negative")
    for x in (x1, x2):
        if abs(x) > n or (x - n) % 2:
            raise ValueError(f"site ({x1}, {x2}) is not reachable in {n} steps")


def arrival_time(x1: int, x2: int, n: int, timing: TimingConfig = LOOP_TIMING) -> float:
    """Arrival time (ns) of site (x1, x2) after ``n`` steps."""
    _check_parity(x1, x2, n)
    d1, d2 = timing.delays
    return n * timing.round_trip + (n - x1) // 2 * d1 + (n - x2) // 2 * d2


def time_bins(n: int, timing: TimingConfig = LOOP_TIMING) -> tuple[NDArray, NDArray]:
    """
    All reachable sites at step ``n`` and their arrival times, sorted by time.

    Returns ``(positions, times)`` with ``positions`` of shape ``(K, 2)``.
    """
    xs = np.arange(-n, n + 1, 2)
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    pos = np.column_stack([x1.ravel(), x2.ravel()])
    d1, d2 = timing.delays
    t = n * timing.round_trip + (n - pos[:, 0]) // 2 * d1 + (n - pos[:, 1]) // 2 * d2
    order = np.argsort(t, kind="stable")
    return pos[order], t[order].astype(float)


@dataclass(frozen=True)
class OverlapReport:
    ok: bool
    first_collision: Optional[dict] = None

    def describe(self) -> str:
        if self.ok:
            return "no temporal overlap"
        c = self.first_collision
        return (
            f"{c['kind']}: step {c['step_a']} site {c['site_a']} at {c['time_a']:.2f} ns "
            f"vs step {c['step_b']} site {c['site_b']} at {c['time_b']:.2f} ns"
        )


def check_no_overlap(timing: TimingConfig, n_max: int) -> OverlapReport:
    """
    Check that no two time bins of steps 1..n_max come within one pulse width.

    Bins of one step must also all precede the bins of the next step. The
    first problem found, in step order, is reported.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    prev = None
    for n in range(1, n_max + 1):
        pos, t = time_bins(n, timing)
        gaps = np.diff(t)
        bad = np.nonzero(gaps <= timing.pulse_width)[0]
        if bad.size:
            i = int(bad[0])
            return OverlapReport(False, dict(
                kind="overlap", step_a=n, site_a=tuple(map(int, pos[i])), time_a=float(t[i]),
                step_b=n, site_b=tuple(map(int, pos[i + 1])), time_b=float(t[i + 1]),
            ))
        if prev is not None:
            ppos, pt = prev
            if t[0] - pt[-1] <= timing.pulse_width:
                return OverlapReport(False, dict(
                    kind="step crossing", step_a=n - 1, site_a=tuple(map(int, ppos[-1])),
                    time_a=float(pt[-1]), step_b=n, site_b=tuple(map(int, pos[0])),
                    time_b=float(t[0]),
                ))
        prev = (pos, t)
    return OverlapReport(True)


RECORD_DTYPE = np.dtype(
    [("trial_id", np.int64), ("step", np.int32), ("arrival_time", np.float64), ("coin_state", np.int8)]
)


@dataclass(frozen=True)
class DetectionRecord:
    """One detector click. ``coin_state`` is 1..4 in ``COIN_ORDER``."""

    trial_id: int
    step: int
    arrival_time: float
    coin_state: int


def ideal_coin_probabilities(
    schedule: CoinSchedule,
    n_steps: int,
    initial: Optional[WalkState] = None,
    mode: str = "combined",
) -> list[tuple[NDArray, NDArray]]:
    """
    For steps 1..n_steps: ``(labels, probs)`` of the ideal walk.

    ``labels`` has columns (x1, x2, coin index 0..3) in a fixed order.
    """
    state = initial if initial is not None else new_localized_state(0, 0, -1, -1)
    out = []
    for _ in range(n_steps):
        state = evolve(state, schedule, 1, mode)
        labels, probs = [], []
        for (x1, x2), v in sorted(state.sites.items()):
            p = np.abs(v) ** 2
            for k in range(4):
                if p[k] > 0:
                    labels.append((x1, x2, k))
                    probs.append(p[k])
        probs = np.array(probs)
        out.append((np.array(labels, dtype=np.int64).reshape(-1, 3), probs / probs.sum()))
    return out


@dataclass
class DetectionRun:
    """Records of a Monte-Carlo run plus the number of pulses walking at each step."""

    records: NDArray
    walking: NDArray[np.int64]
    n_trials: int
    entered: int = 0

    def surviving_fraction(self) -> NDArray[np.float64]:
        """Fraction of trials still walking after 0, 1, ..., n steps."""
        return self.walking / self.n_trials


def thread_count(threads: Optional[int] = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _simulate_chunk(args):
    first_trial, n, seed_seq, ideal, loss, timing = args
    rng = np.random.default_rng(seed_seq)
    n_steps = len(ideal)
    clickp = loss.click_probabilities()
    d1, d2 = timing.delays
    walking = rng.random(n) < loss.input_coupling
    counts = np.zeros(n_steps + 1, np.int64)
    counts[0] = walking.sum()
    parts = []
    for s, (labels, probs) in enumerate(ideal, start=1):
        idx = np.nonzero(walking)[0]
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        pick = np.searchsorted(cdf, rng.random(idx.size), side="right")
        lab = labels[pick]
        click = rng.random(idx.size) < clickp[lab[:, 2]]
        hit = idx[click]
        lab = lab[click]
        rec = np.empty(hit.size, RECORD_DTYPE)
        rec["trial_id"] = first_trial + hit
        rec["step"] = s
        rec["arrival_time"] = (
            s * timing.round_trip + (s - lab[:, 0]) // 2 * d1 + (s - lab[:, 1]) // 2 * d2
        )
        rec["coin_state"] = lab[:, 2] + 1
        parts.append(rec)
        walking &= rng.random(n) < loss.step_survival
        counts[s] = walking.sum()
    recs = np.concatenate(parts) if parts else np.empty(0, RECORD_DTYPE)
    recs = recs[np.lexsort((recs["step"], recs["trial_id"]))]
    return recs, counts


def run_detection(
    schedule: CoinSchedule,
    loss: LossModel,
    timing: TimingConfig,
    n_steps: int,
    n_trials: int,
    seed: int,
    initial: Optional[WalkState] = None,
    threads: Optional[int] = None,
) -> DetectionRun:
    """
    Monte-Carlo detection run.

    Each trial is one pulse. It enters with probability ``input_coupling``;
    at every step a walking pulse occupies (site, coin) with the ideal walk
    probability, clicks with the loop/coin click probability, and keeps
    walking with probability ``step_survival``.

    Trials are split into fixed-size chunks, each with its own child seed of
    ``seed``, so output does not depend on the number of worker threads.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    ideal = ideal_coin_probabilities(schedule, n_steps, initial)
    starts = list(range(0, n_trials, CHUNK_TRIALS))
    seeds = np.random.SeedSequence(seed).spawn(len(starts))
    jobs = [
        (s, min(CHUNK_TRIALS, n_trials - s), seeds[i], ideal, loss, timing)
        for i, s in enumerate(starts)
    ]
    workers = min(thread_count(threads), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_simulate_chunk, jobs))
    else:
        results = [_simulate_chunk(j) for j in jobs]
    records = np.concatenate([r for r, _ in results])
    counts = np.sum([c for _, c in results], axis=0)
    return DetectionRun(records, counts, n_trials, int(counts[0]))


def simulate_detections(
    schedule: CoinSchedule,
    loss: LossModel,
    timing: TimingConfig,
    n_steps: int,
    n_trials: int,
    seed: int,
    threads: Optional[int] = None,
) -> NDArray:
    """Detector clicks as a structured array (``RECORD_DTYPE``), sorted by (trial_id, step)."""
    return run_detection(schedule, loss, timing, n_steps, n_trials, seed, threads=threads).records


@dataclass(frozen=True)
class Reconstruction:
    distribution: Distribution
    counts: dict
    assigned: int
    unassigned: int


def reconstruct_distribution(
    records: NDArray | Iterable[DetectionRecord],
    timing: TimingConfig,
    step: int,
    calibration: Sequence[float] = (1.0, 1.0, 1.0, 1.0),
) -> Reconstruction:
    """
    Map clicks of one step back to sites and build a calibrated distribution.

    Each arrival time is matched to the nearest bin of ``time_bins(step)``;
    clicks farther than half a pulse width from every bin are counted as
    unassigned. Counts are divided by the per-coin ``calibration`` and
    normalised.
    """
    recs = _as_record_array(records)
    recs = recs[recs["step"] == step]
    if recs.size == 0:
        raise ValueError(f"no records at step {step}")
    pos, t = time_bins(step, timing)
    at = recs["arrival_time"]
    j = np.clip(np.searchsorted(t, at), 1, max(len(t) - 1, 1))
    if len(t) == 1:
        nearest = np.zeros(at.size, np.intp)
    else:
        left_closer = np.abs(at - t[j - 1]) <= np.abs(t[j] - at)
        nearest = np.where(left_closer, j - 1, j)
    ok = np.abs(at - t[nearest]) <= timing.pulse_width / 2
    counts: dict[tuple[int, int, int, int], int] = {}
    for (x1, x2), k in zip(pos[nearest[ok]], recs["coin_state"][ok]):
        c1, c2 = COIN_ORDER[int(k) - 1]
        key = (int(x1), int(x2), c1, c2)
        counts[key] = counts.get(key, 0) + 1
    n_ok = int(ok.sum())
    if n_ok == 0:
        raise ValueError(f"no record at step {step} falls inside a time bin")
    dist = Distribution.from_counts(counts, calibration)
    return Reconstruction(dist, counts, n_ok, int(recs.size - n_ok))


def expected_events(
    loss: LossModel,
    n_steps: int,
    n_trials: int,
    coin_weights: Optional[Sequence[NDArray]] = None,
) -> NDArray[np.float64]:
    """
    Expected click counts at steps 1..n_steps.

    ``trials * input_coupling * survival**(n - 1) * sum_k w_k(n) * click_k`` where
    ``w(n)`` is the coin-state weight of the ideal walk at step n (uniform
    weights if not given).
    """
    clickp = loss.click_probabilities()
    out = np.zeros(n_steps)
    for n in range(1, n_steps + 1):
        w = np.full(4, 0.25) if coin_weights is None else np.asarray(coin_weights[n - 1])
        out[n - 1] = n_trials * loss.input_coupling * loss.step_survival ** (n - 1) * float(w @ clickp)
    return out


def coin_weights_of(ideal: list[tuple[NDArray, NDArray]]) -> list[NDArray]:
    """Total weight of each coin state at every step of an ``ideal_coin_probabilities`` list."""
    return [np.bincount(lab[:, 2], weights=p, minlength=4) for lab, p in ideal]


def _as_record_array(records) -> NDArray:
    if isinstance(records, np.ndarray):
        return records
    rows = [(r.trial_id, r.step, r.arrival_time, r.coin_state) for r in records]
    return np.array(rows, dtype=RECORD_DTYPE)


def format_records(records: NDArray) -> str:
    """Columnar text: header then ``trial_id step arrival_time_ns coin_state`` per line."""
    lines = ["# trial_id step arrival_time_ns coin_state"]
    lines += [
        f"{int(r['trial_id'])} {int(r['step'])} {float(r['arrival_time']):.2f} {int(r['coin_state'])}"
        for r in records
    ]
    return "\n".join(lines) + "\n"


def write_records(path, records: NDArray) -> None:
    with open(path, "w") as fh:
        fh.write(format_records(_as_record_array(records)))


def read_records(path) -> NDArray:
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", "loadtxt: input contained no data")
        data = np.loadtxt(path, comments="#", ndmin=2)
    out = np.empty(len(data), RECORD_DTYPE)
    if len(data):
        out["trial_id"] = data[:, 0]
        out["step"] = data[:, 1]
        out["arrival_time"] = data[:, 2]
        out["coin_state"] = data[:, 3]
    return out
