"""Simulation and analysis of two-dimensional discrete-time quantum walks."""

from .analysis import (
    Distribution,
    EntropyReport,
    coin_probabilities,
    diagonal_confinement,
    entropy_from_amplitudes,
    entropy_lower_bound,
    factorization_residual,
    marginal,
    phase_model,
    similarity,
    von_neumann_entropy,
)
from .coins import (
    COIN_NAMES,
    COIN_ORDER,
    CoinOperator,
    CoinSchedule,
    HwpAngles,
    coin_from_angles,
    compose,
    eom_matrix,
    hwp_matrix,
    kron_coin,
    named_coin,
    stage_coins,
    staged_schedule,
)
from .hardware import (
    MEASURED_LOSS,
    MEASURED_LOSS_EOM,
    LOOP_TIMING,
    DetectionRecord,
    LossModel,
    TimingConfig,
    arrival_time,
    check_no_overlap,
    expected_events,
    reconstruct_distribution,
    run_detection,
    simulate_detections,
    time_bins,
)
from .walk import (
    WalkState,
    apply_coin,
    apply_step,
    evolve,
    new_localized_state,
    position_distribution,
    trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "Distribution",
    "EntropyReport",
    "coin_probabilities",
    "diagonal_confinement",
    "entropy_from_amplitudes",
    "entropy_lower_bound",
    "factorization_residual",
    "marginal",
    "phase_model",
    "similarity",
    "von_neumann_entropy",
    "COIN_NAMES",
    "COIN_ORDER",
    "CoinOperator",
    "CoinSchedule",
    "HwpAngles",
    "coin_from_angles",
    "compose",
    "eom_matrix",
    "hwp_matrix",
    "kron_coin",
    "named_coin",
    "stage_coins",
    "staged_schedule",
    "MEASURED_LOSS",
    "MEASURED_LOSS_EOM",
    "LOOP_TIMING",
    "DetectionRecord",
    "LossModel",
    "TimingConfig",
    "arrival_time",
    "check_no_overlap",
    "expected_events",
    "reconstruct_distribution",
    "run_detection",
    "simulate_detections",
    "time_bins",
    "WalkState",
    "apply_coin",
    "apply_step",
    "evolve",
    "new_localized_state",
    "position_distribution",
    "trajectory",
]
