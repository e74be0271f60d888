"""Numerical laboratory for annealing with an eigenstate-preserving penalty.

Builds the adiabatic Grover search (effective two-level form) and the
ferromagnetic p-spin model, adds a penalty term that pins the spectrum
while leaving eigenstates untouched, integrates the time-dependent
Schrodinger equation, and computes the diagnostics that expose why a
constant gap is not enough: transition matrices, adiabatic-condition
profiles, quantum-speed-limit costs, and exponential scaling fits.
"""

__version__ = "0.1.0"

from .analysis import (
    AsymptoteFit,
    ConditionSample,
    MinTimeResult,
    ScalingFit,
    SweepPoint,
    condition_profile,
    cost_fidelity_sweep,
    excited_condition_profile,
    fidelity_asymptote_fit,
    magnetization,
    min_annealing_time,
    scaling_fit,
    transition_matrix_max,
    two_level_std,
)
from .dynamics import (
    NORM_DRIFT_LIMIT,
    IntegrationError,
    Trajectory,
    cost_of,
    default_steps,
    evolve,
    norm_bound,
    rescaling_check,
)
from .linalg import (
    EigenConvergenceError,
    HermiticityError,
    SpectralDecomposition,
    check_hermitian,
    eigendecompose,
    expectation_and_std,
    fix_phase,
    operator_norm,
)
from .models import (
    AnnealModel,
    GroverAngles,
    Schedule,
    counterdiabatic_norm,
    grover_angles,
    grover_eigen,
    grover_gap,
    grover_ground_derivative_overlap,
    grover_hamiltonian,
    grover_magnetization,
    grover_matrices,
    ground_state_batch,
    hamiltonian_batch,
    nonstoquastic_hamiltonian,
    nonstoquastic_matrices,
    penalty_term,
    pspin_matrices,
    pspin_qa_hamiltonian,
    schedule_derivative,
    schedule_value,
    spin_operators,
)
