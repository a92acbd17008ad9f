"""Dissipation-control synthesis, certification and automatic error correction."""
from .aqec import (
    AqecReport,
    ErrorSet,
    check_recovery_rates,
    check_syndrome_conditions,
    control_liouvillian,
    run_error_correction_experiment,
    run_parallel_noise_experiment,
)
from .liouville import Liouvillian, Trajectory, asymptotic_state, build_liouvillian, evolve, steady_state
from .operators import (
    Operator,
    commutator,
    is_negative_semidefinite,
    kron,
    pauli_string,
    spectral_decompose,
)
from .stabilizer import StabilizerModel, build_model, ground_space, verify_assumptions
from .synthesis import (
    ControlSet,
    StabilityCertificate,
    certify_global_stability,
    check_local_stabilization,
    check_strong_scalability,
    heisenberg_generator,
    kernel_swap_unitaries,
    naive_controls,
    partition_and_build_controls,
    single_control_generator,
)

__version__ = "0.1.0"
