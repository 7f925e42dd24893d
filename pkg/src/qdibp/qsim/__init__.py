"""Two-tier quantum simulation: structured GHZ-diagonal states and a dense
statevector oracle."""

from .circuits import (
    Circuit,
    Gate,
    build_phase1_circuit,
    build_phase3_circuit,
    cnot_depth,
    gates_to_json,
    ghz_prep_gates,
    ghz_reference_amps,
    run_gates,
)
from .dense import (
    DEFAULT_DENSE_CAP,
    DenseState,
    apply_cnot,
    apply_h,
    apply_x,
    apply_xor_oracle,
    dense_init,
    fidelity,
    joint_register_distribution,
    probabilities,
    register_values,
    sample_indices,
)
from .structured import (
    DEFAULT_STRUCTURED_CAP,
    GhzDiagonalState,
    ProductGhzState,
    SimulatorCapError,
    UnnormalizedStateError,
    apply_phase_oracle,
    bits_to_bitvecs,
    exact_outcome_distribution,
    ghz_diagonal_init,
    ghz_product_init,
    phase_signs,
    sample_measurement,
    sample_measurements,
    wht,
    wht_direct,
)
