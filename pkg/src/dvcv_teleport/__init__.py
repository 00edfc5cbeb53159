"""Hybrid discrete/continuous-variable teleportation on truncated Fock grids."""

from .fock import (
    BasisMismatchError,
    FockState,
    MeasurementRangeError,
    ModeCollisionError,
    QubitState,
    TailMassError,
    TruncationConfig,
    default_cutoff,
    fidelity,
    number_state,
    project_number,
    project_parity,
    single_mode,
    tensor,
)
from .displaced import (
    MatrixElementTable,
    coherent_state,
    displaced_number_state,
    matrix_element,
    matrix_element_table,
    overall_factor,
    parity_sign_check,
    scs_norm_factor,
    scs_state,
)
from .optics import (
    BeamSplitterParams,
    HybridChannel,
    apply_bs,
    channel_state,
    displacement_matrix,
    displacement_unitary,
    htbs_residual,
    negativity,
    negativity_closed_form,
    negativity_numeric,
    pad_mode,
)
from .protocol import (
    BruteForceRecord,
    Outcome,
    SingularFactorError,
    TeleportRecord,
    UnknownQubit,
    am_probability,
    amp_factor_dual,
    amp_factor_single,
    bob_states_dual,
    brute_force_pipeline,
    correct,
    direct_success_probability,
    dual_rail_records,
    maximize_direct_success,
    norm_factor,
    outcome_probability_dual,
    pair_sum_probability,
    record_infidelity,
    single_rail_pipeline,
    z_power_for,
)
from .demodulation import (
    AMQubit,
    DemodResult,
    demod_displacement,
    demod_swap,
    initially_am_dual,
    initially_am_dual_total_reference,
    initially_am_single,
    overall_success,
    overall_success_report,
    q_best,
    q_displacement_chain,
    q_swap,
    single_rail_demod_additions,
    solve_gamma,
)

__version__ = "0.1.0"
