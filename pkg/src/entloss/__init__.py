"""Loss geometry of unitary learning with entangled training samples.

Statevector tooling for studying how the entanglement of a single training
sample shapes the loss landscape over unitary hypotheses: Schmidt analysis,
fidelity losses and distance bounds, layered circuit ansatz families with
exact gradients, ball-constrained optimization sweeps, and a seeded
experiment harness with CSV/JSON persistence.
"""

from .ansatz import (
    FAMILIES,
    FAMILY_CIRCULAR,
    FAMILY_CRX,
    FAMILY_CZ,
    FAMILY_NO_ENTANGLEMENT,
    AnsatzSpec,
    ExpressivityReport,
    SampleLossObjective,
    apply_circuit,
    build_unitary,
    expressivity,
    fidelity_kl,
    fidelity_samples,
    haar_bin_probability,
    loss_gradient,
    param_count,
    params_per_layer,
    spec_from_json,
    spec_to_json,
)
from .bounds import (
    BallGeometry,
    ImprovementValue,
    ball_max_fidelity_entangled_ub,
    ball_max_fidelity_separable,
    construct_min_distance_operator,
    improvement_entangled_ub,
    improvement_ratio_bound,
    improvement_separable,
    min_distance_entangled_lb,
    min_distance_separable,
    sample_unitaries_in_ball,
    sample_unitary_in_ball,
    sine_lower_bound,
    sine_upper_bound,
)
from .harness import (
    CSV_COLUMNS,
    EXPERIMENTS,
    AnsatzGroup,
    BoundCheck,
    ExperimentConfig,
    ExpressivityRecord,
    RunRecord,
    config_from_file,
    config_from_json,
    config_to_json,
    emit,
    expressivity_records,
    landscape_grid,
    landscape_grids,
    records_from_json_text,
    records_to_csv_text,
    records_to_json_text,
    run_experiment,
    verify_bounds_report,
)
from .losses import (
    LossValue,
    RiskEstimate,
    frobenius_phase_distance,
    loss_from_fidelity,
    maxent_loss_from_trace,
    qnfl_lower_bound,
    risk_estimate,
    sample_loss,
)
from .optimize import (
    BallConstraint,
    MinimizeResult,
    OptimizerSettings,
    SweepCurve,
    SweepPoint,
    distance_to_minimum,
    improvement_from_curve,
    minimize_in_ball,
    radius_sweep,
)
from .samples import (
    KIND_MAX_ENTANGLED,
    KIND_NME,
    KIND_SEPARABLE,
    SAMPLE_KINDS,
    TrainingSample,
    entanglement_entropy,
    make_max_entangled,
    make_nme,
    make_separable,
    nme_coefficient_families,
    sample_from_json,
    sample_to_json,
    schmidt_rank,
)
from .states import (
    SchmidtData,
    StateVector,
    apply_to_subsystem,
    assert_unitary,
    haar_random_state,
    haar_random_unitary,
    reconstruct_state,
    schmidt_decompose,
)

__version__ = "0.1.0"
