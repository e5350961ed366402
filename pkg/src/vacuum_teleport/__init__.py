"""Few-photon Fock-space simulator of vacuum/one-photon qubit teleportation."""

from .fitting import FitError, FitResult, fit_visibility
from .fock import (
    FockError,
    ModeRegistry,
    PhotonCapError,
    PureState,
    RegistryMismatchError,
    basis_state,
    fidelity,
    inner_product,
    superpose,
    tensor,
    vacuum,
)
from .measurement import (
    DetectorModel,
    OutcomeDistribution,
    click_distribution,
    coincidence_probability,
    condition_on_pattern,
    outcome_distribution,
)
from .montecarlo import RunReport, simulate_counts
from .optics import (
    BeamSplitterParams,
    PhaseSetting,
    apply_beam_splitter,
    apply_loss,
    apply_pauli_z,
    apply_phase_shift,
    mirror_to_phase,
    phase_to_mirror,
)
from .protocol import (
    PAIRS,
    VERIFICATION_NULL_PHASE,
    BellOutcome,
    ExperimentConfig,
    FringeRecord,
    InputQubitSpec,
    PhaseSweep,
    assemble_total_state,
    bell_branch_probabilities,
    classify_alice,
    prepare_channel,
    prepare_source,
    run_active,
    run_passive,
    visibility_sweep,
)

__version__ = "0.1.0"
