"""Phaseless periodic STFT measurements: forward model, ambiguity groups,
measurement-count bounds, constructive recovery, and the RRR solver."""

from .ambiguity import (
    AmbiguityElement,
    CanonicalForm,
    act,
    canonicalize,
    quotient_error,
    verify_invariance,
)
from .bounds import (
    BoundReport,
    blind_bound,
    blind_measurement_set,
    blind_solver_measurement_set,
    bound_curves,
    bound_report,
    known_window_bound,
    known_window_measurement_set,
)
from .core import ProblemParams, SignalPair, make_params, random_pair, shift_index, spawn_rng
from .errors import (
    AmbiguousError,
    ConditioningError,
    CoverageError,
    ParameterError,
    PhaselessStftError,
    RecoveryError,
)
from .intensity import (
    FlipCandidateSet,
    IntensityProfile,
    RootProfile,
    enumerate_flips,
    factor_profile,
    flip,
    profile_from_samples,
    profile_of,
    recover_with_known_entries,
    roots_of,
)
from .proof_solver import RecoveryResult, recover_blind, recover_known_window
from .rrr import RrrConfig, RrrOutcome, project_magnitudes, project_range, recover_signal, rrr_solve
from .stft import (
    MeasurementSet,
    SectionVector,
    StftTable,
    forward,
    magnitudes,
    operator_matrix,
    random_mask,
    section,
)

__version__ = "0.1.0"
