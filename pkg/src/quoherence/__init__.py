"""n-slit interference with which-path detectors.

Closed-form coherence and path distinguishability, screen-pattern
synthesis, and the measurement protocols that recover coherence from
intensities, analytically or by seeded photon counting.
"""

from .core import (
    DetectorGram,
    QuantonMixedState,
    QuantonPureState,
    ReducedDensity,
    coherence_mixed,
    coherence_of_density,
    coherence_pure,
    distinguishability,
    duality_gap,
    identical_detectors,
    orthogonal_detectors,
    random_detector_gram,
    random_mixed_state,
    random_pure_state,
    reduced_density,
    uniform_overlap_gram,
    uqsd_bound,
    validate_gram,
)
from .errors import (
    DiagonalNotUnitError,
    DimensionMismatchError,
    EmptyBinError,
    EmptyWindowError,
    InvalidMaximumIndexError,
    NotHermitianError,
    NotPSDError,
    PriorsNotNormalizedError,
    QuoherenceError,
    ScenarioValidationError,
    SchemaError,
    ZeroIntensityError,
    ZeroMassError,
)
from .fringes import (
    FarFieldValidityWarning,
    PatternSample,
    ScreenGrid,
    SlitGeometry,
    amplitude_at,
    build_pattern,
    default_grid,
    envelope,
    farfield_bracket,
    intensity_exact,
    intensity_exact_mixed,
    intensity_farfield,
    intensity_incoherent,
    intensity_mixed,
    intensity_parallel,
    intensity_perp,
    intensity_prefactor,
    primary_maxima,
    visibility,
)
from .protocols import (
    CoherenceEstimate,
    CountHistogram,
    CountingConfig,
    DualityReport,
    duality_report,
    estimate_intensity_at,
    histogram_hits,
    measure_coherence,
    measure_input_coherence,
    sample_hits,
    unnormalized_coherence,
)
from .scenario import (
    Scenario,
    SweepSpec,
    parse_scenario,
    resolve_document,
    scenario_hash,
    serialize_scenario,
)

__version__ = "0.1.0"
