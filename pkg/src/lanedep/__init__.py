"""Stochastic lane departure modeling and lane-keeping evaluation.

The package turns recorded departure traces into an 8-feature corpus,
fits a bounded Gaussian mixture to it, samples new events from the fit,
and replays them through a bicycle-model lane-keeping controller to
score the departure-area reduction.
"""

__version__ = "0.1.0"

from .bgmm import (
    BgmModel,
    EmConfig,
    HyperRectBounds,
    MomentMethod,
    bic,
    compute_bounds,
    em_fit,
    load_model,
    save_model,
    truncated_moments,
)
from .errors import (
    AcceptanceStall,
    DegenerateBounds,
    DegenerateTrace,
    EmptyComponent,
    EmptyCorpus,
    FilterRejected,
    InvalidFeature,
    InvalidSpeed,
    LaneDepError,
    NonFinite,
    NotEnoughData,
    NumericalUnderflow,
    OutOfBounds,
    UnstableGains,
)
from .metrics import (
    EvaluationReport,
    EventResult,
    SideSummary,
    departure_area,
    evaluate_batch,
    write_running_mean_csv,
)
from .sampling import (
    SampleBatchReport,
    regenerate_event,
    rejection_sample,
    sample_events,
    sample_features,
)
from .synth import (
    GroundTruthSpec,
    default_synth_spec,
    generate_corpus,
    load_synth_spec,
    save_synth_spec,
)
from .traces import (
    EventFilterCriteria,
    FeatureVector,
    Side,
    TrajectoryTrace,
    extract_features,
    read_features_csv,
    read_trace_csv,
    write_features_csv,
    write_trace_csv,
)
from .vehicle import (
    ControlledTrajectory,
    ControllerGains,
    VehicleParams,
    build_state_space,
    closed_loop_eigenvalues,
    closed_loop_matrices,
    load_vehicle_config,
    simulate_event,
)

__all__ = [
    "__version__",
    "AcceptanceStall",
    "BgmModel",
    "ControlledTrajectory",
    "ControllerGains",
    "DegenerateBounds",
    "DegenerateTrace",
    "EmConfig",
    "EmptyComponent",
    "EmptyCorpus",
    "EvaluationReport",
    "EventFilterCriteria",
    "EventResult",
    "FeatureVector",
    "FilterRejected",
    "GroundTruthSpec",
    "HyperRectBounds",
    "InvalidFeature",
    "InvalidSpeed",
    "LaneDepError",
    "MomentMethod",
    "NonFinite",
    "NotEnoughData",
    "NumericalUnderflow",
    "OutOfBounds",
    "SampleBatchReport",
    "Side",
    "SideSummary",
    "TrajectoryTrace",
    "UnstableGains",
    "VehicleParams",
    "bic",
    "build_state_space",
    "closed_loop_eigenvalues",
    "closed_loop_matrices",
    "compute_bounds",
    "default_synth_spec",
    "departure_area",
    "em_fit",
    "evaluate_batch",
    "extract_features",
    "generate_corpus",
    "load_model",
    "load_synth_spec",
    "load_vehicle_config",
    "read_features_csv",
    "read_trace_csv",
    "regenerate_event",
    "rejection_sample",
    "sample_events",
    "sample_features",
    "save_model",
    "save_synth_spec",
    "simulate_event",
    "truncated_moments",
    "write_features_csv",
    "write_running_mean_csv",
    "write_trace_csv",
]
