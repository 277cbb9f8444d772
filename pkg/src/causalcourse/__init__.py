"""Counterfactual effect estimation for longitudinal exposure studies.

Core layers:

- ``frame``: validated column store with cluster labels.
- ``dag``: graph checks (d-separation, adjustment sets).
- ``regression``: GLM fitting with model, robust, and cluster covariances.
- ``effects``: g-computation estimands (total, controlled direct,
  interventional single/multi block, disparity) and path decomposition.
- ``lifecourse``: two-period model comparison and labeling.
- ``twin``: paired-data estimators.
- ``measurement``: reliability corrections and growth features.
- ``iv``: instrumental-variable estimators.
- ``bootstrap``: resampling inference.
- ``simulate``: data-generating processes with truth accessors.
- ``estimators``: scikit-learn style wrapper objects.
- ``cli``: the ``causalcourse`` command.
"""

from .bootstrap import BootstrapPlan, BootstrapResult, bootstrap, derive_seed
from .dag import CausalDag, backdoor_adjustment_sets, d_separated, parse_dag
from .effects import (
    EffectEstimate,
    EstimandRequest,
    bootstrap_estimate,
    estimate,
    estimate_cde,
    estimate_cdm,
    estimate_interventional,
    estimate_interventional_multi,
    estimate_tce,
    sem_paths,
)
from .errors import (
    BootstrapAbort,
    CausalCourseError,
    ConfigError,
    ConvergenceError,
    DataError,
    EstimationError,
    RankDeficiencyError,
    SeparationError,
    SpecificationError,
)
from .frame import (
    BINARY,
    CONTINUOUS,
    Frame,
    StandardizationReport,
    destandardize,
    load_frame,
    log_transform,
    standardize,
    write_frame,
)
from .iv import MrSummary, mr_egger, tsls, wald_ratio
from .lifecourse import (
    LifecourseVerdict,
    classify_by_estimands,
    compare_nested,
    derive_label,
)
from .measurement import (
    CorrectedEstimate,
    GrowthFeatures,
    Reliability,
    correct_indirect,
    disattenuate,
    extract_growth,
)
from .regression import (
    FittedModel,
    ModelSpec,
    Term,
    f_test_nested,
    fit_model,
    predict_mean,
)
from .simulate import DgpSpec, generate, truth
from .twin import TwinFrame, between_within, naive_clustered

__version__ = "0.1.0"

__all__ = [
    "BINARY",
    "BootstrapAbort",
    "BootstrapPlan",
    "BootstrapResult",
    "CONTINUOUS",
    "CausalCourseError",
    "CausalDag",
    "ConfigError",
    "ConvergenceError",
    "CorrectedEstimate",
    "DataError",
    "DgpSpec",
    "EffectEstimate",
    "EstimandRequest",
    "EstimationError",
    "FittedModel",
    "Frame",
    "GrowthFeatures",
    "LifecourseVerdict",
    "ModelSpec",
    "MrSummary",
    "RankDeficiencyError",
    "Reliability",
    "SeparationError",
    "SpecificationError",
    "StandardizationReport",
    "Term",
    "TwinFrame",
    "backdoor_adjustment_sets",
    "between_within",
    "bootstrap",
    "bootstrap_estimate",
    "classify_by_estimands",
    "compare_nested",
    "correct_indirect",
    "d_separated",
    "derive_label",
    "derive_seed",
    "destandardize",
    "disattenuate",
    "estimate",
    "estimate_cde",
    "estimate_cdm",
    "estimate_interventional",
    "estimate_interventional_multi",
    "estimate_tce",
    "extract_growth",
    "f_test_nested",
    "fit_model",
    "generate",
    "load_frame",
    "log_transform",
    "mr_egger",
    "naive_clustered",
    "parse_dag",
    "predict_mean",
    "sem_paths",
    "standardize",
    "truth",
    "tsls",
    "wald_ratio",
    "write_frame",
]
