"""Exact linear-time posterior uncertainty for change-point locations.

A heterogeneous sequence is modeled as K ordered segments; a Markov chain
constrained to one-step-up transitions makes segmentations exactly the state
paths ending in the last segment, so forward-backward recursions deliver the
full posterior over change-point locations in O(Kn): marginal distributions,
confidence intervals, MAP segmentations via Viterbi, exact joint samples,
posterior mean tracks, and BIC model selection.
"""

from .core import ChangePointVector, ObservationSequence
from .decode import ViterbiState, viterbi, viterbi_state
from .emissions import (
    EXTERNAL,
    FAMILIES,
    GAUSSIAN_HET,
    GAUSSIAN_HOM,
    POISSON,
    EmissionModel,
    LogDensityTable,
    SegmentParams,
    fit_mle,
    log_density_table,
    read_log_density_tsv,
    segmentation_log_likelihood,
)
from .engine import (
    ChangePointDistribution,
    ChangePointReport,
    ChangePointSummary,
    CredibleInterval,
    ForwardBackwardState,
    analyze,
    backward,
    changepoint_marginal,
    confidence_interval,
    forward,
    forward_backward,
    log_evidence,
    posterior_mean_track,
    state_posterior,
)
from .errors import (
    DataError,
    DegeneracyError,
    DegenerateRateError,
    DegenerateScaleError,
    InfeasibleError,
    InvalidSegmentationError,
    UnsupportedFamilyError,
)
from .model_select import (
    ModelScore,
    greedy_segment,
    parameter_count,
    refine,
    score_segmentation,
    select_k,
)
from .oracle import EnumeratedPosterior, enumerate_posterior
from .prior import TransitionPrior, homogeneous, read_prior_tsv, tabulated
from .sampler import parametric_bootstrap, sample_segmentations
from .simulate import (
    DEFAULT_CHANGEPOINTS_N500,
    SimulationDesign,
    StudyRow,
    generate,
    loss,
    posterior_mean_for,
    random_changepoints,
    run_study,
)

__version__ = "0.1.0"

__all__ = [
    "ChangePointDistribution",
    "ChangePointReport",
    "ChangePointSummary",
    "ChangePointVector",
    "CredibleInterval",
    "DataError",
    "DEFAULT_CHANGEPOINTS_N500",
    "DegeneracyError",
    "DegenerateRateError",
    "DegenerateScaleError",
    "EmissionModel",
    "EnumeratedPosterior",
    "EXTERNAL",
    "FAMILIES",
    "ForwardBackwardState",
    "GAUSSIAN_HET",
    "GAUSSIAN_HOM",
    "InfeasibleError",
    "InvalidSegmentationError",
    "LogDensityTable",
    "ModelScore",
    "ObservationSequence",
    "POISSON",
    "SegmentParams",
    "SimulationDesign",
    "StudyRow",
    "TransitionPrior",
    "UnsupportedFamilyError",
    "ViterbiState",
    "analyze",
    "backward",
    "changepoint_marginal",
    "confidence_interval",
    "enumerate_posterior",
    "fit_mle",
    "forward",
    "forward_backward",
    "generate",
    "greedy_segment",
    "homogeneous",
    "log_density_table",
    "log_evidence",
    "loss",
    "parameter_count",
    "parametric_bootstrap",
    "posterior_mean_for",
    "posterior_mean_track",
    "random_changepoints",
    "read_log_density_tsv",
    "read_prior_tsv",
    "refine",
    "run_study",
    "sample_segmentations",
    "score_segmentation",
    "segmentation_log_likelihood",
    "select_k",
    "state_posterior",
    "tabulated",
    "viterbi",
    "viterbi_state",
]
