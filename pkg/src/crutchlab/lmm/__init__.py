"""Random-intercept mixed models, model ladders and inferential summaries."""

from .data import LongDataset
from .design import (
    ALL_TERMS,
    INTERCEPT_LABEL,
    KINETIC_LADDER,
    LADDERS,
    QUESTIONNAIRE_LADDER,
    SPEED_LADDER,
    ModelSpec,
    design_matrix,
)
from .fit import (
    FitError,
    FitResult,
    LRTResult,
    aic_bic,
    fit_random_intercept,
    information_criteria,
    likelihood_ratio_test,
)
from .inference import (
    ContrastResult,
    EtaSquared,
    device_contrast,
    pairwise_contrasts,
    partial_eta_squared,
)
from .ladder import LadderResult, ladder_terms, model_ladder
from .simulate import StudyLayout, simulate_dataset

__all__ = [name for name in dir() if not name.startswith("_")]
