"""Ground-reaction-force pipeline: strikes, stances, kinetics, speed."""

from .signals import AXES, ForceSeries, StrikeEvent, detect_crutch_strikes, lowpass_filter
from .speed import MarkerTrack, principal_horizontal_axis, walking_speed
from .stance import (
    GRID_POINTS,
    ImpulseSummary,
    KineticSummary,
    LoadingRates,
    NormalizedStance,
    StanceCycle,
    StanceValidity,
    normalize_stance,
    peak_loading_rate,
    stance_impulse,
    summarize_stance,
    validate_stance,
)
from .trials import (
    DEVICES,
    LONG_HEADER,
    PipelineConfig,
    Trial,
    TrialRecord,
    load_force_csv,
    load_marker_csv,
    load_trial_meta,
    rows_from_csv,
    rows_to_csv,
    summarize_trials,
)

__all__ = [name for name in dir() if not name.startswith("_")]
