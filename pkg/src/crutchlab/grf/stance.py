"""Stance-cycle validation, normalization, loading rates and impulses."""

from dataclasses import dataclass, field

import numpy as np

from .signals import AXES

GRID_POINTS = 101  # 0..100 % stance inclusive


@dataclass
class StanceCycle:
    """One crutch stance: (n, 3) forces in (AP, ML, vertical) order."""

    forces: np.ndarray
    sample_rate: float
    body_weight: float
    meta: object = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.forces = np.atleast_2d(np.asarray(self.forces, dtype=float))
        if self.body_weight <= 0:
            raise ValueError("body weight must be positive")

    @property
    def n_samples(self):
        return self.forces.shape[0]

    @property
    def duration(self):
        return self.n_samples / self.sample_rate

    @property
    def vertical(self):
        return self.forces[:, 2]


@dataclass
class StanceValidity:
    duration_ok: bool
    peak_ok: bool
    rising_ok: bool

    @property
    def accepted(self):
        return self.duration_ok and self.peak_ok and self.rising_ok

    def __bool__(self):
        return self.accepted

    def reasons(self):
        out = []
        if not self.duration_ok:
            out.append("stance shorter than 400 ms")
        if not self.peak_ok:
            out.append("peak vGRF below BW/3")
        if not self.rising_ok:
            out.append("vGRF not rising over first 10% of stance")
        return out


@dataclass
class NormalizedStance:
    """101-point, body-weight-normalized stance, percent abscissa 0-100."""

    percent: np.ndarray
    forces_bw: np.ndarray  # (101, 3)


@dataclass
class ImpulseSummary:
    vertical: float
    ap_braking: float
    ap_propulsive: float
    ml: float


@dataclass
class LoadingRates:
    """Peak per-axis loading rate in BW/s over the early-stance window."""

    ap: float
    ml: float
    vertical: float
    truncated: bool = False  # stance shorter than the analysis window

    def as_array(self):
        return np.array([self.ap, self.ml, self.vertical])


def validate_stance(cycle, min_duration=0.400, peak_fraction=1.0 / 3.0,
                    rise_fraction=0.10):
    """Accept iff long enough, loaded enough, and rising early.

    The rising rule reads "low to high over the first 10%" as: vertical force
    at 10% stance above the onset value, and a positive mean slope over that
    early window (least-squares line).
    """
    v = cycle.vertical
    duration_ok = cycle.duration >= min_duration
    peak_ok = v.max() >= cycle.body_weight * peak_fraction
    k = max(1, int(round(rise_fraction * (cycle.n_samples - 1))))
    endpoint_ok = v[k] > v[0]
    t = np.arange(k + 1) / cycle.sample_rate
    slope = np.polyfit(t, v[: k + 1], 1)[0] if k >= 1 else 0.0
    rising_ok = bool(endpoint_ok and slope > 0)
    return StanceValidity(bool(duration_ok), bool(peak_ok), rising_ok)


def normalize_stance(cycle, grid_points=GRID_POINTS):
    """Linear interpolation onto the percent-stance grid, divided by BW."""
    n = cycle.n_samples
    if n < 2:
        raise ValueError("need at least two samples to normalize a stance")
    src = np.linspace(0.0, 1.0, n)
    dst = np.linspace(0.0, 1.0, grid_points)
    out = np.column_stack(
        [np.interp(dst, src, cycle.forces[:, j]) for j in range(3)]
    )
    return NormalizedStance(percent=dst * 100.0, forces_bw=out / cycle.body_weight)


def peak_loading_rate(cycle, window=0.200, time_bin=0.010):
    """Peak of the binned force slope over the first ``window`` seconds.

    Per axis, the slope of every ``time_bin`` bin starting in the window is
    (F(t+bin) - F(t)) / bin; the vertical axis keeps its sign, AP and ML use
    the slope magnitude. Shorter cycles are scanned over what is available
    and flagged.
    """
    rate = cycle.sample_rate
    nbin = max(1, int(round(time_bin * rate)))
    nwin = int(round(window * rate))
    truncated = cycle.n_samples - 1 < nwin
    limit = min(nwin, cycle.n_samples - 1)
    if limit < nbin:
        return LoadingRates(np.nan, np.nan, np.nan, truncated=True)
    starts = np.arange(0, limit - nbin + 1)
    slopes = (cycle.forces[starts + nbin] - cycle.forces[starts]) * (rate / nbin)
    slopes /= cycle.body_weight
    return LoadingRates(
        ap=float(np.abs(slopes[:, 0]).max()),
        ml=float(np.abs(slopes[:, 1]).max()),
        vertical=float(slopes[:, 2].max()),
        truncated=truncated,
    )


def stance_impulse(cycle):
    """Trapezoidal force-time integrals over the stance, per body weight.

    The anteroposterior channel is split by sign into braking (negative lobe,
    reported as a magnitude) and propulsive parts; mediolateral uses the
    magnitude of the force.
    """
    dt = 1.0 / cycle.sample_rate
    bw = cycle.body_weight
    ap = cycle.forces[:, 0]
    ml = cycle.forces[:, 1]
    v = cycle.forces[:, 2]
    return ImpulseSummary(
        vertical=float(np.trapezoid(v, dx=dt) / bw),
        ap_braking=float(-np.trapezoid(np.minimum(ap, 0.0), dx=dt) / bw),
        ap_propulsive=float(np.trapezoid(np.maximum(ap, 0.0), dx=dt) / bw),
        ml=float(np.trapezoid(np.abs(ml), dx=dt) / bw),
    )


@dataclass
class KineticSummary:
    """Per-stance outcome variables in body-weight units."""

    loading_rates: LoadingRates
    impulses: ImpulseSummary
    stance_duration: float

    def as_rows(self):
        return {
            "plr_ap": self.loading_rates.ap,
            "plr_ml": self.loading_rates.ml,
            "plr_vertical": self.loading_rates.vertical,
            "impulse_vertical": self.impulses.vertical,
            "impulse_ap_braking": self.impulses.ap_braking,
            "impulse_ap_propulsive": self.impulses.ap_propulsive,
            "impulse_ml": self.impulses.ml,
            "stance_duration": self.stance_duration,
        }


def summarize_stance(cycle):
    return KineticSummary(
        loading_rates=peak_loading_rate(cycle),
        impulses=stance_impulse(cycle),
        stance_duration=cycle.duration,
    )
