"""Force-plate signal handling: filtering and crutch-strike detection."""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import butter, filtfilt

AXES = ("ap", "ml", "vertical")  # column order of every (n, 3) force array


@dataclass
class ForceSeries:
    """Triaxial force-plate record, columns (AP, ML, vertical) in newtons."""

    samples: np.ndarray
    sample_rate: float = 1000.0
    plate_id: str = "plate0"

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if self.samples.ndim != 2 or self.samples.shape[1] != 3:
            raise ValueError("samples must be an (n, 3) array")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must be finite")

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def vertical(self):
        return self.samples[:, 2]


@dataclass
class StrikeEvent:
    """Crutch contact interval; ``offset`` is one past the last sample."""

    onset: int
    offset: int

    def __post_init__(self):
        if not self.onset < self.offset:
            raise ValueError("onset must precede offset")

    def duration(self, sample_rate):
        return (self.offset - self.onset) / sample_rate


def lowpass_filter(series, order=4, cutoff_hz=50.0):
    """Zero-phase (forward-backward) Butterworth low-pass, DC gain one."""
    nyquist = series.sample_rate / 2.0
    if cutoff_hz >= nyquist:
        raise ValueError(f"cutoff {cutoff_hz} Hz >= Nyquist {nyquist} Hz")
    b, a = butter(order, cutoff_hz / nyquist)
    filtered = filtfilt(b, a, series.samples, axis=0)
    return ForceSeries(filtered, series.sample_rate, series.plate_id)


def detect_crutch_strikes(series, threshold=20.0, min_duration=0.010):
    """Maximal vertical-force runs at or above the threshold.

    A run must persist for at least ``min_duration``; shorter sub-threshold
    dips inside a contact do not split it (hysteresis against sensor noise).
    """
    v = series.vertical
    if v.size == 0:
        return []
    min_samples = max(1, int(round(min_duration * series.sample_rate)))
    above = v >= threshold

    runs = _runs(above)
    # close interior gaps shorter than the maintenance window
    merged = []
    for start, stop in runs:
        if merged and start - merged[-1][1] < min_samples:
            merged[-1] = (merged[-1][0], stop)
        else:
            merged.append((start, stop))
    return [StrikeEvent(s, e) for s, e in merged if e - s >= min_samples]


def _runs(mask):
    idx = np.flatnonzero(np.diff(np.r_[False, mask, False]))
    return list(zip(idx[0::2], idx[1::2]))
