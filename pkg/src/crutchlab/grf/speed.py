"""Walking speed from a dorsal-marker trajectory."""

from dataclasses import dataclass

import numpy as np


@dataclass
class MarkerTrack:
    """Marker positions (n, 3) in meters."""

    positions: np.ndarray
    sample_rate: float = 100.0
    marker: str = "dorsal"

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if self.positions.shape[1] != 3:
            raise ValueError("positions must be an (n, 3) array")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")


def principal_horizontal_axis(track):
    """Unit vector of dominant variance in the horizontal (x, y) plane."""
    xy = track.positions[:, :2]
    centered = xy - xy.mean(axis=0)
    cov = centered.T @ centered / max(1, xy.shape[0] - 1)
    if np.trace(cov) < 1e-9:
        raise ValueError("stationary track: no walking direction")
    w, vecs = np.linalg.eigh(cov)
    return vecs[:, np.argmax(w)]


def walking_speed(track):
    """Mean absolute per-sample displacement along the walking axis, m/s.

    Back-and-forth passes contribute their path speed rather than cancelling.
    """
    if track.positions.shape[0] < 2:
        raise ValueError("need at least two samples")
    axis = principal_horizontal_axis(track)
    proj = track.positions[:, :2] @ axis
    return float(np.abs(np.diff(proj)).mean() * track.sample_rate)
