"""Seeded generator for datasets following the random-intercept model."""

from dataclasses import dataclass

import numpy as np

from ..grf.trials import DEVICES
from .data import LongDataset
from .design import KINETIC_LADDER, ModelSpec, design_matrix


@dataclass
class StudyLayout:
    participants: int = 18
    blocks: int = 2
    trials: int = 3
    devices: tuple = DEVICES
    turning: tuple = (False,)


def _layout_rows(layout, response):
    rows = []
    for p in range(1, layout.participants + 1):
        pid = f"P{p:02d}"
        for device in layout.devices:
            for block in range(1, layout.blocks + 1):
                for trial in range(1, layout.trials + 1):
                    for turning in layout.turning:
                        rows.append({
                            "participant": pid, "device": device,
                            "block": block, "trial": trial,
                            "turning": bool(turning),
                            "response": response, "value": 0.0,
                        })
    return rows


def simulate_dataset(beta, sigma0_sq, sigma_sq, layout=None, terms=KINETIC_LADDER,
                     response="y", seed=0):
    """Draw y = X beta + b_participant + eps over a full factorial layout.

    ``beta`` is either a vector aligned with the design columns of ``terms``
    or a {column label: value} dict (missing labels default to zero).
    Reproducible for a given seed.
    """
    if sigma0_sq < 0 or sigma_sq < 0:
        raise ValueError("variances must be non-negative")
    layout = layout or StudyLayout()
    rows = _layout_rows(layout, response)
    data = LongDataset(rows)
    spec = ModelSpec(response=response, terms=terms)
    X, labels, _, groups = design_matrix(spec, data)
    if isinstance(beta, dict):
        unknown = set(beta) - set(labels)
        if unknown:
            raise ValueError(f"unknown coefficient label(s): {sorted(unknown)}")
        bvec = np.array([float(beta.get(lab, 0.0)) for lab in labels])
    else:
        bvec = np.asarray(beta, dtype=float)
        if bvec.shape != (len(labels),):
            raise ValueError(f"beta must have {len(labels)} entries for {labels}")
    rng = np.random.default_rng(seed)
    unique_groups = sorted(set(groups))
    intercepts = dict(zip(unique_groups,
                          rng.normal(0.0, np.sqrt(sigma0_sq), len(unique_groups))))
    noise = rng.normal(0.0, np.sqrt(sigma_sq), len(rows))
    y = X @ bvec + np.array([intercepts[g] for g in groups]) + noise
    for row, value in zip(rows, y):
        row["value"] = float(value)
    return LongDataset(rows)
