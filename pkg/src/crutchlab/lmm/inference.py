"""Pairwise device contrasts and Wald-based effect sizes."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from ..grf.trials import DEVICES


@dataclass
class ContrastResult:
    pair: str
    estimate: float
    se: float
    z: float
    p_value: float
    p_adjusted: float = None


def _device_effect_vector(fit, level):
    """Coefficient-space vector for a device level's effect (baseline -> 0)."""
    c = np.zeros(len(fit.labels))
    if level == fit.spec.baseline:
        return c
    label = level.capitalize()
    if label not in fit.labels:
        raise ValueError(f"device level {level!r} not in fit")
    c[fit.labels.index(label)] = 1.0
    return c


def device_contrast(fit, level_a, level_b):
    """Estimate and SE of (level_a - level_b) from the fitted coefficients."""
    c = _device_effect_vector(fit, level_a) - _device_effect_vector(fit, level_b)
    est = float(c @ fit.beta)
    se = float(np.sqrt(c @ fit.cov_beta @ c))
    z = est / se if se > 0 else 0.0
    return ContrastResult(
        pair=f"{level_a} - {level_b}", estimate=est, se=se, z=z,
        p_value=float(2.0 * norm.sf(abs(z))),
    )


def pairwise_contrasts(fit, factor="device"):
    """All level pairs of the factor with Holm-adjusted normal p-values."""
    if factor != "device":
        raise ValueError("only the device factor is supported")
    if "device" not in fit.spec.terms:
        raise ValueError("factor 'device' not present in the fit")
    pairs = [(a, b) for i, a in enumerate(DEVICES) for b in DEVICES[i + 1:]]
    results = [device_contrast(fit, b, a) for a, b in pairs]
    _holm_adjust(results)
    return results


def _holm_adjust(results):
    m = len(results)
    order = np.argsort([r.p_value for r in results])
    running = 0.0
    for rank, idx in enumerate(order):
        raw = results[idx].p_value * (m - rank)
        running = max(running, min(1.0, raw))
        results[idx].p_adjusted = running


@dataclass
class EtaSquared:
    value: float
    f_stat: float
    df_num: int
    df_den: int
    formula: str = "wald-F: F*q / (F*q + df_den), df_den = n_obs - p"


TERM_LABELS = {
    "device": lambda fit: [d.capitalize() for d in DEVICES if d != fit.spec.baseline],
    "block": lambda fit: ["Block"],
    "trial": lambda fit: ["Trial"],
    "turning": lambda fit: ["Turning"],
}


def _labels_for_term(fit, term):
    if ":" in term:
        left, right = term.split(":")
        return [f"{l}*{r}" for l in _labels_for_term(fit, left)
                for r in _labels_for_term(fit, right)]
    return TERM_LABELS[term](fit)


def partial_eta_squared(fit, term):
    """Effect size of a term from a Wald F test of its coefficients."""
    if term not in fit.spec.terms:
        raise ValueError(f"term {term!r} not in fit")
    labels = _labels_for_term(fit, term)
    idx = [fit.labels.index(lab) for lab in labels]
    b = fit.beta[idx]
    cov = fit.cov_beta[np.ix_(idx, idx)]
    q = len(idx)
    wald = float(b @ np.linalg.solve(cov, b))
    f_stat = wald / q
    df_den = fit.n_obs - fit.p
    value = f_stat * q / (f_stat * q + df_den)
    return EtaSquared(value=value, f_stat=f_stat, df_num=q, df_den=df_den)
