"""Minimal-to-maximal model ladder with per-step likelihood-ratio tests."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .design import LADDERS, ModelSpec
from .fit import fit_random_intercept, likelihood_ratio_test


@dataclass
class LadderResult:
    response: str
    fits: list
    tests: list          # tests[0] is None, tests[k] compares k-1 vs k
    selected_index: int
    alpha: float

    @property
    def selected_fit(self):
        return self.fits[self.selected_index]

    def table_rows(self):
        """Appendix-style cells: coefficients with stars and SEs, then the
        goodness-of-fit block."""
        maximal = self.fits[-1]
        rows = []
        for label in maximal.labels:
            cells = []
            for fit in self.fits:
                if label in fit.labels:
                    i = fit.labels.index(label)
                    cells.append(_coef_cell(fit.beta[i], fit.se[i],
                                            fit.p_values()[i]))
                else:
                    cells.append("")
            rows.append((label, cells))
        rows.append(("AIC", [f"{f.aic:.4f}" for f in self.fits]))
        rows.append(("BIC", [f"{f.bic:.4f}" for f in self.fits]))
        rows.append(("Log Likelihood", [f"{f.loglik:.4f}" for f in self.fits]))
        rows.append(("Num. obs.", [str(f.n_obs) for f in self.fits]))
        rows.append(("Num. groups: participant",
                     [str(f.n_groups) for f in self.fits]))
        rows.append(("Var: participant", [f"{f.sigma0_sq:.4f}" for f in self.fits]))
        rows.append(("Var: Residual", [f"{f.sigma_sq:.4f}" for f in self.fits]))
        return rows

    def table_markdown(self):
        header = [""] + [f"Model {k}" for k in range(len(self.fits))]
        lines = ["| " + " | ".join(header) + " |",
                 "|" + "---|" * len(header)]
        for label, cells in self.table_rows():
            lines.append("| " + " | ".join([label] + cells) + " |")
        lines.append("")
        lines.append(f"Selected: Model {self.selected_index} "
                     f"(largest model with step LRT p < {self.alpha})")
        lines.append("*** p < 0.001; ** p < 0.01; * p < 0.05")
        return "\n".join(lines)

    def table_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([""] + [f"Model {k}" for k in range(len(self.fits))])
        for label, cells in self.table_rows():
            writer.writerow([label] + cells)
        return buf.getvalue()


def _coef_cell(beta, se, p):
    return f"{beta:.4f}{_stars(p)} ({se:.4f})"


def _stars(p):
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def ladder_terms(family):
    """Cumulative term tuples Model 0..K for a named ladder family."""
    if isinstance(family, str):
        try:
            sequence = LADDERS[family]
        except KeyError:
            raise ValueError(f"unknown ladder family {family!r}; "
                             f"choose from {sorted(LADDERS)}") from None
    else:
        sequence = tuple(family)
    return [tuple(sequence[:k]) for k in range(len(sequence) + 1)]


def model_ladder(data, response, family="kinetic", method="ML", alpha=0.05):
    """Fit Model 0..K for the response, test each addition, select.

    The selected model is the last one in the chain whose addition step is
    significant; the walk stops at the first non-significant step.
    """
    subset = data.for_response(response)
    fits = []
    tests = [None]
    for terms in ladder_terms(family):
        spec = ModelSpec(response=response, terms=terms, method=method)
        try:
            fits.append(fit_random_intercept(spec, subset))
        except Exception as exc:
            raise type(exc)(f"model {len(fits)} ({terms}): {exc}") from exc
    for k in range(1, len(fits)):
        tests.append(likelihood_ratio_test(fits[k - 1], fits[k]))
    selected = 0
    for k in range(1, len(fits)):
        if tests[k].p_value < alpha:
            selected = k
        else:
            break
    return LadderResult(response=response, fits=fits, tests=tests,
                        selected_index=selected, alpha=alpha)
