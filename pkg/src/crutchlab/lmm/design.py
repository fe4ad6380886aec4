"""Fixed-effect design matrices with treatment coding, rigid as baseline."""

from dataclasses import dataclass, field

import numpy as np

from ..grf.trials import DEVICES

INTERCEPT_LABEL = "Rigid (Baseline)"
MAIN_TERMS = ("device", "block", "trial", "turning")
INTERACTIONS = ("device:trial", "device:block", "device:turning")
ALL_TERMS = MAIN_TERMS + INTERACTIONS

# Minimal-to-maximal ladders, one added term per model
KINETIC_LADDER = ("device", "block", "trial", "device:trial")
SPEED_LADDER = ("device", "block", "device:block", "trial", "device:trial")
QUESTIONNAIRE_LADDER = ("device", "turning", "device:turning")
LADDERS = {
    "kinetic": KINETIC_LADDER,
    "speed": SPEED_LADDER,
    "questionnaire": QUESTIONNAIRE_LADDER,
}


@dataclass
class ModelSpec:
    """Ordered fixed-effect terms for one response, grouped by participant."""

    response: str
    terms: tuple = ()
    group: str = "participant"
    method: str = "ML"
    baseline: str = "rigid"

    def __post_init__(self):
        self.terms = tuple(self.terms)
        for term in self.terms:
            if term not in ALL_TERMS:
                raise ValueError(f"unknown term {term!r}")
        for term in self.terms:
            if ":" in term:
                for part in term.split(":"):
                    if part not in self.terms:
                        raise ValueError(
                            f"interaction {term!r} requires main effect {part!r}"
                        )
        if self.method not in ("ML", "REML"):
            raise ValueError("method must be ML or REML")
        if self.baseline not in DEVICES:
            raise ValueError(f"baseline must be one of {DEVICES}")


def device_dummy_labels(baseline="rigid"):
    return [d.capitalize() for d in DEVICES if d != baseline]


def design_matrix(spec, data):
    """Build (X, labels, y, group_labels) for the spec over the dataset.

    Treatment coding with the baseline device absorbed into the intercept;
    block and trial enter as raw integers; interactions are column products.
    """
    rows = [r for r in data.rows if r["response"] == spec.response]
    if not rows:
        raise ValueError(f"no rows for response {spec.response!r}")
    devices = [r["device"] for r in rows]
    unknown = set(devices) - set(DEVICES)
    if unknown:
        raise ValueError(f"unknown device level(s): {sorted(unknown)}")

    n = len(rows)
    columns = [np.ones(n)]
    labels = [INTERCEPT_LABEL if spec.baseline == "rigid"
              else f"{spec.baseline.capitalize()} (Baseline)"]

    def main_columns(term):
        if term == "device":
            cols, labs = [], []
            for level in DEVICES:
                if level == spec.baseline:
                    continue
                cols.append(np.array([1.0 if d == level else 0.0 for d in devices]))
                labs.append(level.capitalize())
            return cols, labs
        if term in ("block", "trial"):
            return [np.array([float(r[term]) for r in rows])], [term.capitalize()]
        if term == "turning":
            return [np.array([1.0 if r["turning"] else 0.0 for r in rows])], ["Turning"]
        raise ValueError(f"unknown term {term!r}")

    for term in spec.terms:
        if ":" not in term:
            cols, labs = main_columns(term)
            columns.extend(cols)
            labels.extend(labs)
        else:
            left, right = term.split(":")
            lcols, llabs = main_columns(left)
            rcols, rlabs = main_columns(right)
            for lc, ll in zip(lcols, llabs):
                for rc, rl in zip(rcols, rlabs):
                    columns.append(lc * rc)
                    labels.append(f"{ll}*{rl}")

    X = np.column_stack(columns)
    y = np.array([float(r["value"]) for r in rows])
    groups = [str(r[spec.group]) for r in rows]
    return X, labels, y, groups
