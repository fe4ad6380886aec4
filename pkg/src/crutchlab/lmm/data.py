"""Long-format dataset container for the mixed-model fits."""

from dataclasses import dataclass, field

import numpy as np

from ..grf.trials import DEVICES, LONG_HEADER, rows_from_csv, rows_to_csv


@dataclass
class LongDataset:
    """Rows of (participant, device, block, trial, turning, response, value)."""

    rows: list = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if row["device"] not in DEVICES:
                raise ValueError(f"unknown device {row['device']!r}")
            if not np.isfinite(row["value"]):
                raise ValueError("missing/non-finite value in dataset")

    def __len__(self):
        return len(self.rows)

    def response_names(self):
        return sorted({row["response"] for row in self.rows})

    def for_response(self, response):
        picked = [row for row in self.rows if row["response"] == response]
        return LongDataset(picked)

    def subset_turning(self, turning):
        return LongDataset([r for r in self.rows if bool(r["turning"]) == bool(turning)])

    def column(self, name):
        return [row[name] for row in self.rows]

    def to_csv(self):
        return rows_to_csv(self.rows)

    @classmethod
    def from_csv(cls, text):
        return cls(rows_from_csv(text))

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_csv(fh.read())
