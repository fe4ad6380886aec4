"""Trial-level orchestration: raw recordings to the long-format dataset.

Processing order per plate: low-pass filter, then strike detection, then
per-stance validation and kinetics. Output rows are canonically ordered by
(participant, device, block, trial, stance index).
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .signals import ForceSeries, detect_crutch_strikes, lowpass_filter
from .speed import MarkerTrack, walking_speed
from .stance import StanceCycle, summarize_stance, validate_stance

DEVICES = ("rigid", "spring", "tensegrity")
QUESTIONNAIRE_RANGES = {
    "borg": (0.0, 10.0),
    "comfort": (-3.0, 3.0),
    "stability": (-3.0, 3.0),
    "pain": (0.0, 10.0),
    "sus": (0.0, 100.0),
}
LONG_HEADER = ("participant", "device", "block", "trial", "turning", "response", "value")


@dataclass
class TrialRecord:
    participant: str
    device: str
    block: int
    trial: int
    turning: bool
    body_weight: float
    questionnaire: dict = None

    def __post_init__(self):
        if self.device not in DEVICES:
            raise ValueError(f"device must be one of {DEVICES}, got {self.device!r}")
        if self.body_weight <= 0:
            raise ValueError("body weight must be positive")
        if self.questionnaire:
            for key, value in self.questionnaire.items():
                if key not in QUESTIONNAIRE_RANGES:
                    raise ValueError(f"unknown questionnaire scale {key!r}")
                lo, hi = QUESTIONNAIRE_RANGES[key]
                if not lo <= value <= hi:
                    raise ValueError(f"{key} score {value} outside [{lo}, {hi}]")

    @property
    def key(self):
        return (self.participant, self.device, self.block, self.trial)


@dataclass
class Trial:
    record: TrialRecord
    force_series: list = field(default_factory=list)
    marker_track: MarkerTrack = None


@dataclass
class PipelineConfig:
    """Every paper threshold as a config key so sensitivity runs are one flag."""

    strike_threshold_n: float = 20.0
    strike_min_duration_s: float = 0.010
    filter_order: int = 4
    filter_cutoff_hz: float = 50.0
    min_stance_duration_s: float = 0.400
    peak_fraction_bw: float = 1.0 / 3.0
    rise_fraction: float = 0.10
    loading_rate_window_s: float = 0.200
    loading_rate_bin_s: float = 0.010


def summarize_trials(trials, config=None):
    """Process trials into long-format rows plus a rejection log.

    Returns (rows, rejections); each row is a dict with the long header
    fields, each rejection names the stance and the failed criteria.
    """
    config = config or PipelineConfig()
    rows = []
    rejections = []
    seen_questionnaire = set()
    for trial in sorted(trials, key=lambda t: t.record.key):
        rec = trial.record
        stance_idx = 0
        for series in trial.force_series:
            filtered = lowpass_filter(series, config.filter_order,
                                      config.filter_cutoff_hz)
            events = detect_crutch_strikes(filtered, config.strike_threshold_n,
                                           config.strike_min_duration_s)
            for event in events:
                cycle = StanceCycle(
                    forces=filtered.samples[event.onset:event.offset],
                    sample_rate=filtered.sample_rate,
                    body_weight=rec.body_weight,
                    meta=rec,
                )
                verdict = validate_stance(cycle, config.min_stance_duration_s,
                                          config.peak_fraction_bw,
                                          config.rise_fraction)
                if not verdict:
                    rejections.append({
                        "participant": rec.participant, "device": rec.device,
                        "block": rec.block, "trial": rec.trial,
                        "plate": series.plate_id, "onset": int(event.onset),
                        "reasons": verdict.reasons(),
                    })
                    continue
                summary = summarize_stance(cycle)
                for response, value in summary.as_rows().items():
                    rows.append(_row(rec, response, value))
                stance_idx += 1
        if trial.marker_track is not None:
            rows.append(_row(rec, "speed", walking_speed(trial.marker_track)))
        if rec.questionnaire:
            qkey = (rec.participant, rec.device, rec.block, rec.turning)
            if qkey not in seen_questionnaire:
                seen_questionnaire.add(qkey)
                for scale in QUESTIONNAIRE_RANGES:
                    if scale in rec.questionnaire:
                        rows.append(_row(rec, scale, rec.questionnaire[scale]))
    return rows, rejections


def _row(rec, response, value):
    return {
        "participant": rec.participant, "device": rec.device, "block": rec.block,
        "trial": rec.trial, "turning": rec.turning, "response": response,
        "value": float(value),
    }


def rows_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(LONG_HEADER)
    for row in rows:
        writer.writerow([
            row["participant"], row["device"], row["block"], row["trial"],
            int(bool(row["turning"])), row["response"], format(row["value"], ".12g"),
        ])
    return buf.getvalue()


def rows_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    missing = set(LONG_HEADER) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"long CSV missing columns: {sorted(missing)}")
    rows = []
    for raw in reader:
        rows.append({
            "participant": raw["participant"], "device": raw["device"],
            "block": int(raw["block"]), "trial": int(raw["trial"]),
            "turning": raw["turning"].strip().lower() in ("1", "true", "yes"),
            "response": raw["response"], "value": float(raw["value"]),
        })
    return rows


# ---------------------------------------------------------------- file loading

def load_force_csv(path, sample_rate=None, plate_id=None):
    """Force CSV with header t_s,f_ap_N,f_ml_N,f_v_N; rate inferred from t_s."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("t_s", "f_ap_N", "f_ml_N", "f_v_N"):
        if col not in (data.dtype.names or ()):
            raise ValueError(f"{path}: missing column {col}")
    t = np.atleast_1d(data["t_s"])
    if sample_rate is None:
        if t.size < 2:
            raise ValueError(f"{path}: cannot infer sample rate from one row")
        sample_rate = 1.0 / float(np.mean(np.diff(t)))
    samples = np.column_stack([
        np.atleast_1d(data["f_ap_N"]),
        np.atleast_1d(data["f_ml_N"]),
        np.atleast_1d(data["f_v_N"]),
    ])
    return ForceSeries(samples, sample_rate, plate_id or str(path))


def load_marker_csv(path, sample_rate=None):
    """Marker CSV with header t_s,x_m,y_m,z_m."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    for col in ("t_s", "x_m", "y_m", "z_m"):
        if col not in (data.dtype.names or ()):
            raise ValueError(f"{path}: missing column {col}")
    t = np.atleast_1d(data["t_s"])
    if sample_rate is None:
        if t.size < 2:
            raise ValueError(f"{path}: cannot infer sample rate from one row")
        sample_rate = 1.0 / float(np.mean(np.diff(t)))
    positions = np.column_stack([
        np.atleast_1d(data["x_m"]), np.atleast_1d(data["y_m"]),
        np.atleast_1d(data["z_m"]),
    ])
    return MarkerTrack(positions, sample_rate)


def load_trial_meta(path):
    """Metadata JSON: participant, device, block, trial, turning,
    body_weight_N, optional questionnaire and file references."""
    with open(path) as fh:
        meta = json.load(fh)
    record = TrialRecord(
        participant=str(meta["participant"]),
        device=meta["device"],
        block=int(meta["block"]),
        trial=int(meta["trial"]),
        turning=bool(meta["turning"]),
        body_weight=float(meta["body_weight_N"]),
        questionnaire=meta.get("questionnaire"),
    )
    return record, meta
