"""
Synthetic co-driven sensor data with fault injection, and joint
precision/recall scoring of alarm traces against fault labels.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .signals import MeasurementMatrix

FAULT_KINDS = ("disconnect_flatline", "stuck_value", "noise_burst")

#: (period in samples, relative amplitude) of the sinusoids in the shared drive.
#: Every period is well below the default correlation window so that each
#: window sees several cycles and nominal correlations stay uniformly high.
DRIVE_COMPONENTS = ((23.0, 1.0), (31.0, 0.5), (47.0, 0.4))


@dataclass(frozen=True)
class FaultLabel:
    """A fault on ``sensor`` over the sample interval ``[start, end)``.

    ``value`` is the held constant for ``stuck_value``; ``factor`` multiplies
    the channel noise level for ``noise_burst``.
    """

    sensor: str
    start: int
    end: int
    kind: str = "disconnect_flatline"
    value: float = None
    factor: float = None

    def __post_init__(self):
        if self.kind not in FAULT_KINDS:
            raise ValueError(f"unknown fault kind {self.kind!r}")
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid fault interval [{self.start}, {self.end})")
        if self.kind == "stuck_value" and self.value is None:
            raise ValueError("stuck_value fault needs a value")
        if self.kind == "noise_burst" and (self.factor is None or self.factor < 1):
            raise ValueError("noise_burst fault needs a factor >= 1")

    def to_dict(self):
        d = {"sensor": self.sensor, "start": self.start, "end": self.end, "kind": self.kind}
        if self.value is not None:
            d["value"] = self.value
        if self.factor is not None:
            d["factor"] = self.factor
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(
            str(d["sensor"]),
            int(d["start"]),
            int(d["end"]),
            d.get("kind", "disconnect_flatline"),
            d.get("value"),
            d.get("factor"),
        )


def write_labels(labels, path):
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump({"labels": [lab.to_dict() for lab in labels]}, fh, indent=2)
        fh.write("\n")


def read_labels(path):
    with Path(path).open(encoding="utf-8") as fh:
        return [FaultLabel.from_dict(d) for d in json.load(fh)["labels"]]


def generate_nominal(n_sensors=4, n_samples=10000, seed=0, drive_amplitude=1.0,
                     noise_std=0.05, offsets=None, sensor_ids=None, dt=0.01):
    """Channels sharing one smooth drive, each with its own offset and white noise.

    The drive is a sum of fixed-period sinusoids (:data:`DRIVE_COMPONENTS`)
    with seeded random phases, scaled so its peak possible magnitude is
    ``drive_amplitude``.
    """
    if n_sensors < 2:
        raise ValueError("need at least two sensors")
    if n_samples < 500:
        raise ValueError("need at least 500 samples")
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples, dtype=float)
    phases = rng.uniform(0.0, 2 * np.pi, size=len(DRIVE_COMPONENTS))
    drive = sum(a * np.sin(2 * np.pi * t / p + ph) for (p, a), ph in zip(DRIVE_COMPONENTS, phases))
    drive *= drive_amplitude / sum(a for _, a in DRIVE_COMPONENTS)
    if offsets is None:
        offsets = np.arange(1, n_sensors + 1, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    if offsets.shape != (n_sensors,):
        raise ValueError(f"need {n_sensors} offsets, got {offsets.size}")
    noise = noise_std * rng.standard_normal((n_sensors, n_samples))
    values = drive[None, :] + offsets[:, None] + noise
    if sensor_ids is None:
        sensor_ids = [f"c{i + 1}" for i in range(n_sensors)]
    return MeasurementMatrix(sensor_ids, t * dt, values)


def inject_fault(matrix, label, noise_std=0.05, seed=0):
    """Copy of ``matrix`` with ``label`` applied to one channel.

    A disconnect holds the last pre-fault sample (the first sample if the fault
    starts at 0). A noise burst adds independent noise so that the channel
    noise level grows from ``noise_std`` to ``factor * noise_std``.
    """
    if label.end > matrix.n_samples:
        raise ValueError(f"fault interval [{label.start}, {label.end}) exceeds {matrix.n_samples} samples")
    out = matrix.copy()
    try:
        row = out.sensor_ids.index(label.sensor)
    except ValueError:
        raise ValueError(f"unknown sensor {label.sensor!r}") from None
    x = out.values[row]
    sl = slice(label.start, label.end)
    if label.kind == "disconnect_flatline":
        x[sl] = x[max(label.start - 1, 0)]
    elif label.kind == "stuck_value":
        x[sl] = float(label.value)
    else:
        rng = np.random.default_rng(seed)
        extra = noise_std * np.sqrt(label.factor ** 2 - 1.0)
        x[sl] += extra * rng.standard_normal(label.end - label.start)
    return out


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn,
                "precision": self.precision, "recall": self.recall}


def ground_truth(trace, labels, grace=0):
    """Boolean mask: either sensor of the pair faulty within the grace-widened interval."""
    truth = np.zeros(trace.indices.size, dtype=bool)
    for lab in labels:
        if lab.sensor in trace.pair:
            lo, hi = lab.start - grace, lab.end + grace
            truth |= (trace.indices >= lo) & (trace.indices < hi)
    return truth


def precision_recall(traces, labels, grace=0):
    """Per-time-step TP/FP/FN counted jointly over all pair traces.

    Undefined ratios are reported as 1 (no alarms gives precision 1, no
    positives gives recall 1).
    """
    traces = list(traces)
    labels = list(labels)
    if grace < 0:
        raise ValueError("grace must be non-negative")
    if traces:
        ref = traces[0].indices
        for tr in traces[1:]:
            if not np.array_equal(tr.indices, ref):
                raise ValueError("traces do not share a timeline")
        horizon = int(ref[-1]) + 1 if ref.size else 0
        for lab in labels:
            if lab.end > horizon:
                raise ValueError(f"label {lab} extends past the trace timeline ({horizon} samples)")
    tp = fp = fn = 0
    for tr in traces:
        truth = ground_truth(tr, labels, grace)
        tp += int(np.sum(tr.alarms & truth))
        fp += int(np.sum(tr.alarms & ~truth))
        fn += int(np.sum(~tr.alarms & truth))
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return EvalReport(tp, fp, fn, precision, recall)
