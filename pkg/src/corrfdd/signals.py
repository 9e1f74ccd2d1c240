"""
Multi-channel measurement handling: CSV ingestion, median filtering,
normalization, the modified Pearson coefficient and sliding-window
correlation features.
"""
import csv
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.ndimage
from numpy.lib.stride_tricks import sliding_window_view


class ValidationError(ValueError):
    """Raised when input data violates a structural contract."""


class CsvParseError(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class MeasurementMatrix:
    """m sensor channels by n samples, with per-sample timestamps in seconds."""

    sensor_ids: list
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.sensor_ids = [str(s) for s in self.sensor_ids]
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        m, n = self.values.shape
        if len(self.sensor_ids) != m:
            raise ValidationError(f"{len(self.sensor_ids)} sensor ids for {m} rows")
        if len(set(self.sensor_ids)) != m:
            raise ValidationError("sensor ids must be unique")
        if self.timestamps.shape != (n,):
            raise ValidationError(f"{self.timestamps.size} timestamps for {n} samples")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("values contain NaN or Inf")
        if n > 1 and np.any(np.diff(self.timestamps) < 0):
            raise ValidationError("timestamps must be non-decreasing")

    @property
    def n_sensors(self):
        return self.values.shape[0]

    @property
    def n_samples(self):
        return self.values.shape[1]

    def channel(self, sensor_id):
        try:
            return self.values[self.sensor_ids.index(str(sensor_id))]
        except ValueError:
            raise KeyError(sensor_id) from None

    def copy(self):
        return MeasurementMatrix(list(self.sensor_ids), self.timestamps.copy(), self.values.copy())


@dataclass(frozen=True)
class NormalizationRange:
    lo: float = -1.0
    hi: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid normalization range [{self.lo}, {self.hi}]")

    def to_dict(self):
        return {"lo": self.lo, "hi": self.hi}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["lo"]), float(d["hi"]))


#: Correlations live in [-1, 1]; model inputs are (c + 1) / 2.
CORRELATION_RANGE = NormalizationRange(-1.0, 1.0)


@dataclass
class CorrelationSeries:
    pair: tuple
    window_k: int
    values: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.values)


def load_csv(path):
    """Read a measurement CSV.

    The first column holds timestamps in seconds, each remaining column one
    sensor channel; the header row is mandatory.

    :raises CsvParseError: on malformed or non-finite cells, with the line number.
    :raises ValidationError: on fewer than two channels or decreasing timestamps.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError("empty file", line=1) from None
        header = [h.strip() for h in header]
        if len(header) < 3:
            raise ValidationError(f"need a timestamp column and >= 2 sensor columns, got {header}")
        rows = []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvParseError(f"expected {len(header)} fields, got {len(row)}", line=line)
            try:
                parsed = [float(c) for c in row]
            except ValueError as exc:
                raise CsvParseError(str(exc), line=line) from None
            for col, v in zip(header, parsed):
                if not math.isfinite(v):
                    raise CsvParseError(f"non-finite value {v!r} in column {col!r}", line=line)
            rows.append(parsed)
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    ts = data[:, 0]
    bad = np.flatnonzero(np.diff(ts) < 0)
    if bad.size:
        raise ValidationError(f"timestamps decrease at data row {bad[0] + 2}")
    return MeasurementMatrix(header[1:], ts, data[:, 1:].T)


def write_csv(matrix, path):
    """Write ``matrix`` in the format read by :func:`load_csv` (floats as repr)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp"] + list(matrix.sensor_ids))
        for t, col in zip(matrix.timestamps, matrix.values.T):
            writer.writerow([repr(float(t))] + [repr(float(v)) for v in col])


def median_filter(series, kernel):
    """Centered running median with edge replication; output length matches input."""
    x = np.asarray(series, dtype=float)
    if isinstance(kernel, bool) or int(kernel) != kernel or kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be an odd positive integer, got {kernel!r}")
    if kernel > x.size:
        raise ValueError(f"kernel {kernel} longer than series ({x.size})")
    if kernel == 1:
        return x.copy()
    return scipy.ndimage.median_filter(x, size=int(kernel), mode="nearest")


def normalize(series, bounds=CORRELATION_RANGE):
    """Affine map of ``bounds`` onto [0, 1]; values outside are clamped."""
    x = np.asarray(series, dtype=float)
    return np.clip((x - bounds.lo) / (bounds.hi - bounds.lo), 0.0, 1.0)


def _is_constant(x):
    return np.ptp(x, axis=-1) == 0


def pearson_mod(x, y):
    """Pearson correlation extended to zero-variance inputs.

    Both constant gives 1, exactly one constant gives 0; otherwise the usual
    coefficient, clipped to [-1, 1].
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    cx, cy = _is_constant(x), _is_constant(y)
    if cx and cy:
        return 1.0
    if cx or cy:
        return 0.0
    xc = x - x.mean()
    yc = y - y.mean()
    r = np.dot(xc, yc) / (math.sqrt(np.dot(xc, xc)) * math.sqrt(np.dot(yc, yc)))
    return float(min(1.0, max(-1.0, r)))


def _window_correlations(x, y, k):
    wx = sliding_window_view(x, k)
    wy = sliding_window_view(y, k)
    xc = wx - wx.mean(axis=1, keepdims=True)
    yc = wy - wy.mean(axis=1, keepdims=True)
    sxx = np.einsum("ij,ij->i", xc, xc)
    syy = np.einsum("ij,ij->i", yc, yc)
    sxy = np.einsum("ij,ij->i", xc, yc)
    cx = _is_constant(wx)
    cy = _is_constant(wy)
    both = ~cx & ~cy
    out = np.zeros(wx.shape[0])
    out[both] = sxy[both] / (np.sqrt(sxx[both]) * np.sqrt(syy[both]))
    out[cx & cy] = 1.0
    return np.clip(out, -1.0, 1.0)


def sliding_correlations(x, y, k, pair=None):
    """Modified Pearson coefficient over every stride-1 window of size ``k``.

    Returns a :class:`CorrelationSeries` of length ``n - k + 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if k < 2:
        raise ValueError(f"window size must be >= 2, got {k}")
    if k > x.size:
        raise ValueError(f"window size {k} exceeds series length {x.size}")
    return CorrelationSeries(pair, int(k), _window_correlations(x, y, int(k)))


def find_correlated_pairs(matrix, kappa=0.5):
    """Unordered sensor pairs whose whole-run coefficient exceeds ``kappa``.

    The comparison is signed: strongly anti-correlated channels do not qualify.
    Pairs are returned as ``(a, b)`` tuples ordered by row position.
    """
    if not 0 <= kappa < 1:
        raise ValueError(f"kappa must lie in [0, 1), got {kappa}")
    pairs = set()
    for i, j in itertools.combinations(range(matrix.n_sensors), 2):
        if pearson_mod(matrix.values[i], matrix.values[j]) > kappa:
            pairs.add((matrix.sensor_ids[i], matrix.sensor_ids[j]))
    return pairs


def window_stack(corr, s):
    """Stride-1 windows of ``s`` consecutive correlations, shape ``(len - s + 1, s)``."""
    values = corr.values if isinstance(corr, CorrelationSeries) else np.asarray(corr, dtype=float)
    if s < 1:
        raise ValueError(f"window size must be >= 1, got {s}")
    if s > values.size:
        raise ValueError(f"window size {s} exceeds correlation series length {values.size}")
    return sliding_window_view(values, int(s)).copy()
