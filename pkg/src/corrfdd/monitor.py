"""
Residual generation, threshold calibration and per-pair fault classification.

Each correlated sensor pair gets a :class:`PairModel`. A residual is the
Hellinger distance between a normalized window of ``s`` consecutive
sliding-window correlations and the model's reconstruction of that window.
"""
import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gmm as gmm_mod
from . import rbm as rbm_mod
from .signals import (
    CORRELATION_RANGE,
    NormalizationRange,
    median_filter,
    normalize,
    sliding_correlations,
    window_stack,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
NOMINAL = "nominal"
FAULTY = "faulty"


class ConfigurationError(ValueError):
    """A model refers to sensors that the data does not provide."""


def hellinger(a, b):
    """``sqrt(0.5 * sum((sqrt(a) - sqrt(b))**2))`` over the last axis.

    Inputs need not sum to one; windows of normalized correlations are
    compared directly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("hellinger distance needs non-negative inputs")
    d = np.sqrt(0.5 * np.sum((np.sqrt(a) - np.sqrt(b)) ** 2, axis=-1))
    return d if d.ndim else float(d)


def calibrate(train_residuals, w=3):
    """Return ``(mu, sigma, delta)`` with population std and ``delta = mu + w * sigma``."""
    r = np.asarray(train_residuals, dtype=float).ravel()
    if r.size < 2:
        raise ValueError("need at least two residuals to calibrate")
    if w <= 0:
        raise ValueError(f"w must be positive, got {w}")
    mu = float(np.mean(r))
    sigma = float(np.std(r))
    return mu, sigma, mu + w * sigma


def classify(r, delta):
    """Nominal iff ``r <= delta``."""
    return NOMINAL if r <= delta else FAULTY


def model_from_dict(d):
    kind = d.get("type")
    if kind == "rbm":
        return rbm_mod.Rbm.from_dict(d)
    if kind == "gmm":
        return gmm_mod.Gmm.from_dict(d)
    raise ValueError(f"unknown model type {kind!r}")


@dataclass
class PairModel:
    pair: tuple
    model: object
    mu: float
    sigma: float
    delta: float
    k: int
    s: int
    w: int = 3
    input_range: NormalizationRange = CORRELATION_RANGE

    def __post_init__(self):
        self.pair = tuple(str(p) for p in self.pair)
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.delta < self.mu:
            raise ValueError("delta must not be below mu")
        if _input_dim(self.model) != self.s:
            raise ValueError(f"model input dimension {_input_dim(self.model)} != s={self.s}")

    @property
    def model_type(self):
        return "rbm" if isinstance(self.model, rbm_mod.Rbm) else "gmm"

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "pair": list(self.pair),
            "k": self.k,
            "s": self.s,
            "w": self.w,
            "mu": self.mu,
            "sigma": self.sigma,
            "delta": self.delta,
            "input_range": self.input_range.to_dict(),
            "model": self.model.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            pair=tuple(d["pair"]),
            model=model_from_dict(d["model"]),
            mu=float(d["mu"]),
            sigma=float(d["sigma"]),
            delta=float(d["delta"]),
            k=int(d["k"]),
            s=int(d["s"]),
            w=int(d["w"]),
            input_range=NormalizationRange.from_dict(d["input_range"]),
        )


def _input_dim(model):
    return model.n_visible if isinstance(model, rbm_mod.Rbm) else model.dim


@dataclass
class AlarmTrace:
    pair: tuple
    timestamps: np.ndarray
    residuals: np.ndarray
    threshold: float
    alarms: np.ndarray = None
    #: Sample index of the newest raw sample behind each residual.
    indices: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.residuals = np.asarray(self.residuals, dtype=float)
        self.timestamps = np.asarray(self.timestamps, dtype=float)
        expected = self.residuals > self.threshold
        if self.alarms is None:
            self.alarms = expected
        self.alarms = np.asarray(self.alarms, dtype=bool)
        if self.alarms.shape != expected.shape or np.any(self.alarms != expected):
            raise ValueError("alarms must equal residuals > threshold")
        if self.indices is None:
            self.indices = np.arange(self.residuals.size)
        self.indices = np.asarray(self.indices, dtype=int)
        n = self.residuals.size
        if not (self.timestamps.size == self.alarms.size == self.indices.size == n):
            raise ValueError("trace sequences must have equal length")


def residuals(pm, windows):
    """Residuals for one window (length ``s``) or for rows of windows."""
    windows = np.asarray(windows, dtype=float)
    if windows.shape[-1] != pm.s:
        raise ValueError(f"window dimension {windows.shape[-1]} != s={pm.s}")
    x = normalize(windows, pm.input_range)
    return hellinger(x, pm.model.reconstruct(x))


def residual(pm, window):
    window = np.asarray(window, dtype=float)
    if window.ndim != 1:
        raise ValueError("expected a single window; use residuals() for batches")
    return residuals(pm, window)


def preprocess(matrix, median_kernel=5):
    """Median-filter every channel; returns a dict sensor id -> filtered series."""
    return {sid: median_filter(row, median_kernel) for sid, row in zip(matrix.sensor_ids, matrix.values)}


def pair_windows(channels, pair, k, s):
    a, b = pair
    corr = sliding_correlations(channels[a], channels[b], k, pair=(a, b))
    return window_stack(corr, s)


def run_monitor(models, matrix, median_kernel=5):
    """Residual and alarm traces for every pair model over ``matrix``.

    Each residual is stamped with the newest raw sample in its composite
    window, so the first ``k + s - 2`` samples produce no output.
    """
    models = list(models)
    if not models:
        return []
    for pm in models:
        missing = [sid for sid in pm.pair if sid not in matrix.sensor_ids]
        if missing:
            raise ConfigurationError(f"sensors {missing} of pair {pm.pair} not in data")
        if matrix.n_samples < pm.k + pm.s - 1:
            raise ValueError(
                f"series of {matrix.n_samples} samples too short for k={pm.k}, s={pm.s}"
            )
    channels = preprocess(matrix, median_kernel)
    traces = []
    for pm in models:
        windows = pair_windows(channels, pm.pair, pm.k, pm.s)
        r = residuals(pm, windows)
        idx = np.arange(windows.shape[0]) + pm.k + pm.s - 2
        traces.append(AlarmTrace(pm.pair, matrix.timestamps[idx], r, pm.delta, indices=idx))
    return traces


def observed_range(correlations):
    """Range of nominal correlations; falls back to [-1, 1] if they never vary."""
    lo, hi = float(np.min(correlations)), float(np.max(correlations))
    if not lo < hi:
        return CORRELATION_RANGE
    return NormalizationRange(lo, hi)


def fit_pair_model(channels, pair, config, seed=None):
    """Train and calibrate one pair model from filtered nominal channels."""
    seed = config.seed if seed is None else seed
    windows = pair_windows(channels, pair, config.k, config.s)
    bounds = observed_range(windows) if config.normalization == "observed" else CORRELATION_RANGE
    x = normalize(windows, bounds)
    n_hold = int(round(config.calibration_holdout * x.shape[0]))
    fit_x = x[: x.shape[0] - n_hold] if n_hold else x
    cal_windows = windows[x.shape[0] - n_hold:] if n_hold else windows
    if config.model_type == "rbm":
        rs = config.rbm
        tc = rbm_mod.TrainConfig(
            epochs=rs.epochs,
            learning_rate=rs.learning_rate,
            cd_steps=rs.cd_steps,
            batch_size=rs.batch_size,
            seed=seed,
            n_hidden=rs.n_hidden,
        )
        model = rbm_mod.train(fit_x, tc)
    else:
        gs = config.gmm
        model = gmm_mod.fit_em(fit_x, gs.n_components, seed=seed, max_iters=gs.max_iters, tol=gs.tol)
    pm = PairModel(pair, model, 0.0, 0.0, 0.0, config.k, config.s, config.w, bounds)
    mu, sigma, delta = calibrate(residuals(pm, cal_windows), config.w)
    pm.mu, pm.sigma, pm.delta = mu, sigma, delta
    log.info("pair %s: mu=%.6g sigma=%.6g delta=%.6g", pair, mu, sigma, delta)
    return pm


def fit_pair_models(matrix, pairs, config):
    """One calibrated model per pair; pair i trains with seed ``config.seed ^ i``."""
    channels = preprocess(matrix, config.median_kernel)
    return [fit_pair_model(channels, pair, config, seed=config.seed ^ i) for i, pair in enumerate(pairs)]


def write_trace_csv(trace, path):
    """Write a trace with columns timestamp, sensor_a, sensor_b, residual, threshold, alarm."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "sensor_a", "sensor_b", "residual", "threshold", "alarm"])
        a, b = trace.pair
        thr = repr(float(trace.threshold))
        for t, r, alarm in zip(trace.timestamps, trace.residuals, trace.alarms):
            writer.writerow([repr(float(t)), a, b, repr(float(r)), thr, int(alarm)])


def read_trace_csv(path, timestamps=None):
    """Inverse of :func:`write_trace_csv`.

    If the full ``timestamps`` of the monitored data are given, sample indices
    are recovered from them; otherwise indices count rows.
    """
    ts, res, alarms = [], [], []
    pair, thr = None, None
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            pair = (row["sensor_a"], row["sensor_b"])
            thr = float(row["threshold"])
            ts.append(float(row["timestamp"]))
            res.append(float(row["residual"]))
            alarms.append(row["alarm"] == "1")
    if pair is None:
        raise ValueError(f"{path}: empty trace")
    ts = np.asarray(ts)
    indices = None
    if timestamps is not None:
        indices = np.searchsorted(np.asarray(timestamps, dtype=float), ts, side="right") - 1
    return AlarmTrace(pair, ts, res, thr, alarms=alarms, indices=indices)
