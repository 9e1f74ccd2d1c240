"""Sensor fault detection and diagnosis with generative models of pairwise
sliding-window correlations."""
from .config import PipelineConfig, load_config
from .diagnose import brute_force_hitting_sets, conflicts_at, diagnose_traces, hs_dag
from .gmm import Gmm, fit_em
from .monitor import AlarmTrace, PairModel, calibrate, classify, hellinger, residual, run_monitor
from .rbm import Rbm, TrainConfig
from .signals import (
    MeasurementMatrix,
    NormalizationRange,
    find_correlated_pairs,
    load_csv,
    median_filter,
    normalize,
    pearson_mod,
    sliding_correlations,
    window_stack,
)
from .simeval import FaultLabel, generate_nominal, inject_fault, precision_recall

__version__ = "0.1.0"
