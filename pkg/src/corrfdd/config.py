"""Pipeline configuration with JSON file loading and flag overrides."""
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path


@dataclass
class RbmSettings:
    n_hidden: int = 20
    epochs: int = 30
    learning_rate: float = 0.05
    batch_size: int = 10
    cd_steps: int = 1


@dataclass
class GmmSettings:
    n_components: int = 5
    max_iters: int = 200
    tol: float = 1e-6


@dataclass
class PipelineConfig:
    kappa: float = 0.5
    k: int = 100
    s: int = 10
    model_type: str = "rbm"
    rbm: RbmSettings = field(default_factory=RbmSettings)
    gmm: GmmSettings = field(default_factory=GmmSettings)
    w: int = 3
    median_kernel: int = 5
    seed: int = 0
    #: None means "use k".
    grace: int = None
    #: Fraction of training windows held out for threshold calibration.
    calibration_holdout: float = 0.0
    #: "observed": min/max of each pair's nominal correlations; "fixed": [-1, 1].
    normalization: str = "observed"

    def __post_init__(self):
        if isinstance(self.rbm, dict):
            self.rbm = RbmSettings(**self.rbm)
        if isinstance(self.gmm, dict):
            self.gmm = GmmSettings(**self.gmm)
        self.validate()

    def validate(self):
        if not 0 <= self.kappa < 1:
            raise ValueError(f"kappa must lie in [0, 1), got {self.kappa}")
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if self.s < 1:
            raise ValueError(f"s must be >= 1, got {self.s}")
        if self.model_type not in ("rbm", "gmm"):
            raise ValueError(f"model_type must be 'rbm' or 'gmm', got {self.model_type!r}")
        if int(self.w) != self.w or self.w < 1:
            raise ValueError(f"w must be a positive integer, got {self.w}")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError(f"median_kernel must be odd and positive, got {self.median_kernel}")
        if self.grace is not None and self.grace < 0:
            raise ValueError(f"grace must be non-negative, got {self.grace}")
        if self.normalization not in ("observed", "fixed"):
            raise ValueError(f"normalization must be 'observed' or 'fixed', got {self.normalization!r}")
        if not 0 <= self.calibration_holdout < 1:
            raise ValueError(f"calibration_holdout must lie in [0, 1), got {self.calibration_holdout}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def effective_grace(self):
        return self.k if self.grace is None else self.grace

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def override(self, **kwargs):
        """Copy with every non-None keyword applied."""
        updates = {key: value for key, value in kwargs.items() if value is not None}
        return replace(self, **updates)


def load_config(path=None, **overrides):
    """Defaults, then the JSON file at ``path``, then non-None ``overrides``."""
    config = PipelineConfig()
    if path is not None:
        with Path(path).open(encoding="utf-8") as fh:
            config = PipelineConfig.from_dict(json.load(fh))
    return config.override(**overrides)
