"""
Restricted Boltzmann Machine with binary units, trained by contrastive
divergence.

Real-valued inputs in [0, 1] are treated as Bernoulli probabilities. Hidden
states are sampled during training only; reconstruction for residual
generation is mean-field and therefore deterministic.
"""
from dataclasses import dataclass

import numpy as np

FORMAT_VERSION = 1


def sigmoid(x):
    """Logistic function, stable for large ``|x|``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


@dataclass
class Rbm:
    """Weights are stored hidden-major, ``weights[i, j]`` joins hidden i to visible j."""

    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        self.weights = np.array(self.weights, dtype=float, ndmin=2)
        self.visible_bias = np.array(self.visible_bias, dtype=float).ravel()
        self.hidden_bias = np.array(self.hidden_bias, dtype=float).ravel()
        if self.weights.shape != (self.hidden_bias.size, self.visible_bias.size):
            raise ValueError(
                f"weights {self.weights.shape} inconsistent with "
                f"|H|={self.hidden_bias.size}, |V|={self.visible_bias.size}"
            )
        for name in ("weights", "visible_bias", "hidden_bias"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite values")

    @property
    def n_visible(self):
        return self.visible_bias.size

    @property
    def n_hidden(self):
        return self.hidden_bias.size

    @classmethod
    def zeros(cls, n_visible, n_hidden):
        return cls(np.zeros((n_hidden, n_visible)), np.zeros(n_visible), np.zeros(n_hidden))

    def copy(self):
        return Rbm(self.weights.copy(), self.visible_bias.copy(), self.hidden_bias.copy())

    def energy(self, v, h):
        v = np.asarray(v, dtype=float)
        h = np.asarray(h, dtype=float)
        return float(-(h @ self.weights @ v) - self.visible_bias @ v - self.hidden_bias @ h)

    def reconstruct(self, v, gibbs_steps=1):
        return reconstruct(self, v, gibbs_steps)

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "type": "rbm",
            "n_visible": self.n_visible,
            "n_hidden": self.n_hidden,
            "weights": [float(w) for w in self.weights.ravel()],
            "visible_bias": [float(a) for a in self.visible_bias],
            "hidden_bias": [float(b) for b in self.hidden_bias],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("type") != "rbm":
            raise ValueError(f"not an rbm model: type={d.get('type')!r}")
        w = np.asarray(d["weights"], dtype=float).reshape(int(d["n_hidden"]), int(d["n_visible"]))
        return cls(w, d["visible_bias"], d["hidden_bias"])


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.05
    cd_steps: int = 1
    batch_size: int = 10
    seed: int = 0
    n_hidden: int = 20

    def __post_init__(self):
        for name in ("epochs", "cd_steps", "batch_size", "n_hidden"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


def _check_dim(x, n, what):
    if x.shape[-1] != n:
        raise ValueError(f"{what} has dimension {x.shape[-1]}, model expects {n}")


def hidden_probs(model, v):
    """p(h_i = 1 | v) for a single vector or a batch (rows)."""
    v = np.asarray(v, dtype=float)
    _check_dim(v, model.n_visible, "visible vector")
    return sigmoid(v @ model.weights.T + model.hidden_bias)


def visible_probs(model, h):
    """p(v_j = 1 | h) for a single vector or a batch (rows)."""
    h = np.asarray(h, dtype=float)
    _check_dim(h, model.n_hidden, "hidden vector")
    return sigmoid(h @ model.weights + model.visible_bias)


def cd_update(model, batch, lr, rng, cd_steps=1):
    """One contrastive-divergence step over ``batch``; returns a new model.

    The positive phase uses the data and its hidden probabilities. The chain
    samples binary hidden states, reconstructs visible probabilities, and the
    negative phase uses the final visible probabilities and their hidden
    probabilities. Updates are ``lr`` times the batch mean of the differences.
    """
    v0 = np.atleast_2d(np.asarray(batch, dtype=float))
    if v0.shape[0] == 0:
        raise ValueError("empty batch")
    _check_dim(v0, model.n_visible, "batch")
    ph0 = hidden_probs(model, v0)
    ph = ph0
    for _ in range(cd_steps):
        h = (rng.random(ph.shape) < ph).astype(float)
        vk = visible_probs(model, h)
        ph = hidden_probs(model, vk)
    n = v0.shape[0]
    dw = (ph0.T @ v0 - ph.T @ vk) / n
    da = (v0 - vk).mean(axis=0)
    db = (ph0 - ph).mean(axis=0)
    return Rbm(
        model.weights + lr * dw,
        model.visible_bias + lr * da,
        model.hidden_bias + lr * db,
    )


def cd1_update(model, batch, lr, rng):
    return cd_update(model, batch, lr, rng, cd_steps=1)


def init_model(n_visible, n_hidden, rng):
    """Weights drawn from N(0, 0.01^2), biases zero."""
    return Rbm(rng.normal(0.0, 0.01, size=(n_hidden, n_visible)), np.zeros(n_visible), np.zeros(n_hidden))


def train(data, config=None, history=None):
    """Fit an RBM to ``data`` (rows in [0, 1]) with shuffled mini-batch CD.

    Deterministic given ``config.seed``. If ``history`` is a list, the
    reconstruction error is appended before the first epoch and after each one.
    """
    config = config or TrainConfig()
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.size == 0 or data.shape[0] == 0:
        raise ValueError("empty training data")
    rng = np.random.default_rng(config.seed)
    model = init_model(data.shape[1], config.n_hidden, rng)
    if history is not None:
        history.append(reconstruction_error(model, data))
    n = data.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = data[order[start:start + config.batch_size]]
            model = cd_update(model, batch, config.learning_rate, rng, config.cd_steps)
        if history is not None:
            history.append(reconstruction_error(model, data))
    return model


def reconstruct(model, v, gibbs_steps=1):
    """Mean-field Gibbs passes; returns visible probabilities."""
    if gibbs_steps < 1:
        raise ValueError(f"gibbs_steps must be >= 1, got {gibbs_steps}")
    x = np.asarray(v, dtype=float)
    for _ in range(gibbs_steps):
        x = visible_probs(model, hidden_probs(model, x))
    return x


def reconstruction_error(model, data):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[0] == 0:
        raise ValueError("empty data")
    return float(np.mean((data - reconstruct(model, data, 1)) ** 2))
