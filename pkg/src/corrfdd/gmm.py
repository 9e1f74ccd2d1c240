"""
Diagonal-covariance Gaussian mixture fitted by EM, used as an alternative
dependency model. Reconstruction is the posterior-weighted mean of the
component means.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

FORMAT_VERSION = 1
VARIANCE_FLOOR = 1e-6


@dataclass(eq=False)
class Gmm:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    #: Log-likelihood after initialization and after every EM iteration.
    history: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.means = np.array(self.means, dtype=float, ndmin=2)
        self.variances = np.array(self.variances, dtype=float, ndmin=2)
        k = self.weights.size
        if self.means.shape[0] != k or self.variances.shape != self.means.shape:
            raise ValueError("inconsistent mixture parameter shapes")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must be a probability vector")
        if np.any(self.variances < VARIANCE_FLOOR * (1 - 1e-12)):
            raise ValueError("variances below floor")

    @property
    def n_components(self):
        return self.weights.size

    @property
    def dim(self):
        return self.means.shape[1]

    def component_log_densities(self, x):
        """``log(w_k) + log N(x | mean_k, diag(var_k))`` with shape ``(..., K)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"input has dimension {x.shape[-1]}, model expects {self.dim}")
        diff = x[..., None, :] - self.means
        maha = np.sum(diff * diff / self.variances, axis=-1)
        log_norm = np.sum(np.log(2 * np.pi * self.variances), axis=-1)
        with np.errstate(divide="ignore"):
            log_w = np.log(self.weights)
        return log_w - 0.5 * (maha + log_norm)

    def responsibilities(self, v):
        return responsibilities(self, v)

    def reconstruct(self, v):
        return reconstruct(self, v)

    def log_likelihood(self, data):
        """Total log-likelihood of the rows of ``data``."""
        return float(np.sum(logsumexp(self.component_log_densities(np.atleast_2d(data)), axis=-1)))

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "type": "gmm",
            "n_components": self.n_components,
            "dim": self.dim,
            "weights": [float(w) for w in self.weights],
            "means": [[float(m) for m in row] for row in self.means],
            "variances": [[float(v) for v in row] for row in self.variances],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("type") != "gmm":
            raise ValueError(f"not a gmm model: type={d.get('type')!r}")
        return cls(d["weights"], d["means"], d["variances"])


def responsibilities(model, v):
    """Posterior component probabilities for a vector or rows of vectors."""
    log_p = model.component_log_densities(v)
    return np.exp(log_p - logsumexp(log_p, axis=-1, keepdims=True))


def reconstruct(model, v):
    return responsibilities(model, v) @ model.means


def _kmeanspp(data, k, rng):
    n = data.shape[0]
    centers = [data[rng.integers(n)]]
    d2 = np.sum((data - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers.append(data[idx])
        d2 = np.minimum(d2, np.sum((data - data[idx]) ** 2, axis=1))
    return np.array(centers)


def fit_em(data, n_components=5, seed=0, max_iters=200, tol=1e-6):
    """Fit a diagonal GMM by EM from a k-means++ start.

    Stops after ``max_iters`` iterations or when the total log-likelihood
    improves by less than ``tol``. A component that loses all responsibility
    is re-seeded at the worst-explained datum.
    """
    data = np.atleast_2d(np.asarray(data, dtype=float))
    n, dim = data.shape
    if n_components < 1:
        raise ValueError("n_components must be >= 1")
    if n < n_components:
        raise ValueError(f"need at least {n_components} samples, got {n}")
    rng = np.random.default_rng(seed)

    base_var = np.maximum(data.var(axis=0), VARIANCE_FLOOR)
    means = _kmeanspp(data, n_components, rng)
    model = Gmm(np.full(n_components, 1.0 / n_components), means, np.tile(base_var, (n_components, 1)))

    log_p = model.component_log_densities(data)
    ll = float(np.sum(logsumexp(log_p, axis=1)))
    history = [ll]
    for _ in range(max_iters):
        # E step
        log_norm = logsumexp(log_p, axis=1, keepdims=True)
        resp = np.exp(log_p - log_norm)
        nk = resp.sum(axis=0)
        dead = np.flatnonzero(nk < 1e-10 * n)
        if dead.size:
            worst = np.argsort(log_norm.ravel(), kind="stable")
            for slot, kdead in enumerate(dead):
                resp[:, kdead] = 0.0
                resp[worst[slot % n], :] = 0.0
                resp[worst[slot % n], kdead] = 1.0
            nk = resp.sum(axis=0)
        # M step; flooring is the constrained maximizer per dimension
        weights = nk / n
        means = (resp.T @ data) / nk[:, None]
        sq = np.einsum("nk,nkd->kd", resp, (data[:, None, :] - means) ** 2) / nk[:, None]
        variances = np.maximum(sq, VARIANCE_FLOOR)
        model = Gmm(weights / weights.sum(), means, variances)

        log_p = model.component_log_densities(data)
        new_ll = float(np.sum(logsumexp(log_p, axis=1)))
        history.append(new_ll)
        if new_ll - ll < tol:
            break
        ll = new_ll
    model.history = history
    return model
