"""Two-layer perceptron: forward map, negative log posterior, exact gradient.

The flat weight layout is part of the model-file contract and the relevance
machinery depends on it:

    [ first-layer weights grouped by source input:  w1[:, 0], w1[:, 1], ... ]
    [ hidden biases b1 ]
    [ second-layer weights grouped by output unit:  w2[0, :], w2[1, :], ... ]
    [ output biases b2 ]

for a total of M*(d+1) + K*(M+1) parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

ACTIVATIONS = ("linear", "logistic", "tanh", "softmax")

# Predicted probabilities are clamped to [CLAMP_EPS, 1 - CLAMP_EPS] before
# logs, so the cost stays finite under saturation.  For a logistic output the
# clamp only engages once |pre-activation| > ln(1/CLAMP_EPS) ~ 32.2.
CLAMP_EPS = 1e-14


class MlpError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkArchitecture:
    """Topology tag: d inputs, M hidden units, K outputs, two activation tags."""

    d: int
    M: int
    f_inner: str
    f_outer: str
    K: int = 1

    def __post_init__(self):
        if self.d < 1:
            raise MlpError(f"input count d must be >= 1, got {self.d}")
        if not 1 <= self.M <= 15:
            raise MlpError(f"hidden-unit count M must be in [1, 15], got {self.M}")
        if self.K < 1:
            raise MlpError(f"output count K must be >= 1, got {self.K}")
        for tag in (self.f_inner, self.f_outer):
            if tag not in ACTIVATIONS:
                raise MlpError(f"unknown activation {tag!r}; expected one of {ACTIVATIONS}")

    @property
    def n_weights(self) -> int:
        return self.M * (self.d + 1) + self.K * (self.M + 1)

    def layout(self) -> dict[str, np.ndarray]:
        """Named index blocks of the flat weight vector."""
        d, M, K = self.d, self.M, self.K
        blocks: dict[str, np.ndarray] = {}
        for i in range(d):
            blocks[f"input_{i}"] = np.arange(i * M, (i + 1) * M)
        blocks["hidden_bias"] = np.arange(d * M, d * M + M)
        blocks["second_layer"] = np.arange(d * M + M, d * M + M + K * M)
        blocks["output_bias"] = np.arange(d * M + M + K * M, d * M + M + K * M + K)
        return blocks


def unpack(arch: NetworkArchitecture, w: np.ndarray):
    """Flat vector -> (W1: M x d, b1: M, W2: K x M, b2: K)."""
    w = np.asarray(w, dtype=float)
    if w.shape != (arch.n_weights,):
        raise MlpError(f"expected weight vector of length {arch.n_weights}, got shape {w.shape}")
    d, M, K = arch.d, arch.M, arch.K
    W1 = w[: d * M].reshape(d, M).T
    b1 = w[d * M : d * M + M]
    W2 = w[d * M + M : d * M + M + K * M].reshape(K, M)
    b2 = w[d * M + M + K * M :]
    return W1, b1, W2, b2


def pack(arch: NetworkArchitecture, W1, b1, W2, b2) -> np.ndarray:
    return np.concatenate([np.asarray(W1).T.ravel(), np.ravel(b1), np.ravel(W2), np.ravel(b2)])


@dataclass(frozen=True)
class HyperParameters:
    """Named weight groups with one decay precision alpha each, plus beta.

    The groups must partition the weight indices; beta scales the data term of
    the cost and stays at 1 for classification.
    """

    group_names: tuple[str, ...]
    group_indices: tuple[tuple[int, ...], ...]
    alphas: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=float)
        if len(self.group_names) != len(self.group_indices) or len(alphas) != len(self.group_names):
            raise MlpError("group names, index sets, and alphas must align")
        if np.any(alphas <= 0):
            raise MlpError("all alphas must be positive")
        if self.beta <= 0:
            raise MlpError("beta must be positive")
        all_idx = np.concatenate([np.asarray(g, dtype=int) for g in self.group_indices]) \
            if self.group_indices else np.empty(0, dtype=int)
        n = len(all_idx)
        if n != len(set(all_idx.tolist())):
            raise MlpError("weight groups overlap")
        if n and set(all_idx.tolist()) != set(range(n)):
            raise MlpError("weight groups must partition 0..W-1")
        alphas.flags.writeable = False
        object.__setattr__(self, "alphas", alphas)

    @property
    def n_weights(self) -> int:
        return sum(len(g) for g in self.group_indices)

    @property
    def n_groups(self) -> int:
        return len(self.group_names)

    def alpha_vector(self) -> np.ndarray:
        """Per-weight alpha, expanded from the group values."""
        out = np.empty(self.n_weights)
        for idx, a in zip(self.group_indices, self.alphas):
            out[list(idx)] = a
        return out

    def with_alphas(self, alphas) -> "HyperParameters":
        return HyperParameters(self.group_names, self.group_indices, np.asarray(alphas, float), self.beta)


def single_group(arch: NetworkArchitecture, alpha: float = 0.01, beta: float = 1.0) -> HyperParameters:
    """One decay precision shared by every weight."""
    return HyperParameters(("all",), (tuple(range(arch.n_weights)),), np.array([alpha]), beta)


def ard_groups(arch: NetworkArchitecture, alpha: float = 0.01, beta: float = 1.0,
               feature_names=None) -> HyperParameters:
    """One group per input's fan-out weights, plus separate housekeeping groups.

    Keeping biases and the second layer in their own groups stops them from
    polluting the per-input precisions that the relevance ranking reads.
    """
    blocks = arch.layout()
    names = []
    indices = []
    for i in range(arch.d):
        label = feature_names[i] if feature_names is not None else f"input_{i}"
        names.append(str(label))
        indices.append(tuple(int(j) for j in blocks[f"input_{i}"]))
    for extra in ("hidden_bias", "second_layer", "output_bias"):
        names.append(extra)
        indices.append(tuple(int(j) for j in blocks[extra]))
    alphas = np.full(len(names), alpha)
    return HyperParameters(tuple(names), tuple(indices), alphas, beta)


def init_weights(arch: NetworkArchitecture, seed: int) -> np.ndarray:
    """Zero-mean Gaussian init, sd 1/sqrt(fan-in) per layer (bias counted)."""
    rng = np.random.default_rng(seed)
    d, M, K = arch.d, arch.M, arch.K
    first = rng.normal(0.0, 1.0 / np.sqrt(d + 1), size=M * (d + 1))
    second = rng.normal(0.0, 1.0 / np.sqrt(M + 1), size=K * (M + 1))
    return np.concatenate([first, second])


def _activate(tag: str, A: np.ndarray) -> np.ndarray:
    if tag == "linear":
        return A
    if tag == "logistic":
        return expit(A)
    if tag == "tanh":
        return np.tanh(A)
    # softmax over the unit axis, numerically stabilized
    shifted = A - np.max(A, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def _activate_deriv(tag: str, Z: np.ndarray) -> np.ndarray:
    """Elementwise derivative in terms of the activation value Z."""
    if tag == "linear":
        return np.ones_like(Z)
    if tag == "logistic":
        return Z * (1.0 - Z)
    if tag == "tanh":
        return 1.0 - Z * Z
    raise MlpError("softmax derivative is handled via its Jacobian")


def _backprop_through(tag: str, dZ: np.ndarray, A: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Chain dE/dZ back to dE/dA for any activation tag."""
    if tag == "softmax":
        return Z * (dZ - np.sum(dZ * Z, axis=-1, keepdims=True))
    return dZ * _activate_deriv(tag, Z)


def _forward_pass(arch: NetworkArchitecture, w: np.ndarray, X: np.ndarray):
    W1, b1, W2, b2 = unpack(arch, w)
    A1 = X @ W1.T + b1
    Z = _activate(arch.f_inner, A1)
    A2 = Z @ W2.T + b2
    Y = _activate(arch.f_outer, A2)
    return A1, Z, A2, Y


def forward_many(arch: NetworkArchitecture, w: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Network outputs for a batch of feature rows, shape (n, K)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != arch.d:
        raise MlpError(f"expected feature matrix with {arch.d} columns, got shape {X.shape}")
    return _forward_pass(arch, w, X)[3]


def forward(arch: NetworkArchitecture, w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Network outputs for a single feature row, shape (K,)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (arch.d,):
        raise MlpError(f"expected feature row of length {arch.d}, got shape {x.shape}")
    return forward_many(arch, w, x[None, :])[0]


def _check_labels(t: np.ndarray) -> None:
    if t.size and not np.all((t == 0.0) | (t == 1.0)):
        bad = t[(t != 0.0) & (t != 1.0)][0]
        raise MlpError(f"labels must be 0 or 1, found {bad}")


def neg_log_posterior(arch: NetworkArchitecture, w: np.ndarray, hp: HyperParameters, ds) -> float:
    """beta * cross-entropy over the data plus the grouped weight-decay prior.

    This is the negative exponent of the posterior; the w-independent
    normalization constant is never evaluated.
    """
    w = np.asarray(w, dtype=float)
    _check_labels(ds.t)
    if hp.n_weights != arch.n_weights:
        raise MlpError(f"hyperparameter groups cover {hp.n_weights} weights, net has {arch.n_weights}")
    prior = 0.5 * float(np.sum(hp.alpha_vector() * w * w))
    if ds.n == 0:
        return prior
    Y = np.clip(forward_many(arch, w, ds.X), CLAMP_EPS, 1.0 - CLAMP_EPS)
    T = np.broadcast_to(ds.t[:, None], Y.shape)
    ce = -np.sum(T * np.log(Y) + (1.0 - T) * np.log1p(-Y))
    return float(hp.beta * ce + prior)


def gradient(arch: NetworkArchitecture, w: np.ndarray, hp: HyperParameters, ds) -> np.ndarray:
    """Exact gradient of neg_log_posterior by backpropagation."""
    w = np.asarray(w, dtype=float)
    _check_labels(ds.t)
    if hp.n_weights != arch.n_weights:
        raise MlpError(f"hyperparameter groups cover {hp.n_weights} weights, net has {arch.n_weights}")
    grad_prior = hp.alpha_vector() * w
    if ds.n == 0:
        return grad_prior
    X = ds.X
    A1, Z, A2, Yraw = _forward_pass(arch, w, X)
    Y = np.clip(Yraw, CLAMP_EPS, 1.0 - CLAMP_EPS)
    T = np.broadcast_to(ds.t[:, None], Y.shape)
    # Clamping is a flat region of the cost: gradient stops where it engages.
    mask = (Yraw > CLAMP_EPS) & (Yraw < 1.0 - CLAMP_EPS)
    dY = hp.beta * (-T / Y + (1.0 - T) / (1.0 - Y)) * mask
    dA2 = _backprop_through(arch.f_outer, dY, A2, Yraw)
    gW2 = dA2.T @ Z
    gb2 = dA2.sum(axis=0)
    dZ = dA2 @ unpack(arch, w)[2]
    dA1 = _backprop_through(arch.f_inner, dZ, A1, Z)
    gW1 = dA1.T @ X
    gb1 = dA1.sum(axis=0)
    return pack(arch, gW1, gb1, gW2, gb2) + grad_prior
