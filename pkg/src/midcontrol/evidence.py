"""Gaussian-approximation Bayesian training.

Alternates MAP weight inference (scaled conjugate gradient on the negative
log posterior) with re-estimation of the per-group weight-decay precisions
from effective parameter counts, MacKay-style:

    gamma_j     = |group j| - alpha_j * tr(block_j of (H + diag(alpha))^-1)
    alpha_j_new = gamma_j / sum of squared group weights

where H is a positive-semidefinite Gauss-Newton approximation of the data
term's Hessian.  Predictions can be moderated for posterior weight
uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import scg
from .data import Dataset, NormalizationSpec
from .mlp import (
    CLAMP_EPS,
    HyperParameters,
    MlpError,
    NetworkArchitecture,
    _activate_deriv,
    _forward_pass,
    gradient,
    init_weights,
    neg_log_posterior,
    unpack,
)

ALPHA_FLOOR = 1e-8
ALPHA_CAP = 1e8
PRUNE_WEIGHT_NORM = 1e-12


class EvidenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    alphas: np.ndarray
    gammas: np.ndarray
    objective: float
    scg_converged: bool


@dataclass(frozen=True)
class EvidenceModel:
    """Gaussian-approximation posterior state around the MAP weights."""

    arch: NetworkArchitecture
    w_map: np.ndarray
    hp: HyperParameters
    gammas: np.ndarray                    # effective parameter count per group
    posterior_cov: np.ndarray             # (H + diag(alpha))^-1 at w_map
    normalization: NormalizationSpec | None = None
    trace: tuple[CycleRecord, ...] = ()

    def predict(self, x, moderated: bool = True) -> float:
        return gauss_predict(self, x, moderated=moderated)

    def predict_many(self, X, moderated: bool = True) -> np.ndarray:
        return gauss_predict_many(self, X, moderated=moderated)


def output_preactivation_gradients(arch: NetworkArchitecture, w: np.ndarray, X: np.ndarray):
    """Per-pattern gradient of the output pre-activation wrt the weights.

    Returns (G, A2) with G of shape (n, W).  Single-output networks only.
    """
    if arch.K != 1:
        raise EvidenceError("evidence machinery supports single-output networks only")
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    d, M = arch.d, arch.M
    W1, b1, W2, b2 = unpack(arch, w)
    A1 = X @ W1.T + b1
    from .mlp import _activate
    Z = _activate(arch.f_inner, A1)
    A2 = Z @ W2.T + b2

    if arch.f_inner == "softmax":
        zw = Z @ W2[0]
        D1 = Z * (W2[0][None, :] - zw[:, None])
    else:
        D1 = _activate_deriv(arch.f_inner, Z) * W2[0][None, :]

    G = np.empty((n, arch.n_weights))
    for i in range(d):
        G[:, i * M : (i + 1) * M] = D1 * X[:, i : i + 1]
    G[:, d * M : d * M + M] = D1
    G[:, d * M + M : d * M + M + M] = Z
    G[:, -1] = 1.0
    return G, A2[:, 0]


def gauss_newton_hessian(arch: NetworkArchitecture, w: np.ndarray,
                         hp: HyperParameters, ds: Dataset) -> np.ndarray:
    """Outer-product approximation of the data-term Hessian at w.

    H = sum_n c_n g_n g_n^T with g_n the gradient of the output pre-activation
    and c_n the per-pattern loss curvature, floored at zero so the result is
    positive semidefinite by construction.  For a logistic output the
    curvature is exactly beta * y * (1 - y).
    """
    if ds.n == 0:
        W = arch.n_weights
        return np.zeros((W, W))
    G, a = output_preactivation_gradients(arch, w, ds.X)
    c = _loss_curvature(arch.f_outer, a, ds.t) * hp.beta
    H = (G * c[:, None]).T @ G
    if not np.all(np.isfinite(H)):
        raise EvidenceError("hessian evaluation produced non-finite values")
    return H


def _loss_curvature(outer: str, a: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Second derivative of the clamped cross-entropy wrt the pre-activation."""
    if outer == "softmax":
        return np.zeros_like(a)  # single-output softmax is constant
    from .mlp import _activate
    y_raw = _activate(outer, a[:, None])[:, 0]
    y = np.clip(y_raw, CLAMP_EPS, 1.0 - CLAMP_EPS)
    live = (y_raw > CLAMP_EPS) & (y_raw < 1.0 - CLAMP_EPS)
    if outer == "logistic":
        return np.where(live, y * (1.0 - y), 0.0)
    fp = _activate_deriv(outer, y_raw)
    if outer == "linear":
        fpp = np.zeros_like(y_raw)
    else:  # tanh
        fpp = -2.0 * y_raw * (1.0 - y_raw * y_raw)
    ce_p = -t / y + (1.0 - t) / (1.0 - y)
    ce_pp = t / y**2 + (1.0 - t) / (1.0 - y) ** 2
    c = np.where(live, ce_pp * fp * fp + ce_p * fpp, 0.0)
    return np.maximum(c, 0.0)


def _regularized_inverse(hp: HyperParameters, hessian: np.ndarray) -> np.ndarray:
    A = hessian + np.diag(hp.alpha_vector())
    try:
        cov = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise EvidenceError(
            "singular regularized hessian; consider a larger alpha floor"
        ) from exc
    if not np.all(np.isfinite(cov)):
        raise EvidenceError("singular regularized hessian; consider a larger alpha floor")
    return cov


def effective_parameter_counts(hp: HyperParameters, hessian: np.ndarray) -> np.ndarray:
    """gamma_j per group, each clipped into [0, group size]."""
    cov = _regularized_inverse(hp, hessian)
    diag = np.diag(cov)
    gammas = np.empty(hp.n_groups)
    for j, idx in enumerate(hp.group_indices):
        idx = list(idx)
        gammas[j] = len(idx) - hp.alphas[j] * float(np.sum(diag[idx]))
    sizes = np.array([len(g) for g in hp.group_indices], dtype=float)
    return np.clip(gammas, 0.0, sizes)


def _alphas_from_gammas(w_map: np.ndarray, hp: HyperParameters, gammas: np.ndarray) -> np.ndarray:
    alphas = np.empty(hp.n_groups)
    for j, idx in enumerate(hp.group_indices):
        w2 = float(np.sum(w_map[list(idx)] ** 2))
        if w2 < PRUNE_WEIGHT_NORM:
            alphas[j] = ALPHA_CAP  # group effectively pruned
        else:
            alphas[j] = np.clip(gammas[j] / w2, ALPHA_FLOOR, ALPHA_CAP)
    return alphas


def reestimate(w_map: np.ndarray, hp: HyperParameters, hessian: np.ndarray) -> HyperParameters:
    """Most-likely hyperparameters given the MAP weights and data curvature."""
    gammas = effective_parameter_counts(hp, hessian)
    return hp.with_alphas(_alphas_from_gammas(np.asarray(w_map, float), hp, gammas))


def train_evidence(ds: Dataset, arch: NetworkArchitecture, init_hp: HyperParameters,
                   cycles: int = 5, scg_cfg: scg.ScgConfig | None = None,
                   seed: int = 0, w0: np.ndarray | None = None,
                   reestimate_hp: bool = True,
                   normalization: NormalizationSpec | None = None) -> EvidenceModel:
    """Alternate MAP inference and hyperparameter re-estimation.

    A non-convergent SCG run is not an error; convergence per cycle is
    reported in the trace.
    """
    if cycles < 1:
        raise EvidenceError(f"cycles must be >= 1, got {cycles}")
    scg_cfg = scg_cfg or scg.ScgConfig()
    hp = init_hp
    w = np.array(init_weights(arch, seed) if w0 is None else w0, dtype=float)
    trace = []
    gammas = np.zeros(hp.n_groups)
    for cycle in range(1, cycles + 1):
        obj = lambda v: neg_log_posterior(arch, v, hp, ds)
        grd = lambda v: gradient(arch, v, hp, ds)
        w, scg_trace = scg.minimize(obj, grd, w, scg_cfg)
        H = gauss_newton_hessian(arch, w, hp, ds)
        gammas = effective_parameter_counts(hp, H)
        if reestimate_hp:
            hp = hp.with_alphas(_alphas_from_gammas(w, hp, gammas))
        trace.append(CycleRecord(
            cycle=cycle,
            alphas=hp.alphas.copy(),
            gammas=gammas.copy(),
            objective=float(obj(w)),
            scg_converged=scg_trace.converged,
        ))
    H = gauss_newton_hessian(arch, w, hp, ds)
    cov = _regularized_inverse(hp, H)
    return EvidenceModel(
        arch=arch,
        w_map=w,
        hp=hp,
        gammas=gammas,
        posterior_cov=cov,
        normalization=normalization,
        trace=tuple(trace),
    )


def gauss_predict_many(model: EvidenceModel, X, moderated: bool = True) -> np.ndarray:
    """Conflict probabilities, moderated for posterior weight uncertainty.

    Moderation rescales the output pre-activation a by 1/sqrt(1 + pi s^2 / 8)
    with s^2 its Gaussian-propagated variance; it applies to logistic outputs
    and otherwise falls back to the plain forward map.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.arch.d:
        raise MlpError(f"expected {model.arch.d} features, got {X.shape[1]}")
    G, a = output_preactivation_gradients(model.arch, model.w_map, X)
    if not moderated or model.arch.f_outer != "logistic":
        from .mlp import _activate
        return _activate(model.arch.f_outer, a[:, None])[:, 0]
    s2 = np.einsum("ni,ij,nj->n", G, model.posterior_cov, G)
    s2 = np.maximum(s2, 0.0)
    return expit(a / np.sqrt(1.0 + np.pi * s2 / 8.0))


def gauss_predict(model: EvidenceModel, x, moderated: bool = True) -> float:
    return float(gauss_predict_many(model, np.asarray(x, dtype=float)[None, :], moderated=moderated)[0])
