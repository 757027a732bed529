"""Hybrid Monte Carlo sampling of the weight posterior.

Each transition draws a fresh Gaussian momentum, picks a random trajectory
direction and a jittered step size eps = lambda * eps0 * (1 + 0.1 k) with
k ~ U(0, 1), runs L leapfrog steps, and accepts the endpoint by the
Metropolis rule on the total energy.  Divergent trajectories count as
rejections.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, NormalizationSpec
from .mlp import (
    HyperParameters,
    MlpError,
    NetworkArchitecture,
    forward_many,
    gradient,
    init_weights,
    neg_log_posterior,
)


class HmcError(RuntimeError):
    pass


@dataclass(frozen=True)
class HmcConfig:
    epsilon0: float = 0.005
    L: int = 100
    n_samples: int = 100
    burn_in: int = 1000
    thin: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.epsilon0 <= 0:
            raise ValueError("epsilon0 must be positive")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if min(self.L, self.burn_in, self.thin) < 0 or self.thin == 0:
            raise ValueError("counts must be non-negative and thin >= 1")

    @property
    def total_transitions(self) -> int:
        return self.burn_in + self.n_samples * self.thin


@dataclass(frozen=True)
class ChainState:
    """Position, momentum, and the energies they imply."""

    w: np.ndarray
    p: np.ndarray
    energy: float
    hamiltonian: float

    def __post_init__(self):
        if self.w.shape != self.p.shape:
            raise HmcError("position and momentum must have equal length")

    @classmethod
    def make(cls, w: np.ndarray, p: np.ndarray, energy: float) -> "ChainState":
        kinetic = 0.5 * float(p @ p)
        return cls(w=w, p=p, energy=float(energy), hamiltonian=float(energy) + kinetic)


@dataclass(frozen=True)
class PosteriorEnsemble:
    """Retained weight samples standing in for the posterior distribution."""

    arch: NetworkArchitecture
    samples: np.ndarray                  # (n_samples, W)
    acceptance_rate: float
    hp: HyperParameters
    normalization: NormalizationSpec | None = None

    def __post_init__(self):
        if len(self.samples) == 0:
            raise HmcError("ensemble must retain at least one sample")

    @functools.cached_property
    def _stacked(self):
        """Per-layer weight stacks over the samples, for batched prediction."""
        from .mlp import unpack
        parts = [unpack(self.arch, w) for w in self.samples]
        return tuple(np.stack([p[i] for p in parts]) for i in range(4))

    def predict(self, x) -> float:
        return predict_mean(self, x)

    def predict_many(self, X) -> np.ndarray:
        return predict_mean_many(self, X)


@dataclass
class ChainDiagnostics:
    """Per-transition bookkeeping for statistical checks."""

    delta_h: list[float] = field(default_factory=list)
    accepted: list[bool] = field(default_factory=list)
    divergent: list[bool] = field(default_factory=list)
    initial_kinetic: list[float] = field(default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted)) if self.accepted else 0.0


def leapfrog_trajectory(state: ChainState, eps: float, L: int, energy_fn, grad_fn) -> ChainState:
    """Run L leapfrog steps from state with (signed) step size eps.

    Returns the endpoint with recomputed energies.  A non-finite value along
    the trajectory marks it divergent: the endpoint carries infinite energy,
    which the Metropolis rule rejects.
    """
    if L == 0:
        return state
    w = state.w.copy()
    p = state.p.copy()
    g = np.asarray(grad_fn(w), dtype=float)
    if not np.all(np.isfinite(g)):
        return ChainState.make(w=w, p=p, energy=np.inf)
    p = p - 0.5 * eps * g
    for step in range(L):
        w = w + eps * p
        g = np.asarray(grad_fn(w), dtype=float)
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(g))):
            return ChainState.make(w=w, p=p, energy=np.inf)
        if step < L - 1:
            p = p - eps * g
    p = p - 0.5 * eps * g
    energy = float(energy_fn(w))
    if not np.isfinite(energy):
        return ChainState.make(w=w, p=p, energy=np.inf)
    return ChainState.make(w=w, p=p, energy=energy)


def run_chain(energy_fn, grad_fn, w0: np.ndarray, cfg: HmcConfig,
              diagnostics: ChainDiagnostics | None = None) -> tuple[np.ndarray, float]:
    """Generic HMC chain over an arbitrary energy; returns (samples, acceptance).

    Retains every thin-th state after burn_in, for exactly
    floor((total - burn_in) / thin) samples.
    """
    rng = np.random.default_rng(cfg.seed)
    w = np.array(w0, dtype=float)
    energy = float(energy_fn(w))
    if not np.isfinite(energy):
        raise HmcError(f"energy is not finite at the initial state: {energy}")

    retained = []
    n_accept = 0
    n_divergent = 0
    for t in range(cfg.total_transitions):
        p = rng.standard_normal(w.shape)
        lam = -1.0 if rng.random() < 0.5 else 1.0
        k = rng.random()
        eps = lam * cfg.epsilon0 * (1.0 + 0.1 * k)
        start = ChainState.make(w=w, p=p, energy=energy)
        end = leapfrog_trajectory(start, eps, cfg.L, energy_fn, grad_fn)

        divergent = not np.isfinite(end.hamiltonian)
        delta_h = end.hamiltonian - start.hamiltonian
        accept = (not divergent) and (np.log(rng.random()) < -delta_h)
        if accept:
            w = end.w
            energy = end.energy
            n_accept += 1
        if divergent:
            n_divergent += 1
        if diagnostics is not None:
            diagnostics.delta_h.append(float(delta_h))
            diagnostics.accepted.append(bool(accept))
            diagnostics.divergent.append(bool(divergent))
            diagnostics.initial_kinetic.append(0.5 * float(p @ p))
        if t >= cfg.burn_in and (t - cfg.burn_in) % cfg.thin == cfg.thin - 1:
            retained.append(w.copy())

    if n_divergent == cfg.total_transitions:
        raise HmcError("every trajectory diverged; reduce epsilon0")
    return np.array(retained), n_accept / cfg.total_transitions


def sample_posterior(ds: Dataset, arch: NetworkArchitecture, hp: HyperParameters,
                     cfg: HmcConfig, w0: np.ndarray | None = None,
                     normalization: NormalizationSpec | None = None,
                     diagnostics: ChainDiagnostics | None = None) -> PosteriorEnsemble:
    """Sample network weights from the posterior implied by ds and hp."""
    if w0 is None:
        w0 = init_weights(arch, cfg.seed)
    samples, acceptance = run_chain(
        lambda w: neg_log_posterior(arch, w, hp, ds),
        lambda w: gradient(arch, w, hp, ds),
        w0, cfg, diagnostics=diagnostics)
    return PosteriorEnsemble(arch=arch, samples=samples, acceptance_rate=acceptance,
                             hp=hp, normalization=normalization)


def predict_mean_many(ens: PosteriorEnsemble, X, chunk: int = 2048) -> np.ndarray:
    """Posterior-mean conflict probability: average forward output over samples."""
    from .mlp import _activate
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != ens.arch.d:
        raise MlpError(f"expected {ens.arch.d} features, got {X.shape[1]}")
    W1s, b1s, W2s, b2s = ens._stacked
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        Xc = X[start : start + chunk]
        A1 = np.einsum("nd,smd->snm", Xc, W1s, optimize=True) + b1s[:, None, :]
        Z = _activate(ens.arch.f_inner, A1)
        A2 = np.einsum("snm,skm->snk", Z, W2s, optimize=True) + b2s[:, None, :]
        Y = _activate(ens.arch.f_outer, A2)
        out[start : start + chunk] = Y[:, :, 0].mean(axis=0)
    return out


def predict_mean(ens: PosteriorEnsemble, x) -> float:
    return float(predict_mean_many(ens, np.asarray(x, dtype=float)[None, :])[0])


def predict_vote(ens: PosteriorEnsemble, x, threshold: float = 0.5) -> float:
    """Majority-vote alternative: share of samples predicting conflict."""
    x = np.asarray(x, dtype=float)[None, :]
    votes = [forward_many(ens.arch, w, x)[0, 0] >= threshold for w in ens.samples]
    return float(np.mean(votes))
