"""Genetic search over network architectures.

Chromosomes are 8-bit strings: bits 1-4 encode the hidden-unit count as
1 + (value mod 15), bits 5-6 index the hidden activation, bits 7-8 the output
activation.  Evolution uses roulette-wheel selection on shifted fitness,
single-point crossover, per-bit mutation, and one elite copied unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import ACTIVATIONS, NetworkArchitecture

CHROMOSOME_LENGTH = 8
FITNESS_SHIFT_EPS = 1e-12


class GaError(ValueError):
    pass


@dataclass(frozen=True)
class Chromosome:
    bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.bits) != CHROMOSOME_LENGTH or any(b not in (0, 1) for b in self.bits):
            raise GaError(f"chromosome must be {CHROMOSOME_LENGTH} bits, got {self.bits}")

    @classmethod
    def from_string(cls, s: str) -> "Chromosome":
        return cls(tuple(int(c) for c in s))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    generations: int = 20
    crossover_rate: float = 0.7
    # 0.05 keeps enough diversity to escape near-optimal bit patterns within
    # a 20x20 budget; 0.02 stalls at the last double flip measurably often.
    mutation_rate: float = 0.05
    fitness: str = "validation-auc"      # or "validation-cross-entropy"
    elitism: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise GaError("population must be >= 2")
        for r in (self.crossover_rate, self.mutation_rate):
            if not 0.0 <= r <= 1.0:
                raise GaError("rates must lie in [0, 1]")
        if self.fitness not in ("validation-auc", "validation-cross-entropy"):
            raise GaError(f"unknown fitness tag {self.fitness!r}")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_chromosome: str
    best_ever_fitness: float


def _bits_value(bits) -> int:
    v = 0
    for b in bits:
        v = (v << 1) | b
    return v


def decode(chrom: Chromosome, d: int = 7, K: int = 1) -> NetworkArchitecture:
    """Deterministic chromosome -> architecture mapping (M wraps modulo 15)."""
    M = 1 + (_bits_value(chrom.bits[0:4]) % 15)
    f_inner = ACTIVATIONS[_bits_value(chrom.bits[4:6])]
    f_outer = ACTIVATIONS[_bits_value(chrom.bits[6:8])]
    return NetworkArchitecture(d=d, M=M, f_inner=f_inner, f_outer=f_outer, K=K)


def roulette_select(rng: np.random.Generator, weights: np.ndarray) -> int:
    """Index drawn with probability proportional to the non-negative weights."""
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total <= 0:
        return int(rng.integers(len(weights)))
    r = rng.random() * total
    return int(np.searchsorted(np.cumsum(weights), r, side="right").clip(0, len(weights) - 1))


def _crossover(rng, a: Chromosome, b: Chromosome, rate: float) -> tuple[Chromosome, Chromosome]:
    if rng.random() < rate:
        point = int(rng.integers(1, CHROMOSOME_LENGTH))
        return (Chromosome(a.bits[:point] + b.bits[point:]),
                Chromosome(b.bits[:point] + a.bits[point:]))
    return a, b


def _mutate(rng, c: Chromosome, rate: float) -> Chromosome:
    flips = rng.random(CHROMOSOME_LENGTH) < rate
    if not flips.any():
        return c
    return Chromosome(tuple(b ^ 1 if f else b for b, f in zip(c.bits, flips)))


def evolve(ds_train, ds_val, cfg: GaConfig, trainer,
           d: int = 7) -> tuple[NetworkArchitecture, list[GenerationRecord]]:
    """Search architectures by GA; trainer scores one candidate.

    trainer(arch, ds_train, ds_val, seed) -> float, higher is better.  Scores
    are cached per chromosome, and fitness is shifted by (min + eps) before
    the roulette so it is non-negative; all-equal fitness degrades to uniform
    selection.
    """
    rng = np.random.default_rng(cfg.seed)
    population = [
        Chromosome(tuple(int(b) for b in rng.integers(0, 2, CHROMOSOME_LENGTH)))
        for _ in range(cfg.population)
    ]
    cache: dict[str, float] = {}

    def fitness_of(chrom: Chromosome) -> float:
        key = str(chrom)
        if key not in cache:
            cache[key] = float(trainer(decode(chrom, d=d), ds_train, ds_val, cfg.seed))
        return cache[key]

    best_ever: Chromosome | None = None
    best_ever_fit = -np.inf
    history: list[GenerationRecord] = []

    for gen in range(cfg.generations):
        fits = np.array([fitness_of(c) for c in population])
        gen_best = int(np.argmax(fits))
        if fits[gen_best] > best_ever_fit:
            best_ever_fit = float(fits[gen_best])
            best_ever = population[gen_best]
        history.append(GenerationRecord(
            generation=gen,
            best_fitness=float(fits[gen_best]),
            mean_fitness=float(fits.mean()),
            best_chromosome=str(population[gen_best]),
            best_ever_fitness=best_ever_fit,
        ))
        if gen == cfg.generations - 1:
            break

        shifted = fits - fits.min() + FITNESS_SHIFT_EPS
        children: list[Chromosome] = []
        if cfg.elitism:
            children.append(best_ever)
        while len(children) < cfg.population:
            pa = population[roulette_select(rng, shifted)]
            pb = population[roulette_select(rng, shifted)]
            ca, cb = _crossover(rng, pa, pb, cfg.crossover_rate)
            children.append(_mutate(rng, ca, cfg.mutation_rate))
            if len(children) < cfg.population:
                children.append(_mutate(rng, cb, cfg.mutation_rate))
        population = children

    assert best_ever is not None
    return decode(best_ever, d=d), history


def map_trainer(scg_iterations: int = 100, alpha: float = 0.01,
                fitness: str = "validation-auc"):
    """Budgeted MAP training for GA fitness: brief SCG fit, validation score."""
    from . import scg as scg_mod
    from .evaluation import roc_auc
    from .mlp import forward_many, gradient, init_weights, neg_log_posterior, single_group

    def train_and_score(arch, ds_train, ds_val, seed) -> float:
        hp = single_group(arch, alpha=alpha)
        cfg = scg_mod.ScgConfig(max_iterations=scg_iterations, gradient_tolerance=1e-6)
        w, _ = scg_mod.minimize(
            lambda v: neg_log_posterior(arch, v, hp, ds_train),
            lambda v: gradient(arch, v, hp, ds_train),
            init_weights(arch, seed), cfg)
        scores = forward_many(arch, w, ds_val.X)[:, 0]
        if fitness == "validation-cross-entropy":
            eps = 1e-12
            y = np.clip(scores, eps, 1 - eps)
            ce = -np.sum(ds_val.t * np.log(y) + (1 - ds_val.t) * np.log1p(-y))
            return -float(ce)
        if len(np.unique(ds_val.t)) < 2:
            return 0.5
        return roc_auc(scores, ds_val.t).auc

    return train_and_score
