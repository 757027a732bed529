import numpy as np
import pytest

from midcontrol.data import Dataset
from midcontrol.ga import (
    Chromosome,
    GaConfig,
    GaError,
    decode,
    evolve,
    map_trainer,
    roulette_select,
)


def rigged_trainer(arch, ds_train, ds_val, seed):
    return float(arch.M)


EMPTY = Dataset.from_arrays(np.empty((0, 7)), [], [f"v{i}" for i in range(7)])


class TestDecode:
    def test_documented_examples(self):
        arch = decode(Chromosome.from_string("00000110"))
        assert (arch.M, arch.f_inner, arch.f_outer) == (1, "logistic", "tanh")

        arch = decode(Chromosome.from_string("10011001"))
        assert (arch.M, arch.f_inner, arch.f_outer) == (10, "tanh", "logistic")

        arch = decode(Chromosome.from_string("11110000"))
        assert arch.M == 1  # 1 + (15 mod 15): wraparound

    def test_all_256_chromosomes_decode_validly(self):
        for v in range(256):
            bits = tuple((v >> (7 - i)) & 1 for i in range(8))
            arch = decode(Chromosome(bits))
            assert 1 <= arch.M <= 15
            assert arch.f_inner in ("linear", "logistic", "tanh", "softmax")
            assert arch.f_outer in ("linear", "logistic", "tanh", "softmax")

    def test_wrong_length_rejected(self):
        with pytest.raises(GaError):
            Chromosome((0, 1, 0))


class TestRoulette:
    def test_frequencies_match_weights_within_one_percent(self):
        rng = np.random.default_rng(0)
        weights = np.array([1.0, 2.0, 3.0, 4.0])
        counts = np.zeros(4)
        n = 100_000
        for _ in range(n):
            counts[roulette_select(rng, weights)] += 1
        np.testing.assert_allclose(counts / n, weights / weights.sum(), atol=0.01)

    def test_zero_total_uniform(self):
        rng = np.random.default_rng(1)
        picks = {roulette_select(rng, np.zeros(3)) for _ in range(100)}
        assert picks == {0, 1, 2}


class TestEvolve:
    def test_constant_fitness_keeps_generation_zero_best(self):
        cfg = GaConfig(population=2, generations=5, seed=3)
        best, history = evolve(EMPTY, EMPTY, cfg, lambda *a: 1.0)
        assert history[0].best_ever_fitness == 1.0
        assert all(h.best_ever_fitness == 1.0 for h in history)

    def test_rigged_fitness_finds_max_hidden_count(self):
        wins = 0
        for seed in range(20):
            cfg = GaConfig(population=20, generations=20, seed=seed)
            best, _ = evolve(EMPTY, EMPTY, cfg, rigged_trainer)
            wins += best.M == 15
        assert wins >= 19

    def test_best_ever_non_decreasing(self):
        for seed in range(5):
            cfg = GaConfig(population=10, generations=15, seed=seed)
            _, history = evolve(EMPTY, EMPTY, cfg, rigged_trainer)
            best = [h.best_ever_fitness for h in history]
            assert all(b >= a for a, b in zip(best, best[1:]))

    def test_deterministic_history(self):
        cfg = GaConfig(population=8, generations=10, seed=11)
        _, h1 = evolve(EMPTY, EMPTY, cfg, rigged_trainer)
        _, h2 = evolve(EMPTY, EMPTY, cfg, rigged_trainer)
        assert h1 == h2

    def test_population_lower_bound(self):
        with pytest.raises(GaError):
            GaConfig(population=1)


class TestMapTrainer:
    def test_scores_a_learnable_problem_above_chance(self):
        rng = np.random.default_rng(5)
        X = rng.random((120, 2))
        t = (X[:, 0] > 0.5).astype(float)
        train = Dataset.from_arrays(X[:80], t[:80], ("a", "b"))
        val = Dataset.from_arrays(X[80:], t[80:], ("a", "b"))
        trainer = map_trainer(scg_iterations=80)
        from midcontrol.mlp import NetworkArchitecture
        arch = NetworkArchitecture(d=2, M=3, f_inner="tanh", f_outer="logistic")
        assert trainer(arch, train, val, seed=0) > 0.8

    def test_degenerate_softmax_output_scores_poorly(self):
        rng = np.random.default_rng(6)
        X = rng.random((60, 2))
        t = (X[:, 0] > 0.5).astype(float)
        train = Dataset.from_arrays(X[:40], t[:40], ("a", "b"))
        val = Dataset.from_arrays(X[40:], t[40:], ("a", "b"))
        trainer = map_trainer(scg_iterations=40)
        from midcontrol.mlp import NetworkArchitecture
        good = NetworkArchitecture(d=2, M=3, f_inner="tanh", f_outer="logistic")
        degenerate = NetworkArchitecture(d=2, M=3, f_inner="tanh", f_outer="softmax")
        assert trainer(good, train, val, 0) > trainer(degenerate, train, val, 0)
