import numpy as np
import pytest

from midcontrol import scg
from midcontrol.data import Dataset
from midcontrol.evidence import (
    EvidenceError,
    EvidenceModel,
    effective_parameter_counts,
    gauss_newton_hessian,
    gauss_predict,
    output_preactivation_gradients,
    reestimate,
    train_evidence,
)
from midcontrol.mlp import (
    HyperParameters,
    NetworkArchitecture,
    forward,
    init_weights,
    single_group,
)


def make_dataset(X, t):
    return Dataset.from_arrays(X, t, [f"x{i}" for i in range(np.shape(X)[1])])


def tiny_classification_data(rng, n=60, d=2):
    X = rng.random((n, d))
    t = (X[:, 0] + 0.3 * rng.standard_normal(n) > 0.5).astype(float)
    return make_dataset(X, t)


def scalar_hp(alpha, beta=1.0):
    return HyperParameters(("g",), ((0,),), np.array([alpha]), beta)


class TestReestimate:
    def test_scalar_update(self):
        hp = scalar_hp(1.0)
        w = np.array([np.sqrt(0.5)])
        new = reestimate(w, hp, np.array([[3.0]]))
        gamma = effective_parameter_counts(hp, np.array([[3.0]]))[0]
        assert gamma == pytest.approx(0.75)
        assert new.alphas[0] == pytest.approx(1.5)

    def test_large_alpha_limit_gamma_to_zero(self):
        hp = scalar_hp(1e7)
        gamma = effective_parameter_counts(hp, np.array([[3.0]]))[0]
        assert gamma == pytest.approx(0.0, abs=1e-5)

    def test_matches_eigendecomposition_oracle(self):
        rng = np.random.default_rng(17)
        B = rng.standard_normal((5, 5))
        H = B @ B.T + 0.1 * np.eye(5)
        hp = HyperParameters(("a", "b"), ((0, 1, 2), (3, 4)),
                             np.array([0.7, 2.5]))
        w = rng.standard_normal(5)

        alpha_vec = np.array([0.7, 0.7, 0.7, 2.5, 2.5])
        lam, V = np.linalg.eigh(H + np.diag(alpha_vec))
        Ainv = V @ np.diag(1.0 / lam) @ V.T
        g_a = 3 - 0.7 * (Ainv[0, 0] + Ainv[1, 1] + Ainv[2, 2])
        g_b = 2 - 2.5 * (Ainv[3, 3] + Ainv[4, 4])
        expect_alpha = np.array([
            g_a / np.sum(w[:3] ** 2),
            g_b / np.sum(w[3:] ** 2),
        ])

        gammas = effective_parameter_counts(hp, H)
        np.testing.assert_allclose(gammas, [g_a, g_b], rtol=1e-10)
        new = reestimate(w, hp, H)
        np.testing.assert_allclose(new.alphas, expect_alpha, rtol=1e-10)

    def test_pruned_group_gets_alpha_cap(self):
        hp = scalar_hp(1.0)
        new = reestimate(np.array([1e-9]), hp, np.array([[3.0]]))
        assert new.alphas[0] == 1e8


class TestHessian:
    def test_preactivation_gradients_match_finite_differences(self):
        rng = np.random.default_rng(4)
        arch = NetworkArchitecture(d=2, M=3, f_inner="tanh", f_outer="logistic")
        w = rng.normal(size=arch.n_weights)
        X = rng.random((4, 2))
        G, a = output_preactivation_gradients(arch, w, X)
        h = 1e-6

        def preact(wv, x):
            from midcontrol.mlp import _forward_pass
            return _forward_pass(arch, wv, x[None, :])[2][0, 0]

        for n in range(4):
            for i in range(arch.n_weights):
                wp, wm = w.copy(), w.copy()
                wp[i] += h
                wm[i] -= h
                fd = (preact(wp, X[n]) - preact(wm, X[n])) / (2 * h)
                assert abs(G[n, i] - fd) < 1e-6

    def test_logistic_curvature_oracle(self):
        rng = np.random.default_rng(5)
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        w = rng.normal(size=arch.n_weights)
        ds = tiny_classification_data(rng, n=20)
        hp = single_group(arch, beta=1.0)
        H = gauss_newton_hessian(arch, w, hp, ds)

        G, a = output_preactivation_gradients(arch, w, ds.X)
        y = 1 / (1 + np.exp(-a))
        expect = sum(y[n] * (1 - y[n]) * np.outer(G[n], G[n]) for n in range(ds.n))
        np.testing.assert_allclose(H, expect, rtol=1e-10)

    def test_positive_semidefinite(self):
        rng = np.random.default_rng(6)
        for outer in ("logistic", "tanh", "linear"):
            arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer=outer)
            w = rng.normal(size=arch.n_weights)
            ds = tiny_classification_data(rng, n=30)
            H = gauss_newton_hessian(arch, w, single_group(arch), ds)
            eig = np.linalg.eigvalsh(H)
            assert eig.min() > -1e-9


class TestTrainEvidence:
    def test_single_cycle_without_reestimation_is_map(self):
        rng = np.random.default_rng(7)
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        ds = tiny_classification_data(rng)
        hp = single_group(arch, alpha=0.1)
        cfg = scg.ScgConfig(max_iterations=300, gradient_tolerance=1e-6)
        w0 = init_weights(arch, seed=1)

        model = train_evidence(ds, arch, hp, cycles=1, scg_cfg=cfg, w0=w0,
                               reestimate_hp=False)
        from midcontrol.mlp import gradient, neg_log_posterior
        w_direct, _ = scg.minimize(
            lambda v: neg_log_posterior(arch, v, hp, ds),
            lambda v: gradient(arch, v, hp, ds),
            w0, cfg)
        np.testing.assert_array_equal(model.w_map, w_direct)
        np.testing.assert_array_equal(model.hp.alphas, hp.alphas)

    def test_cycles_invariance_with_reestimation_disabled(self):
        rng = np.random.default_rng(8)
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        ds = tiny_classification_data(rng)
        hp = single_group(arch, alpha=0.1)
        cfg = scg.ScgConfig(max_iterations=300, gradient_tolerance=1e-6)
        m1 = train_evidence(ds, arch, hp, cycles=1, scg_cfg=cfg, seed=3, reestimate_hp=False)
        m3 = train_evidence(ds, arch, hp, cycles=3, scg_cfg=cfg, seed=3, reestimate_hp=False)
        np.testing.assert_allclose(m1.w_map, m3.w_map, atol=1e-9)
        x = np.array([0.4, 0.6])
        assert m1.predict(x) == pytest.approx(m3.predict(x), abs=1e-9)

    def test_empty_data_gives_zero_gammas(self):
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        ds = make_dataset(np.empty((0, 2)), [])
        hp = single_group(arch, alpha=0.5)
        model = train_evidence(ds, arch, hp, cycles=1,
                               scg_cfg=scg.ScgConfig(max_iterations=50))
        np.testing.assert_allclose(model.gammas, 0.0, atol=1e-12)

    def test_gamma_bounds_every_cycle(self):
        rng = np.random.default_rng(9)
        arch = NetworkArchitecture(d=3, M=3, f_inner="tanh", f_outer="logistic")
        ds = tiny_classification_data(rng, n=80, d=3)
        hp = single_group(arch, alpha=0.01)
        model = train_evidence(ds, arch, hp, cycles=4,
                               scg_cfg=scg.ScgConfig(max_iterations=200))
        for rec in model.trace:
            assert np.all(rec.gammas >= 0.0)
            assert np.all(rec.gammas <= arch.n_weights)

    def test_rejects_zero_cycles(self):
        arch = NetworkArchitecture(d=1, M=1, f_inner="tanh", f_outer="logistic")
        with pytest.raises(EvidenceError):
            train_evidence(make_dataset(np.empty((0, 1)), []), arch,
                           single_group(arch), cycles=0)


class TestLinearModelEvidenceOracle:
    """MacKay updates vs brute-force grid search of the exact log evidence."""

    def setup_method(self):
        rng = np.random.default_rng(123)
        self.N, self.W = 40, 6
        self.beta = 1.0 / 0.09
        self.Phi = rng.standard_normal((self.N, self.W))
        w_true = rng.normal(0, 1.0, self.W)
        self.t = self.Phi @ w_true + rng.normal(0, 0.3, self.N)

    def exact_log_evidence(self, alpha):
        A = alpha * np.eye(self.W) + self.beta * self.Phi.T @ self.Phi
        m = self.beta * np.linalg.solve(A, self.Phi.T @ self.t)
        e = (self.beta / 2) * np.sum((self.t - self.Phi @ m) ** 2) + (alpha / 2) * np.sum(m ** 2)
        sign, logdet = np.linalg.slogdet(A)
        return (self.W / 2) * np.log(alpha) + (self.N / 2) * np.log(self.beta) \
            - e - 0.5 * logdet - (self.N / 2) * np.log(2 * np.pi)

    def test_reestimate_finds_evidence_maximum(self):
        hp = HyperParameters(("all",), (tuple(range(self.W)),),
                             np.array([0.1]), beta=self.beta)
        H = self.beta * self.Phi.T @ self.Phi

        def objective(w):
            r = self.t - self.Phi @ w
            return (self.beta / 2) * float(r @ r) + (hp.alphas[0] / 2) * float(w @ w)

        def grad(w):
            return -self.beta * self.Phi.T @ (self.t - self.Phi @ w) + hp.alphas[0] * w

        for _ in range(100):
            w_map, _ = scg.minimize(objective, grad, np.zeros(self.W),
                                    scg.ScgConfig(max_iterations=500,
                                                  gradient_tolerance=1e-10))
            hp = reestimate(w_map, hp, H)
        alpha_mackay = float(hp.alphas[0])

        grid = np.logspace(-3, 3, 4000)
        values = [self.exact_log_evidence(a) for a in grid]
        alpha_grid = float(grid[int(np.argmax(values))])

        assert abs(alpha_mackay - alpha_grid) / alpha_grid < 0.10


class TestGaussPredict:
    def make_model(self, cov_scale=0.0, seed=11):
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        w = init_weights(arch, seed=seed)
        hp = single_group(arch)
        cov = cov_scale * np.eye(arch.n_weights)
        return EvidenceModel(arch=arch, w_map=w, hp=hp,
                             gammas=np.zeros(1), posterior_cov=cov)

    def test_zero_variance_equals_plain_forward(self):
        model = self.make_model(cov_scale=0.0)
        x = np.array([0.3, 0.9])
        plain = forward(model.arch, model.w_map, x)[0]
        assert gauss_predict(model, x) == pytest.approx(plain, abs=1e-15)

    def test_zero_preactivation_gives_half(self):
        arch = NetworkArchitecture(d=2, M=2, f_inner="tanh", f_outer="logistic")
        model = EvidenceModel(arch=arch, w_map=np.zeros(arch.n_weights),
                              hp=single_group(arch), gammas=np.zeros(1),
                              posterior_cov=5.0 * np.eye(arch.n_weights))
        assert gauss_predict(model, np.array([0.2, 0.8])) == 0.5

    def test_matches_scalar_moderation_oracle(self):
        model = self.make_model(cov_scale=0.0, seed=12)
        rng = np.random.default_rng(13)
        B = rng.standard_normal((model.arch.n_weights, model.arch.n_weights))
        cov = B @ B.T / model.arch.n_weights
        model = EvidenceModel(arch=model.arch, w_map=model.w_map, hp=model.hp,
                              gammas=model.gammas, posterior_cov=cov)
        x = np.array([0.7, 0.1])
        G, a = output_preactivation_gradients(model.arch, model.w_map, x[None, :])
        g = G[0]
        s2 = float(g @ cov @ g)
        expect = 1 / (1 + np.exp(-a[0] / np.sqrt(1 + np.pi * s2 / 8)))
        assert gauss_predict(model, x) == pytest.approx(expect, rel=1e-12)

    def test_moderation_shrinks_confidence(self):
        rng = np.random.default_rng(14)
        for trial in range(20):
            model = self.make_model(cov_scale=float(rng.uniform(0, 3)), seed=trial)
            x = rng.random(2)
            plain = forward(model.arch, model.w_map, x)[0]
            moderated = gauss_predict(model, x)
            assert abs(moderated - 0.5) <= abs(plain - 0.5) + 1e-15
