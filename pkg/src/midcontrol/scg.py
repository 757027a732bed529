"""Scaled conjugate gradient minimizer (Moller 1993), used for MAP training.

Avoids line searches by estimating curvature along the search direction from
a single extra gradient evaluation and regulating a Levenberg-style scaling
term from the quality of each quadratic prediction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Curvature-probe step scale; Moller's sigma.
SIGMA0 = 1e-4
LAMBDA_MIN = 1e-15
LAMBDA_MAX = 1e100


class ScgError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScgConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-5
    objective_tolerance: float = 1e-12
    initial_lambda: float = 1e-6

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.gradient_tolerance <= 0 or self.objective_tolerance <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class ScgIteration:
    index: int
    objective: float
    grad_inf_norm: float
    accepted: bool
    lam: float


@dataclass
class ScgTrace:
    iterations: list[ScgIteration] = field(default_factory=list)
    converged: bool = False
    reason: str = "max_iterations"
    n_obj_evals: int = 0
    n_grad_evals: int = 0


def minimize(objective, grad, w0, cfg: ScgConfig | None = None) -> tuple[np.ndarray, ScgTrace]:
    """Minimize objective from w0; returns (w*, trace).

    Stops when the gradient infinity norm falls below gradient_tolerance, when
    two consecutive accepted steps change the objective by at most
    objective_tolerance, or when the iteration budget runs out.  Trial points
    whose objective is non-finite count as failed steps (the scaling term
    shrinks the step); a non-finite objective or gradient at an accepted point
    raises.
    """
    cfg = cfg or ScgConfig()
    w = np.array(w0, dtype=float)
    n = w.size
    trace = ScgTrace()

    f_now = float(objective(w))
    trace.n_obj_evals += 1
    if not np.isfinite(f_now):
        raise ScgError(f"objective is not finite at the starting point: {f_now}")
    g_new = np.asarray(grad(w), dtype=float)
    trace.n_grad_evals += 1
    if not np.all(np.isfinite(g_new)):
        raise ScgError("gradient is not finite at the starting point")

    if np.max(np.abs(g_new)) <= cfg.gradient_tolerance:
        trace.converged = True
        trace.reason = "gradient_tolerance"
        return w, trace

    d = -g_new
    lam = cfg.initial_lambda
    success = True
    n_success = 0
    small_changes = 0
    f_old = f_now
    mu = kappa = theta = 0.0

    for it in range(1, cfg.max_iterations + 1):
        if success:
            mu = float(d @ g_new)
            if mu >= 0:
                d = -g_new
                mu = float(d @ g_new)
            kappa = float(d @ d)
            if kappa < np.finfo(float).eps:
                # conjugate direction degenerated; fall back to steepest descent
                d = -g_new
                mu = float(d @ g_new)
                kappa = float(d @ d)
                if kappa < np.finfo(float).eps:
                    trace.converged = True
                    trace.reason = "gradient_collapse"
                    break
            sigma = SIGMA0 / np.sqrt(kappa)
            g_plus = np.asarray(grad(w + sigma * d), dtype=float)
            trace.n_grad_evals += 1
            theta = float(d @ (g_plus - g_new)) / sigma

        # Regulate curvature so the local quadratic model is positive definite.
        delta = theta + lam * kappa
        if delta <= 0:
            delta = lam * kappa
            lam = lam - theta / kappa
        alpha = -mu / delta

        w_trial = w + alpha * d
        f_trial = float(objective(w_trial))
        trace.n_obj_evals += 1
        if np.isfinite(f_trial):
            comparison = 2.0 * delta * (f_now - f_trial) / mu**2
        else:
            comparison = -np.inf

        accepted = comparison >= 0
        if accepted:
            f_old = f_now
            w = w_trial
            f_now = f_trial
            g_old = g_new
            g_new = np.asarray(grad(w), dtype=float)
            trace.n_grad_evals += 1
            if not np.all(np.isfinite(g_new)) or not np.isfinite(f_now):
                raise ScgError(f"non-finite objective or gradient at accepted step, iteration {it}")
            n_success += 1
            success = True
        else:
            success = False

        trace.iterations.append(ScgIteration(
            index=it,
            objective=f_now,
            grad_inf_norm=float(np.max(np.abs(g_new))),
            accepted=accepted,
            lam=lam,
        ))

        if accepted:
            if np.max(np.abs(g_new)) <= cfg.gradient_tolerance:
                trace.converged = True
                trace.reason = "gradient_tolerance"
                break
            small_changes = small_changes + 1 if abs(f_old - f_now) <= cfg.objective_tolerance else 0
            if small_changes >= 2:
                trace.converged = True
                trace.reason = "objective_tolerance"
                break

        if comparison < 0.25:
            lam = min(4.0 * lam, LAMBDA_MAX)
        elif comparison > 0.75:
            lam = max(0.5 * lam, LAMBDA_MIN)

        if n_success == n:
            # Periodic restart along steepest descent keeps conjugacy honest.
            d = -g_new
            n_success = 0
        elif accepted:
            gamma = float(g_old @ g_new - g_new @ g_new) / mu
            d = gamma * d - g_new

    return w, trace
