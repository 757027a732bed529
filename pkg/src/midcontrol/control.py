"""Inverting a trained dispute model: search controllable inputs for peace.

For a dyad the model predicts as conflict, the optimizer minimizes the
absolute model output over the controllable variables (democracy, allies,
capability, dependency), in normalized [0, 1] coordinates.  A single-variable
strategy uses golden-section search; the multiple strategy seeds simulated
annealing from the best single-variable scan, so its result never trails any
single-variable result on the same dyad.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .data import LIBERAL_VARIABLES, Dataset

CONTROLLABLE_VARIABLES = ("democracy", "allies", "capability", "dependency")

# interior-point fraction (3 - sqrt(5)) / 2 and the per-iteration width factor
GOLDEN_FRACTION = (3.0 - np.sqrt(5.0)) / 2.0
GOLDEN_REDUCTION = 1.0 - GOLDEN_FRACTION

GSS_TOL = 1e-5
GSS_MAX_ITER = 80


class ControlError(RuntimeError):
    pass


def gss_minimize(f, lo: float, hi: float, tol: float = GSS_TOL,
                 max_iter: int = GSS_MAX_ITER, callback=None) -> tuple[float, float]:
    """Golden-section search on [lo, hi]; returns the best interior point.

    callback(a, b), when given, observes the bracket after every shrink.
    """
    if not lo < hi:
        raise ControlError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise ControlError("tol must be positive")
    a, b = float(lo), float(hi)
    x1 = a + GOLDEN_FRACTION * (b - a)
    x2 = b - GOLDEN_FRACTION * (b - a)
    f1, f2 = float(f(x1)), float(f(x2))
    if not (np.isfinite(f1) and np.isfinite(f2)):
        raise ControlError("objective is not finite inside the bracket")
    iterations = 0
    while (b - a) > tol and iterations < max_iter:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + GOLDEN_FRACTION * (b - a)
            f1 = float(f(x1))
            if not np.isfinite(f1):
                raise ControlError("objective is not finite inside the bracket")
        else:
            a, x1, f1 = x1, x2, f2
            x2 = b - GOLDEN_FRACTION * (b - a)
            f2 = float(f(x2))
            if not np.isfinite(f2):
                raise ControlError("objective is not finite inside the bracket")
        iterations += 1
        if callback is not None:
            callback(a, b)
    return (x1, f1) if f1 <= f2 else (x2, f2)


@dataclass(frozen=True)
class SaConfig:
    T0: float = 1.0
    cooling: float = 0.95
    steps_per_T: int = 50
    T_min: float = 1e-4
    proposal_scale: float = 0.1   # fraction of each box width
    seed: int = 0

    def __post_init__(self):
        if self.T0 <= 0 or not 0 < self.cooling < 1 or self.T_min <= 0:
            raise ValueError("need T0 > 0, 0 < cooling < 1, T_min > 0")
        if self.steps_per_T < 1 or self.proposal_scale <= 0:
            raise ValueError("need steps_per_T >= 1 and proposal_scale > 0")


def sa_minimize(f, bounds, cfg: SaConfig | None = None, x0=None,
                callback=None) -> tuple[np.ndarray, float]:
    """Simulated annealing over a box; returns the best point ever visited.

    Gaussian proposals clamped to the box; Metropolis acceptance
    min(1, exp(-df/T)); geometric cooling from T0 down to T_min.
    """
    cfg = cfg or SaConfig()
    bounds = np.asarray(bounds, dtype=float)
    if bounds.ndim != 2 or bounds.shape[1] != 2 or np.any(bounds[:, 0] >= bounds[:, 1]):
        raise ControlError("bounds must be rows of (lo, hi) with lo < hi")
    rng = np.random.default_rng(cfg.seed)
    widths = bounds[:, 1] - bounds[:, 0]
    x = np.array(x0, dtype=float) if x0 is not None else bounds[:, 0] + rng.random(len(bounds)) * widths
    fx = float(f(x))
    if not np.isfinite(fx):
        raise ControlError(f"objective is not finite at the start point: {fx}")
    best_x, best_f = x.copy(), fx

    T = cfg.T0
    while T > cfg.T_min:
        for _ in range(cfg.steps_per_T):
            prop = np.clip(x + rng.normal(0.0, cfg.proposal_scale * widths),
                           bounds[:, 0], bounds[:, 1])
            fp = float(f(prop))
            df = fp - fx
            if df <= 0:
                accept = True
            elif T > 0 and np.isfinite(fp):
                accept = rng.random() < np.exp(-df / T)
            else:
                accept = False
            if accept:
                x, fx = prop, fp
                if fx < best_f:
                    best_x, best_f = x.copy(), fx
            if callback is not None:
                callback(T, prop, fp, accept)
        T *= cfg.cooling
    return best_x, best_f


@dataclass(frozen=True)
class ControlProblem:
    """One dyad to steer toward a peace prediction."""

    model: object                              # anything with .predict(x) -> float
    x: np.ndarray                              # normalized feature row
    controllables: tuple[str, ...] = CONTROLLABLE_VARIABLES
    bounds: dict = field(default_factory=dict)  # name -> (lo, hi) in [0, 1]
    threshold: float = 0.5
    seed: int = 0
    feature_names: tuple[str, ...] = LIBERAL_VARIABLES
    sa_config: SaConfig | None = None          # schedule override; seed comes from `seed`

    def __post_init__(self):
        if not self.controllables:
            raise ControlError("controllable set must be non-empty")
        for name in self.controllables:
            if name not in CONTROLLABLE_VARIABLES:
                raise ControlError(
                    f"{name!r} is not controllable; allowed: {CONTROLLABLE_VARIABLES}")
            if name not in self.feature_names:
                raise ControlError(f"{name!r} is not among the model features")
        for name, (lo, hi) in self.bounds.items():
            if not (0.0 <= lo < hi <= 1.0):
                raise ControlError(f"bounds for {name!r} must satisfy 0 <= lo < hi <= 1")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).copy())

    def bounds_for(self, name: str) -> tuple[float, float]:
        return self.bounds.get(name, (0.0, 1.0))

    def column(self, name: str) -> int:
        return self.feature_names.index(name)


@dataclass(frozen=True)
class ControlOutcome:
    dyad_id: str
    strategy: str
    original: np.ndarray
    adjusted: np.ndarray
    p_before: float
    p_after: float
    success: bool
    evaluations: int
    adjusted_rounded: np.ndarray | None = None   # allies snapped to {0, 1}
    p_after_rounded: float | None = None
    success_rounded: bool | None = None
    diagnostics: str | None = None


class _CountingObjective:
    """|model prediction| as a function of selected coordinates."""

    def __init__(self, model, x, columns):
        self.model = model
        self.base = np.asarray(x, dtype=float).copy()
        self.columns = list(columns)
        self.calls = 0

    def at(self, values) -> np.ndarray:
        x = self.base.copy()
        x[self.columns] = values
        return x

    def __call__(self, values) -> float:
        self.calls += 1
        return abs(float(self.model.predict(self.at(np.atleast_1d(values)))))


def _parse_strategy(strategy: str, prob: ControlProblem) -> tuple[str, str | None]:
    if strategy == "multi":
        return "multi", None
    if strategy.startswith("single:"):
        var = strategy.split(":", 1)[1]
        if var not in prob.controllables:
            raise ControlError(f"single-strategy variable {var!r} not in controllable set "
                               f"{prob.controllables}")
        return "single", var
    raise ControlError(f"unknown strategy {strategy!r}; use 'single:<variable>' or 'multi'")


def control_dyad(prob: ControlProblem, strategy: str, dyad_id: str = "") -> ControlOutcome:
    """Run the feedback loop for one dyad.

    The optimizer only activates when the model already predicts conflict;
    otherwise the dyad is returned untouched and counted a success.
    """
    kind, single_var = _parse_strategy(strategy, prob)
    p_before = float(prob.model.predict(prob.x))
    if p_before < prob.threshold:
        return ControlOutcome(
            dyad_id=dyad_id, strategy=strategy,
            original=prob.x.copy(), adjusted=prob.x.copy(),
            p_before=p_before, p_after=p_before, success=True, evaluations=0)

    try:
        if kind == "single":
            cols = [prob.column(single_var)]
            objective = _CountingObjective(prob.model, prob.x, cols)
            lo, hi = prob.bounds_for(single_var)
            v, _ = gss_minimize(lambda t: objective([t]), lo, hi)
            adjusted = objective.at([v])
        else:
            cols = [prob.column(name) for name in prob.controllables]
            objective = _CountingObjective(prob.model, prob.x, cols)
            # per-variable golden-section scans seed the annealer, so the
            # joint search starts no worse than the best single strategy
            best_single = None
            for j, name in enumerate(prob.controllables):
                lo, hi = prob.bounds_for(name)
                start = prob.x[cols].copy()
                v, fv = gss_minimize(lambda t, j=j, s=start: objective(_with(s, j, t)), lo, hi)
                if best_single is None or fv < best_single[1]:
                    best_single = (_with(prob.x[cols].copy(), j, v), fv)
            box = np.array([prob.bounds_for(name) for name in prob.controllables])
            base = prob.sa_config or SaConfig()
            sa_cfg = replace(base, seed=prob.seed)
            x_sa, f_sa = sa_minimize(objective, box, sa_cfg, x0=best_single[0])
            values = x_sa if f_sa <= best_single[1] else best_single[0]
            adjusted = objective.at(values)
    except ControlError as exc:
        return ControlOutcome(
            dyad_id=dyad_id, strategy=strategy,
            original=prob.x.copy(), adjusted=prob.x.copy(),
            p_before=p_before, p_after=p_before, success=False,
            evaluations=0, diagnostics=str(exc))

    p_after = float(prob.model.predict(adjusted))
    outcome = ControlOutcome(
        dyad_id=dyad_id, strategy=strategy,
        original=prob.x.copy(), adjusted=adjusted,
        p_before=p_before, p_after=p_after,
        success=p_after < prob.threshold,
        evaluations=objective.calls)

    allies_touched = (single_var == "allies") if kind == "single" else ("allies" in prob.controllables)
    if allies_touched and "allies" in prob.feature_names:
        col = prob.column("allies")
        rounded = adjusted.copy()
        rounded[col] = 1.0 if rounded[col] >= 0.5 else 0.0
        p_rounded = float(prob.model.predict(rounded))
        outcome = ControlOutcome(
            **{**outcome.__dict__,
               "adjusted_rounded": rounded,
               "p_after_rounded": p_rounded,
               "success_rounded": p_rounded < prob.threshold})
    return outcome


def _with(values: np.ndarray, j: int, v: float) -> np.ndarray:
    out = values.copy()
    out[j] = v
    return out


def _dyad_seed(seed: int, dyad_id: str) -> int:
    digest = hashlib.sha256(f"{seed}:{dyad_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class CampaignReport:
    strategy: str
    threshold: float
    n_test_conflicts: int
    n_selected: int
    outcomes: list[ControlOutcome]
    feature_names: tuple[str, ...]

    @property
    def n_avoided(self) -> int:
        return sum(o.success for o in self.outcomes)

    @property
    def avoidance_rate(self) -> float:
        return self.n_avoided / self.n_selected if self.n_selected else float("nan")

    @property
    def avoidance_rate_rounded_allies(self) -> float:
        """Avoidance rate when fractional alliance values are snapped to {0, 1}."""
        if not self.n_selected:
            return float("nan")
        wins = sum(
            (o.success_rounded if o.success_rounded is not None else o.success)
            for o in self.outcomes)
        return wins / self.n_selected

    def mean_absolute_shift(self) -> dict[str, float]:
        """Average |adjusted - original| per variable over the campaign."""
        if not self.outcomes:
            return {}
        deltas = np.mean(
            [np.abs(o.adjusted - o.original) for o in self.outcomes], axis=0)
        return {name: float(deltas[i]) for i, name in enumerate(self.feature_names)}

    def write_csv(self, path) -> None:
        names = self.feature_names
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["dyad_id"]
                + [f"original_{n}" for n in names]
                + [f"adjusted_{n}" for n in names]
                + ["p_before", "p_after", "success"])
            for o in self.outcomes:
                writer.writerow(
                    [o.dyad_id]
                    + [repr(float(v)) for v in o.original]
                    + [repr(float(v)) for v in o.adjusted]
                    + [repr(float(o.p_before)), repr(float(o.p_after)), int(o.success)])


def control_campaign(model, test: Dataset, strategy: str, threshold: float = 0.5,
                     seed: int = 0, limit: int | None = None,
                     sa_config: SaConfig | None = None) -> CampaignReport:
    """Steer every correctly-predicted conflict in the test set toward peace.

    The campaign selects true positives (actual conflicts the model flags at
    the threshold), mirroring the construction in the source evaluation, and
    runs the chosen strategy on each with a per-dyad RNG stream derived from
    (seed, dyad_id).
    """
    scores = model.predict_many(test.X)
    actual = test.t == 1.0
    selected = np.flatnonzero(actual & (scores >= threshold))
    if limit is not None:
        selected = selected[:limit]
    outcomes = []
    for i in selected:
        dyad_id = test.dyad_ids[i]
        prob = ControlProblem(
            model=model, x=test.X[i], threshold=threshold,
            seed=_dyad_seed(seed, dyad_id), feature_names=test.feature_names,
            sa_config=sa_config)
        outcomes.append(control_dyad(prob, strategy, dyad_id=dyad_id))
    return CampaignReport(
        strategy=strategy,
        threshold=threshold,
        n_test_conflicts=int(actual.sum()),
        n_selected=len(selected),
        outcomes=outcomes,
        feature_names=test.feature_names,
    )
