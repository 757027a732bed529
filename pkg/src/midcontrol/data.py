"""Dyadic data model: CSV ingestion, normalization, balanced splits, synthetic populations.

The unit of analysis is the dyad-year: seven "liberal" variables describing a
pair of states in a given year, plus a binary dispute label (0 = peace,
1 = conflict).
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

LIBERAL_VARIABLES = (
    "democracy",
    "allies",
    "contingency",
    "distance",
    "capability",
    "dependency",
    "major_power",
)

BINARY_VARIABLES = ("allies", "contingency", "major_power")

# Variables with fixed theoretical bounds; all others are fit from data.
THEORETICAL_BOUNDS = {
    "democracy": (-10.0, 10.0),
    "allies": (0.0, 1.0),
    "contingency": (0.0, 1.0),
    "major_power": (0.0, 1.0),
}

CSV_HEADER = ("dyad_id", "year") + LIBERAL_VARIABLES + ("mid",)


class DataError(ValueError):
    """Base class for dyadic data problems."""


class SchemaError(DataError):
    """CSV header does not match the expected schema."""


class ParseError(DataError):
    """A cell could not be parsed; message carries line numbers."""


class ValidationError(DataError):
    """A parsed value violates a domain invariant."""


@dataclass(frozen=True)
class Dyad:
    """One dyad-year observation."""

    dyad_id: str
    year: int
    democracy: float   # joint score, lowest of the two states, -10..+10
    allies: float      # 1 if any military alliance links the pair
    contingency: float  # 1 if the states share a border
    distance: float    # log10 km between capitals
    capability: float  # log10 ratio of composite power, stronger over weaker
    dependency: float  # dyadic trade share of the stronger state's GDP, >= 0
    major_power: float  # 1 if either state is a major power
    mid: int           # 0 peace, 1 conflict

    def validate(self) -> None:
        if not -10.0 <= self.democracy <= 10.0:
            raise ValidationError(
                f"dyad {self.dyad_id!r}: democracy {self.democracy} outside [-10, 10]"
            )
        for name in BINARY_VARIABLES:
            v = getattr(self, name)
            if v not in (0.0, 1.0):
                raise ValidationError(f"dyad {self.dyad_id!r}: {name} {v} is not 0 or 1")
        if self.dependency < 0:
            raise ValidationError(
                f"dyad {self.dyad_id!r}: dependency {self.dependency} is negative"
            )
        if self.mid not in (0, 1):
            raise ValidationError(f"dyad {self.dyad_id!r}: mid {self.mid} is not 0 or 1")

    def features(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in LIBERAL_VARIABLES], dtype=float)


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-variable (lo, hi) bounds for min-max mapping onto [0, 1].

    provenance is "theoretical-range" when every bound is fixed a priori,
    "fit-from-data" when any bound was fitted to a training set.
    """

    bounds: dict[str, tuple[float, float]]
    provenance: str = "fit-from-data"

    def __post_init__(self):
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise DataError(f"degenerate normalization bounds for {name!r}: lo={lo}, hi={hi}")

    def apply(self, name: str, values: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds[name]
        return np.clip((values - lo) / (hi - lo), 0.0, 1.0)

    def invert(self, name: str, values: np.ndarray) -> np.ndarray:
        lo, hi = self.bounds[name]
        return lo + np.asarray(values) * (hi - lo)

    def normalize_row(self, raw: np.ndarray, names=LIBERAL_VARIABLES) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        return np.array([self.apply(n, raw[i]) for i, n in enumerate(names)], dtype=float)

    def denormalize_row(self, x: np.ndarray, names=LIBERAL_VARIABLES) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([self.invert(n, x[i]) for i, n in enumerate(names)], dtype=float)


@dataclass(frozen=True)
class Dataset:
    """Immutable collection of observations: feature matrix X, labels t.

    Dyad-constructed datasets carry the seven liberal variables in canonical
    order; synthetic test fixtures may carry arbitrary feature columns.
    """

    X: np.ndarray                      # (n, d) float64
    t: np.ndarray                      # (n,) float64 in {0, 1}
    dyad_ids: tuple[str, ...]
    years: tuple[int, ...]
    feature_names: tuple[str, ...] = LIBERAL_VARIABLES

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        t = np.ascontiguousarray(np.asarray(self.t, dtype=float))
        if X.ndim != 2:
            raise DataError(f"feature matrix must be 2-D, got shape {X.shape}")
        if X.shape[0] != t.shape[0]:
            raise DataError(f"row count {X.shape[0]} != label count {t.shape[0]}")
        if X.shape[1] != len(self.feature_names):
            raise DataError(
                f"{X.shape[1]} feature columns but {len(self.feature_names)} feature names"
            )
        if len(self.dyad_ids) != X.shape[0] or len(self.years) != X.shape[0]:
            raise DataError("dyad_ids/years length must match row count")
        X.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_dyads(cls, dyads) -> "Dataset":
        dyads = list(dyads)
        X = (
            np.array([d.features() for d in dyads], dtype=float)
            if dyads
            else np.empty((0, len(LIBERAL_VARIABLES)))
        )
        t = np.array([d.mid for d in dyads], dtype=float)
        return cls(
            X=X,
            t=t,
            dyad_ids=tuple(d.dyad_id for d in dyads),
            years=tuple(d.year for d in dyads),
        )

    @classmethod
    def from_arrays(cls, X, t, feature_names, dyad_ids=None, years=None) -> "Dataset":
        X = np.asarray(X, dtype=float)
        n = X.shape[0]
        if dyad_ids is None:
            dyad_ids = tuple(f"row{i}" for i in range(n))
        if years is None:
            years = (0,) * n
        return cls(X=X, t=np.asarray(t, dtype=float), dyad_ids=tuple(dyad_ids),
                   years=tuple(years), feature_names=tuple(feature_names))

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            X=self.X[indices],
            t=self.t[indices],
            dyad_ids=tuple(self.dyad_ids[i] for i in indices),
            years=tuple(self.years[i] for i in indices),
            feature_names=self.feature_names,
        )

    def class_counts(self) -> tuple[int, int]:
        """(peace, conflict) counts."""
        conflicts = int(np.sum(self.t == 1.0))
        return self.n - conflicts, conflicts

    def to_dyads(self) -> list[Dyad]:
        if self.feature_names != LIBERAL_VARIABLES:
            raise DataError("only canonical 7-variable datasets convert to Dyads")
        out = []
        for i in range(self.n):
            row = self.X[i]
            out.append(Dyad(
                dyad_id=self.dyad_ids[i],
                year=self.years[i],
                mid=int(self.t[i]),
                **{name: float(row[j]) for j, name in enumerate(LIBERAL_VARIABLES)},
            ))
        return out


def parse_dyad_csv(path) -> Dataset:
    """Load a dyad-year CSV with the canonical header.

    All malformed rows are collected and reported together, with 1-based line
    numbers.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file: missing header row") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise SchemaError(
                f"header mismatch: expected {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        dyads = []
        parse_problems = []
        validation_problems = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_HEADER):
                parse_problems.append(
                    f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}"
                )
                continue
            try:
                year = int(float(row[1]))
                values = [float(c) for c in row[2:]]
            except ValueError as exc:
                parse_problems.append(f"line {lineno}: {exc}")
                continue
            dyad = Dyad(
                dyad_id=row[0],
                year=year,
                democracy=values[0],
                allies=values[1],
                contingency=values[2],
                distance=values[3],
                capability=values[4],
                dependency=values[5],
                major_power=values[6],
                mid=int(values[7]) if values[7] in (0.0, 1.0) else -1,
            )
            try:
                dyad.validate()
            except ValidationError as exc:
                validation_problems.append(f"line {lineno}: {exc}")
                continue
            dyads.append(dyad)
    if parse_problems:
        raise ParseError("malformed rows: " + "; ".join(parse_problems + validation_problems))
    if validation_problems:
        raise ValidationError("invalid rows: " + "; ".join(validation_problems))
    return Dataset.from_dyads(dyads)


def write_dyad_csv(ds: Dataset, path) -> None:
    dyads = ds.to_dyads()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for d in dyads:
            writer.writerow([
                d.dyad_id, d.year,
                repr(d.democracy), repr(d.allies), repr(d.contingency),
                repr(d.distance), repr(d.capability), repr(d.dependency),
                repr(d.major_power), d.mid,
            ])


def normalize(ds: Dataset, spec: NormalizationSpec | None = None) -> tuple[Dataset, NormalizationSpec]:
    """Min-max map every feature onto [0, 1], clamping out-of-range values.

    Variables with theoretical bounds (democracy, the binary flags) always use
    them; other continuous variables get bounds fitted from `ds` when no spec
    is supplied.  The returned spec must be reused verbatim for test data.
    """
    if spec is None:
        if ds.n == 0:
            raise DataError("cannot fit normalization bounds from an empty dataset")
        bounds = {}
        fitted = False
        for j, name in enumerate(ds.feature_names):
            if name in THEORETICAL_BOUNDS:
                bounds[name] = THEORETICAL_BOUNDS[name]
            else:
                lo, hi = float(np.min(ds.X[:, j])), float(np.max(ds.X[:, j]))
                if lo == hi:
                    raise DataError(f"degenerate normalization bounds for {name!r}: lo={lo}, hi={hi}")
                bounds[name] = (lo, hi)
                fitted = True
        spec = NormalizationSpec(bounds=bounds, provenance="fit-from-data" if fitted else "theoretical-range")
    missing = [n for n in ds.feature_names if n not in spec.bounds]
    if missing:
        raise DataError(f"normalization spec lacks bounds for {missing}")
    cols = [spec.apply(name, ds.X[:, j]) for j, name in enumerate(ds.feature_names)]
    X = np.column_stack(cols) if cols else ds.X.copy()
    return replace(ds, X=X), spec


def make_balanced_training_set(ds: Dataset, n_per_class: int, seed: int) -> tuple[Dataset, Dataset]:
    """Sample n_per_class dyads of each class without replacement for training.

    The test set is everything else, keeping its natural class imbalance.
    """
    conflict_idx = np.flatnonzero(ds.t == 1.0)
    peace_idx = np.flatnonzero(ds.t == 0.0)
    if len(conflict_idx) < n_per_class or len(peace_idx) < n_per_class:
        raise DataError(
            f"need {n_per_class} of each class, have {len(conflict_idx)} conflict "
            f"and {len(peace_idx)} peace dyads"
        )
    rng = np.random.default_rng(seed)
    pick_c = rng.choice(conflict_idx, size=n_per_class, replace=False)
    pick_p = rng.choice(peace_idx, size=n_per_class, replace=False)
    train_idx = np.sort(np.concatenate([pick_c, pick_p]))
    mask = np.ones(ds.n, dtype=bool)
    mask[train_idx] = False
    test_idx = np.flatnonzero(mask)
    return ds.subset(train_idx), ds.subset(test_idx)


@dataclass(frozen=True)
class GeneratorConfig:
    """Marginals and ground-truth risk surface for the synthetic population.

    The conflict probability is g(x) = max_risk * logistic(risk score), where
    the risk score rises with autocracy (low democracy), low dependency, high
    capability asymmetry, and a shared border, including joint interaction
    terms, and falls with alliance and distance:

        score = intercept
                + w_autocracy    * (1 - dem01)
                + w_low_dep      * (1 - dep01)
                + w_capability   * cap01
                + w_contingency  * contingency
                + w_aut_x_dep    * (1 - dem01) * (1 - dep01)
                + w_cont_x_cap   * contingency * cap01
                - w_allies       * allies
                - w_distance     * dist01
                + w_major_power  * major_power

    with dem01/dep01/cap01/dist01 the variables rescaled onto [0, 1]
    (dependency is capped at dependency_signal_cap before rescaling).
    Setting max_risk = 0 yields an all-peace population.
    """

    p_allies: float = 0.30
    p_contingency: float = 0.25
    p_major_power: float = 0.35
    distance_range: tuple[float, float] = (2.0, 4.3)
    capability_range: tuple[float, float] = (0.0, 3.0)
    dependency_scale: float = 0.05          # exponential mean, clipped below
    dependency_cap: float = 0.40
    dependency_signal_cap: float = 0.20
    intercept: float = -8.8
    w_autocracy: float = 2.2
    w_low_dep: float = 2.0
    w_capability: float = 2.4
    w_contingency: float = 1.2
    w_aut_x_dep: float = 2.6
    w_cont_x_cap: float = 1.6
    w_allies: float = 1.1
    w_distance: float = 1.4
    w_major_power: float = 0.6
    max_risk: float = 1.0

    def risk(self, X: np.ndarray) -> np.ndarray:
        """Ground-truth conflict probability for raw-scale feature rows."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        dem01 = (X[:, 0] + 10.0) / 20.0
        allies = X[:, 1]
        cont = X[:, 2]
        dlo, dhi = self.distance_range
        dist01 = np.clip((X[:, 3] - dlo) / (dhi - dlo), 0.0, 1.0)
        clo, chi = self.capability_range
        cap01 = np.clip((X[:, 4] - clo) / (chi - clo), 0.0, 1.0)
        dep01 = np.clip(X[:, 5] / self.dependency_signal_cap, 0.0, 1.0)
        mp = X[:, 6]
        score = (
            self.intercept
            + self.w_autocracy * (1.0 - dem01)
            + self.w_low_dep * (1.0 - dep01)
            + self.w_capability * cap01
            + self.w_contingency * cont
            + self.w_aut_x_dep * (1.0 - dem01) * (1.0 - dep01)
            + self.w_cont_x_cap * cont * cap01
            - self.w_allies * allies
            - self.w_distance * dist01
            + self.w_major_power * mp
        )
        return self.max_risk / (1.0 + np.exp(-score))


def generate_synthetic_population(n: int, seed: int, scenario: GeneratorConfig | None = None) -> Dataset:
    """Draw a schema-compatible dyad population with known ground truth.

    Deterministic per (n, seed, scenario).  Stands in for the proprietary
    dyad-year extract; the CSV loader accepts real extracts if supplied.
    """
    if n <= 0:
        raise DataError(f"population size must be positive, got {n}")
    cfg = scenario if scenario is not None else GeneratorConfig()
    rng = np.random.default_rng(seed)
    democracy = rng.uniform(-10.0, 10.0, size=n)
    allies = (rng.random(n) < cfg.p_allies).astype(float)
    contingency = (rng.random(n) < cfg.p_contingency).astype(float)
    distance = rng.uniform(*cfg.distance_range, size=n)
    capability = rng.uniform(*cfg.capability_range, size=n)
    dependency = np.minimum(rng.exponential(cfg.dependency_scale, size=n), cfg.dependency_cap)
    major_power = (rng.random(n) < cfg.p_major_power).astype(float)
    X = np.column_stack([democracy, allies, contingency, distance, capability, dependency, major_power])
    t = (rng.random(n) < cfg.risk(X)).astype(float)
    ids = tuple(f"s{i:06d}" for i in range(n))
    years = tuple(1885 + (i % 108) for i in range(n))
    return Dataset(X=X, t=t, dyad_ids=ids, years=years)


def dataset_fingerprint(path) -> str:
    """SHA-256 of the raw file bytes, for model-file provenance."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
