"""Automatic relevance determination over the network inputs.

Evidence training with one decay precision per input's fan-out weights; the
relevance of input i is reported as 1/alpha_i, so heavily decayed (pruned)
inputs rank low.  Single runs are initialization-sensitive, so several
restarts are trained and the median relevance per input is ranked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import scg
from .data import Dataset, NormalizationSpec
from .evidence import EvidenceModel, train_evidence
from .mlp import NetworkArchitecture, ard_groups

DEFAULT_RESTARTS = 5


@dataclass(frozen=True)
class ArdResult:
    variables: tuple[str, ...]
    alphas: np.ndarray            # median per-input precision across restarts
    relevances: np.ndarray        # 1 / alpha, same order as variables
    ranking: tuple[str, ...]      # variables by descending relevance
    model: EvidenceModel          # best-cost restart

    def normalized_relevances(self) -> np.ndarray:
        return self.relevances / self.relevances.sum()

    def table(self) -> list[tuple[str, float, float]]:
        """(variable, relevance, normalized) rows in ranked order."""
        norm = self.normalized_relevances()
        order = [self.variables.index(v) for v in self.ranking]
        return [(self.variables[i], float(self.relevances[i]), float(norm[i])) for i in order]


def train_ard(ds: Dataset, arch: NetworkArchitecture, cycles: int = 5,
              scg_cfg: scg.ScgConfig | None = None, seed: int = 0,
              restarts: int = DEFAULT_RESTARTS, init_alpha: float = 0.01,
              normalization: NormalizationSpec | None = None) -> ArdResult:
    """Rank input relevance by evidence training with per-input weight groups."""
    names = tuple(ds.feature_names)
    if len(names) != arch.d:
        raise ValueError(f"dataset has {len(names)} features, architecture expects {arch.d}")
    hp0 = ard_groups(arch, alpha=init_alpha, feature_names=names)
    seeds = [seed + r for r in range(restarts)]
    per_restart_alphas = []
    best_model = None
    best_cost = np.inf
    for s in seeds:
        model = train_evidence(ds, arch, hp0, cycles=cycles, scg_cfg=scg_cfg,
                               seed=s, normalization=normalization)
        per_restart_alphas.append(model.hp.alphas[: arch.d])
        cost = model.trace[-1].objective
        if cost < best_cost:
            best_cost = cost
            best_model = model
    alphas = np.median(np.array(per_restart_alphas), axis=0)
    relevances = 1.0 / alphas
    order = sorted(range(arch.d), key=lambda i: (-relevances[i], i))
    return ArdResult(
        variables=names,
        alphas=alphas,
        relevances=relevances,
        ranking=tuple(names[i] for i in order),
        model=best_model,
    )
