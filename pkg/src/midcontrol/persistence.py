"""Versioned model files: structured JSON, weights in full decimal precision.

Floats are serialized with repr-level precision, so a load reproduces
predictions bit for bit; two identical training runs produce byte-identical
files (keys are sorted and no wall-clock fields are written).
"""

from __future__ import annotations

import json

import numpy as np

from .data import NormalizationSpec
from .evidence import EvidenceModel
from .hmc import PosteriorEnsemble
from .mlp import HyperParameters, NetworkArchitecture

FORMAT_VERSION = 1


class ModelFileError(ValueError):
    pass


def _arch_to_dict(arch: NetworkArchitecture) -> dict:
    return {"d": arch.d, "M": arch.M, "K": arch.K,
            "f_inner": arch.f_inner, "f_outer": arch.f_outer}


def _arch_from_dict(d: dict) -> NetworkArchitecture:
    return NetworkArchitecture(d=d["d"], M=d["M"], K=d["K"],
                               f_inner=d["f_inner"], f_outer=d["f_outer"])


def _norm_to_dict(spec: NormalizationSpec | None) -> dict | None:
    if spec is None:
        return None
    return {"provenance": spec.provenance,
            "bounds": {k: list(v) for k, v in spec.bounds.items()}}


def _norm_from_dict(d: dict | None) -> NormalizationSpec | None:
    if d is None:
        return None
    return NormalizationSpec(bounds={k: tuple(v) for k, v in d["bounds"].items()},
                             provenance=d["provenance"])


def _hp_to_dict(hp: HyperParameters) -> dict:
    return {
        "beta": hp.beta,
        "groups": [{"name": n, "indices": list(idx)}
                   for n, idx in zip(hp.group_names, hp.group_indices)],
        "alphas": hp.alphas.tolist(),
    }


def _hp_from_dict(d: dict) -> HyperParameters:
    return HyperParameters(
        group_names=tuple(g["name"] for g in d["groups"]),
        group_indices=tuple(tuple(g["indices"]) for g in d["groups"]),
        alphas=np.array(d["alphas"], dtype=float),
        beta=d["beta"],
    )


def save_model(model: EvidenceModel | PosteriorEnsemble, path, metadata: dict | None = None) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "architecture": _arch_to_dict(model.arch),
        "normalization": _norm_to_dict(model.normalization),
        "hyperparameters": _hp_to_dict(model.hp),
        "metadata": metadata or {},
    }
    if isinstance(model, EvidenceModel):
        doc["method"] = "gaussian"
        doc["gaussian"] = {
            "w_map": model.w_map.tolist(),
            "gammas": model.gammas.tolist(),
            "posterior_cov": model.posterior_cov.tolist(),
        }
    elif isinstance(model, PosteriorEnsemble):
        doc["method"] = "hmc"
        doc["hmc"] = {
            "samples": model.samples.tolist(),
            "acceptance_rate": model.acceptance_rate,
        }
    else:
        raise ModelFileError(f"cannot serialize model of type {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_model(path) -> EvidenceModel | PosteriorEnsemble:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"not a model file: {exc}") from exc
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model file version {version!r}")
    arch = _arch_from_dict(doc["architecture"])
    norm = _norm_from_dict(doc.get("normalization"))
    hp = _hp_from_dict(doc["hyperparameters"])
    method = doc.get("method")
    if method == "gaussian":
        g = doc["gaussian"]
        return EvidenceModel(
            arch=arch,
            w_map=np.array(g["w_map"], dtype=float),
            hp=hp,
            gammas=np.array(g["gammas"], dtype=float),
            posterior_cov=np.array(g["posterior_cov"], dtype=float),
            normalization=norm,
        )
    if method == "hmc":
        h = doc["hmc"]
        return PosteriorEnsemble(
            arch=arch,
            samples=np.array(h["samples"], dtype=float),
            acceptance_rate=h["acceptance_rate"],
            hp=hp,
            normalization=norm,
        )
    raise ModelFileError(f"unknown method tag {method!r}")


def load_metadata(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return {"method": doc.get("method"),
            "architecture": doc.get("architecture"),
            "metadata": doc.get("metadata", {})}
