"""Command-line entry point: synth, train, arch-search, evaluate, ard, control, serve."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import scg
from .ard import train_ard
from .control import SaConfig, control_campaign
from .data import (
    DataError,
    dataset_fingerprint,
    generate_synthetic_population,
    make_balanced_training_set,
    normalize,
    parse_dyad_csv,
    write_dyad_csv,
)
from .evaluation import confusion, roc_auc
from .evidence import EvidenceModel, train_evidence
from .ga import GaConfig, evolve, map_trainer
from .hmc import HmcConfig, sample_posterior
from .mlp import NetworkArchitecture, ard_groups, single_group
from .persistence import ModelFileError, load_metadata, load_model, save_model


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="midcontrol",
        description="Bayesian dispute classifiers, input relevance, and peace-seeking control")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dyad population CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train and save a model")
    p.add_argument("--data", required=True)
    p.add_argument("--method", choices=["gaussian", "hmc"], default="hmc")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-per-class", type=int, default=500,
                   help="balanced training dyads per class (0 = use all rows)")
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--inner", default="tanh",
                   choices=["linear", "logistic", "tanh", "softmax"])
    p.add_argument("--outer", default="logistic",
                   choices=["linear", "logistic", "tanh", "softmax"])
    p.add_argument("--groups", choices=["ard", "single"], default="ard")
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--scg-iters", type=int, default=500)
    p.add_argument("--epsilon0", type=float, default=0.005)
    p.add_argument("--leapfrog", type=int, default=100)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--thin", type=int, default=10)

    p = sub.add_parser("arch-search", help="genetic search for a network architecture")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-per-class", type=int, default=500)
    p.add_argument("--population", type=int, default=20)
    p.add_argument("--generations", type=int, default=20)
    p.add_argument("--scg-iters", type=int, default=100)

    p = sub.add_parser("evaluate", help="confusion matrix, rates, and AUC on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--roc-out", help="write ROC points as CSV")

    p = sub.add_parser("ard", help="rank input relevance")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-per-class", type=int, default=500)
    p.add_argument("--hidden", type=int, default=10)
    p.add_argument("--cycles", type=int, default=3)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--scg-iters", type=int, default=300)
    p.add_argument("--plot-data", help="write (variable, relevance, normalized) CSV")

    p = sub.add_parser("control", help="run a peace-seeking control campaign")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", required=True,
                   help="'multi' or 'single:<democracy|allies|capability|dependency>'")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int)
    p.add_argument("--report", help="write the campaign CSV here")

    p = sub.add_parser("serve", help="serve predict/control/ard over HTTP")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")

    return parser


def _load_normalized(path, spec=None):
    ds = parse_dyad_csv(path)
    return normalize(ds, spec)


def _training_split(ds, per_class, seed):
    if per_class > 0:
        return make_balanced_training_set(ds, per_class, seed)
    return ds, ds.subset(np.array([], dtype=int))


def cmd_synth(args) -> int:
    ds = generate_synthetic_population(args.n, seed=args.seed)
    write_dyad_csv(ds, args.out)
    peace, conflict = ds.class_counts()
    print(f"wrote {ds.n} dyads ({conflict} conflict, {peace} peace) to {args.out}")
    return 0


def cmd_train(args) -> int:
    raw = parse_dyad_csv(args.data)
    normalized, spec = normalize(raw)
    train, _ = _training_split(normalized, args.train_per_class, args.seed)
    arch = NetworkArchitecture(d=train.d, M=args.hidden,
                               f_inner=args.inner, f_outer=args.outer)
    hp0 = (ard_groups(arch, feature_names=train.feature_names)
           if args.groups == "ard" else single_group(arch))
    scg_cfg = scg.ScgConfig(max_iterations=args.scg_iters)
    evidence_model = train_evidence(train, arch, hp0, cycles=args.cycles,
                                    scg_cfg=scg_cfg, seed=args.seed,
                                    normalization=spec)
    metadata = {
        "seed": args.seed,
        "dataset_fingerprint": dataset_fingerprint(args.data),
        "train_per_class": args.train_per_class,
        "cycles": args.cycles,
        "groups": args.groups,
    }
    if args.method == "gaussian":
        save_model(evidence_model, args.out, metadata)
    else:
        cfg = HmcConfig(epsilon0=args.epsilon0, L=args.leapfrog,
                        n_samples=args.samples, burn_in=args.burn_in,
                        thin=args.thin, seed=args.seed)
        metadata["hmc"] = {"epsilon0": args.epsilon0, "L": args.leapfrog,
                           "n_samples": args.samples, "burn_in": args.burn_in,
                           "thin": args.thin}
        ensemble = sample_posterior(train, arch, evidence_model.hp, cfg,
                                    w0=evidence_model.w_map, normalization=spec)
        metadata["acceptance_rate"] = ensemble.acceptance_rate
        save_model(ensemble, args.out, metadata)
    print(f"trained {args.method} model on {train.n} dyads -> {args.out}")
    return 0


def cmd_arch_search(args) -> int:
    raw = parse_dyad_csv(args.data)
    normalized, _ = normalize(raw)
    train, _ = _training_split(normalized, args.train_per_class, args.seed)
    half = train.n // 2
    idx = np.arange(train.n)
    ga_train, ga_val = train.subset(idx[:half]), train.subset(idx[half:])
    cfg = GaConfig(population=args.population, generations=args.generations,
                   seed=args.seed)
    best, history = evolve(ga_train, ga_val, cfg,
                           map_trainer(scg_iterations=args.scg_iters), d=train.d)
    print(f'best architecture: {{"d": {best.d}, "M": {best.M}, "K": {best.K}, '
          f'"f_inner": "{best.f_inner}", "f_outer": "{best.f_outer}"}}')
    print(f"best fitness {history[-1].best_ever_fitness:.4f} "
          f"after {len(history)} generations")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    if model.normalization is None:
        raise DataError("model file lacks a normalization spec")
    ds, _ = _load_normalized(args.data, model.normalization)
    scores = model.predict_many(ds.X)
    cm = confusion(scores, ds.t, args.threshold)
    print(cm.as_text())
    print(f"threshold {args.threshold} (reporting convention; ties -> conflict)")
    roc = roc_auc(scores, ds.t)
    print(f"AUC {roc.auc:.4f}")
    if args.roc_out:
        with open(args.roc_out, "w", encoding="utf-8") as fh:
            fh.write("false_positive_rate,true_positive_rate\n")
            for fpr, tpr in roc.points:
                fh.write(f"{float(fpr)!r},{float(tpr)!r}\n")
        print(f"wrote ROC points to {args.roc_out}")
    return 0


def cmd_ard(args) -> int:
    raw = parse_dyad_csv(args.data)
    normalized, _ = normalize(raw)
    train, _ = _training_split(normalized, args.train_per_class, args.seed)
    arch = NetworkArchitecture(d=train.d, M=args.hidden,
                               f_inner="tanh", f_outer="logistic")
    result = train_ard(train, arch, cycles=args.cycles,
                       scg_cfg=scg.ScgConfig(max_iterations=args.scg_iters),
                       seed=args.seed, restarts=args.restarts)
    print(f"{'variable':<14} {'relevance':>12} {'normalized':>12}")
    for name, relevance, normalized_r in result.table():
        print(f"{name:<14} {relevance:>12.6f} {normalized_r:>12.4f}")
    if args.plot_data:
        with open(args.plot_data, "w", encoding="utf-8") as fh:
            fh.write("variable,relevance,normalized\n")
            for name, relevance, normalized_r in result.table():
                fh.write(f"{name},{relevance!r},{normalized_r!r}\n")
        print(f"wrote plot data to {args.plot_data}")
    return 0


def cmd_control(args) -> int:
    model = load_model(args.model)
    if model.normalization is None:
        raise DataError("model file lacks a normalization spec")
    ds, _ = _load_normalized(args.data, model.normalization)
    report = control_campaign(model, ds, args.strategy,
                              threshold=args.threshold, seed=args.seed,
                              limit=args.limit)
    print(f"strategy {report.strategy}: {report.n_selected} correctly-predicted "
          f"conflicts of {report.n_test_conflicts} actual")
    if report.n_selected:
        print(f"avoided {report.n_avoided} ({report.avoidance_rate:.1%}); "
              f"with alliance rounded to 0/1: {report.avoidance_rate_rounded_allies:.1%}")
    if args.report:
        report.write_csv(args.report)
        print(f"wrote campaign report to {args.report}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    model = load_model(args.model)
    metadata = load_metadata(args.model)
    app = create_app(model, metadata=metadata["metadata"])
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "arch-search": cmd_arch_search,
    "evaluate": cmd_evaluate,
    "ard": cmd_ard,
    "control": cmd_control,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DataError, ModelFileError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
