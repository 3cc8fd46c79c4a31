"""Command-line entry point: ``gep <subcommand> ...``.

Exit codes: 0 ok, 2 bad configuration, 3 bad or insufficient data, 4 a
pipeline stage failed (including "no events to predict").
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from .chains import build_chains, remove_duplicates, write_chains
from .errors import ConfigError, GEPError
from .evaluate import confusion, report, write_report
from .features import write_catalog
from .ingest import stream_summary, write_stream
from .learn.dataset import MLDataset
from .learn.models import KINDS, load_model, order_labels, predict, save_model, train
from .learn.sampling import split_train_val_test
from .learn.validation import BALANCING, SCHEMES, cross_validate, rebalance
from .pipeline import (
    PipelineConfig,
    compare_classifiers,
    drift_experiment,
    enrich_experiment,
    run_pipeline,
    save_comparison,
    transfer,
    write_json,
)
from .select import FeatureRanking, GAConfig, backward_elimination, evolve, merge_rankings, rank_features
from .snapshot import GraphBuildSpec
from .synth import SynthConfig, churn_stream, planted_feature_dataset, planted_stream
from .tracking import TrackingConfig, event_histogram, read_events, track, write_histogram
from .windowing import WindowSpec


def _json_arg(text: str) -> dict:
    try:
        val = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {text!r} ({exc})") from exc
    if not isinstance(val, dict):
        raise ConfigError("expected a JSON object")
    return val


# -- shared option groups ---------------------------------------------------


def add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input and pipeline parameters")
    g.add_argument("--config", help="pipeline config JSON (flags below override it)")
    g.add_argument("--input", help="stream CSV: source,target,timestamp[,weight]")
    g.add_argument("--manifest", help="dataset manifest JSON")
    g.add_argument("--synth-seed", type=int, help="use the planted-evolution generator with this seed")
    g.add_argument("--window-type", choices=("disjoint", "overlapping", "increasing"))
    g.add_argument("--division", choices=("timestamp", "relations-count"))
    g.add_argument("--window-size", type=int)
    g.add_argument("--offset", type=int)
    g.add_argument("--directed", action="store_true", default=None)
    g.add_argument("--detector", choices=("cpm", "modularity"))
    g.add_argument("-k", type=int, help="clique size for cpm")
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--importance", choices=("uniform", "degree", "betweenness"))
    g.add_argument("-L", "--chain-length", type=int)
    g.add_argument("--dedup", choices=("last-state", "full", "none"))
    g.add_argument("--feature-set", dest="feature_preset", choices=("full", "last-3-states", "custom"))
    g.add_argument("--feature-names", help="comma-separated catalog names for --feature-set custom")
    g.add_argument("--zscore", action="store_true", default=None)
    add_learner(p, defaults=False)
    p.add_argument("--out", help="run directory for artifacts")


def add_learner(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    g = p.add_argument_group("learner")
    g.add_argument("--kind", choices=KINDS, default="random-forest" if defaults else None)
    g.add_argument("--params", type=_json_arg, default=None, help='hyperparameters as JSON, e.g. \'{"n_trees": 20}\'')
    g.add_argument("--balancing", choices=BALANCING, default="none" if defaults else None)
    g.add_argument("--cv", choices=SCHEMES, default="stratified-10-fold" if defaults else None)
    g.add_argument("--seed", type=int, default=0 if defaults else None)


def config_from_args(a: argparse.Namespace) -> PipelineConfig:
    base: dict = {}
    if a.config:
        cfg = PipelineConfig.load(a.config)
        base = cfg.to_dict()
    sources = [x for x in (a.input, a.manifest, a.synth_seed) if x is not None]
    if len(sources) > 1:
        raise ConfigError("give only one of --input, --manifest, --synth-seed")
    if sources:
        base.update(manifest=None, stream_path=None, synth=None)
        if a.input:
            base["stream_path"] = a.input
        elif a.manifest:
            base["manifest"] = a.manifest
        else:
            base["synth"] = SynthConfig(seed=a.synth_seed).to_dict()
    if not any(base.get(k) for k in ("manifest", "stream_path", "synth")):
        raise ConfigError("no input: pass --config, --input, --manifest or --synth-seed")

    win = dict(base.get("window") or WindowSpec(size=100).to_dict())
    for key, attr in (("window_type", "window_type"), ("division", "division"), ("size", "window_size"), ("offset", "offset")):
        if getattr(a, attr) is not None:
            win[key] = getattr(a, attr)
    base["window"] = win
    graph = dict(base.get("graph") or GraphBuildSpec().to_dict())
    if a.directed:
        graph["directed"] = True
    base["graph"] = graph
    trk = dict(base.get("tracking") or TrackingConfig().to_dict())
    for key in ("alpha", "beta", "importance"):
        if getattr(a, key) is not None:
            trk[key] = getattr(a, key)
    base["tracking"] = trk
    simple = {
        "detector": a.detector,
        "k": a.k,
        "chain_length": a.chain_length,
        "dedup": a.dedup,
        "features": a.feature_preset,
        "zscore": a.zscore,
        "kind": a.kind,
        "params": a.params,
        "balancing": a.balancing,
        "cv": a.cv,
        "seed": a.seed,
    }
    base.update({k: v for k, v in simple.items() if v is not None})
    if a.feature_names:
        base["feature_names"] = [s.strip() for s in a.feature_names.split(",") if s.strip()]
    return PipelineConfig.from_dict(base)


def _out(a: argparse.Namespace) -> Path | None:
    return Path(a.out) if getattr(a, "out", None) else None


def _print(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True))


def _load_features(path: str) -> MLDataset:
    return MLDataset.from_csv(path)


# -- subcommands ------------------------------------------------------------


def cmd_stage(a: argparse.Namespace, until: str) -> int:
    cfg = config_from_args(a)
    res = run_pipeline(cfg, _out(a), until=until)
    if until == "ingest":
        _print(stream_summary(res.stream).__dict__)
    elif until == "windows":
        _print({"windows": len(res.windows), "empty": sum(1 for w in res.windows if w.record_count == 0)})
    elif until == "detect":
        _print({"windows": len(res.covers), "communities": [len(c) for c in res.covers]})
    elif until == "track":
        _print(event_histogram(res.events))
        if a.grid and _out(a) is not None:
            grid, cache = [], {}
            for alpha in range(10, 101, 10):
                for beta in range(10, 101, 10):
                    t = TrackingConfig(alpha, beta, cfg.tracking.importance)
                    grid.append((alpha, beta, event_histogram(track(res.covers, res.snapshots, t, cache))))
            write_histogram(grid, _out(a) / "histogram_grid.csv")
    elif until == "chains":
        _print({"chains": len(res.chains), "labels": dict(sorted(Counter(c.label.value for c in res.chains).items()))})
    elif until == "features":
        _print({"rows": len(res.dataset), "columns": res.dataset.n_features, "classes": res.dataset.class_counts()})
    else:
        _print(res.report.to_dict())
    return 0


def cmd_chains(a: argparse.Namespace) -> int:
    if a.events:
        chains = remove_duplicates(build_chains(read_events(a.events), a.chain_length or 1), a.dedup or "last-state")
        if a.out:
            Path(a.out).mkdir(parents=True, exist_ok=True)
            write_chains(chains, Path(a.out) / "chains.csv")
        _print({"chains": len(chains), "labels": dict(sorted(Counter(c.label.value for c in chains).items()))})
        return 0
    return cmd_stage(a, "chains")


def cmd_features(a: argparse.Namespace) -> int:
    if a.catalog:
        write_catalog(a.catalog)
        if not (a.config or a.input or a.manifest or a.synth_seed is not None):
            return 0
    return cmd_stage(a, "features")


def cmd_train(a: argparse.Namespace) -> int:
    ds = _load_features(a.features)
    ds = rebalance(ds, a.balancing, a.seed)
    model = train(ds, a.kind, a.params, a.seed)
    save_model(model, a.model)
    _print({"kind": model.kind, "classes": list(model.classes), "rows": len(ds), "model": a.model})
    return 0


def cmd_evaluate(a: argparse.Namespace) -> int:
    ds = _load_features(a.features)
    if a.model:
        model = load_model(a.model)
        pred = predict(model, ds)
        classes = order_labels(list(model.classes) + ds.y.tolist())
        rep = report(confusion(ds.y.tolist(), pred.labels.tolist(), classes))
        out = rep.to_dict()
    else:
        res = cross_validate(ds, a.kind, a.params, a.cv, a.seed, a.balancing)
        out = res.to_dict()
        rep = res.aggregate
    if a.report:
        write_json(out, a.report)
    _print(rep.to_dict())
    return 0


def cmd_compare(a: argparse.Namespace) -> int:
    if a.features:
        ds = _load_features(a.features)
    else:
        ds = run_pipeline(config_from_args(a), until="features").dataset
    kinds = [k.strip() for k in a.kinds.split(",") if k.strip()]
    cmp = compare_classifiers(ds, kinds, a.cv or "stratified-10-fold", a.seed or 0, a.balancing or "none")
    if a.out:
        save_comparison(cmp, Path(a.out))
    _print(cmp.to_dict())
    return 0


def _ga_config(a: argparse.Namespace) -> GAConfig:
    return GAConfig(
        generations=a.generations,
        population=a.population,
        mutation=a.mutation,
        crossover=a.crossover,
        tournament=a.tournament,
        gamma=a.gamma,
        delta=a.delta,
        runs_per_fold=a.runs_per_fold,
        n_trees=a.ga_trees,
        seed=a.seed,
    )


def cmd_select(a: argparse.Namespace) -> int:
    ds = _load_features(a.features)
    if a.method == "backward":
        res = backward_elimination(ds, a.kind, a.seed, a.params)
        out = {"method": "backward", "baseline": res.baseline, "kept": res.kept, "steps": res.steps}
    else:
        tr, va, _ = split_train_val_test(ds, a.seed)
        res = evolve(tr, va, _ga_config(a))
        out = {
            "method": "ga",
            "fitness": res.best_fitness,
            "selected": res.best.names(ds.columns),
            "best_history": res.best_history,
            "evaluations": res.evaluations,
        }
    if a.out:
        write_json(out, a.out)
    _print(out)
    return 0


def cmd_rank(a: argparse.Namespace) -> int:
    if a.merge:
        ranking = merge_rankings([FeatureRanking.from_csv(p) for p in a.merge])
    else:
        if not a.features:
            raise ConfigError("rank needs --features or --merge")
        ds = _load_features(a.features)

        def progress(fold, run, res):
            if a.verbose:
                print(f"fold {fold} run {run}: fitness {res.best_fitness:.4f}, {res.best.count} features", file=sys.stderr)

        ranking = rank_features(ds, _ga_config(a), progress=progress)
    ranking.to_csv(a.ranking)
    for r, (name, occ) in enumerate(ranking.ordered()[: a.top], start=1):
        print(f"{r:3d}  {name}  {occ:g}")
    return 0


def _dataset_from(features: str | None, config: str | None, label: str) -> MLDataset:
    if features:
        return _load_features(features)
    if config:
        return run_pipeline(PipelineConfig.load(config), until="features").dataset
    raise ConfigError(f"{label}: give a features CSV or a config")


def cmd_transfer(a: argparse.Namespace) -> int:
    src = _dataset_from(a.train_features, a.train_config, "training side")
    dst = _dataset_from(a.test_features, a.test_config, "test side")
    rep = transfer(src, dst, a.kind, a.params, a.seed, a.balance_train)
    if a.report:
        write_report(rep, a.report)
    _print(rep.to_dict())
    return 0


def cmd_enrich(a: argparse.Namespace) -> int:
    base = _dataset_from(a.base_features, a.base_config, "base")
    ext = _dataset_from(a.external_features, a.external_config, "external")
    classes = [c.strip() for c in a.classes.split(",")] if a.classes else None
    res = enrich_experiment(base, ext, classes, a.kind, a.params, a.cv, a.seed, a.balancing)
    if a.report:
        write_json(res.to_dict(), a.report)
    _print(res.to_dict())
    return 0


def cmd_drift(a: argparse.Namespace) -> int:
    cfg = config_from_args(a)
    out = _out(a)
    res = run_pipeline(cfg, out, until="features")
    dr = drift_experiment(res.dataset, res.chains, len(res.windows), a.periods, cfg.kind, cfg.params, cfg.cv, cfg.seed, cfg.balancing)
    if out is not None:
        write_json(dr.to_dict(), out / "drift.json")
    _print(dr.to_dict())
    return 0


def cmd_synth(a: argparse.Namespace) -> int:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    if a.planted_features:
        if a.informative:
            informative = tuple(int(x) for x in a.informative.split(","))
        elif a.columns > 46:
            informative = (3, 11, 24, 37, 46)
        else:
            informative = tuple(sorted({int(round(x)) for x in np.linspace(0, a.columns - 1, min(5, a.columns))}))
        ds = planted_feature_dataset(a.rows, a.columns, informative, seed=a.seed)
        ds.to_csv(out / "features.csv")
        write_json(ds.provenance, out / "planted.json")
        print(out / "features.csv")
        return 0
    if a.churn:
        stream = churn_stream(a.windows or 10, seed=a.seed)
        write_stream(stream, out / "stream.csv")
    else:
        scfg = SynthConfig(seed=a.seed, drift_at=a.drift_at, **({"windows": a.windows} if a.windows else {}))
        ps = planted_stream(scfg)
        write_stream(ps.stream, out / "stream.csv")
        with (out / "schedule.csv").open("w") as fh:
            fh.write("window,group,event\n")
            for w, g, ev in ps.schedule:
                fh.write(f"{w},{g},{ev}\n")
        write_json(scfg.to_dict(), out / "synth_config.json")
    write_json({"path": "stream.csv", "format": "csv", "directed": False, "self_loops": "drop"}, out / "manifest.json")
    print(out / "manifest.json")
    return 0


def cmd_run(a: argparse.Namespace) -> int:
    return cmd_stage(a, "learn")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gep", description="Predict the next evolution event of communities in a temporal network.")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, until, text in (
        ("summary", "ingest", "profile the interaction stream"),
        ("windows", "windows", "cut the stream into time windows"),
        ("detect", "detect", "detect communities in every window"),
        ("track", "track", "track evolution events between windows"),
        ("run", "learn", "full pipeline with cross-validated evaluation"),
    ):
        p = sub.add_parser(name, help=text)
        add_input(p)
        if name == "track":
            p.add_argument("--grid", action="store_true", help="also write event counts over the alpha/beta grid 10..100")
        p.set_defaults(func=lambda a, u=until: cmd_stage(a, u))

    p = sub.add_parser("chains", help="build evolution chains")
    add_input(p)
    p.add_argument("--events", help="build from an events CSV instead of running the pipeline")
    p.set_defaults(func=cmd_chains)

    p = sub.add_parser("features", help="chain feature matrix")
    add_input(p)
    p.add_argument("--catalog", help="write the feature catalog JSON here")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit a classifier on a feature CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True, help="output model JSON")
    add_learner(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model, or cross-validate a kind")
    p.add_argument("--features", required=True)
    p.add_argument("--model")
    p.add_argument("--report", help="output report JSON")
    add_learner(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="compare classifiers on identical folds with Friedman ranks")
    add_input(p)
    p.add_argument("--features", help="feature CSV (instead of running the pipeline)")
    p.add_argument("--kinds", default="zero-r,knn,naive-bayes,cart,bagging-cart,random-forest,adaboost-stump")
    p.set_defaults(func=cmd_compare)

    for name, text in (("select", "evolutionary or backward feature selection"), ("rank", "occurrence ranking from repeated GA runs")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--features", required=name == "select")
        d = GAConfig()
        p.add_argument("--generations", type=int, default=d.generations)
        p.add_argument("--population", type=int, default=d.population)
        p.add_argument("--mutation", type=float, default=d.mutation)
        p.add_argument("--crossover", type=float, default=d.crossover)
        p.add_argument("--tournament", type=int, default=d.tournament)
        p.add_argument("--gamma", type=float, default=d.gamma)
        p.add_argument("--delta", type=float, default=d.delta)
        p.add_argument("--runs-per-fold", type=int, default=d.runs_per_fold)
        p.add_argument("--ga-trees", type=int, default=d.n_trees, help="forest size inside the fitness")
        add_learner(p)
        if name == "select":
            p.add_argument("--method", choices=("ga", "backward"), default="ga")
            p.add_argument("--out", help="output JSON")
            p.set_defaults(func=cmd_select, kind="cart")
        else:
            p.add_argument("--merge", nargs="+", help="average existing ranking CSVs instead of running the GA")
            p.add_argument("--ranking", default="ranking.csv", help="output ranking CSV")
            p.add_argument("--top", type=int, default=20)
            p.add_argument("-v", "--verbose", action="store_true")
            p.set_defaults(func=cmd_rank)

    p = sub.add_parser("transfer", help="train on one dataset, test on another")
    for side in ("train", "test"):
        p.add_argument(f"--{side}-features")
        p.add_argument(f"--{side}-config")
    p.add_argument("--balance-train", action="store_true", help="equal-size balance the training side")
    p.add_argument("--report")
    add_learner(p)
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("enrich", help="enrich training folds with chains from an external dataset")
    for side in ("base", "external"):
        p.add_argument(f"--{side}-features")
        p.add_argument(f"--{side}-config")
    p.add_argument("--classes", help="comma-separated labels to take from the external set (default: all)")
    p.add_argument("--report")
    add_learner(p)
    p.set_defaults(func=cmd_enrich)

    p = sub.add_parser("drift", help="per-period models against one whole-span model")
    add_input(p)
    p.add_argument("--periods", type=int, default=2)
    p.set_defaults(func=cmd_drift)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--windows", type=int)
    p.add_argument("--drift-at", type=int, help="window where precursors change meaning")
    p.add_argument("--churn", action="store_true", help="stream in which no community ever forms")
    p.add_argument("--planted-features", action="store_true", help="tabular feature-selection dataset instead of a stream")
    p.add_argument("--rows", type=int, default=400)
    p.add_argument("--columns", type=int, default=50)
    p.add_argument("--informative", help="comma-separated planted column indices (default: five spread over the columns)")
    p.set_defaults(func=cmd_synth)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GEPError as exc:
        print(f"gep: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
