"""Command-line surface: synth, rank, select, train, oracle, benchmark.

Every invocation writes exactly one JSON report to stdout (or --out); all
human-readable logging goes to stderr. Reports embed the resolved
configuration, seeds included, so any run can be replayed bit-exactly
(runtime fields aside). Exit codes: 0 success, 1 data/model error, 2 usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .cardinality import (ModelFormatError, TrainConfig, gen_training_data, load_model,
                          save_model, train)
from .classifier import CvConfig
from .dataset import DataError, SynthSpec, load_csv, save_csv, synth_generate
from .info_theory import rank_features
from .search import (SearchConfig, SubsetEvaluator, brute_force_oracle, exact_search,
                     greedy_search, hybrid_search)


def _add_common(p):
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edfilter", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic count matrix CSV")
    p.add_argument("--data", required=True, help="output CSV path")
    p.add_argument("--config", help="JSON file with SynthSpec fields")
    p.add_argument("--n-features", type=int, default=10)
    p.add_argument("--n-informative", type=int, default=3)
    p.add_argument("--n-rows", type=int, default=500)
    p.add_argument("--n-classes", type=int, default=4)
    p.add_argument("--noise-rate", type=float, default=0.0)
    p.add_argument("--max-count", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("rank", help="rank features by information gain")
    p.add_argument("--data", required=True)
    _add_common(p)

    p = sub.add_parser("select", help="run a feature-subset search")
    p.add_argument("--data", required=True)
    p.add_argument("--algorithm", required=True, choices=["exact", "greedy", "hybrid"])
    p.add_argument("--model", help="cardinality model file (required for hybrid)")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--seed-size", type=int, default=5)
    p.add_argument("--max-expansions", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("oracle", help="brute-force optimal subset (small matrices)")
    p.add_argument("--data", required=True)
    p.add_argument("--max-features", type=int, default=12)
    _add_common(p)

    p = sub.add_parser("train", help="train the cardinality model from data chunks")
    p.add_argument("--data", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--chunk-size", type=int, default=100)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--n-max", type=int, default=32)
    p.add_argument("--labeler", choices=["auto", "oracle", "exact"], default="auto")
    _add_common(p)

    p = sub.add_parser("benchmark", help="run a suite of search cells and report curves")
    p.add_argument("--sample-sizes", default="500,1000", help="comma-separated row counts")
    p.add_argument("--feature-counts", default="6,9", help="comma-separated feature counts")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--algorithms", default="greedy,hybrid",
                   help="comma-separated subset of exact,greedy,hybrid,oracle")
    p.add_argument("--csv-out", help="write per-cell curve rows as CSV")
    p.add_argument("--timeout-s", type=float, default=None,
                   help="soft per-cell timeout; overruns are recorded, the suite continues")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--seed-size", type=int, default=5)
    p.add_argument("--max-expansions", type=int, default=None)
    p.add_argument("--n-classes", type=int, default=4)
    p.add_argument("--noise-rate", type=float, default=0.1)
    _add_common(p)
    return parser


def _log(args, msg):
    if args.verbose:
        print(msg, file=sys.stderr)


def _cv(args) -> CvConfig:
    return CvConfig(k=args.cv_folds, seed=args.seed, alpha=args.alpha)


def _common_config(args) -> dict:
    return {"seed": args.seed, "cv_folds": args.cv_folds, "alpha": args.alpha}


def cmd_synth(args):
    if args.config:
        spec = SynthSpec.from_json(args.config)
    else:
        spec = SynthSpec(args.n_features, args.n_informative, args.n_rows,
                         args.n_classes, args.noise_rate, args.max_count, args.seed)
    m = synth_generate(spec)
    save_csv(m, args.data)
    _log(args, f"wrote {m.n_rows}x{m.n_features} matrix to {args.data}")
    config = {**_common_config(args), "data": args.data, "spec": spec.to_dict()}
    result = {"path": args.data, "n_rows": m.n_rows, "n_features": m.n_features,
              "n_classes": m.n_classes}
    return config, result


def cmd_rank(args):
    m = load_csv(args.data)
    ranked = rank_features(m)
    config = {**_common_config(args), "data": args.data}
    result = {"ranking": [
        {"feature": m.feature_names[int(i)], "score": float(s)}
        for i, s in zip(ranked.order, ranked.scores)
    ]}
    return config, result


def _search_config(args) -> SearchConfig:
    return SearchConfig(cv=_cv(args), seed_size=args.seed_size,
                        prune=not args.no_prune, max_expansions=args.max_expansions)


def cmd_select(args, parser_error):
    if args.algorithm == "hybrid" and not args.model:
        parser_error("--model is required with --algorithm hybrid")
    m = load_csv(args.data)
    cfg = _search_config(args)
    ev = SubsetEvaluator(m, cfg.cv)
    if args.algorithm == "exact":
        result = exact_search(m, cfg, ev)
    elif args.algorithm == "greedy":
        result = greedy_search(m, cfg, ev)
    else:
        model = load_model(args.model)
        result = hybrid_search(m, model, cfg, ev)
    config = {**_common_config(args), "data": args.data, "algorithm": args.algorithm,
              "model": args.model, "no_prune": args.no_prune, "seed_size": args.seed_size,
              "max_expansions": args.max_expansions}
    out = result.to_dict(m.feature_names)
    out["fano_violation_rate"] = ev.fano_violation_rate
    return config, out


def cmd_oracle(args):
    m = load_csv(args.data)
    result = brute_force_oracle(m, args.max_features, _cv(args))
    config = {**_common_config(args), "data": args.data, "max_features": args.max_features}
    return config, result.to_dict(m.feature_names)


def cmd_train(args):
    m = load_csv(args.data)
    cv = _cv(args)
    examples = gen_training_data(m, args.chunk_size, args.seed, args.labeler, cv,
                                 n_max=args.n_max)
    tc = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                     learning_rate=args.learning_rate, seed=args.seed)
    model = train(examples, tc, n_max=args.n_max)
    save_model(model, args.model_out)
    labels = [e.label + 1 for e in examples]
    hist = {str(c): labels.count(c) for c in sorted(set(labels))}
    _log(args, f"trained on {len(examples)} chunk examples")
    config = {**_common_config(args), "data": args.data, "model_out": args.model_out,
              "chunk_size": args.chunk_size, "epochs": args.epochs,
              "batch_size": args.batch_size, "learning_rate": args.learning_rate,
              "n_max": args.n_max, "labeler": args.labeler}
    result = {"examples": len(examples), "cardinality_histogram": hist,
              "model_path": args.model_out}
    return config, result


def _cell_seed(base: int, n_rows: int, n_features: int, repeat: int) -> int:
    # Stable per-cell derivation; keeps data shared across algorithms in a cell.
    return (base * 1_000_003 + n_rows * 97 + n_features * 13 + repeat) % (2 ** 63)


def _run_cell(m, algorithm, cfg, model):
    ev = SubsetEvaluator(m, cfg.cv)
    if algorithm == "exact":
        return exact_search(m, cfg, ev)
    if algorithm == "greedy":
        return greedy_search(m, cfg, ev)
    if algorithm == "hybrid":
        return hybrid_search(m, model, cfg, ev)
    return brute_force_oracle(m, cv=cfg.cv, evaluator=ev)


def cmd_benchmark(args, parser_error):
    sample_sizes = [int(v) for v in args.sample_sizes.split(",") if v]
    feature_counts = [int(v) for v in args.feature_counts.split(",") if v]
    algorithms = [a for a in args.algorithms.split(",") if a]
    for a in algorithms:
        if a not in ("exact", "greedy", "hybrid", "oracle"):
            parser_error(f"unknown algorithm {a!r}")
    cfg = _search_config(args)

    model = None
    if "hybrid" in algorithms:
        # Train the cardinality cap model once, on its own synthetic matrix.
        train_spec = SynthSpec(max(feature_counts), max(2, max(feature_counts) // 3),
                               600, args.n_classes, args.noise_rate, 10, args.seed + 91)
        tm = synth_generate(train_spec)
        examples = gen_training_data(tm, max(120, 25 * args.n_classes), args.seed, "auto",
                                     cfg.cv, max_expansions=200)
        model = train(examples, TrainConfig(epochs=60, seed=args.seed))
        _log(args, f"trained hybrid cap model on {len(examples)} chunks")

    cells = []
    for n_rows in sample_sizes:
        for n_features in feature_counts:
            for rep in range(args.repeats):
                seed = _cell_seed(args.seed, n_rows, n_features, rep)
                spec = SynthSpec(n_features, max(2, n_features // 3), n_rows,
                                 args.n_classes, args.noise_rate, 10, seed)
                for alg in algorithms:
                    cells.append((n_rows, n_features, rep, alg, spec))

    def run(cell):
        n_rows, n_features, rep, alg, spec = cell
        m = synth_generate(spec)
        start = time.perf_counter()
        try:
            result = _run_cell(m, alg, cfg, model)
        except (DataError, ValueError) as exc:
            return {"algorithm": alg, "n_rows": n_rows, "n_features": n_features,
                    "repeat": rep, "error": str(exc)}
        elapsed = time.perf_counter() - start
        timed_out = args.timeout_s is not None and elapsed > args.timeout_s
        return {"algorithm": alg, "n_rows": n_rows, "n_features": n_features,
                "repeat": rep, "theta": result.theta, "runtime_ms": result.runtime_ms,
                "evaluations": result.evaluations, "prunes": result.prunes,
                "expansions": result.expansions,
                "budget_exhausted": result.budget_exhausted, "timed_out": timed_out}

    workers = max(1, int(os.environ.get("EDFILTER_THREADS", "1")))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]

    gap = None
    if "greedy" in algorithms and "hybrid" in algorithms:
        by_key = {(r["algorithm"], r["n_rows"], r["n_features"], r["repeat"]): r
                  for r in rows if "theta" in r}
        gaps = []
        for (alg, nr, nf, rep), r in by_key.items():
            if alg != "greedy":
                continue
            h = by_key.get(("hybrid", nr, nf, rep))
            if h:
                gaps.append(r["theta"] - h["theta"])
        if gaps:
            gap = {"delta_max": max(gaps), "delta_min": min(gaps),
                   "mean": sum(gaps) / len(gaps)}

    if args.csv_out:
        fields = ["algorithm", "n_rows", "n_features", "repeat", "theta", "runtime_ms",
                  "evaluations", "prunes", "expansions", "budget_exhausted", "timed_out"]
        with open(args.csv_out, "w", encoding="utf-8", newline="\n") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            for r in rows:
                if "theta" in r:
                    writer.writerow({k: r[k] for k in fields})

    config = {**_common_config(args), "sample_sizes": sample_sizes,
              "feature_counts": feature_counts, "repeats": args.repeats,
              "algorithms": algorithms, "no_prune": args.no_prune,
              "seed_size": args.seed_size, "max_expansions": args.max_expansions,
              "n_classes": args.n_classes, "noise_rate": args.noise_rate,
              "timeout_s": args.timeout_s, "csv_out": args.csv_out}
    result = {"cells": rows, "greedy_vs_hybrid_gap": gap}
    return config, result


def argv_from_report(report: dict) -> list:
    """Reconstruct the argv that replays a report's embedded configuration."""
    command = report["command"]
    cfg = report["config"]
    argv = [command]

    def flag(name, value):
        if value is None or value is False:
            return
        if value is True:
            argv.append(f"--{name}")
        else:
            argv.extend([f"--{name}", str(value)])

    flag("seed", cfg["seed"])
    flag("cv-folds", cfg["cv_folds"])
    flag("alpha", cfg["alpha"])
    if command == "synth":
        flag("data", cfg["data"])
        spec = cfg["spec"]
        for key in ("n_features", "n_informative", "n_rows", "n_classes",
                    "noise_rate", "max_count"):
            flag(key.replace("_", "-"), spec[key])
        argv[argv.index("--seed") + 1] = str(spec["seed"])
    elif command == "rank":
        flag("data", cfg["data"])
    elif command == "select":
        flag("data", cfg["data"])
        flag("algorithm", cfg["algorithm"])
        flag("model", cfg["model"])
        flag("no-prune", cfg["no_prune"])
        flag("seed-size", cfg["seed_size"])
        flag("max-expansions", cfg["max_expansions"])
    elif command == "oracle":
        flag("data", cfg["data"])
        flag("max-features", cfg["max_features"])
    elif command == "train":
        for key in ("data", "model_out", "chunk_size", "epochs", "batch_size",
                    "learning_rate", "n_max", "labeler"):
            flag(key.replace("_", "-"), cfg[key])
    elif command == "benchmark":
        flag("sample-sizes", ",".join(str(v) for v in cfg["sample_sizes"]))
        flag("feature-counts", ",".join(str(v) for v in cfg["feature_counts"]))
        flag("repeats", cfg["repeats"])
        flag("algorithms", ",".join(cfg["algorithms"]))
        flag("no-prune", cfg["no_prune"])
        flag("seed-size", cfg["seed_size"])
        flag("max-expansions", cfg["max_expansions"])
        flag("n-classes", cfg["n_classes"])
        flag("noise-rate", cfg["noise_rate"])
        flag("timeout-s", cfg["timeout_s"])
        flag("csv-out", cfg["csv_out"])
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        if args.command == "synth":
            config, result = cmd_synth(args)
        elif args.command == "rank":
            config, result = cmd_rank(args)
        elif args.command == "select":
            config, result = cmd_select(args, parser.error)
        elif args.command == "oracle":
            config, result = cmd_oracle(args)
        elif args.command == "train":
            config, result = cmd_train(args)
        else:
            config, result = cmd_benchmark(args, parser.error)
    except (DataError, ModelFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = {
        "command": args.command,
        "version": __version__,
        "config": config,
        "result": result,
        "timings": {"total_ms": (time.perf_counter() - start) * 1000.0},
    }
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
