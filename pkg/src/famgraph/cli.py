"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data or config error, 4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .callgraph import AbstractionMode, abstract_graph
from .config import CONFIG_ENV, ConfigError, canonical_json, config_hash, load_config
from .dataset import SynthSpec, annotate, generate_synthetic, labels_of, load_scanner_reports
from .exceptions import ApiParseError, InterchangeError, SchemaMismatchError, UndefinedMetricError
from .experiments import (
    FEATURE_SETS,
    build_estimator,
    feature_table,
    robustness_matrix,
    robustness_plot_data,
    summary_table,
    table_from_csv,
    table_to_csv,
)
from .interchange import AppRecord, atomic_write_bytes, atomic_write_text, dumps_record, load_records
from .learners import EvalReport, TrainedModel, cross_validate, fit_estimator, unbalanced_sweep
from .obfuscation import TECHNIQUES, obfuscate_record
from .ranking import rank_features

log = logging.getLogger("famgraph")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4
DATA_ERRORS = (ConfigError, InterchangeError, SchemaMismatchError, ApiParseError,
               UndefinedMetricError, ValueError, FileNotFoundError, IsADirectoryError,
               json.JSONDecodeError)


class CorpusError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers

def _read_corpus(path: str, allow_empty: bool = False) -> list[AppRecord]:
    records = load_records(path)
    if not records and not allow_empty:
        raise CorpusError(f"{path}: corpus is empty")
    return records


def _write_corpus(path: str, records: Sequence[AppRecord]) -> None:
    atomic_write_text(path, "".join(dumps_record(r) + "\n" for r in records))


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _read_table(path: str):
    return table_from_csv(Path(path).read_text("utf-8"))


def _cfg(args) -> dict:
    keys = ("seed", "jobs", "classifier", "folds", "ratio", "grid_search", "n_estimators",
            "k", "gamma", "nu", "n_bins", "p", "threshold", "separation", "n_benign",
            "n_malware", "output_dir", "input")
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "techniques", None):
        overrides["techniques"] = tuple(args.techniques.split(","))
    if getattr(args, "feature_sets", None):
        overrides["feature_sets"] = tuple(args.feature_sets.split(","))
    return load_config(args.config, overrides)


def _report_rows(doc) -> list[tuple[str, dict]]:
    if "rows" in doc:
        return [(f"{r['technique']} / {r['feature_set']}", r) for r in doc["rows"]]
    if "metrics" in doc:
        return [(doc.get("label", doc.get("command", "result")), doc["metrics"])]
    raise ValueError("not a famgraph report (no 'rows' or 'metrics')")


# ---------------------------------------------------------------------------
# subcommands

def cmd_synth(args) -> int:
    cfg = _cfg(args)
    spec = SynthSpec(cfg["n_benign"], cfg["n_malware"], cfg["separation"], cfg["seed"])
    _write_corpus(args.output, generate_synthetic(spec, n_jobs=cfg["jobs"]))
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = _cfg(args)
    records = _read_corpus(args.input)
    if args.reports:
        result = annotate(records, load_scanner_reports(args.reports), cfg["threshold"])
        records = result.records
        for d in result.discrepancies:
            log.warning("%s: label %s overridden by scanner report (%d positives) -> %s",
                        d.app_id, d.existing, d.positives, d.derived)
        if args.discrepancies:
            atomic_write_text(args.discrepancies, _json_text([d.__dict__ for d in result.discrepancies]))
    _write_corpus(args.output, records)
    return EXIT_OK


def cmd_abstract(args) -> int:
    records = _read_corpus(args.input)
    mode = AbstractionMode(args.mode)
    _write_corpus(args.output, [r.with_graph(abstract_graph(r.graph, mode)) for r in records])
    return EXIT_OK


def _features(args, feature_set: str) -> int:
    cfg = _cfg(args)
    records = _read_corpus(args.input)
    atomic_write_text(args.output, table_to_csv(feature_table(records, feature_set, cfg["jobs"])))
    return EXIT_OK


def cmd_features(args) -> int:
    return _features(args, "graph")


def cmd_markov(args) -> int:
    return _features(args, "markov")


def cmd_rank(args) -> int:
    cfg = _cfg(args)
    table = _read_table(args.features)
    report = rank_features(table.X, table.y, table.schema.names, n_bins=cfg["n_bins"])
    atomic_write_text(args.output, report.to_csv())
    if args.plot_data:
        atomic_write_text(args.plot_data, report.to_plot_data())
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _cfg(args)
    table = _read_table(args.features)
    est = fit_estimator(build_estimator(cfg), table.X, table.y, table.schema.names)
    TrainedModel(est, table.schema.version, table.schema.digest, table.schema.names,
                 cfg["seed"]).save(args.output)
    return EXIT_OK


def cmd_eval(args) -> int:
    model = TrainedModel.load(args.model)
    table = _read_table(args.features)
    model.check_schema(table.schema.version, table.schema.digest)
    rep = EvalReport.from_predictions(table.y, model.predict(table.X))
    doc = {"command": "eval", "label": f"{model.kind} / {table.schema.version}",
           "schema_version": table.schema.version, "metrics": rep.to_dict()}
    _emit_report(args, doc)
    return EXIT_OK


def cmd_xval(args) -> int:
    cfg = _cfg(args)
    table = _read_table(args.features)
    rep = cross_validate(build_estimator(cfg), table.X, table.y, folds=cfg["folds"],
                         seed=cfg["seed"], feature_names=table.schema.names)
    doc = {"command": "xval", "label": f"{cfg['classifier']} / {table.schema.version}",
           "classifier": cfg["classifier"], "folds": cfg["folds"], "seed": cfg["seed"],
           "schema_version": table.schema.version, "metrics": rep.to_dict()}
    _emit_report(args, doc)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _cfg(args)
    table = _read_table(args.features)
    counts = [int(c) for c in args.counts.split(",") if c.strip()]
    points = unbalanced_sweep(build_estimator(cfg), table.X, table.y, args.fixed_class,
                              args.fixed_count, counts, args.test_per_class, cfg["seed"])
    lines = ["fixed_class,fixed_count,varying_count,accuracy,f_measure"]
    lines += [f"{p.fixed_class},{p.fixed_count},{p.varying_count},{p.accuracy:.12g},"
              f"{p.report.f_measure:.12g}" for p in points]
    atomic_write_text(args.output, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_obfuscate(args) -> int:
    cfg = _cfg(args)
    records = _read_corpus(args.input)
    _write_corpus(args.output, [obfuscate_record(r, args.technique, cfg["p"], cfg["seed"])
                                for r in records])
    return EXIT_OK


def cmd_robustness(args) -> int:
    cfg = _cfg(args)
    train = _read_corpus(args.input)
    test = _read_corpus(args.test) if args.test else None
    rows = robustness_matrix(train, cfg["techniques"], cfg["feature_sets"], cfg,
                             n_jobs=cfg["jobs"], test_corpus=test)
    doc = {"command": "robustness", "classifier": cfg["classifier"], "p": cfg["p"],
           "seed": cfg["seed"], "rows": [r.to_dict() for r in rows]}
    _emit_report(args, doc)
    if args.plot_data:
        atomic_write_text(args.plot_data, robustness_plot_data(rows))
    return EXIT_OK


def cmd_report(args) -> int:
    doc = json.loads(Path(args.report).read_text("utf-8"))
    sys.stdout.write(summary_table(_report_rows(doc)))
    return EXIT_OK


def _emit_report(args, doc) -> None:
    if args.output:
        atomic_write_text(args.output, _json_text(doc))
    sys.stdout.write(summary_table(_report_rows(doc)))


# ---------------------------------------------------------------------------
# full pipeline

def run_pipeline(cfg: dict) -> dict[str, bytes]:
    """Every artifact of a configured run, keyed by file name, built in memory.

    Nothing touches disk here, so a failing run leaves no partial output.
    """
    artifacts: dict[str, bytes] = {}
    if cfg["input"]:
        records = _read_corpus(cfg["input"])
    else:
        spec = SynthSpec(cfg["n_benign"], cfg["n_malware"], cfg["separation"], cfg["seed"])
        records = generate_synthetic(spec, n_jobs=cfg["jobs"])
        artifacts["corpus.jsonl"] = "".join(dumps_record(r) + "\n" for r in records).encode()
    if not records:
        raise CorpusError("corpus is empty")
    y = labels_of(records)

    summary_rows = []
    for fs in cfg["feature_sets"]:
        if fs not in FEATURE_SETS:
            raise ConfigError(f"unknown feature set {fs!r} in feature_sets")
        table = feature_table(records, fs, cfg["jobs"])
        schema = table.schema
        artifacts[f"features_{fs}.csv"] = table_to_csv(table).encode()
        gains = rank_features(table.X, y, schema.names, n_bins=cfg["n_bins"])
        artifacts[f"gain_{fs}.csv"] = gains.to_csv().encode()
        artifacts[f"gain_{fs}.dat"] = gains.to_plot_data().encode()
        est = fit_estimator(build_estimator(cfg), table.X, y, schema.names)
        model = TrainedModel(est, schema.version, schema.digest, schema.names, cfg["seed"])
        artifacts[f"model_{fs}.fgm"] = model.to_bytes()
        rep = cross_validate(build_estimator(cfg), table.X, y, folds=cfg["folds"],
                             seed=cfg["seed"], feature_names=schema.names)
        doc = {"command": "xval", "label": f"{cfg['classifier']} / {schema.version}",
               "classifier": cfg["classifier"], "folds": cfg["folds"], "seed": cfg["seed"],
               "schema_version": schema.version, "metrics": rep.to_dict()}
        artifacts[f"xval_{fs}.json"] = _json_text(doc).encode()
        summary_rows.append((f"xval {fs}", rep.to_dict()))

    if cfg["techniques"]:
        rows = robustness_matrix(records, cfg["techniques"], cfg["feature_sets"], cfg, n_jobs=cfg["jobs"])
        doc = {"command": "robustness", "classifier": cfg["classifier"], "p": cfg["p"],
               "seed": cfg["seed"], "rows": [r.to_dict() for r in rows]}
        artifacts["robustness.json"] = _json_text(doc).encode()
        artifacts["robustness_plot.csv"] = robustness_plot_data(rows).encode()
        summary_rows += [(f"{r.technique} / {r.feature_set}", r.report.to_dict()) for r in rows]

    artifacts["summary.txt"] = summary_table(summary_rows).encode()
    recipe = {k: v for k, v in cfg.items() if k not in ("output_dir", "jobs")}
    artifacts["manifest.json"] = _json_text({
        "config": json.loads(canonical_json(recipe)),
        "config_hash": config_hash(recipe),
        "seed": cfg["seed"],
        "versions": {"famgraph": __version__, "numpy": np.__version__,
                     **{f"schema_{k}": s.version for k, s in FEATURE_SETS.items()}},
        "artifacts": {name: hashlib.sha256(data).hexdigest() for name, data in sorted(artifacts.items())},
    }).encode()
    return artifacts


def cmd_run(args) -> int:
    cfg = _cfg(args)
    artifacts = run_pipeline(cfg)
    out = Path(cfg["output_dir"])
    for name, data in artifacts.items():
        atomic_write_bytes(out / name, data)
    sys.stdout.write(artifacts["summary.txt"].decode())
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"key = value config file (default: ${CONFIG_ENV})")
    common.add_argument("--jobs", type=int, help="worker processes for data-parallel stages")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    learner = argparse.ArgumentParser(add_help=False)
    learner.add_argument("--classifier", choices=("rf", "knn", "svm"))
    learner.add_argument("--grid-search", dest="grid_search", action="store_true", default=None)
    learner.add_argument("--n-estimators", dest="n_estimators", type=int)
    learner.add_argument("--k", type=int)
    learner.add_argument("--gamma", type=float)
    learner.add_argument("--nu", type=float)
    learner.add_argument("--ratio", type=float, help="train fraction of stratified splits")

    parser = argparse.ArgumentParser(prog="famgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"famgraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, parents=(common,)):
        p = sub.add_parser(name, help=help_, parents=list(parents))
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "generate a labelled synthetic corpus")
    p.add_argument("--n-benign", dest="n_benign", type=int)
    p.add_argument("--n-malware", dest="n_malware", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("-o", "--output", required=True)

    p = add("ingest", cmd_ingest, "validate a corpus and optionally label it from scanner reports")
    p.add_argument("input")
    p.add_argument("--reports", help="JSON Lines scanner reports")
    p.add_argument("--threshold", type=int, help="positives needed for a malware label")
    p.add_argument("--discrepancies", help="write overridden labels to this JSON file")
    p.add_argument("-o", "--output", required=True)

    p = add("abstract", cmd_abstract, "abstract raw graphs to api or family mode")
    p.add_argument("input")
    p.add_argument("--mode", choices=("api", "family"), default="family")
    p.add_argument("-o", "--output", required=True)

    for name, func, help_ in (("features", cmd_features, "graph-metric feature CSV"),
                              ("markov", cmd_markov, "family transition-probability feature CSV")):
        p = add(name, func, help_)
        p.add_argument("input")
        p.add_argument("-o", "--output", required=True)

    p = add("rank", cmd_rank, "rank features by information gain ratio")
    p.add_argument("features")
    p.add_argument("--n-bins", dest="n_bins", type=int)
    p.add_argument("--plot-data", dest="plot_data")
    p.add_argument("-o", "--output", required=True)

    p = add("train", cmd_train, "train a classifier on a feature CSV", (common, learner))
    p.add_argument("features")
    p.add_argument("-o", "--output", required=True)

    p = add("eval", cmd_eval, "evaluate a trained model on a feature CSV")
    p.add_argument("model")
    p.add_argument("features")
    p.add_argument("-o", "--output")

    p = add("xval", cmd_xval, "stratified k-fold cross-validation", (common, learner))
    p.add_argument("features")
    p.add_argument("--folds", type=int)
    p.add_argument("-o", "--output")

    p = add("sweep", cmd_sweep, "accuracy under unbalanced training sets", (common, learner))
    p.add_argument("features")
    p.add_argument("--fixed-class", dest="fixed_class", choices=("benign", "malware"), default="benign")
    p.add_argument("--fixed-count", dest="fixed_count", type=int, required=True)
    p.add_argument("--counts", required=True, help="comma-separated sizes of the other class")
    p.add_argument("--test-per-class", dest="test_per_class", type=int, default=50)
    p.add_argument("-o", "--output", required=True)

    p = add("obfuscate", cmd_obfuscate, "apply an obfuscation transform to raw graphs")
    p.add_argument("input")
    p.add_argument("--technique", choices=TECHNIQUES, required=True)
    p.add_argument("--p", type=float, help="fraction of edges or classes affected")
    p.add_argument("-o", "--output", required=True)

    p = add("robustness", cmd_robustness, "technique x feature-set metric matrix", (common, learner))
    p.add_argument("input", help="clean corpus (split by --ratio unless --test is given)")
    p.add_argument("--test", help="separate clean test corpus")
    p.add_argument("--techniques", help="comma-separated, from " + ",".join(TECHNIQUES))
    p.add_argument("--feature-sets", dest="feature_sets", help="comma-separated: graph,markov")
    p.add_argument("--p", type=float)
    p.add_argument("--plot-data", dest="plot_data")
    p.add_argument("-o", "--output")

    p = add("report", cmd_report, "print the summary table of a JSON report")
    p.add_argument("report")

    p = add("run", cmd_run, "full pipeline driven by the config file", (common, learner))
    p.add_argument("--input", help="corpus to use instead of a synthetic one")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--folds", type=int)
    p.add_argument("--techniques")
    p.add_argument("--feature-sets", dest="feature_sets")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except DATA_ERRORS as exc:
        print(f"famgraph {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - report, then map to the internal-error code
        log.debug("internal error", exc_info=True)
        print(f"famgraph {args.command}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
