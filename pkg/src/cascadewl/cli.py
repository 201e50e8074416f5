"""Command-line pipeline: synth -> ingest/validate -> truncate -> featurize -> train/predict, evaluate, sweep.

Every option can also come from a JSON file given with ``--config``; explicit
flags win over file values, which win over built-in defaults. A run manifest
(``<output>.manifest.json``) records the fully resolved configuration and can
be passed back as ``--config`` to repeat the run.

Exit codes: 0 success, 1 usage error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import __version__
from .attributes import ATTRIBUTE_NAMES, attribute_matrix, write_csv
from .cascades import (
    DatasetError, InvalidCascadeError, LabeledDataset, cascade_from_dict, load_dataset,
    save_dataset, truncate_by_depth, truncate_by_time, validate,
)
from .evaluation import (
    EmptyDatasetError, ExperimentConfig, check_model_name, config_hash, sweep_min_size,
    sweep_truncation, sweep_wl_iterations, run_experiment, train_model,
)
from .metrics import confusion
from .models import NoInfoModel, TrainingDataError, load_model, noinfo_train, predict, save_model, threshold_train
from .synth import ConfigError, GeneratorConfig, generate, generate_planted_motif
from .tagging import MissingAttributeError, TagScheme, apply_tags
from .wl import FeatureIndex, WLConfig, embed_dataset, read_triplets, write_index, write_triplets

log = logging.getLogger("cascadewl")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

DEFAULTS = {
    "seed": 0,
    "kind": "stat-matched",
    "n_cascades": None,
    "generator": {},
    "strict": False,
    "truncate_hours": None,
    "truncate_depth": None,
    "features": "wl",
    "tags": "graph",
    "log_base": 2,
    "max_bin": 30,
    "wl_h": 2,
    "neighborhood": "undirected",
    "vocab": None,
    "attributes_csv": None,
    "model": "wl-nonlin",
    "model_file": None,
    "min_size": 600,
    "trials": 100,
    "threads": 1,
    "test_fraction": 0.2,
    "folds": 5,
    "grid": None,
    "sweep": "wl-h",
    "values": None,
}
PATH_KEYS = ("input", "output")

# keys that make up each command's resolved configuration
COMMAND_KEYS = {
    "synth": ("seed", "kind", "n_cascades", "generator"),
    "ingest": ("strict",),
    "validate": ("strict",),
    "truncate": ("strict", "truncate_hours", "truncate_depth"),
    "featurize": ("strict", "features", "tags", "log_base", "max_bin", "wl_h", "neighborhood", "vocab", "attributes_csv"),
    "train": ("seed", "model", "folds", "grid"),
    "predict": ("seed", "model_file"),
    "evaluate": ("strict", "seed", "tags", "wl_h", "neighborhood", "model", "min_size", "trials", "threads",
                 "test_fraction", "folds", "grid", "truncate_hours", "truncate_depth"),
    "sweep": ("strict", "seed", "tags", "wl_h", "neighborhood", "model", "min_size", "trials", "threads",
              "test_fraction", "folds", "grid", "truncate_hours", "truncate_depth", "sweep", "values"),
}
# keys whose value cannot change any output
NON_SEMANTIC = ("threads", "attributes_csv")

SWEEP_DEFAULTS = {
    "min-size": [200, 300, 400, 500, 600, 700, 800],
    "wl-h": [0, 1, 2, 3, 4],
    "hours": [1, 3, 6, 12, 24, 48, 72, math.inf],
    "depth": [1, 2, 3, 4, 5, 6, 8, 10],
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_name(text: str) -> str:
    try:
        check_model_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _hours(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("hours must be positive")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file of option values (or a run manifest)")
    common.add_argument("--quiet", action="store_true", help="only log warnings")

    p = _Parser(prog="cascadewl", description="Rumor veracity from sanitized cascade structure.")
    p.add_argument("--version", action="version", version=f"cascadewl {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        return sub.add_parser(name, help=help_, parents=[common], argument_default=argparse.SUPPRESS)

    def exp_flags(a):
        a.add_argument("--seed", type=int, help="master seed (default 0)")
        a.add_argument("--tags", choices=("cascade", "graph", "constant"), help="node tag source (default graph)")
        a.add_argument("--wl-h", dest="wl_h", type=_nonneg_int, help="WL iterations (default 2)")
        a.add_argument("--neighborhood", choices=("undirected", "children"))
        a.add_argument("--model", type=_model_name,
                        help="wl-lin | wl-nonlin | features-lin | features-nonlin | attribute:<name> | noinfo")
        a.add_argument("--min-size", dest="min_size", type=_nonneg_int, help="minimum cascade size (default 600)")
        a.add_argument("--trials", type=int, help="number of random splits (default 100)")
        a.add_argument("--threads", type=int, help="worker threads; results do not depend on it")
        a.add_argument("--test-fraction", dest="test_fraction", type=float, help="fraction of rumors held out (default 0.2)")
        a.add_argument("--folds", type=int, help="cross-validation folds (default 5)")
        a.add_argument("--truncate-hours", dest="truncate_hours", type=_hours)
        a.add_argument("--truncate-depth", dest="truncate_depth", type=_nonneg_int)
        a.add_argument("--strict", action="store_true", help="reject unknown JSONL fields")

    s = cmd("synth", "generate a labeled synthetic dataset")
    s.add_argument("--output")
    s.add_argument("--seed", type=int)
    s.add_argument("--kind", choices=("stat-matched", "independent", "planted-motif"))
    s.add_argument("--n-cascades", dest="n_cascades", type=_nonneg_int, help="cascades per class")
    s.add_argument("--generator", help="JSON file of generator settings (see configs/generator_full.json)")

    for name, help_ in (("ingest", "validate a JSONL dataset and rewrite it in canonical form"),
                        ("validate", "report every rule violation in a JSONL dataset")):
        s = cmd(name, help_)
        s.add_argument("--input")
        s.add_argument("--output")
        s.add_argument("--strict", action="store_true", help="reject unknown fields")

    s = cmd("truncate", "keep only nodes within a time or depth horizon")
    s.add_argument("--input")
    s.add_argument("--output")
    s.add_argument("--truncate-hours", dest="truncate_hours", type=_hours)
    s.add_argument("--truncate-depth", dest="truncate_depth", type=_nonneg_int)
    s.add_argument("--strict", action="store_true")

    s = cmd("featurize", "write a sparse feature matrix in triplet format")
    s.add_argument("--input")
    s.add_argument("--output")
    s.add_argument("--features", choices=("wl", "attributes"))
    s.add_argument("--tags", choices=("cascade", "graph", "constant"))
    s.add_argument("--log-base", dest="log_base", type=int)
    s.add_argument("--max-bin", dest="max_bin", type=_nonneg_int)
    s.add_argument("--wl-h", dest="wl_h", type=_nonneg_int)
    s.add_argument("--neighborhood", choices=("undirected", "children"))
    s.add_argument("--vocab", help="feature index (.index.json) to reuse; unseen motifs are dropped")
    s.add_argument("--attributes-csv", dest="attributes_csv", help="also export the attribute table as CSV")
    s.add_argument("--strict", action="store_true")

    s = cmd("train", "fit a model on featurized data")
    s.add_argument("--input", help="triplet file written by featurize")
    s.add_argument("--output")
    s.add_argument("--seed", type=int)
    s.add_argument("--model", type=_model_name)
    s.add_argument("--folds", type=int)

    s = cmd("predict", "score featurized data with a saved model")
    s.add_argument("--input", help="triplet file written by featurize")
    s.add_argument("--model-file", dest="model_file", help="model written by train")
    s.add_argument("--output", help="CSV of predictions")
    s.add_argument("--seed", type=int)

    s = cmd("evaluate", "repeated rumor-grouped train/test evaluation")
    s.add_argument("--input")
    s.add_argument("--output", help="JSON report")
    exp_flags(s)

    s = cmd("sweep", "evaluate across minimum size, WL iterations or truncation horizons")
    s.add_argument("--input")
    s.add_argument("--output", help="JSON report")
    s.add_argument("--sweep", choices=tuple(SWEEP_DEFAULTS))
    s.add_argument("--values", help="comma-separated sweep values (inf allowed for hours)")
    exp_flags(s)
    return p


# --- configuration -------------------------------------------------------


def _read_config(path: str) -> dict:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    if "command" in obj and isinstance(obj.get("config"), dict):
        # a run manifest: its resolved config plus the recorded paths
        obj = {**{k: obj[k] for k in PATH_KEYS if k in obj}, **obj["config"]}
    unknown = sorted(set(obj) - set(DEFAULTS) - set(PATH_KEYS))
    if unknown:
        raise UsageError(f"unknown keys in config file {path}: {unknown}")
    return obj


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then config file, then explicit flags; limited to the command's keys."""
    flags = vars(args)
    cmd = flags["command"]
    file_cfg = _read_config(flags["config"]) if "config" in flags else {}
    keys = COMMAND_KEYS[cmd]
    cfg = {k: DEFAULTS[k] for k in keys}
    cfg.update({k: v for k, v in file_cfg.items() if k in keys})
    cfg.update({k: v for k, v in flags.items() if k in keys})
    paths = {k: file_cfg.get(k) for k in PATH_KEYS}
    paths.update({k: v for k, v in flags.items() if k in PATH_KEYS})
    if cfg.get("truncate_hours") is not None:
        cfg["truncate_hours"] = float(cfg["truncate_hours"])
    if cmd != "synth" and not paths["input"]:
        raise UsageError("--input is required")
    if cmd != "validate" and not paths["output"]:
        raise UsageError("--output is required")
    return {"command": cmd, "config": cfg, **paths}


def _semantic(cfg: dict) -> dict:
    return {k: _jsonable(v) for k, v in cfg.items() if k not in NON_SEMANTIC}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(run: dict, inputs: dict[str, str], outputs: list[str]) -> None:
    cfg = _semantic(run["config"])
    manifest = {
        "tool": "cascadewl",
        "version": __version__,
        "command": run["command"],
        "config": _jsonable(run["config"]),
        "config_hash": config_hash(cfg),
        "input": run.get("input"),
        "output": run.get("output"),
        "inputs": {name: {"path": p, "sha256": _sha256(p)} for name, p in inputs.items()},
        "outputs": {p: _sha256(p) for p in outputs},
    }
    path = Path(f"{run['output']}.manifest.json")
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    log.info("wrote manifest %s", path)


def _require_file(path: str | None, what: str) -> str:
    if not path:
        raise UsageError(f"missing {what}")
    if not Path(path).is_file():
        raise UsageError(f"{what} not found: {path}")
    return path


# --- commands -----------------------------------------------------------


def cmd_synth(run: dict) -> int:
    cfg = run["config"]
    if isinstance(cfg["generator"], str):
        path = _require_file(cfg["generator"], "generator config")
        try:
            cfg["generator"] = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path} is not valid JSON: {exc}") from None
    gen = dict(cfg["generator"])
    gen["seed"] = cfg["seed"]
    if cfg["n_cascades"] is not None:
        gen["n_cascades"] = cfg["n_cascades"]
    if cfg["kind"] == "independent":
        gen["stat_matched"] = False
    elif cfg["kind"] == "stat-matched":
        gen["stat_matched"] = True
    try:
        gc = GeneratorConfig.from_dict(gen)
        ds = generate_planted_motif(gc) if cfg["kind"] == "planted-motif" else generate(gc)
    except (ConfigError, TypeError) as exc:
        raise UsageError(f"invalid generator config: {exc}") from None
    save_dataset(ds, run["output"])
    log.info("wrote %d cascades (%d positive) to %s", len(ds), sum(ds.labels), run["output"])
    write_manifest(run, {}, [run["output"]])
    return EXIT_OK


def _load(run: dict) -> LabeledDataset:
    return load_dataset(_require_file(run.get("input"), "input file"), strict=run["config"].get("strict", False))


def cmd_ingest(run: dict) -> int:
    ds = _load(run)
    save_dataset(ds, run["output"])
    log.info("ingested %d cascades, %d nodes", len(ds), sum(c.n for c in ds))
    write_manifest(run, {"dataset": run["input"]}, [run["output"]])
    return EXIT_OK


def cmd_validate(run: dict) -> int:
    path = _require_file(run.get("input"), "input file")
    strict = run["config"]["strict"]
    problems: list[str] = []
    n = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            n += 1
            where = f"line {lineno}: "
            try:
                raw = cascade_from_dict(json.loads(line), strict=strict, where=where)
            except json.JSONDecodeError as exc:
                problems.append(f"{where}invalid JSON ({exc.msg})")
                continue
            except DatasetError as exc:
                problems.append(str(exc))
                continue
            problems.extend(f"{where}cascade {raw.rumor_id!r}: {v}" for v in validate(raw))
    text = "\n".join(problems) + ("\n" if problems else "")
    if run.get("output"):
        Path(run["output"]).write_text(text, encoding="utf-8")
        write_manifest(run, {"dataset": path}, [run["output"]])
    sys.stdout.write(text if problems else f"ok: {n} cascades\n")
    return EXIT_DATA if problems else EXIT_OK


def cmd_truncate(run: dict) -> int:
    cfg = run["config"]
    if cfg["truncate_hours"] is None and cfg["truncate_depth"] is None:
        raise UsageError("truncate needs --truncate-hours and/or --truncate-depth")
    ds = _load(run)
    before = sum(c.n for c in ds)
    out = list(ds)
    if cfg["truncate_hours"] is not None:
        out = [truncate_by_time(c, cfg["truncate_hours"]) for c in out]
    if cfg["truncate_depth"] is not None:
        out = [truncate_by_depth(c, cfg["truncate_depth"]) for c in out]
    save_dataset(out, run["output"])
    after = sum(c.n for c in out)
    log.info("kept %d of %d nodes (%.4f)", after, before, after / before if before else 1.0)
    write_manifest(run, {"dataset": run["input"]}, [run["output"]])
    return EXIT_OK


def _sidecars(path: str) -> tuple[Path, Path, Path]:
    return Path(f"{path}.index.json"), Path(f"{path}.index.tsv"), Path(f"{path}.rows.tsv")


def cmd_featurize(run: dict) -> int:
    cfg = run["config"]
    ds = _load(run)
    index_json, index_tsv, rows_tsv = _sidecars(run["output"])
    inputs = {"dataset": run["input"]}
    if cfg["features"] == "wl":
        scheme = TagScheme(cfg["tags"], cfg["log_base"], cfg["max_bin"])
        tagged = [apply_tags(c, scheme) for c in ds]
        index = None
        if cfg["vocab"]:
            vocab = _require_file(cfg["vocab"], "vocabulary file")
            index = FeatureIndex.from_dict(json.loads(Path(vocab).read_text(encoding="utf-8")))
            if (index.cfg.h, index.cfg.neighborhood) != (cfg["wl_h"], cfg["neighborhood"]):
                raise UsageError(f"vocabulary was built with h={index.cfg.h}, neighborhood={index.cfg.neighborhood}")
            inputs["vocab"] = vocab
        X, index = embed_dataset(tagged, WLConfig(cfg["wl_h"], cfg["neighborhood"]), index)
        index_obj = {"kind": "wl", "tags": cfg["tags"], **index.to_dict()}
        write_index(index, index_tsv)
    else:
        X = sp.csr_matrix(attribute_matrix(list(ds)))
        index_obj = {"kind": "attributes", "names": list(ATTRIBUTE_NAMES)}
        index_tsv.write_text("col\tname\n" + "".join(f"{j}\t{a}\n" for j, a in enumerate(ATTRIBUTE_NAMES)),
                             encoding="utf-8")
    index_json.write_text(json.dumps(index_obj, sort_keys=True) + "\n", encoding="utf-8")
    header = {
        "version": __version__,
        "features": cfg["features"],
        "config_hash": config_hash(_semantic(cfg)),
        "index_hash": config_hash(index_obj),
    }
    write_triplets(X, run["output"], header)
    with open(rows_tsv, "w", encoding="utf-8") as fh:
        fh.write("row\trumor_id\tlabel\n")
        for i, c in enumerate(ds):
            fh.write(f"{i}\t{c.rumor_id}\t{c.label}\n")
    outputs = [run["output"], str(index_json), str(index_tsv), str(rows_tsv)]
    if cfg["attributes_csv"]:
        write_csv(ds, cfg["attributes_csv"])
        outputs.append(cfg["attributes_csv"])
    log.info("wrote %d x %d feature matrix (%d non-zeros)", X.shape[0], X.shape[1], X.nnz)
    write_manifest(run, inputs, outputs)
    return EXIT_OK


def _read_features(path: str):
    path = _require_file(path, "feature file")
    try:
        X, meta = read_triplets(path)
    except (ValueError, json.JSONDecodeError) as exc:
        raise DatasetError(f"{path}: {exc}") from None
    index_json, _, rows_tsv = _sidecars(path)
    for side in (index_json, rows_tsv):
        if not side.is_file():
            raise UsageError(f"missing sidecar {side} (written by featurize)")
    index_obj = json.loads(index_json.read_text(encoding="utf-8"))
    rumor_ids, labels = [], []
    with open(rows_tsv, encoding="utf-8") as fh:
        for rec in csv.DictReader(fh, delimiter="\t"):
            rumor_ids.append(rec["rumor_id"])
            labels.append(int(rec["label"]))
    if len(labels) != X.shape[0]:
        raise DatasetError(f"{rows_tsv} lists {len(labels)} rows but {path} has {X.shape[0]}")
    return X, meta, index_obj, rumor_ids, np.asarray(labels, dtype=np.int64)


def cmd_train(run: dict) -> int:
    cfg = run["config"]
    X, meta, index_obj, rumor_ids, y = _read_features(run.get("input"))
    model_name = cfg["model"]
    kind = index_obj.get("kind")
    if model_name.startswith("wl-") and kind != "wl":
        raise UsageError(f"{model_name} needs WL features (featurize --features wl)")
    if (model_name.startswith("features-") or model_name.startswith("attribute:")) and kind != "attributes":
        raise UsageError(f"{model_name} needs attribute features (featurize --features attributes)")
    info: dict = {}
    if model_name == "noinfo":
        model = noinfo_train(y, seed=cfg["seed"])
    elif model_name.startswith("attribute:"):
        name = model_name.split(":", 1)[1]
        col = index_obj["names"].index(name)
        model = threshold_train(X[:, [col]].toarray().ravel(), y, name, col)
    else:
        Xm = X.toarray() if kind == "attributes" else X
        model, cv = train_model(Xm, y, rumor_ids, model_name, cfg["grid"], cfg["seed"], cfg["folds"])
        info = {"params": cv.params, "cv_f1": cv.mean_f1}
    model_meta = {
        "version": __version__,
        "model": model_name,
        "config_hash": config_hash(_semantic(cfg)),
        "index_hash": meta.get("index_hash"),
        "n_features": X.shape[1],
        **info,
    }
    save_model(model, run["output"], model_meta)
    log.info("trained %s on %d rows", model_name, X.shape[0])
    write_manifest(run, {"features": run["input"]}, [run["output"]])
    return EXIT_OK


def cmd_predict(run: dict) -> int:
    cfg = run["config"]
    model_path = _require_file(cfg["model_file"], "model file (--model-file)")
    X, meta, index_obj, rumor_ids, y = _read_features(run.get("input"))
    try:
        model = load_model(model_path)
        model_meta = json.loads(Path(model_path).read_text(encoding="utf-8")).get("meta", {})
    except (ValueError, KeyError) as exc:
        raise DatasetError(f"{model_path}: {exc}") from None
    want = model_meta.get("index_hash")
    if want is not None and want != meta.get("index_hash"):
        raise DatasetError("features were built with a different vocabulary than the model; "
                           "re-run featurize with --vocab <training features>.index.json")
    if isinstance(model, NoInfoModel):
        pred, score = predict(model, X.shape[0], seed=cfg["seed"])
    elif index_obj.get("kind") == "attributes":
        pred, score = predict(model, X.toarray())
    else:
        pred, score = predict(model, X)
    with open(run["output"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "rumor_id", "label", "score", "prediction"])
        for i in range(X.shape[0]):
            w.writerow([i, rumor_ids[i], int(y[i]), repr(float(score[i])), int(pred[i])])
    cm = confusion(pred, y)
    sys.stdout.write(f"rows {X.shape[0]}  tp {cm.tp}  fp {cm.fp}  fn {cm.fn}  tn {cm.tn}  F1 {cm.f1:.4f}\n")
    write_manifest(run, {"features": run["input"], "model": model_path}, [run["output"]])
    return EXIT_OK


def _experiment_config(cfg: dict) -> ExperimentConfig:
    grid = cfg["grid"]
    return ExperimentConfig(
        min_cascade_size=cfg["min_size"], tags=cfg["tags"], model=cfg["model"], wl_h=cfg["wl_h"],
        neighborhood=cfg["neighborhood"], n_trials=cfg["trials"], seed=cfg["seed"],
        test_fraction=cfg["test_fraction"], folds=cfg["folds"],
        grid=None if grid is None else tuple(grid),
        truncate_hours=cfg["truncate_hours"], truncate_depth=cfg["truncate_depth"], threads=cfg["threads"],
    )


def cmd_evaluate(run: dict) -> int:
    try:
        exp = _experiment_config(run["config"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = _load(run)
    report = run_experiment(ds, exp)
    Path(run["output"]).write_text(report.to_json(), encoding="utf-8")
    trials_csv = str(Path(run["output"]).with_suffix(".trials.csv"))
    report.write_trials_csv(trials_csv)
    sys.stdout.write(report.to_table())
    write_manifest(run, {"dataset": run["input"]}, [run["output"], trials_csv])
    return EXIT_OK


def _sweep_values(kind: str, text) -> list:
    if text is None:
        return SWEEP_DEFAULTS[kind]
    items = text.split(",") if isinstance(text, str) else list(text)
    try:
        if kind == "hours":
            vals = [float(v) for v in items]
            if any(not v > 0 for v in vals):
                raise ValueError("hours must be positive")
            return vals
        return [int(v) for v in items]
    except ValueError as exc:
        raise UsageError(f"bad --values for {kind} sweep: {exc}") from None


def cmd_sweep(run: dict) -> int:
    cfg = run["config"]
    values = _sweep_values(cfg["sweep"], cfg["values"])
    cfg["values"] = values
    try:
        exp = _experiment_config(cfg)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = _load(run)
    if cfg["sweep"] == "min-size":
        rep = sweep_min_size(ds, exp, values)
    elif cfg["sweep"] == "wl-h":
        rep = sweep_wl_iterations(ds, exp, values)
    elif cfg["sweep"] == "hours":
        rep = sweep_truncation(ds, exp, times=values)
    else:
        rep = sweep_truncation(ds, exp, depths=values)
    Path(run["output"]).write_text(rep.to_json(), encoding="utf-8")
    sys.stdout.write(rep.to_table())
    write_manifest(run, {"dataset": run["input"]}, [run["output"]])
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth, "ingest": cmd_ingest, "validate": cmd_validate, "truncate": cmd_truncate,
    "featurize": cmd_featurize, "train": cmd_train, "predict": cmd_predict,
    "evaluate": cmd_evaluate, "sweep": cmd_sweep,
}

DATA_ERRORS = (DatasetError, InvalidCascadeError, MissingAttributeError, EmptyDatasetError, TrainingDataError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if getattr(args, "quiet", False) else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        run = resolve(args)
        log.info("resolved config: %s", json.dumps(_jsonable(run["config"]), sort_keys=True))
        return COMMANDS[run["command"]](run)
    except UsageError as exc:
        print(f"cascadewl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"cascadewl {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
