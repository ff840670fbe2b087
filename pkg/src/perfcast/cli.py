"""Command-line entry point wiring ingestion, features, experiments, reports.

Subcommands:
    features    tokenized corpora -> pairwise dataset-feature CSV
    train       records + feature sources -> serialized model JSON
    predict     model + records -> per-record predictions CSV
    experiment  config -> repeated evaluation + full report directory
    ablate      experiment once per feature-group subset
    importance  serialized model -> feature-importance CSV

Every run writes a manifest.json recording the config hash, input file
digests, tool version, master seed and timestamps. All other outputs are
byte-deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import hashlib
import json
import os
import sys
from typing import Any, Sequence

from . import __version__
from .corpus import (
    dataset_features,
    load_embeddings,
    load_feature_csv,
    profile,
    read_corpus,
    write_feature_csv,
)
from .errors import ConfigError, ParseError, PerfcastError
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    SplitSpec,
    run_ablation,
    run_experiment,
)
from .langdist import load_distance_table
from .records import (
    PerformanceRecord,
    build_design_matrix,
    build_schema,
    load_records,
    proxy_roster,
)
from .regressors import (
    GbtModel,
    GbtParams,
    MfParams,
    PolyParams,
    fit_model,
    gbt_importance,
    get_preset,
    load_model,
    params_kind,
    predict_model,
    save_model,
    with_seed,
)
from .report import ScatterSeries, emit_report, scatter_from_predictions

_PARAM_TYPES = {"gbt": GbtParams, "poly": PolyParams, "mf": MfParams}


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return cfg


class _Run:
    """Tracks consumed inputs and writes the manifest at the end."""

    def __init__(self, command: str, config_path: str, out_dir: str, seed: int | None, threads: int):
        self.command = command
        self.config_path = config_path
        self.out_dir = out_dir
        self.seed = seed
        self.threads = threads
        self.inputs: dict[str, str] = {config_path: _sha256(config_path)}
        self.started = datetime.datetime.now(datetime.timezone.utc).isoformat()
        os.makedirs(out_dir, exist_ok=True)

    def track(self, path: str) -> str:
        self.inputs[path] = _sha256(path)
        return path

    def resolve(self, rel: str) -> str:
        if os.path.isabs(rel):
            return rel
        return os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(self.config_path)), rel))

    def write_manifest(self) -> None:
        manifest = {
            "tool": "perfcast",
            "version": __version__,
            "command": self.command,
            "config": self.config_path,
            "config_sha256": self.inputs[self.config_path],
            "inputs": dict(sorted(self.inputs.items())),
            "master_seed": self.seed,
            "threads": self.threads,
            "started_at": self.started,
            "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        }
        _write_json(os.path.join(self.out_dir, "manifest.json"), manifest)


def _write_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# Config materialization
# ---------------------------------------------------------------------------

def _parse_params(kind: str, obj: dict) -> GbtParams | PolyParams | MfParams:
    cls = _PARAM_TYPES.get(kind)
    if cls is None:
        raise ConfigError(f"unknown regressor kind {kind!r}")
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {kind} params {obj}: {exc}") from exc


def _resolve_grid(cfg: dict, preset_override: str | None):
    kind = cfg.get("regressor", "gbt")
    if kind not in _PARAM_TYPES:
        raise ConfigError(f"unknown regressor kind {kind!r}")
    if preset_override is not None:
        grid = [get_preset(preset_override)]
    elif "grid" in cfg:
        grid = [_parse_params(kind, obj) for obj in cfg["grid"]]
    elif "params" in cfg:
        grid = [_parse_params(kind, cfg["params"])]
    elif "preset" in cfg:
        grid = [get_preset(cfg["preset"])]
    else:
        grid = [_PARAM_TYPES[kind]()]
    for params in grid:
        if params_kind(params) != kind:
            raise ConfigError(
                f"preset/grid entry is a {params_kind(params)} configuration but regressor is {kind!r}"
            )
    return grid


def _load_record_sources(run: _Run, value) -> list[PerformanceRecord]:
    paths = [value] if isinstance(value, str) else list(value)
    records: list[PerformanceRecord] = []
    seen_ids: set[str] = set()
    for rel in paths:
        path = run.track(run.resolve(rel))
        for rec in load_records(path):
            if rec.record_id in seen_ids:
                raise ParseError(f"duplicate record_id {rec.record_id!r} across record files")
            seen_ids.add(rec.record_id)
            records.append(rec)
    return records


def _materialize_experiment(run: _Run, cfg: dict, seed_override: int | None, preset_override: str | None):
    if "records" not in cfg:
        raise ConfigError("config is missing 'records'")
    records = _load_record_sources(run, cfg["records"])
    groups = tuple(cfg.get("feature_groups", ["language", "dataset", "proxy"]))
    split_cfg = cfg.get("split", {"kind": "random", "ratio": 0.7})
    try:
        split = SplitSpec(
            kind=split_cfg.get("kind", "random"),
            ratio=split_cfg.get("ratio"),
            held_out_language=split_cfg.get("held_out_language"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    dataset_blocks = None
    if "dataset" in groups:
        if "dataset_features" in cfg:
            dataset_blocks = load_feature_csv(run.track(run.resolve(cfg["dataset_features"])))
        elif "corpora" in cfg:
            # full pipeline: compute the dataset features from raw corpora inline
            dataset_blocks = {(tr, te): block for tr, te, block in _compute_feature_blocks(run, cfg)}
        else:
            raise ConfigError(
                "dataset feature group enabled but neither 'dataset_features' nor 'corpora'+'pairs' given"
            )
    language_table = None
    if "language" in groups:
        if "language_distances" not in cfg:
            raise ConfigError("language feature group enabled but no 'language_distances' path given")
        language_table = load_distance_table(run.track(run.resolve(cfg["language_distances"])))

    test_records = None
    if "test_records" in cfg:
        test_records = _load_record_sources(run, cfg["test_records"])

    config = ExperimentConfig(
        records=records,
        grid=_resolve_grid(cfg, preset_override),
        split=split,
        feature_groups=groups,
        proxies=cfg.get("proxies"),
        repeats=int(cfg.get("repeats", 5)),
        cv_folds=int(cfg.get("cv_folds", 10)),
        seed=int(seed_override if seed_override is not None else cfg.get("seed", 0)),
        estimated_model=cfg.get("estimated_model"),
        dataset_features=dataset_blocks,
        language_table=language_table,
        test_records=test_records,
    )
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return config


def _load_families(run: _Run, cfg: dict) -> dict[str, str]:
    if "language_families" not in cfg:
        return {}
    path = run.track(run.resolve(cfg["language_families"]))
    families: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lang", "family"]:
            raise ParseError(f"{path}: expected header lang,family")
        for row in reader:
            if len(row) == 2:
                families[row[0].strip()] = row[1].strip()
    return families


def _record_language(rec: PerformanceRecord) -> str:
    if rec.src_lang == "eng" and rec.tgt_lang != "eng":
        return rec.tgt_lang
    if rec.tgt_lang == "eng" and rec.src_lang != "eng":
        return rec.src_lang
    return rec.tgt_lang


def _scatter_for(records: Sequence[PerformanceRecord], result: ExperimentResult,
                 families: dict[str, str]) -> ScatterSeries:
    info = {}
    for rec in records:
        lang = _record_language(rec)
        info[rec.record_id] = (lang, rec.joshi_class, families.get(lang, ""))
    return scatter_from_predictions(result.predictions, info)


def _result_json(result: ExperimentResult) -> dict:
    return {
        "per_repeat_rmse": result.per_repeat_rmse,
        "mean_rmse": result.mean_rmse,
        "std_rmse": result.std_rmse,
        "chosen_params": result.chosen_params,
        "per_language_rmse": result.per_language_rmse,
        "cv_scores": result.cv_scores,
        "n_predictions": len(result.predictions),
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _compute_feature_blocks(run: _Run, cfg: dict) -> list[tuple[str, str, object]]:
    """Profile the configured corpora and compute one feature block per pair."""
    corpora = cfg.get("corpora")
    pairs = cfg.get("pairs")
    if not corpora or not pairs:
        raise ConfigError("feature computation needs 'corpora' and 'pairs'")
    side = cfg.get("side", "source")
    if side not in ("source", "target", "concat"):
        raise ConfigError(f"unknown side {side!r}")

    profiles = {}
    for entry in corpora:
        dataset_id = entry["dataset_id"]
        mode = entry.get("mode", "unicode_words")
        if "path" in entry:
            sentences = read_corpus(run.track(run.resolve(entry["path"])), mode)
        else:
            sides = []
            if side in ("source", "concat"):
                sides.append(entry["source_path"])
            if side in ("target", "concat"):
                sides.append(entry["target_path"])
            sentences = []
            for rel in sides:
                sentences.extend(read_corpus(run.track(run.resolve(rel)), mode))
        profiles[dataset_id] = profile(dataset_id, sentences)

    embeddings = {}
    if "embeddings" in cfg:
        embeddings = load_embeddings(run.track(run.resolve(cfg["embeddings"])))

    blocks = []
    for pair in pairs:
        train_id, test_id = pair["train"], pair["test"]
        for dataset_id in (train_id, test_id):
            if dataset_id not in profiles:
                raise ConfigError(f"pair references unknown corpus {dataset_id!r}")
        emb = None
        if train_id in embeddings and test_id in embeddings:
            emb = (embeddings[train_id], embeddings[test_id])
        blocks.append((train_id, test_id, dataset_features(profiles[train_id], profiles[test_id], emb)))
    return blocks


def _cmd_features(run: _Run, cfg: dict) -> None:
    blocks = _compute_feature_blocks(run, cfg)
    write_feature_csv(os.path.join(run.out_dir, "features.csv"), blocks)


def _matrix_inputs(run: _Run, cfg: dict):
    """Records plus the design matrix built from the config's feature sources."""
    if "records" not in cfg:
        raise ConfigError("config is missing 'records'")
    records = _load_record_sources(run, cfg["records"])
    groups = tuple(cfg.get("feature_groups", ["language", "dataset", "proxy"]))
    dataset_blocks = None
    if "dataset" in groups:
        if "dataset_features" not in cfg:
            raise ConfigError("dataset feature group enabled but no 'dataset_features' path given")
        dataset_blocks = load_feature_csv(run.track(run.resolve(cfg["dataset_features"])))
    language_table = None
    if "language" in groups:
        if "language_distances" not in cfg:
            raise ConfigError("language feature group enabled but no 'language_distances' path given")
        language_table = load_distance_table(run.track(run.resolve(cfg["language_distances"])))
    proxies = cfg.get("proxies")
    roster = sorted(proxies) if proxies is not None else proxy_roster(records)
    schema = build_schema(groups, roster)
    matrix = build_design_matrix(records, schema, dataset_blocks, language_table)
    return records, matrix


def _cmd_train(run: _Run, cfg: dict, seed_override: int | None, preset_override: str | None) -> None:
    records, matrix = _matrix_inputs(run, cfg)
    grid = _resolve_grid(cfg, preset_override)
    if len(grid) != 1:
        raise ConfigError("train expects exactly one hyperparameter set (preset or params)")
    params = grid[0]
    if seed_override is not None:
        params = with_seed(params, seed_override)
    languages = ([r.src_lang for r in records], [r.tgt_lang for r in records])
    model = fit_model(params, matrix, languages if params_kind(params) == "mf" else None)
    save_model(model, os.path.join(run.out_dir, "model.json"))


def _cmd_predict(run: _Run, cfg: dict) -> None:
    if "model" not in cfg:
        raise ConfigError("predict config needs 'model'")
    model = load_model(run.track(run.resolve(cfg["model"])))
    records, matrix = _matrix_inputs(run, cfg)
    languages = ([r.src_lang for r in records], [r.tgt_lang for r in records])
    preds = predict_model(model, matrix, languages if _model_kind(model) == "mf" else None)
    rows = [(rid, repr(float(t)), repr(float(p)))
            for rid, t, p in zip(matrix.row_ids, matrix.targets, preds)]
    _write_csv(os.path.join(run.out_dir, "predictions.csv"), ("record_id", "true", "pred"), rows)


def _model_kind(model) -> str:
    from .regressors import GbtModel as G, PolyModel as P

    return "gbt" if isinstance(model, G) else ("poly" if isinstance(model, P) else "mf")


def _cmd_experiment(run: _Run, cfg: dict, seed_override: int | None, preset_override: str | None) -> None:
    config = _materialize_experiment(run, cfg, seed_override, preset_override)
    families = _load_families(run, cfg)
    result = run_experiment(config)
    _write_json(os.path.join(run.out_dir, "results.json"), _result_json(result))
    rows = [(rid, repr(t), repr(p)) for rid, t, p in result.predictions]
    _write_csv(os.path.join(run.out_dir, "predictions.csv"), ("record_id", "true", "pred"), rows)
    all_records = config.records + (config.test_records or [])
    scatter = _scatter_for(all_records, result, families)
    label = cfg.get("label", f"{cfg.get('regressor', 'gbt')}:{config.split.kind}")
    emit_report(
        [(label, result)],
        run.out_dir,
        scatter=scatter,
        fmt=cfg.get("report_format", "markdown"),
        lowess_frac=float(cfg.get("lowess_frac", 0.5)),
    )


def _cmd_ablate(run: _Run, cfg: dict, seed_override: int | None, preset_override: str | None) -> None:
    config = _materialize_experiment(run, cfg, seed_override, preset_override)
    group_sets = cfg.get("group_sets")
    results = run_ablation(config, group_sets)
    payload = {"+".join(subset): _result_json(res) for subset, res in results.items()}
    _write_json(os.path.join(run.out_dir, "results.json"), payload)
    emit_report(
        [("+".join(subset), res) for subset, res in results.items()],
        run.out_dir,
        fmt=cfg.get("report_format", "markdown"),
    )


def _cmd_importance(run: _Run, cfg: dict) -> None:
    if "model" not in cfg:
        raise ConfigError("importance config needs 'model'")
    model = load_model(run.track(run.resolve(cfg["model"])))
    if not isinstance(model, GbtModel):
        raise ConfigError("feature importance is only defined for gbt models")
    scores = gbt_importance(model)
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    _write_csv(
        os.path.join(run.out_dir, "importance.csv"),
        ("feature", "importance"),
        [(name, repr(value)) for name, value in ordered],
    )


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perfcast", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"perfcast {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("features", "train", "predict", "experiment", "ablate", "importance"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--preset", default=None, help="named hyperparameter preset override")
        p.add_argument("--threads", type=int, default=0,
                       help="worker hint, 0 = auto; never affects results")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads < 0:
        print(json.dumps({"error": "ConfigError", "message": "--threads must be >= 0"}), file=sys.stderr)
        return 2
    try:
        cfg = _read_config(args.config)
        run = _Run(args.command, args.config, args.out, args.seed, args.threads)
        if args.command == "features":
            _cmd_features(run, cfg)
        elif args.command == "train":
            _cmd_train(run, cfg, args.seed, args.preset)
        elif args.command == "predict":
            _cmd_predict(run, cfg)
        elif args.command == "experiment":
            _cmd_experiment(run, cfg, args.seed, args.preset)
        elif args.command == "ablate":
            _cmd_ablate(run, cfg, args.seed, args.preset)
        elif args.command == "importance":
            _cmd_importance(run, cfg)
        run.write_manifest()
    except (PerfcastError, OSError, KeyError, ValueError) as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(report), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
