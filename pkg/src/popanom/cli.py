"""Command-line pipeline driver.

Subcommands: train, detect, rank, novelty-matrix, emulate-exfil, eval.
Each takes --config pointing at a JSON file whose keys mirror RunConfig;
the flags --seed, --latent-dim, --norm, --significance, and
--contamination override config-file values.  Outputs land under the
config's ``out`` directory together with a run_config.json recording the
resolved configuration and its digest; nothing written contains a
timestamp, so identical inputs produce byte-identical artifacts.

Per-stage randomness derives from the master seed as
numpy.random.default_rng([seed, stage_id]) with a fixed stage id per
subcommand, so changing one stage's draws never perturbs another's.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .aae import encode, load_bundle, save_bundle, train_aae
from .data import featurize, infer_schema, read_records, write_records
from .detect import detect, novelty_matrix, write_novelty_csv
from .errors import ConfigError, DataError, NumericalError
from .metrics import pr_curve, roc, write_curve_csv, write_summary
from .nn import TrainConfig
from .rank import rank, write_ranking_csv
from .serialize import canonical_digest, read_json, write_json
from .synth import DEFAULT_PROFILE, ExfilConfig, emulate_exfiltration, generate_domains

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

STAGE_IDS = {
    "train": 1,
    "detect": 2,
    "rank": 3,
    "novelty-matrix": 4,
    "emulate-exfil": 5,
    "eval": 6,
}

_TRAIN_EPOCHS_DEFAULT = 100
_RANK_EPOCHS_DEFAULT = 30


@dataclass
class RunConfig:
    """Resolved configuration for one subcommand run.

    The JSON config file uses exactly these keys; unknown keys are
    rejected so typos fail loudly instead of silently using defaults.
    ``epochs`` left unset picks the stage default (100 for train, 30 for
    rank fine-tuning).
    """

    out: str = "popanom-out"
    input: Optional[str] = None
    model: Optional[str] = None
    models: list = field(default_factory=list)
    inputs: list = field(default_factory=list)
    fields: dict = field(default_factory=dict)
    delimiter: str = ","
    latent_dim: int = 2
    recon_loss: str = "mse"
    norm: str = "linf"
    significance: float = 0.01
    contamination: float = 0.01
    seed: int = 0
    epochs: Optional[int] = None
    learning_rate: float = 1e-3
    batch_size: int = 128
    optimizer: str = "adam"
    cold_start: bool = False
    display_fields: list = field(default_factory=list)
    generate: Optional[dict] = None
    ranking: Optional[str] = None
    labels: Optional[str] = None
    score_field: str = "beta"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        return canonical_digest(self.to_dict())


def load_run_config(path, overrides: dict) -> RunConfig:
    """Read a config file and apply command-line overrides on top."""
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise ConfigError(f"{path} must contain a JSON object at the top level")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(payload) - known)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {unknown}")
    payload.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**payload)
    except TypeError as exc:
        raise ConfigError(f"bad config in {path}: {exc}") from exc


def _stage_rng(config: RunConfig, command: str) -> np.random.Generator:
    return np.random.default_rng([config.seed, STAGE_IDS[command]])


def _train_config(config: RunConfig, default_epochs: int) -> TrainConfig:
    return TrainConfig(
        seed=config.seed,
        learning_rate=config.learning_rate,
        batch_size=config.batch_size,
        epochs=config.epochs if config.epochs is not None else default_epochs,
        optimizer=config.optimizer,
    )


def _prepare_out(config: RunConfig, command: str) -> str:
    out = config.out
    os.makedirs(out, exist_ok=True)
    write_json(
        {"command": command, "config": config.to_dict(), "digest": config.digest()},
        os.path.join(out, "run_config.json"),
    )
    return out


def _require(config: RunConfig, command: str, *names: str) -> None:
    missing = [n for n in names if not getattr(config, n)]
    if missing:
        raise ConfigError(f"{command} requires config keys: {missing}")


def cmd_train(config: RunConfig) -> int:
    """Infer a schema, featurize, train the autoencoder, persist the bundle."""
    _require(config, "train", "input", "fields")
    records = read_records(config.input, config.delimiter)
    schema = infer_schema(records, config.fields)
    train_set = featurize(schema, records)
    model, log = train_aae(
        train_set,
        latent_dim=config.latent_dim,
        recon_loss=config.recon_loss,
        config=_train_config(config, _TRAIN_EPOCHS_DEFAULT),
        rng=_stage_rng(config, "train"),
    )
    out = _prepare_out(config, "train")
    save_bundle(model, os.path.join(out, "model.json"))
    log.save(os.path.join(out, "training_log.json"))
    print(f"trained on {train_set.n} records ({train_set.width} features -> "
          f"{config.latent_dim} latent); wrote {out}/model.json")
    for warning in log.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_OK


def cmd_detect(config: RunConfig) -> int:
    """Project an evaluation set and test it against the latent prior."""
    _require(config, "detect", "input", "model")
    model = load_bundle(config.model)
    records = read_records(config.input, config.delimiter)
    eval_set = featurize(model.feature_schema, records)
    report = detect(encode(model, eval_set),
                    norm_kind=config.norm, significance=config.significance)
    out = _prepare_out(config, "detect")
    payload = {"config_digest": config.digest()}
    payload.update(report.to_dict())
    write_json(payload, os.path.join(out, "detection_report.json"))
    state = "population anomaly detected" if report.verdict else "no anomaly detected"
    print(f"{state}: min p = {min(report.per_dim_pvalue):.6g} vs corrected "
          f"alpha = {report.corrected_alpha:.6g} (n = {report.n})")
    return EXIT_OK


def cmd_rank(config: RunConfig) -> int:
    """Fine-tune the discriminator on the evaluation projection and rank."""
    _require(config, "rank", "input", "model")
    model = load_bundle(config.model)
    records = read_records(config.input, config.delimiter)
    eval_set = featurize(model.feature_schema, records)
    run = rank(
        model,
        eval_set,
        config=_train_config(config, _RANK_EPOCHS_DEFAULT),
        rng=_stage_rng(config, "rank"),
        cold_start=config.cold_start,
    )
    out = _prepare_out(config, "rank")
    write_ranking_csv(run, os.path.join(out, "ranking.csv"),
                      display_fields=config.display_fields)
    write_json(
        {
            "config_digest": config.digest(),
            "model_id": run.model_id,
            "n": eval_set.n,
            "accuracy": run.accuracy,
            "finetune_config": run.config.to_dict(),
        },
        os.path.join(out, "ranking_summary.json"),
    )
    print(f"ranked {eval_set.n} samples; held-out discriminator accuracy "
          f"{run.accuracy:.3f}; wrote {out}/ranking.csv")
    return EXIT_OK


def cmd_novelty_matrix(config: RunConfig) -> int:
    """Score every input dataset under every model.

    Each dataset is featurized under each model's own schema (bucket
    models freeze their own statistics), so the matrix is assembled one
    model row at a time.
    """
    _require(config, "novelty-matrix", "models", "inputs")
    models = [load_bundle(path) for path in config.models]
    record_sets = [read_records(path, config.delimiter) for path in config.inputs]
    col_labels = [os.path.splitext(os.path.basename(path))[0] for path in config.inputs]
    row_labels = [os.path.splitext(os.path.basename(path))[0] for path in config.models]
    rows = []
    for model in models:
        datasets = []
        for records, label in zip(record_sets, col_labels):
            try:
                datasets.append(featurize(model.feature_schema, records,
                                          bucket_key=label))
            except DataError:
                datasets.append(None)
        row = np.full(len(datasets), np.nan)
        usable = [(j, d) for j, d in enumerate(datasets) if d is not None]
        if usable:
            scores = novelty_matrix([model], [d for _, d in usable],
                                    norm_kind=config.norm)[0]
            for (j, _), value in zip(usable, scores):
                row[j] = value
        rows.append(row)
    matrix = np.vstack(rows)
    out = _prepare_out(config, "novelty-matrix")
    write_novelty_csv(matrix, row_labels, col_labels,
                      os.path.join(out, "novelty_matrix.csv"))
    print(f"wrote {len(row_labels)}x{len(col_labels)} novelty matrix to "
          f"{out}/novelty_matrix.csv")
    return EXIT_OK


def cmd_emulate_exfil(config: RunConfig) -> int:
    """Contaminate a domain list (or a generated one) with exfiltration noise."""
    rng = _stage_rng(config, "emulate-exfil")
    if config.generate is not None:
        count = config.generate.get("count") if isinstance(config.generate, dict) else None
        if not isinstance(count, int) or count < 1:
            raise ConfigError('generate needs a positive integer "count"')
        domains = generate_domains(count, rng, DEFAULT_PROFILE)
    else:
        _require(config, "emulate-exfil", "input")
        records = read_records(config.input, config.delimiter)
        if not records or "domain" not in records[0]:
            raise DataError(f'{config.input} must have a "domain" column')
        domains = [r["domain"] for r in records]
    result = emulate_exfiltration(
        domains, ExfilConfig(contamination=config.contamination), rng)
    out = _prepare_out(config, "emulate-exfil")
    write_records(
        [{"domain": d} for d in result.domains],
        os.path.join(out, "domains.csv"), fieldnames=["domain"])
    write_records(
        [{"index": i, "label": int(result.labels[i])} for i in range(len(result.domains))],
        os.path.join(out, "labels.csv"), fieldnames=["index", "label"])
    write_json(
        {
            "config_digest": config.digest(),
            "n": len(result.domains),
            "contaminated": int(result.labels.sum()),
            "skipped": result.skipped,
        },
        os.path.join(out, "exfil_summary.json"),
    )
    print(f"contaminated {int(result.labels.sum())} of {len(result.domains)} "
          f"domains ({result.skipped} skipped); wrote {out}/domains.csv")
    return EXIT_OK


def cmd_eval(config: RunConfig) -> int:
    """Score a ranking against ground-truth labels: ROC, PR, AUC."""
    _require(config, "eval", "ranking", "labels")
    ranking_rows = read_records(config.ranking, config.delimiter)
    label_rows = read_records(config.labels, config.delimiter)
    if not ranking_rows:
        raise DataError(f"{config.ranking} holds zero ranked rows")
    score_field = config.score_field
    if score_field not in ranking_rows[0]:
        raise DataError(f"{config.ranking} has no column {score_field!r}")
    labels_by_index = {}
    for row in label_rows:
        try:
            labels_by_index[int(row["index"])] = bool(int(row["label"]))
        except (KeyError, ValueError) as exc:
            raise DataError(f"{config.labels} needs integer index,label columns: {exc}")
    scores, labels = [], []
    for row in ranking_rows:
        try:
            index = int(row["index"])
            scores.append(float(row[score_field]))
        except (KeyError, ValueError) as exc:
            raise DataError(f"{config.ranking} has a malformed row: {exc}")
        if index not in labels_by_index:
            raise DataError(f"{config.labels} is missing a label for index {index}")
        labels.append(labels_by_index[index])
    roc_points, auc = roc(scores, labels)
    pr_points = pr_curve(scores, labels)
    out = _prepare_out(config, "eval")
    write_curve_csv(roc_points, os.path.join(out, "roc.csv"))
    write_curve_csv(pr_points, os.path.join(out, "pr.csv"))
    write_summary(
        os.path.join(out, "summary.json"),
        auc=auc, n=len(scores), positives=int(sum(labels)),
        config_digest=config.digest(),
    )
    print(f"auc = {auc:.4f} over {len(scores)} samples "
          f"({int(sum(labels))} positive); wrote {out}/summary.json")
    return EXIT_OK


_COMMANDS = {
    "train": cmd_train,
    "detect": cmd_detect,
    "rank": cmd_rank,
    "novelty-matrix": cmd_novelty_matrix,
    "emulate-exfil": cmd_emulate_exfil,
    "eval": cmd_eval,
}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="popanom",
                     description="Population anomaly detection pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, handler in _COMMANDS.items():
        p = sub.add_parser(name, help=handler.__doc__.splitlines()[0])
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--latent-dim", dest="latent_dim", type=int, default=None,
                       help="override the latent dimension")
        p.add_argument("--norm", choices=("l1", "l2", "linf"), default=None,
                       help="override the combining norm")
        p.add_argument("--significance", type=float, default=None,
                       help="override the detection significance level")
        p.add_argument("--contamination", type=float, default=None,
                       help="override the exfiltration contamination fraction")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        overrides = {
            "seed": args.seed,
            "latent_dim": args.latent_dim,
            "norm": args.norm,
            "significance": args.significance,
            "contamination": args.contamination,
        }
        config = load_run_config(args.config, overrides)
        return _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
