"""Subcommand CLI.

Exit codes: 0 success, 2 usage or parameter problems, 3 data, schema or
model-file problems, 4 training failures, 5 a requested DI gate was not met.
Each command prints one machine-parseable summary line to stdout; anything
meant for humans goes to stderr.  Output files are written to a temp file
first and renamed, so an aborted run never leaves a partial artifact.
"""

from __future__ import annotations

import argparse
import os
import sys
from configparser import ConfigParser, Error as ConfigParserError
from pathlib import Path
from typing import Optional, Tuple

from .bench.prepare import DATASET_NAMES, prepare_dataset
from .bench.report import (
    DEFAULT_DI_TARGET,
    accuracy_drop_report,
    emit_curves,
    load_sweep_csv,
    render_drop_report,
    sweep_curves_svg,
)
from .bench.sweep import HyperGrid, SweepConfig, run_sweep
from .booster import BoosterParams, load_model, predict_proba, predict_raw, save_model, train
from .data import load_csv, load_schema
from .errors import (
    ContractError,
    DataError,
    FairboostError,
    ModelError,
    ParameterError,
    SchemaError,
    TrainingError,
)
from .ioutil import atomic_write_text
from .metrics import CSV_HEADER, evaluate
from .objective import FAIR_LOGISTIC, OBJECTIVE_KINDS, ObjectiveConfig
from .tree import TreeParams

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRAINING = 4
EXIT_GATE = 5

THREADS_ENV = "FAIRBOOST_THREADS"


def _add_data_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, help="CSV data file")
    parser.add_argument("--schema", required=True, help="column schema INI")


def _add_tree_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-depth", type=int, default=4)
    parser.add_argument("--lambda", dest="reg_lambda", type=float, default=1.0,
                        help="l2 penalty on leaf weights")
    parser.add_argument("--gamma", type=float, default=0.0,
                        help="per-leaf complexity penalty")
    parser.add_argument("--min-child-weight", type=float, default=1e-3)
    parser.add_argument("--min-split-gain", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairboost",
        description="Gradient boosted trees with a disparate-impact regularizer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model and save it")
    _add_data_args(p_train)
    p_train.add_argument("--out", required=True, help="model file to write")
    p_train.add_argument("--mu", type=float, default=0.0,
                         help="decorrelation strength in [0, 1]")
    p_train.add_argument("--objective", choices=list(OBJECTIVE_KINDS), default=FAIR_LOGISTIC)
    p_train.add_argument("--rounds", type=int, default=100)
    p_train.add_argument("--eta", type=float, default=0.1, help="learning rate in (0, 1]")
    p_train.add_argument("--base-score", type=float, default=0.0,
                         help="initial raw score for every row")
    _add_tree_args(p_train)
    p_train.add_argument("--log-out", default=None, help="optional per-round training log CSV")
    p_train.set_defaults(func=cmd_train)

    p_predict = sub.add_parser("predict", help="score rows with a saved model")
    p_predict.add_argument("--model", required=True)
    _add_data_args(p_predict)
    p_predict.add_argument("--out", required=True, help="CSV of per-row scores")
    p_predict.add_argument("--raw", action="store_true",
                           help="write raw additive scores instead of probabilities")
    p_predict.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="accuracy and disparate impact on a dataset")
    p_eval.add_argument("--model", required=True)
    _add_data_args(p_eval)
    p_eval.add_argument("--threshold", type=float, default=0.5)
    p_eval.add_argument("--out", default=None, help="optional CSV report file")
    p_eval.add_argument("--require-di", type=float, default=None,
                        help="exit 5 unless DI is defined and at least this value")
    p_eval.set_defaults(func=cmd_evaluate)

    p_prepare = sub.add_parser("prepare", help="clean a raw benchmark download")
    p_prepare.add_argument("--name", required=True, choices=list(DATASET_NAMES))
    p_prepare.add_argument("--raw-dir", required=True)
    p_prepare.add_argument("--out-dir", required=True)
    p_prepare.set_defaults(func=cmd_prepare)

    p_sweep = sub.add_parser("sweep", help="train a model per mu and report the trade-off")
    _add_data_args(p_sweep)
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.add_argument("--config", default=None, help="optional sweep INI")
    p_sweep.add_argument("--di-target", type=float, default=DEFAULT_DI_TARGET)
    p_sweep.add_argument("--workers", type=int, default=None,
                         help=f"parallel training processes (default ${THREADS_ENV} or 1)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="rebuild curves and drop report from sweep.csv")
    p_report.add_argument("--sweep", required=True, help="sweep.csv produced by the sweep command")
    p_report.add_argument("--out-dir", required=True)
    p_report.add_argument("--di-target", type=float, default=DEFAULT_DI_TARGET)
    p_report.set_defaults(func=cmd_report)

    return parser


def _load_dataset(args):
    schema = load_schema(args.schema)
    return load_csv(args.data, schema)


def _check_model_features(model, data) -> None:
    if tuple(data.feature_names) != tuple(model.feature_names):
        raise DataError(
            "dataset feature columns do not match the model "
            f"({len(data.feature_names)} vs {len(model.feature_names)}); "
            "was the data prepared with the same schema and categories?"
        )


def cmd_train(args) -> int:
    data = _load_dataset(args)
    params = BoosterParams(
        num_rounds=args.rounds,
        learning_rate=args.eta,
        base_score_raw=args.base_score,
        objective=ObjectiveConfig(mu=args.mu, kind=args.objective),
        tree=TreeParams(
            max_depth=args.max_depth,
            reg_lambda=args.reg_lambda,
            gamma=args.gamma,
            min_child_weight=args.min_child_weight,
            min_split_gain=args.min_split_gain,
        ),
    )
    model, log = train(data, params)
    save_model(model, args.out)
    if args.log_out:
        atomic_write_text(args.log_out, log.to_csv())
    last = log.records[-1]
    di = "undefined" if last.di is None else repr(last.di)
    print(
        f"trained rounds={params.num_rounds} mu={params.objective.mu!r} "
        f"train_accuracy={last.accuracy!r} train_di={di} model={args.out}"
    )
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = _load_dataset(args)
    _check_model_features(model, data)
    if args.raw:
        header, values = "raw_score", predict_raw(model, data.features)
    else:
        header, values = "proba", predict_proba(model, data.features)
    lines = [header] + [repr(float(v)) for v in values]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"predicted rows={len(values)} column={header} out={args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    data = _load_dataset(args)
    _check_model_features(model, data)
    report = evaluate(model, data, args.threshold)
    if args.out:
        atomic_write_text(args.out, CSV_HEADER + "\n" + report.as_csv_row() + "\n")
    print(report.as_csv_row())
    print(report.as_kv_record(), file=sys.stderr)
    if args.require_di is not None:
        target = float(args.require_di)
        di = report.disparate_impact
        if di is None or di < target:
            shown = "undefined" if di is None else repr(di)
            print(f"di gate failed: di={shown} required={target!r}", file=sys.stderr)
            return EXIT_GATE
    return EXIT_OK


def cmd_prepare(args) -> int:
    paths = prepare_dataset(args.name, args.raw_dir, args.out_dir)
    data = load_csv(paths.csv_path, load_schema(paths.schema_path))
    print(
        f"prepared {args.name} rows={data.n_rows} features={data.n_features} "
        f"csv={paths.csv_path} schema={paths.schema_path}"
    )
    return EXIT_OK


def _parse_float_list(value: str, key: str) -> Tuple[float, ...]:
    try:
        items = tuple(float(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ParameterError(f"sweep config: {key} must be a comma-separated float list") from None
    if not items:
        raise ParameterError(f"sweep config: {key} is empty")
    return items


def _parse_int_list(value: str, key: str) -> Tuple[int, ...]:
    try:
        items = tuple(int(v.strip()) for v in value.split(",") if v.strip())
    except ValueError:
        raise ParameterError(f"sweep config: {key} must be a comma-separated integer list") from None
    if not items:
        raise ParameterError(f"sweep config: {key} is empty")
    return items


_SWEEP_KEYS = {
    "mu_grid", "test_fraction", "seed", "threshold",
    "rounds", "eta", "base_score",
    "max_depth", "lambda", "gamma", "min_child_weight", "min_split_gain",
    "tune_max_depth", "tune_rounds", "tune_eta",
}


def load_sweep_config(path) -> SweepConfig:
    """Read a [sweep] INI section into a SweepConfig."""
    parser = ConfigParser(interpolation=None)
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string(text, source=str(path))
    except ConfigParserError as exc:
        raise ParameterError(f"cannot parse sweep config {path}: {exc}") from exc
    if not parser.has_section("sweep"):
        raise ParameterError(f"sweep config {path} has no [sweep] section")
    options = dict(parser.items("sweep"))
    unknown = sorted(set(options) - _SWEEP_KEYS)
    if unknown:
        raise ParameterError(f"sweep config: unknown keys {unknown}")

    def floatval(key: str, fallback: float) -> float:
        return float(options[key]) if key in options else fallback

    def intval(key: str, fallback: int) -> int:
        return int(options[key]) if key in options else fallback

    tree = TreeParams(
        max_depth=intval("max_depth", 4),
        reg_lambda=floatval("lambda", 1.0),
        gamma=floatval("gamma", 0.0),
        min_child_weight=floatval("min_child_weight", 1e-3),
        min_split_gain=floatval("min_split_gain", 0.0),
    )
    base = BoosterParams(
        num_rounds=intval("rounds", 100),
        learning_rate=floatval("eta", 0.1),
        base_score_raw=floatval("base_score", 0.0),
        objective=ObjectiveConfig(mu=0.0, kind=FAIR_LOGISTIC),
        tree=tree,
    )
    tune: Optional[HyperGrid] = None
    if any(k in options for k in ("tune_max_depth", "tune_rounds", "tune_eta")):
        tune = HyperGrid(
            max_depth=(
                _parse_int_list(options["tune_max_depth"], "tune_max_depth")
                if "tune_max_depth" in options else (tree.max_depth,)
            ),
            num_rounds=(
                _parse_int_list(options["tune_rounds"], "tune_rounds")
                if "tune_rounds" in options else (base.num_rounds,)
            ),
            learning_rate=(
                _parse_float_list(options["tune_eta"], "tune_eta")
                if "tune_eta" in options else (base.learning_rate,)
            ),
        )
    mu_grid = (
        _parse_float_list(options["mu_grid"], "mu_grid")
        if "mu_grid" in options
        else SweepConfig.__dataclass_fields__["mu_grid"].default
    )
    return SweepConfig(
        mu_grid=mu_grid,
        base=base,
        tune=tune,
        test_fraction=floatval("test_fraction", 0.3),
        seed=intval("seed", 42),
        threshold=floatval("threshold", 0.5),
    )


def _resolve_workers(args) -> int:
    if args.workers is not None:
        workers = args.workers
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    return workers


def cmd_sweep(args) -> int:
    data = _load_dataset(args)
    config = load_sweep_config(args.config) if args.config else SweepConfig()
    workers = _resolve_workers(args)
    result = run_sweep(data, config, workers=workers)
    out_dir = Path(args.out_dir)
    emit_curves(result, out_dir, args.di_target)
    report = accuracy_drop_report(result, args.di_target)
    atomic_write_text(out_dir / "drop_report.txt", render_drop_report(report))
    drop = "unachieved" if report.accuracy_drop is None else repr(report.accuracy_drop)
    print(
        f"sweep points={len(result.rows)} vanilla_accuracy={report.vanilla_accuracy!r} "
        f"accuracy_drop={drop} out={out_dir}"
    )
    return EXIT_OK


def cmd_report(args) -> int:
    result = load_sweep_csv(args.sweep)
    report = accuracy_drop_report(result, args.di_target)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "curves.svg", sweep_curves_svg(result, args.di_target))
    atomic_write_text(out_dir / "drop_report.txt", render_drop_report(report))
    drop = "unachieved" if report.accuracy_drop is None else repr(report.accuracy_drop)
    print(
        f"report points={len(result.rows)} vanilla_accuracy={report.vanilla_accuracy!r} "
        f"accuracy_drop={drop} out={out_dir}"
    )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SchemaError, ModelError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except FairboostError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
