#!/usr/bin/env python3
"""Prepare the public benchmarks and sweep the decorrelation strength.

For each requested dataset this script
  1. cleans the raw download under <bench-dir>/raw/ into
     <bench-dir>/prepared/<name>.csv (+ schema),
  2. trains one model per mu on the canonical 0.05 grid (tuning the vanilla
     hyperparameters first) and
  3. writes sweep.csv, curves.svg and drop_report.txt under
     <bench-dir>/results/<name>/.

Raw files are never downloaded automatically; missing ones are reported with
their source URL.  Finished sweeps are reused on rerun unless --force is
given, and the acceptance test suite picks them up from the same location.

With --synthetic the whole pipeline runs on a generated dataset instead, so
the output format can be inspected without any downloads.
"""

import argparse
import os
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fairboost import FairboostError, load_csv, load_schema  # noqa: E402
from fairboost.bench import (  # noqa: E402
    DATASET_NAMES,
    accuracy_drop_report,
    benchmark_sweep_config,
    di_trend,
    emit_curves,
    load_sweep_csv,
    prepare_dataset,
    render_drop_report,
    run_sweep,
    synthetic_biased,
)
from fairboost.ioutil import atomic_write_text  # noqa: E402


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bench-dir", default="benchmarks",
                        help="root for raw/, prepared/ and results/ (default benchmarks)")
    parser.add_argument("--datasets", nargs="+", choices=list(DATASET_NAMES),
                        default=list(DATASET_NAMES))
    parser.add_argument("--synthetic", action="store_true",
                        help="run the pipeline on generated data instead of downloads")
    parser.add_argument("--di-target", type=float, default=0.8)
    parser.add_argument("--workers", type=int,
                        default=int(os.environ.get("FAIRBOOST_THREADS", "1")))
    parser.add_argument("--force", action="store_true",
                        help="re-run sweeps even when results already exist")
    return parser.parse_args(argv)


def prepared_dataset(name, bench_dir):
    prepared_csv = bench_dir / "prepared" / f"{name}.csv"
    prepared_schema = bench_dir / "prepared" / f"{name}.schema.ini"
    if not (prepared_csv.exists() and prepared_schema.exists()):
        paths = prepare_dataset(name, bench_dir / "raw", bench_dir / "prepared")
        prepared_csv, prepared_schema = paths.csv_path, paths.schema_path
        print(f"  prepared {prepared_csv}")
    return load_csv(prepared_csv, load_schema(prepared_schema))


def sweep_one(name, data, bench_dir, di_target, workers, force):
    out_dir = bench_dir / "results" / name
    csv_path = out_dir / "sweep.csv"
    if csv_path.exists() and not force:
        print(f"  reusing {csv_path} (use --force to re-run)")
        result = load_sweep_csv(csv_path)
    else:
        started = time.perf_counter()
        result = run_sweep(data, benchmark_sweep_config(), workers=workers)
        print(f"  swept {len(result.rows)} mu points in "
              f"{time.perf_counter() - started:.0f}s")
    emit_curves(result, out_dir, di_target)
    report = accuracy_drop_report(result, di_target)
    atomic_write_text(out_dir / "drop_report.txt", render_drop_report(report))
    print(f"  kendall tau(mu, test DI) = {di_trend(result):.3f}")
    for line in render_drop_report(report).strip().splitlines():
        print(f"  {line}")
    return report


def main(argv=None) -> int:
    args = parse_args(argv)
    bench_dir = Path(args.bench_dir)
    failures = 0

    if args.synthetic:
        print("synthetic:")
        data = synthetic_biased(n_rows=2000, n_features=8, seed=0)
        sweep_one("synthetic", data, bench_dir, args.di_target, args.workers,
                  args.force)
        return 0

    for name in args.datasets:
        print(f"{name}:")
        try:
            data = prepared_dataset(name, bench_dir)
            sweep_one(name, data, bench_dir, args.di_target, args.workers,
                      args.force)
        except (FairboostError, OSError) as exc:
            failures += 1
            print(f"  skipped: {exc}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
