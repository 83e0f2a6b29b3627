"""Train one model per mu value and collect the accuracy/DI trade-off curve."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

from scipy.stats import kendalltau

from ..booster import BoosterParams, train
from ..data import Dataset, require_both_groups, train_test_split
from ..errors import FairboostError, ParameterError, TrainingError
from ..metrics import evaluate
from ..tree import TreeParams
from ..objective import FAIR_LOGISTIC, VANILLA_LOGISTIC, ObjectiveConfig

DEFAULT_MU_GRID = tuple(i / 20 for i in range(21))


@dataclass(frozen=True)
class HyperGrid:
    """Cartesian grid searched by tune_vanilla, in declared order."""

    max_depth: Tuple[int, ...] = (3,)
    num_rounds: Tuple[int, ...] = (100,)
    learning_rate: Tuple[float, ...] = (0.1,)

    def __post_init__(self):
        for name in ("max_depth", "num_rounds", "learning_rate"):
            values = tuple(getattr(self, name))
            if not values:
                raise ParameterError(f"hyper grid axis {name} is empty")
            object.__setattr__(self, name, values)

    def combos(self):
        return itertools.product(self.max_depth, self.num_rounds, self.learning_rate)


@dataclass(frozen=True)
class SweepConfig:
    mu_grid: Tuple[float, ...] = DEFAULT_MU_GRID
    base: BoosterParams = field(default_factory=BoosterParams)
    tune: Optional[HyperGrid] = None
    test_fraction: float = 0.3
    seed: int = 42
    threshold: float = 0.5

    def __post_init__(self):
        grid = tuple(float(m) for m in self.mu_grid)
        if not grid:
            raise ParameterError("mu_grid is empty")
        if any(not 0.0 <= m <= 1.0 for m in grid):
            raise ParameterError(f"mu_grid values must lie in [0, 1], got {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ParameterError("mu_grid must be strictly increasing")
        object.__setattr__(self, "mu_grid", grid)
        if not 0.0 < float(self.test_fraction) < 1.0:
            raise ParameterError(
                f"test_fraction must lie strictly in (0, 1), got {self.test_fraction!r}"
            )
        if not 0.0 < float(self.threshold) < 1.0:
            raise ParameterError(f"threshold must lie strictly in (0, 1), got {self.threshold!r}")
        if grid[-1] == 1.0 and self.base.tree.reg_lambda <= 0.0:
            raise ParameterError("mu_grid reaches 1.0, which requires a positive reg_lambda")


@dataclass(frozen=True)
class SweepRow:
    """Metrics for one trained mu point (hyperparams absent on CSV reload)."""

    mu: float
    train_accuracy: float
    test_accuracy: float
    train_di: Optional[float]
    test_di: Optional[float]
    max_depth: Optional[int] = None
    num_rounds: Optional[int] = None
    learning_rate: Optional[float] = None


@dataclass(frozen=True)
class SweepResult:
    rows: Tuple[SweepRow, ...]

    def vanilla_row(self) -> Optional[SweepRow]:
        for row in self.rows:
            if row.mu == 0.0:
                return row
        return None


def tune_vanilla(
    train_data: Dataset,
    valid_data: Dataset,
    grid: HyperGrid,
    base: BoosterParams,
    threshold: float = 0.5,
) -> BoosterParams:
    """Pick the unconstrained accuracy maximizer over the grid.

    Strictly-better wins, so ties keep the earliest grid combination; repeated
    calls return the identical choice.
    """
    best_params = None
    best_accuracy = -1.0
    for depth, rounds, lr in grid.combos():
        params = replace(
            base,
            num_rounds=rounds,
            learning_rate=lr,
            objective=ObjectiveConfig(mu=0.0, kind=VANILLA_LOGISTIC),
            tree=replace(base.tree, max_depth=depth),
        )
        model, _ = train(train_data, params)
        acc = evaluate(model, valid_data, threshold).accuracy
        if acc > best_accuracy:
            best_accuracy = acc
            best_params = params
    return best_params


def _train_point(job) -> SweepRow:
    train_data, test_data, params, mu, threshold = job
    point = replace(params, objective=ObjectiveConfig(mu=mu, kind=FAIR_LOGISTIC))
    model, _ = train(train_data, point)
    on_train = evaluate(model, train_data, threshold)
    on_test = evaluate(model, test_data, threshold)
    return SweepRow(
        mu=mu,
        train_accuracy=on_train.accuracy,
        test_accuracy=on_test.accuracy,
        train_di=on_train.disparate_impact,
        test_di=on_test.disparate_impact,
        max_depth=point.tree.max_depth,
        num_rounds=point.num_rounds,
        learning_rate=point.learning_rate,
    )


def run_sweep(data: Dataset, config: SweepConfig, workers: int = 1) -> SweepResult:
    """Split once, optionally tune at mu = 0, then train the whole mu grid.

    Every grid point shares the same split and hyperparameters, so the rows
    differ only in the decorrelation strength.  Failures name the mu that
    caused them.
    """
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    train_data, test_data = train_test_split(data, config.test_fraction, config.seed)
    require_both_groups(train_data, "sweep train split")
    require_both_groups(test_data, "sweep test split")

    params = config.base
    if config.tune is not None:
        params = tune_vanilla(train_data, test_data, config.tune, params, config.threshold)

    jobs = [(train_data, test_data, params, mu, config.threshold) for mu in config.mu_grid]
    rows = []
    if workers == 1:
        for job in jobs:
            try:
                rows.append(_train_point(job))
            except FairboostError as exc:
                raise TrainingError(f"sweep failed at mu={job[3]!r}: {exc}") from exc
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(job[3], pool.submit(_train_point, job)) for job in jobs]
            for mu, future in futures:
                try:
                    rows.append(future.result())
                except FairboostError as exc:
                    raise TrainingError(f"sweep failed at mu={mu!r}: {exc}") from exc
    return SweepResult(rows=tuple(rows))


def benchmark_sweep_config() -> SweepConfig:
    """Full 0.05 mu grid behind a small vanilla hyperparameter search.

    This is the configuration the benchmark reproduction uses; keeping it in
    one place means cached sweep CSVs stay comparable across entry points.
    """
    return SweepConfig(
        mu_grid=DEFAULT_MU_GRID,
        base=BoosterParams(
            num_rounds=100,
            learning_rate=0.1,
            tree=TreeParams(max_depth=4),
        ),
        tune=HyperGrid(max_depth=(3, 4, 6), num_rounds=(100,), learning_rate=(0.1, 0.3)),
        test_fraction=0.3,
        seed=42,
        threshold=0.5,
    )


def di_trend(result: SweepResult) -> float:
    """Kendall tau between mu and the test DI over rows where DI is defined.

    Returns 0.0 when the correlation is undefined (fewer than two usable
    rows or a constant series), which honestly fails a "trend is positive"
    check instead of erroring out.
    """
    pairs = [(row.mu, row.test_di) for row in result.rows if row.test_di is not None]
    if len(pairs) < 2:
        return 0.0
    mus, dis = zip(*pairs)
    tau = kendalltau(mus, dis).statistic
    if tau != tau:  # NaN from a constant series
        return 0.0
    return float(tau)
