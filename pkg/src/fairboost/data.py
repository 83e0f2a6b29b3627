"""Datasets, column schemas and CSV loading.

A schema declares, per CSV column, one of three roles: ``feature`` (numeric
or categorical), ``sensitive`` (the group indicator, majority raw value maps
to 1) and ``target`` (the label, positive raw value maps to 1).  Categorical
features are one-hot expanded into columns named ``<column>=<category>``.
Loading is strict: unparseable, NaN or infinite cells are reported with their
row and column rather than silently dropped.
"""

from __future__ import annotations

import csv
import io
import json
import math
from configparser import ConfigParser, Error as ConfigParserError
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import DataError, ParameterError, SchemaError
from .ioutil import atomic_write_text

ROLE_FEATURE = "feature"
ROLE_SENSITIVE = "sensitive"
ROLE_TARGET = "target"
ROLES = (ROLE_FEATURE, ROLE_SENSITIVE, ROLE_TARGET)

KIND_NUMERIC = "numeric"
KIND_CATEGORICAL = "categorical"
FEATURE_KINDS = (KIND_NUMERIC, KIND_CATEGORICAL)


@dataclass(frozen=True)
class ColumnSpec:
    """Declared handling for one CSV column."""

    name: str
    role: str
    kind: Optional[str] = None
    majority: Optional[str] = None
    positive: Optional[str] = None
    categories: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not self.name or any(ch in self.name for ch in "]\n\r"):
            raise SchemaError(f"invalid column name {self.name!r}")
        if self.role not in ROLES:
            raise SchemaError(f"column {self.name!r}: unknown role {self.role!r}")
        if self.role == ROLE_FEATURE:
            if self.kind not in FEATURE_KINDS:
                raise SchemaError(
                    f"column {self.name!r}: feature kind must be one of {FEATURE_KINDS}, "
                    f"got {self.kind!r}"
                )
            if self.majority is not None or self.positive is not None:
                raise SchemaError(f"column {self.name!r}: majority/positive apply only to "
                                  "sensitive/target columns")
            if self.categories is not None and self.kind != KIND_CATEGORICAL:
                raise SchemaError(f"column {self.name!r}: categories require a categorical kind")
        elif self.role == ROLE_SENSITIVE:
            if self.majority is None:
                raise SchemaError(f"column {self.name!r}: sensitive column needs a majority value")
            if self.kind is not None or self.positive is not None or self.categories is not None:
                raise SchemaError(f"column {self.name!r}: sensitive column takes only majority")
        else:
            if self.positive is None:
                raise SchemaError(f"column {self.name!r}: target column needs a positive value")
            if self.kind is not None or self.majority is not None or self.categories is not None:
                raise SchemaError(f"column {self.name!r}: target column takes only positive")
        if self.categories is not None:
            cats = tuple(str(c) for c in self.categories)
            if len(set(cats)) != len(cats) or not cats:
                raise SchemaError(f"column {self.name!r}: categories must be non-empty and unique")
            object.__setattr__(self, "categories", cats)


@dataclass(frozen=True)
class ColumnSchema:
    """Ordered column specs; exactly one sensitive and one target column."""

    columns: Tuple[ColumnSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names {dupes}")
        n_sensitive = sum(1 for c in self.columns if c.role == ROLE_SENSITIVE)
        n_target = sum(1 for c in self.columns if c.role == ROLE_TARGET)
        if n_sensitive != 1:
            raise SchemaError(f"schema needs exactly one sensitive column, found {n_sensitive}")
        if n_target != 1:
            raise SchemaError(f"schema needs exactly one target column, found {n_target}")
        if not any(c.role == ROLE_FEATURE for c in self.columns):
            raise SchemaError("schema declares no feature columns")

    @property
    def features(self) -> Tuple[ColumnSpec, ...]:
        return tuple(c for c in self.columns if c.role == ROLE_FEATURE)

    @property
    def sensitive(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == ROLE_SENSITIVE)

    @property
    def target(self) -> ColumnSpec:
        return next(c for c in self.columns if c.role == ROLE_TARGET)


def load_schema(path) -> ColumnSchema:
    """Read a schema from an INI file, one section per column."""
    parser = ConfigParser(interpolation=None)
    text = Path(path).read_text(encoding="utf-8")
    try:
        parser.read_string(text, source=str(path))
    except ConfigParserError as exc:
        raise SchemaError(f"cannot parse schema file {path}: {exc}") from exc
    columns = []
    for section in parser.sections():
        options = dict(parser.items(section))
        known = {"role", "kind", "majority", "positive", "categories"}
        unknown = sorted(set(options) - known)
        if unknown:
            raise SchemaError(f"column {section!r}: unknown schema keys {unknown}")
        categories = None
        if "categories" in options:
            try:
                raw = json.loads(options["categories"])
            except json.JSONDecodeError as exc:
                raise SchemaError(f"column {section!r}: categories is not a JSON list") from exc
            if not isinstance(raw, list) or not all(isinstance(v, str) for v in raw):
                raise SchemaError(f"column {section!r}: categories must be a JSON list of strings")
            categories = tuple(raw)
        columns.append(
            ColumnSpec(
                name=section,
                role=options.get("role", ""),
                kind=options.get("kind"),
                majority=options.get("majority"),
                positive=options.get("positive"),
                categories=categories,
            )
        )
    return ColumnSchema(columns=tuple(columns))


def save_schema(schema: ColumnSchema, path) -> None:
    """Write a schema as INI, preserving column order."""
    parser = ConfigParser(interpolation=None)
    for col in schema.columns:
        parser.add_section(col.name)
        parser.set(col.name, "role", col.role)
        if col.kind is not None:
            parser.set(col.name, "kind", col.kind)
        if col.majority is not None:
            parser.set(col.name, "majority", col.majority)
        if col.positive is not None:
            parser.set(col.name, "positive", col.positive)
        if col.categories is not None:
            parser.set(col.name, "categories", json.dumps(list(col.categories)))
    buffer = io.StringIO()
    parser.write(buffer)
    atomic_write_text(path, buffer.getvalue())


@dataclass(frozen=True)
class Dataset:
    """Immutable numeric design matrix plus binary label and group vectors."""

    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, order="C", copy=True)
        y = np.array(self.labels, dtype=np.int64, copy=True)
        s = np.array(self.sensitive, dtype=np.int64, copy=True)
        names = tuple(str(n) for n in self.feature_names)
        if x.ndim != 2:
            raise DataError(f"feature matrix must be 2-d, got shape {x.shape}")
        n, d = x.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset needs at least one row and one feature, got shape {x.shape}")
        if y.shape != (n,) or s.shape != (n,):
            raise DataError(
                f"labels {y.shape} and sensitive {s.shape} must both have length {n}"
            )
        if not np.all(np.isfinite(x)):
            raise DataError("feature matrix contains non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0 or 1")
        if not np.all((s == 0) | (s == 1)):
            raise DataError("sensitive values must be 0 or 1")
        if len(names) != d:
            raise DataError(f"{len(names)} feature names for {d} columns")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        for arr in (x, y, s):
            arr.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "sensitive", s)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "_columns_cache", None)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def features_by_column(self) -> np.ndarray:
        """(n_features, n_rows) contiguous view used by column-major scans."""
        cached = getattr(self, "_columns_cache")
        if cached is None:
            cached = np.ascontiguousarray(self.features.T)
            cached.setflags(write=False)
            object.__setattr__(self, "_columns_cache", cached)
        return cached

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            sensitive=self.sensitive[idx],
            feature_names=self.feature_names,
        )

    def has_both_groups(self) -> bool:
        return bool(np.any(self.sensitive == 0) and np.any(self.sensitive == 1))


def require_both_groups(dataset: Dataset, context: str) -> None:
    if not dataset.has_both_groups():
        raise DataError(f"{context}: sensitive column takes a single value; need both groups")


def _parse_numeric(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    try:
        value = float(text)
    except ValueError:
        raise DataError(
            f"data row {row}, column {column!r}: cannot parse {cell!r} as a number"
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise DataError(f"data row {row}, column {column!r}: non-finite value {cell!r}")
    return value


def load_csv(path, schema: ColumnSchema) -> Dataset:
    """Load a CSV per the schema into a Dataset.

    Columns present in the file but absent from the schema are ignored.  When
    a categorical feature has no fitted category list, categories are fitted
    from this file in sorted order; the derived one-hot feature names record
    the fit, so loading new data against a trained model will surface any
    category drift as a feature-name mismatch.
    """
    source = Path(path)
    if not source.exists():
        raise DataError(f"data file not found: {source}")
    with source.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{source}: file is empty") from None
        rows = list(reader)
    if not rows:
        raise DataError(f"{source}: no data rows")

    positions: Dict[str, int] = {}
    for i, name in enumerate(header):
        positions.setdefault(name, i)
    missing = [c.name for c in schema.columns if c.name not in positions]
    if missing:
        raise SchemaError(f"{source}: schema columns missing from CSV header: {missing}")

    width = len(header)
    for r, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError(
                f"data row {r}: expected {width} fields, found {len(row)}"
            )

    n = len(rows)
    feature_columns: List[np.ndarray] = []
    feature_names: List[str] = []
    for spec in schema.features:
        pos = positions[spec.name]
        raw = [row[pos] for row in rows]
        if spec.kind == KIND_NUMERIC:
            column = np.empty(n, dtype=np.float64)
            for r, cell in enumerate(raw, start=1):
                column[r - 1] = _parse_numeric(cell, r, spec.name)
            feature_columns.append(column)
            feature_names.append(spec.name)
        else:
            values = [cell.strip() for cell in raw]
            if spec.categories is None:
                categories = tuple(sorted(set(values)))
            else:
                categories = spec.categories
                lookup = set(categories)
                for r, value in enumerate(values, start=1):
                    if value not in lookup:
                        raise DataError(
                            f"data row {r}, column {spec.name!r}: "
                            f"unknown category {value!r}"
                        )
            index = {cat: j for j, cat in enumerate(categories)}
            codes = np.fromiter((index[v] for v in values), dtype=np.intp, count=n)
            block = np.zeros((n, len(categories)), dtype=np.float64)
            block[np.arange(n), codes] = 1.0
            for j, cat in enumerate(categories):
                feature_columns.append(block[:, j])
                feature_names.append(f"{spec.name}={cat}")

    sens_spec = schema.sensitive
    pos = positions[sens_spec.name]
    sensitive = np.fromiter(
        (1 if row[pos].strip() == sens_spec.majority else 0 for row in rows),
        dtype=np.int64,
        count=n,
    )
    target_spec = schema.target
    pos = positions[target_spec.name]
    labels = np.fromiter(
        (1 if row[pos].strip() == target_spec.positive else 0 for row in rows),
        dtype=np.int64,
        count=n,
    )

    dataset = Dataset(
        features=np.column_stack(feature_columns),
        labels=labels,
        sensitive=sensitive,
        feature_names=tuple(feature_names),
    )
    require_both_groups(dataset, str(source))
    return dataset


def write_csv(dataset: Dataset, path, sensitive_name: str = "sensitive",
              target_name: str = "label") -> None:
    """Dump a dataset as numeric CSV; floats use repr so reloads are bit-exact."""
    if sensitive_name in dataset.feature_names or target_name in dataset.feature_names:
        raise DataError("sensitive/target column names collide with feature names")
    lines = [",".join([*(_quote(n) for n in dataset.feature_names),
                       _quote(sensitive_name), _quote(target_name)])]
    for i in range(dataset.n_rows):
        cells = [repr(float(v)) for v in dataset.features[i]]
        cells.append(str(int(dataset.sensitive[i])))
        cells.append(str(int(dataset.labels[i])))
        lines.append(",".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _quote(name: str) -> str:
    if any(ch in name for ch in ',"\n\r'):
        return '"' + name.replace('"', '""') + '"'
    return name


def roundtrip_schema(dataset: Dataset, sensitive_name: str = "sensitive",
                     target_name: str = "label") -> ColumnSchema:
    """Schema that reloads a write_csv dump into the identical Dataset."""
    columns = [ColumnSpec(name=n, role=ROLE_FEATURE, kind=KIND_NUMERIC)
               for n in dataset.feature_names]
    columns.append(ColumnSpec(name=sensitive_name, role=ROLE_SENSITIVE, majority="1"))
    columns.append(ColumnSpec(name=target_name, role=ROLE_TARGET, positive="1"))
    return ColumnSchema(columns=tuple(columns))


def train_test_split(dataset: Dataset, test_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Deterministic shuffle split; both parts keep the original row order."""
    fraction = float(test_fraction)
    if not 0.0 < fraction < 1.0:
        raise ParameterError(f"test_fraction must lie strictly in (0, 1), got {test_fraction!r}")
    n = dataset.n_rows
    if n < 2:
        raise ParameterError(f"need at least 2 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_test = max(1, int(math.floor(n * fraction)))
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return dataset.subset(train_idx), dataset.subset(test_idx)
