"""Turn raw benchmark downloads into clean CSV + schema pairs.

Raw files are never fetched here; each loader validates that a locally
provided file looks like the expected source (header, value domains, a broad
row-count band) and otherwise raises an IngestionError carrying download
instructions.  Outputs are deterministic: the same raw file always yields
byte-identical CSV and schema files.

Group conventions follow the usual disparate-impact setup for these
benchmarks: the reference group is coded s = 1 (Adult: Male, COMPAS:
African-American, Default: male, Bank: age 33 to 60) and the sensitive
column is never part of the feature matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd

from ..data import (
    KIND_CATEGORICAL,
    KIND_NUMERIC,
    ROLE_FEATURE,
    ROLE_SENSITIVE,
    ROLE_TARGET,
    ColumnSchema,
    ColumnSpec,
    load_csv,
    save_schema,
)
from ..errors import IngestionError, ParameterError
from ..ioutil import atomic_write_text

DOWNLOADS: Dict[str, str] = {
    "adult": "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/adult.data",
    "compas": (
        "https://raw.githubusercontent.com/propublica/compas-analysis/master/"
        "compas-scores-two-years.csv"
    ),
    "default": (
        "https://archive.ics.uci.edu/ml/machine-learning-databases/00350/"
        "default%20of%20credit%20card%20clients.xls exported to CSV, "
        "or the Kaggle mirror file UCI_Credit_Card.csv"
    ),
    "bank": (
        "https://archive.ics.uci.edu/ml/machine-learning-databases/00222/bank.zip "
        "(extract bank-full.csv)"
    ),
}

DATASET_NAMES = tuple(sorted(DOWNLOADS))

# Broad sanity bands on raw row counts; a file far outside is the wrong file.
_RAW_ROW_BANDS = {
    "adult": (29000, 36000),
    "compas": (6300, 7950),
    "default": (27000, 33000),
    "bank": (41000, 49500),
}

MISSING_CATEGORY = "(missing)"


@dataclass(frozen=True)
class PreparedPaths:
    csv_path: Path
    schema_path: Path


def _locate(raw_dir: Path, candidates: List[str], name: str) -> Path:
    for candidate in candidates:
        path = raw_dir / candidate
        if path.exists():
            return path
    raise IngestionError(
        f"{name}: none of {candidates} found in {raw_dir}. "
        f"Download it yourself from {DOWNLOADS[name]} and place it there."
    )


def _check_band(name: str, n_rows: int) -> None:
    lo, hi = _RAW_ROW_BANDS[name]
    if not lo <= n_rows <= hi:
        raise IngestionError(
            f"{name}: raw file has {n_rows} rows, expected between {lo} and {hi}; "
            f"this does not look like the canonical file ({DOWNLOADS[name]})"
        )


def _check_columns(name: str, frame: pd.DataFrame, required: List[str]) -> None:
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise IngestionError(
            f"{name}: raw file lacks expected columns {missing}; "
            f"this does not look like the canonical file ({DOWNLOADS[name]})"
        )


def _check_domain(name: str, series: pd.Series, allowed: set, what: str) -> None:
    seen = set(series.unique())
    if not seen <= allowed:
        raise IngestionError(
            f"{name}: column {what} takes unexpected values {sorted(seen - allowed)[:5]}; "
            f"this does not look like the canonical file ({DOWNLOADS[name]})"
        )


def _check_numeric(name: str, frame: pd.DataFrame, columns: List[str]) -> None:
    for column in columns:
        converted = pd.to_numeric(frame[column], errors="coerce")
        if converted.isna().any():
            bad = frame[column][converted.isna()].iloc[0]
            raise IngestionError(
                f"{name}: column {column} has non-numeric value {bad!r}"
            )


def _write_outputs(
    name: str,
    frame: pd.DataFrame,
    numeric_features: List[str],
    feature_order: List[str],
    sensitive: Tuple[str, str],
    target: Tuple[str, str],
    out_dir: Path,
) -> PreparedPaths:
    out_dir.mkdir(parents=True, exist_ok=True)
    sensitive_name, majority = sensitive
    target_name, positive = target

    ordered = frame[feature_order + [sensitive_name, target_name]]
    columns = []
    for feature in feature_order:
        if feature in numeric_features:
            columns.append(ColumnSpec(name=feature, role=ROLE_FEATURE, kind=KIND_NUMERIC))
        else:
            categories = tuple(sorted(set(str(v) for v in frame[feature])))
            columns.append(
                ColumnSpec(
                    name=feature,
                    role=ROLE_FEATURE,
                    kind=KIND_CATEGORICAL,
                    categories=categories,
                )
            )
    columns.append(ColumnSpec(name=sensitive_name, role=ROLE_SENSITIVE, majority=majority))
    columns.append(ColumnSpec(name=target_name, role=ROLE_TARGET, positive=positive))
    schema = ColumnSchema(columns=tuple(columns))

    csv_path = out_dir / f"{name}.csv"
    schema_path = out_dir / f"{name}.schema.ini"
    atomic_write_text(csv_path, ordered.to_csv(index=False))
    save_schema(schema, schema_path)

    # Round-trip through the strict loader so a broken prepare fails here,
    # not at training time.
    load_csv(csv_path, schema)
    return PreparedPaths(csv_path=csv_path, schema_path=schema_path)


_ADULT_COLUMNS = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
]

_ADULT_NUMERIC = ["age", "fnlwgt", "education-num", "capital-gain", "capital-loss",
                  "hours-per-week"]


def prepare_adult(raw_dir, out_dir) -> PreparedPaths:
    """Census income: predict >50K, group by sex (Male = 1).

    All rows are kept; '?' stays as an ordinary category so the row count
    matches the published size of the train file.
    """
    raw = _locate(Path(raw_dir), ["adult.data"], "adult")
    frame = pd.read_csv(
        raw,
        names=_ADULT_COLUMNS,
        header=None,
        dtype=str,
        skipinitialspace=True,
        skip_blank_lines=True,
        keep_default_na=False,
    )
    frame = frame.apply(lambda col: col.str.strip())
    _check_band("adult", len(frame))
    _check_domain("adult", frame["income"], {">50K", "<=50K"}, "income")
    _check_domain("adult", frame["sex"], {"Male", "Female"}, "sex")
    _check_numeric("adult", frame, _ADULT_NUMERIC)
    features = [c for c in _ADULT_COLUMNS if c not in ("sex", "income")]
    return _write_outputs(
        "adult",
        frame,
        numeric_features=_ADULT_NUMERIC,
        feature_order=features,
        sensitive=("sex", "Male"),
        target=("income", ">50K"),
        out_dir=Path(out_dir),
    )


_COMPAS_NUMERIC = [
    "age",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "decile_score",
    "v_decile_score",
]

_COMPAS_CATEGORICAL = [
    "sex",
    "age_cat",
    "c_charge_degree",
    "c_charge_desc",
    "score_text",
    "v_score_text",
]

_COMPAS_FEATURES = [
    "sex",
    "age",
    "age_cat",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
    "priors_count",
    "c_charge_degree",
    "c_charge_desc",
    "decile_score",
    "score_text",
    "v_decile_score",
    "v_score_text",
]


def prepare_compas(raw_dir, out_dir) -> PreparedPaths:
    """Two-year recidivism, reduced to African-American (s = 1) vs Caucasian.

    Empty categorical cells become an explicit '(missing)' category so no
    row is dropped by the reduction itself.
    """
    raw = _locate(Path(raw_dir), ["compas-scores-two-years.csv"], "compas")
    frame = pd.read_csv(raw, dtype=str, keep_default_na=False)
    _check_band("compas", len(frame))
    _check_columns("compas", frame, _COMPAS_FEATURES + ["race", "two_year_recid"])
    races = set(frame["race"].unique())
    if not {"African-American", "Caucasian"} <= races:
        raise IngestionError(
            "compas: race column lacks the African-American/Caucasian groups; "
            f"this does not look like the canonical file ({DOWNLOADS['compas']})"
        )
    _check_domain("compas", frame["two_year_recid"], {"0", "1"}, "two_year_recid")

    frame = frame[frame["race"].isin(["African-American", "Caucasian"])].copy()
    for column in _COMPAS_CATEGORICAL:
        values = frame[column].str.strip()
        frame[column] = values.where(values != "", MISSING_CATEGORY)
    _check_numeric("compas", frame, _COMPAS_NUMERIC)
    return _write_outputs(
        "compas",
        frame,
        numeric_features=_COMPAS_NUMERIC,
        feature_order=_COMPAS_FEATURES,
        sensitive=("race", "African-American"),
        target=("two_year_recid", "1"),
        out_dir=Path(out_dir),
    )


_DEFAULT_CANDIDATES = [
    "UCI_Credit_Card.csv",
    "default of credit card clients.csv",
    "default_of_credit_card_clients.csv",
    "default.csv",
]


def prepare_default(raw_dir, out_dir) -> PreparedPaths:
    """Credit card default: predict next-month default, group by sex (male = 1).

    Accepts the Kaggle CSV or a CSV export of the UCI spreadsheet (whose
    first line is the X1..X23 banner and is skipped automatically).
    """
    raw = _locate(Path(raw_dir), _DEFAULT_CANDIDATES, "default")
    frame = pd.read_csv(raw)
    if any(str(c).startswith("X") and str(c)[1:].isdigit() for c in frame.columns):
        frame = pd.read_csv(raw, header=1)
    frame.columns = [str(c).strip() for c in frame.columns]

    target_name = None
    for candidate in ("default.payment.next.month", "default payment next month", "Y"):
        if candidate in frame.columns:
            target_name = candidate
            break
    if target_name is None:
        raise IngestionError(
            "default: no default-payment target column found; "
            f"this does not look like the canonical file ({DOWNLOADS['default']})"
        )
    _check_columns("default", frame, ["ID", "SEX", "LIMIT_BAL", "AGE"])
    _check_band("default", len(frame))

    sex = pd.to_numeric(frame["SEX"], errors="coerce")
    target = pd.to_numeric(frame[target_name], errors="coerce")
    if not set(sex.unique()) <= {1, 2}:
        raise IngestionError("default: SEX must be coded 1 (male) or 2 (female)")
    if not set(target.unique()) <= {0, 1}:
        raise IngestionError("default: target must be coded 0 or 1")

    features = [c for c in frame.columns if c not in ("ID", "SEX", target_name)]
    if len(features) != 22:
        raise IngestionError(
            f"default: expected 22 feature columns besides ID/SEX/target, found {len(features)}"
        )
    for column in features:
        if pd.to_numeric(frame[column], errors="coerce").isna().any():
            raise IngestionError(f"default: column {column} has non-numeric values")

    out = frame[features].copy()
    out["SEX"] = sex.astype(np.int64)
    out["default_next_month"] = target.astype(np.int64)
    return _write_outputs(
        "default",
        out,
        numeric_features=list(features),
        feature_order=list(features),
        sensitive=("SEX", "1"),
        target=("default_next_month", "1"),
        out_dir=Path(out_dir),
    )


_BANK_NUMERIC = ["balance", "day", "duration", "campaign", "pdays", "previous"]
_BANK_CATEGORICAL = ["job", "marital", "education", "default", "housing", "loan",
                     "contact", "month", "poutcome"]
BANK_AGE_LOW = 33
BANK_AGE_HIGH = 60
BANK_SENSITIVE = "age_33_to_60"


def prepare_bank(raw_dir, out_dir) -> PreparedPaths:
    """Term-deposit subscription; the group bit is the mid-age band 33..60.

    The raw age column is consumed by the derived group indicator and is not
    a feature itself.
    """
    raw = _locate(Path(raw_dir), ["bank-full.csv"], "bank")
    frame = pd.read_csv(raw, sep=";", dtype=str, keep_default_na=False)
    frame.columns = [str(c).strip().strip('"') for c in frame.columns]
    expected = ["age", "job", "marital", "education", "default", "balance", "housing",
                "loan", "contact", "day", "month", "duration", "campaign", "pdays",
                "previous", "poutcome", "y"]
    _check_columns("bank", frame, expected)
    _check_band("bank", len(frame))
    _check_domain("bank", frame["y"], {"yes", "no"}, "y")
    _check_numeric("bank", frame, ["age"] + _BANK_NUMERIC)

    age = pd.to_numeric(frame["age"])
    frame = frame.copy()
    frame[BANK_SENSITIVE] = np.where((age >= BANK_AGE_LOW) & (age <= BANK_AGE_HIGH), "1", "0")
    features = [c for c in expected if c not in ("age", "y")]
    return _write_outputs(
        "bank",
        frame,
        numeric_features=_BANK_NUMERIC,
        feature_order=features,
        sensitive=(BANK_SENSITIVE, "1"),
        target=("y", "yes"),
        out_dir=Path(out_dir),
    )


_PREPARERS = {
    "adult": prepare_adult,
    "bank": prepare_bank,
    "compas": prepare_compas,
    "default": prepare_default,
}


def prepare_dataset(name: str, raw_dir, out_dir) -> PreparedPaths:
    """Dispatch to one of the four benchmark preparers."""
    if name not in _PREPARERS:
        raise ParameterError(f"unknown dataset {name!r}; expected one of {DATASET_NAMES}")
    return _PREPARERS[name](raw_dir, out_dir)
