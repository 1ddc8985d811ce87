"""Tabular loading, imputation, discretization and encoding.

A :class:`Dataset` is an immutable table of typed cells.  From it we derive
two views: a :class:`TransactionSet` of ``column=value`` tokens for itemset
mining, and a :class:`FeatureMatrix` for the classifiers.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    OutOfRangeError,
    ParseError,
    SchemaMismatchError,
    UnimputableColumnError,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
BINARY = "binary"
KINDS = (NUMERIC, CATEGORICAL, BINARY)
ROLES = ("feature", "target", "ignore")

MISSING_SPELLINGS = frozenset({"", "na", "nan"})
_YES = frozenset({"yes", "y", "true", "1"})
_NO = frozenset({"no", "n", "false", "0"})

INCLUSIVITY = ("[)", "[]", "(]", "()")
SEX_COLUMN = "Gender"


class _Missing:
    """Singleton marker for an absent cell."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "MISSING"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    role: str = "feature"
    sex_conditional: bool = False

    def __post_init__(self):
        if not self.name or any(c in self.name for c in "=\t\n"):
            raise DataError(f"invalid column name {self.name!r}")
        if self.kind not in KINDS:
            raise DataError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise DataError(f"column {self.name!r}: unknown role {self.role!r}")


def _check_cell(col: ColumnSchema, value, row: int):
    if value is MISSING:
        return value
    if col.kind == NUMERIC:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"row {row}, column {col.name!r}: expected a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ParseError(f"row {row}, column {col.name!r}: expected a label, got {value!r}")
    if col.kind == BINARY and value not in ("yes", "no"):
        raise ParseError(f"row {row}, column {col.name!r}: binary cell must be yes/no, got {value!r}")
    return value


@dataclass(frozen=True)
class Dataset:
    """Schema plus ordered records; records are read-only mappings."""

    schema: tuple[ColumnSchema, ...]
    records: tuple[Mapping[str, object], ...]
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        schema = tuple(self.schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise SchemaMismatchError("duplicate column names in schema")
        if not self.records:
            raise DataError("dataset has no records")
        keys = set(names)
        frozen = []
        for i, rec in enumerate(self.records):
            if set(rec) != keys:
                extra = sorted(set(rec) - keys)
                lacking = sorted(keys - set(rec))
                raise SchemaMismatchError(
                    f"record {i} does not match schema (extra={extra}, missing={lacking})"
                )
            clean = {c.name: _check_cell(c, rec[c.name], i) for c in schema}
            frozen.append(MappingProxyType(clean))
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "records", tuple(frozen))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.schema]

    @property
    def n_rows(self) -> int:
        return len(self.records)

    def column_schema(self, name: str) -> ColumnSchema:
        for c in self.schema:
            if c.name == name:
                return c
        raise SchemaMismatchError(f"unknown column {name!r}")

    def column(self, name: str) -> list:
        self.column_schema(name)
        return [r[name] for r in self.records]

    def with_roles(self, roles: Mapping[str, str]) -> "Dataset":
        """Return a copy with some column roles replaced."""
        for name in roles:
            self.column_schema(name)
        schema = tuple(
            ColumnSchema(c.name, c.kind, roles.get(c.name, c.role), c.sex_conditional)
            for c in self.schema
        )
        return Dataset(schema, self.records, self.provenance)

    def target_column(self) -> str:
        targets = [c.name for c in self.schema if c.role == "target"]
        if len(targets) != 1:
            raise DataError(f"expected exactly one target column, found {targets}")
        return targets[0]

    def missing_count(self) -> int:
        return sum(v is MISSING for r in self.records for v in r.values())


def _parse_cell(text: str, col: ColumnSchema, row: int):
    s = text.strip()
    if s.lower() in MISSING_SPELLINGS:
        return MISSING
    if col.kind == NUMERIC:
        try:
            value = float(s)
        except ValueError:
            raise ParseError(f"row {row}, column {col.name!r}: cannot parse {text!r} as a number") from None
        if math.isnan(value):
            return MISSING
        return value
    if col.kind == BINARY:
        low = s.lower()
        if low in _YES:
            return "yes"
        if low in _NO:
            return "no"
        raise ParseError(f"row {row}, column {col.name!r}: cannot parse {text!r} as yes/no")
    return s


def load_table(path, schema: Sequence[ColumnSchema]) -> Dataset:
    """Read a UTF-8 CSV whose header matches ``schema`` (in any order)."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    by_name = {c.name: c for c in schema}
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        for h in header:
            if h not in by_name:
                raise SchemaMismatchError(f"{path}: column {h!r} is not in the schema")
        for name in by_name:
            if name not in header:
                raise SchemaMismatchError(f"{path}: schema column {name!r} is missing from the header")
        if len(set(header)) != len(header):
            raise SchemaMismatchError(f"{path}: duplicate header columns")
        records = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
            cells = dict(zip(header, row))
            records.append({c.name: _parse_cell(cells[c.name], c, i) for c in schema})
    return Dataset(tuple(schema), tuple(records), provenance=str(path))


def _format_cell(value) -> str:
    if value is MISSING:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return value


def save_table(ds: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.names)
        for rec in ds.records:
            writer.writerow([_format_cell(rec[n]) for n in ds.names])


def read_schema(path) -> tuple[ColumnSchema, ...]:
    """Parse a schema file: ``name<TAB>kind<TAB>role[<TAB>sex_conditional]``."""
    cols = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) not in (3, 4):
            raise DataError(f"{path}:{lineno}: expected 3 or 4 tab-separated fields")
        flag = len(parts) == 4 and parts[3].lower() in ("sex_conditional", "1", "yes", "true")
        cols.append(ColumnSchema(parts[0], parts[1], parts[2], flag))
    return tuple(cols)


def write_schema(schema: Iterable[ColumnSchema], path) -> None:
    lines = []
    for c in schema:
        fields = [c.name, c.kind, c.role] + (["sex_conditional"] if c.sex_conditional else [])
        lines.append("\t".join(fields))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- imputation

def _mode(values: list[str]) -> str:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def impute_chained(ds: Dataset, sweeps: int = 5, seed: int = 0) -> Dataset:
    """Fill missing cells by a simplified chained-equations scheme.

    Discrete columns take the column mode (ties go to the lexicographically
    smallest label).  Numeric columns start at the column mean and are then
    refitted ``sweeps`` times, each by least squares on every other numeric,
    non-ignored column plus an intercept.  The scheme draws no random numbers,
    so ``seed`` does not change the result.
    """
    if sweeps < 1:
        raise DataError("sweeps must be a positive integer")
    if ds.missing_count() == 0:
        return ds
    names = ds.names
    observed = {n: [v for v in ds.column(n) if v is not MISSING] for n in names}
    for n in names:
        if not observed[n]:
            raise UnimputableColumnError(f"column {n!r} has no observed values")
    if not any(len(observed[n]) == ds.n_rows for n in names):
        raise UnimputableColumnError("no fully observed column to anchor the imputation")

    columns = {n: list(ds.column(n)) for n in names}
    for c in ds.schema:
        if c.kind != NUMERIC and len(observed[c.name]) < ds.n_rows:
            fill = _mode(observed[c.name])
            columns[c.name] = [fill if v is MISSING else v for v in columns[c.name]]

    holes = {}
    values = {}
    for n in (c.name for c in ds.schema if c.kind == NUMERIC):
        arr = np.array([np.nan if v is MISSING else v for v in columns[n]], dtype=float)
        mask = np.isnan(arr)
        arr[mask] = float(np.mean(arr[~mask]))
        values[n] = arr
        if mask.any():
            holes[n] = mask
    predictors_pool = [c.name for c in ds.schema if c.kind == NUMERIC and c.role != "ignore"]
    for _ in range(sweeps):
        for n in (c.name for c in ds.schema if c.name in holes):
            mask = holes[n]
            others = [p for p in predictors_pool if p != n]
            design = np.column_stack([np.ones(ds.n_rows)] + [values[p] for p in others])
            coef, *_ = np.linalg.lstsq(design[~mask], values[n][~mask], rcond=None)
            values[n][mask] = design[mask] @ coef
    for n, arr in values.items():
        columns[n] = [float(x) for x in arr]

    records = tuple({n: columns[n][i] for n in names} for i in range(ds.n_rows))
    return Dataset(ds.schema, records, ds.provenance)


# ------------------------------------------------------------ discretization

@dataclass(frozen=True)
class Bin:
    label: str
    low: float
    high: float
    inclusivity: str = "[)"
    sex: str | None = None

    def __post_init__(self):
        if self.inclusivity not in INCLUSIVITY:
            raise DataError(f"bin {self.label!r}: bad inclusivity {self.inclusivity!r}")
        if self.sex is not None and self.sex not in ("male", "female"):
            raise DataError(f"bin {self.label!r}: sex must be male or female")
        if self.low > self.high or (self.low == self.high and self.inclusivity != "[]"):
            raise DataError(f"bin {self.label!r}: empty interval")

    def contains(self, v: float) -> bool:
        lo_ok = v >= self.low if self.inclusivity[0] == "[" else v > self.low
        hi_ok = v <= self.high if self.inclusivity[1] == "]" else v < self.high
        return lo_ok and hi_ok


@dataclass(frozen=True)
class BinSpec:
    column: str
    bins: tuple[Bin, ...]
    output_column: str

    def __post_init__(self):
        object.__setattr__(self, "bins", tuple(self.bins))
        if not self.bins:
            raise DataError(f"binspec {self.output_column!r} has no bins")
        sexes = {b.sex for b in self.bins} - {None}
        for sex in sorted(sexes) or [None]:
            group = sorted(
                (b for b in self.bins if b.sex in (None, sex)), key=lambda b: (b.low, b.high)
            )
            for prev, nxt in zip(group, group[1:]):
                closed_hi = prev.inclusivity[1] == "]"
                closed_lo = nxt.inclusivity[0] == "["
                if prev.high != nxt.low or closed_hi == closed_lo:
                    raise DataError(
                        f"binspec {self.output_column!r}: bins {prev.label!r} and "
                        f"{nxt.label!r} overlap or leave a gap"
                    )

    @property
    def sex_conditional(self) -> bool:
        return any(b.sex is not None for b in self.bins)


def _format_bound(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def read_binspecs(path) -> list[BinSpec]:
    """Parse ``column label low high inclusivity sex output_column`` rows."""
    groups: dict[tuple[str, str], list[Bin]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = [p.strip() for p in line.split("\t")]
        if len(parts) != 7:
            raise DataError(f"{path}:{lineno}: expected 7 tab-separated fields")
        column, label, low, high, incl, sex, out = parts
        try:
            lo, hi = float(low), float(high)
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad bound") from None
        sex_val = None if sex in ("", "-") else sex.lower()
        groups.setdefault((column, out), []).append(Bin(label, lo, hi, incl, sex_val))
    return [BinSpec(col, tuple(bins), out) for (col, out), bins in groups.items()]


def write_binspecs(specs: Iterable[BinSpec], path) -> None:
    lines = []
    for s in specs:
        for b in s.bins:
            lines.append("\t".join([
                s.column, b.label, _format_bound(b.low), _format_bound(b.high),
                b.inclusivity, b.sex or "-", s.output_column,
            ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def discretize(ds: Dataset, specs: Sequence[BinSpec], sex_column: str = SEX_COLUMN) -> Dataset:
    """Append one categorical column per spec; sources become role=ignore."""
    schema = list(ds.schema)
    new_cols: dict[str, list] = {}
    ignored = set()
    existing = set(ds.names)
    for spec in specs:
        src = ds.column_schema(spec.column)
        if src.kind != NUMERIC:
            raise DataError(f"binspec {spec.output_column!r}: column {spec.column!r} is not numeric")
        if spec.output_column in existing:
            raise DataError(f"binspec output column {spec.output_column!r} already exists")
        if spec.sex_conditional and sex_column not in ds.names:
            raise DataError(f"binspec {spec.output_column!r} needs the {sex_column!r} column")
        out = []
        for i, rec in enumerate(ds.records):
            v = rec[spec.column]
            if v is MISSING:
                out.append(MISSING)
                continue
            sex = None
            if spec.sex_conditional:
                s = rec[sex_column]
                sex = s.lower() if isinstance(s, str) else None
            hits = [b for b in spec.bins if (b.sex is None or b.sex == sex) and b.contains(v)]
            if len(hits) != 1:
                raise OutOfRangeError(
                    f"row {i}, column {spec.column!r}: value {v!r} falls in no bin of {spec.output_column!r}"
                )
            out.append(hits[0].label)
        new_cols[spec.output_column] = out
        existing.add(spec.output_column)
        schema.append(ColumnSchema(spec.output_column, CATEGORICAL, "feature"))
        ignored.add(spec.column)
    schema = [
        ColumnSchema(c.name, c.kind, "ignore", c.sex_conditional) if c.name in ignored else c
        for c in schema
    ]
    records = tuple(
        {**rec, **{k: col[i] for k, col in new_cols.items()}} for i, rec in enumerate(ds.records)
    )
    return Dataset(tuple(schema), records, ds.provenance)


# -------------------------------------------------------------- transactions

def make_token(column: str, value: str) -> str:
    return f"{column}={value}"


def token_column(token: str) -> str:
    return token.split("=", 1)[0]


@dataclass(frozen=True)
class TransactionSet:
    transactions: tuple[frozenset, ...]
    items: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.transactions)

    @cached_property
    def masks(self) -> dict[str, int]:
        """Per-token bitmask over transaction indices (bit i = transaction i)."""
        out: dict[str, int] = {}
        for i, t in enumerate(self.transactions):
            bit = 1 << i
            for item in t:
                out[item] = out.get(item, 0) | bit
        return out

    @classmethod
    def from_iterable(cls, transactions: Iterable[Iterable[str]]) -> "TransactionSet":
        ts = tuple(frozenset(t) for t in transactions)
        items = tuple(sorted(set().union(*ts))) if ts else ()
        return cls(ts, items)

    def extended(self, extra: Iterable[Iterable[str]]) -> "TransactionSet":
        return TransactionSet.from_iterable(list(self.transactions) + [frozenset(t) for t in extra])


def to_transactions(ds: Dataset, exclude: Iterable[str] = ()) -> TransactionSet:
    """One token set per record from the categorical and binary columns.

    Feature and target columns are tokenized; ignored and numeric columns are
    not, nor are the names in ``exclude``.
    """
    exclude = set(exclude)
    cols = [
        c.name for c in ds.schema
        if c.kind != NUMERIC and c.role != "ignore" and c.name not in exclude
    ]
    rows = [
        frozenset(make_token(n, rec[n]) for n in cols if rec[n] is not MISSING)
        for rec in ds.records
    ]
    return TransactionSet.from_iterable(rows)


# ------------------------------------------------------------------ encoding

@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    names: tuple[str, ...]
    binary: np.ndarray          # True where the column is a 0/1 indicator
    sources: tuple[str, ...]    # originating dataset column per matrix column

    @property
    def shape(self):
        return self.X.shape


def binarize_features(
    ds: Dataset,
    train_rows: Sequence[int] | np.ndarray | None = None,
    encoding: str = "onehot",
) -> FeatureMatrix:
    """Encode role=feature columns as a numeric matrix.

    Binary columns map yes/no to 1/0.  Categorical columns become one
    indicator per sorted level (``encoding="onehot"``) or a single integer
    code column (``encoding="label"``).  Numeric columns are standardized
    with statistics from ``train_rows`` (all rows when omitted).
    """
    if encoding not in ("onehot", "label"):
        raise DataError(f"unknown encoding {encoding!r}")
    rows = np.arange(ds.n_rows) if train_rows is None else np.asarray(train_rows, dtype=int)
    cols: list[np.ndarray] = []
    names: list[str] = []
    binary: list[bool] = []
    sources: list[str] = []
    for c in ds.schema:
        if c.role != "feature":
            continue
        values = ds.column(c.name)
        if any(v is MISSING for v in values):
            raise DataError(f"column {c.name!r} has missing cells; impute before encoding")
        if c.kind == BINARY:
            cols.append(np.array([v == "yes" for v in values], dtype=float))
            names.append(c.name)
            binary.append(True)
            sources.append(c.name)
        elif c.kind == CATEGORICAL:
            levels = sorted(set(values))
            if encoding == "onehot":
                for lv in levels:
                    cols.append(np.array([v == lv for v in values], dtype=float))
                    names.append(make_token(c.name, lv))
                    binary.append(True)
                    sources.append(c.name)
            else:
                code = {lv: i for i, lv in enumerate(levels)}
                cols.append(np.array([code[v] for v in values], dtype=float))
                names.append(c.name)
                binary.append(len(levels) <= 2)
                sources.append(c.name)
        else:
            arr = np.array(values, dtype=float)
            mu = arr[rows].mean()
            sd = arr[rows].std()
            cols.append((arr - mu) / sd if sd > 0 else arr - mu)
            names.append(c.name)
            binary.append(False)
            sources.append(c.name)
    X = np.column_stack(cols) if cols else np.zeros((ds.n_rows, 0))
    return FeatureMatrix(X, tuple(names), np.array(binary, dtype=bool), tuple(sources))


def target_labels(ds: Dataset, target: str, positive: str | None = None) -> np.ndarray:
    """0/1 label vector, 1 where ``target`` equals ``positive``."""
    col = ds.column_schema(target)
    values = ds.column(target)
    if any(v is MISSING for v in values):
        raise DataError(f"target column {target!r} has missing cells")
    if positive is None:
        if col.kind == BINARY:
            positive = "yes"
        else:
            raise DataError(f"target {target!r} is not binary; name the positive label")
    if col.kind == NUMERIC:
        raise DataError(f"target {target!r} must be categorical or binary")
    if positive not in set(values):
        raise DataError(f"positive label {positive!r} never occurs in {target!r}")
    return np.array([v == positive for v in values], dtype=np.int8)
