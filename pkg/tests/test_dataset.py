import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwofi.binspecs import binspecs_for, default_binspecs
from gwofi.dataset import (
    BINARY,
    CATEGORICAL,
    MISSING,
    NUMERIC,
    Bin,
    BinSpec,
    ColumnSchema,
    Dataset,
    binarize_features,
    discretize,
    impute_chained,
    load_table,
    read_binspecs,
    read_schema,
    save_table,
    target_labels,
    to_transactions,
    write_binspecs,
    write_schema,
)
from gwofi.errors import (
    DataError,
    OutOfRangeError,
    ParseError,
    SchemaMismatchError,
    UnimputableColumnError,
)
from gwofi.synthetic import clinical_dataset


def _ds(schema, rows):
    return Dataset(tuple(schema), rows)


# ------------------------------------------------------------------ loading

def test_load_two_rows(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Age,HTN\n61,yes\n45,No\n")
    schema = (ColumnSchema("Age", NUMERIC), ColumnSchema("HTN", BINARY))
    ds = load_table(p, schema)
    assert ds.n_rows == 2
    assert ds.column("Age") == [61.0, 45.0]
    assert ds.column("HTN") == ["yes", "no"]


def test_header_order_does_not_matter(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("HTN,Age\nyes,61\n")
    ds = load_table(p, (ColumnSchema("Age", NUMERIC), ColumnSchema("HTN", BINARY)))
    assert ds.records[0] == {"Age": 61.0, "HTN": "yes"}


def test_unknown_header_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Age,HTN,Extra\n61,yes,1\n")
    with pytest.raises(SchemaMismatchError):
        load_table(p, (ColumnSchema("Age", NUMERIC), ColumnSchema("HTN", BINARY)))


def test_missing_header_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Age\n61\n")
    with pytest.raises(SchemaMismatchError):
        load_table(p, (ColumnSchema("Age", NUMERIC), ColumnSchema("HTN", BINARY)))


def test_parse_error_names_row_and_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Age\n61\nabc\n")
    with pytest.raises(ParseError, match=r"row 2.*'Age'"):
        load_table(p, (ColumnSchema("Age", NUMERIC),))


def test_missing_spellings(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("Age,Sex\nNA,male\n,\nnan,female\n")
    ds = load_table(p, (ColumnSchema("Age", NUMERIC), ColumnSchema("Sex", CATEGORICAL)))
    assert ds.column("Age") == [MISSING] * 3
    assert ds.column("Sex") == ["male", MISSING, "female"]


def test_generator_round_trip(tmp_path):
    ds = clinical_dataset(80, seed=4)
    save_table(ds, tmp_path / "d.csv")
    write_schema(ds.schema, tmp_path / "s.tsv")
    again = load_table(tmp_path / "d.csv", read_schema(tmp_path / "s.tsv"))
    assert again == ds
    assert again.missing_count() == ds.missing_count() > 0


def test_binary_cell_validation():
    with pytest.raises(ParseError):
        _ds([ColumnSchema("HTN", BINARY)], [{"HTN": "maybe"}])


def test_bad_column_name():
    with pytest.raises(DataError):
        ColumnSchema("a=b", BINARY)


# --------------------------------------------------------------- imputation

def test_no_missing_is_fixed_point():
    ds = _ds([ColumnSchema("x", NUMERIC)], [{"x": 1.0}, {"x": 2.0}])
    assert impute_chained(ds) is ds


def test_constant_column_mean():
    schema = [ColumnSchema("a", NUMERIC), ColumnSchema("b", NUMERIC)]
    rows = [{"a": float(i), "b": 5.0} for i in range(5)]
    rows[2]["b"] = MISSING
    out = impute_chained(_ds(schema, rows))
    assert out.column("b")[2] == pytest.approx(5.0)


def test_linear_relation_recovered():
    schema = [ColumnSchema("x", NUMERIC), ColumnSchema("y", NUMERIC)]
    xs = [0.5, 1.0, 2.0, 3.5, 4.0, 7.0]
    rows = [{"x": x, "y": 2 * x} for x in xs]
    rows[3]["y"] = MISSING
    out = impute_chained(_ds(schema, rows), sweeps=2)
    assert abs(out.column("y")[3] - 2 * xs[3]) < 1e-6


def test_categorical_mode_with_tie():
    schema = [ColumnSchema("x", NUMERIC), ColumnSchema("c", CATEGORICAL)]
    vals = ["b", "a", "b", "a", MISSING]
    out = impute_chained(_ds(schema, [{"x": float(i), "c": v} for i, v in enumerate(vals)]))
    assert out.column("c")[4] == "a"


def test_fully_missing_column():
    schema = [ColumnSchema("x", NUMERIC), ColumnSchema("y", NUMERIC)]
    with pytest.raises(UnimputableColumnError):
        impute_chained(_ds(schema, [{"x": 1.0, "y": MISSING}, {"x": 2.0, "y": MISSING}]))


def test_no_anchor_column():
    schema = [ColumnSchema("x", NUMERIC), ColumnSchema("y", NUMERIC)]
    rows = [{"x": MISSING, "y": 1.0}, {"x": 2.0, "y": MISSING}]
    with pytest.raises(UnimputableColumnError):
        impute_chained(_ds(schema, rows))


def test_imputation_fills_everything():
    out = impute_chained(clinical_dataset(120, seed=1))
    assert out.missing_count() == 0


# ------------------------------------------------------------ discretization

def _bins_by_output():
    return {s.output_column: s for s in default_binspecs()}


def _bin_one(output, value, sex="male"):
    spec = _bins_by_output()[output]
    schema = [ColumnSchema("Gender", CATEGORICAL), ColumnSchema(spec.column, NUMERIC)]
    ds = _ds(schema, [{"Gender": sex, spec.column: float(value)}])
    return discretize(ds, [spec]).column(output)[0]


@pytest.mark.parametrize("output, value, sex, label", [
    ("Glucoseplasma2", 250, "male", "high"),
    ("CatBMI", 26.0, "male", "Overweight"),
    ("EF2", 50, "male", "low"),
    ("EarlyCr2", 1.1, "female", "high"),
    ("EarlyCr2", 1.1, "male", "normal"),
    ("LOS2", 2.0, "male", "<3"),
    ("LOS2", 10.0, "male", "7to14"),
])
def test_clinical_bins(output, value, sex, label):
    assert _bin_one(output, value, sex) == label


def test_discretize_marks_source_ignored():
    spec = _bins_by_output()["Glucoseplasma2"]
    ds = _ds([ColumnSchema("Glucose", NUMERIC)], [{"Glucose": 100.0}])
    out = discretize(ds, [spec])
    assert out.column_schema("Glucose").role == "ignore"
    assert out.column_schema("Glucoseplasma2").kind == CATEGORICAL


def test_out_of_range():
    spec = BinSpec("x", (Bin("lo", 0, 1), Bin("hi", 1, 2)), "x2")
    ds = _ds([ColumnSchema("x", NUMERIC)], [{"x": 0.5}, {"x": 5.0}])
    with pytest.raises(OutOfRangeError, match="row 1"):
        discretize(ds, [spec])


def test_binspec_rejects_gap_and_overlap():
    with pytest.raises(DataError):
        BinSpec("x", (Bin("a", 0, 1), Bin("b", 2, 3)), "x2")
    with pytest.raises(DataError):
        BinSpec("x", (Bin("a", 0, 1, "[]"), Bin("b", 1, 3, "[)")), "x2")


def test_default_binspecs_partition_the_line():
    # every default spec is validated on construction; probe a few boundaries too
    for spec in default_binspecs():
        for sex in ("male", "female"):
            for v in (-1e9, 0.0, 15.0, 60.0, 1e9):
                hits = [b for b in spec.bins if b.sex in (None, sex) and b.contains(v)]
                assert len(hits) == 1, (spec.output_column, sex, v)


def test_binspec_file_round_trip(tmp_path):
    specs = default_binspecs()
    write_binspecs(specs, tmp_path / "b.tsv")
    assert read_binspecs(tmp_path / "b.tsv") == specs


def test_binspecs_for_filters_columns():
    specs = binspecs_for(["Glucose", "Age", "Age3"])
    outs = {s.output_column for s in specs}
    assert "Glucoseplasma2" in outs and "Age2" in outs
    assert "Age3" not in outs and "LOS2" not in outs


# -------------------------------------------------------------- transactions

def test_figure_one_record_tokens():
    schema = [ColumnSchema("HTN", BINARY), ColumnSchema("ChestPain", BINARY)]
    t = to_transactions(_ds(schema, [{"HTN": "yes", "ChestPain": "yes"}]))
    assert t.transactions[0] == frozenset({"HTN=yes", "ChestPain=yes"})


def test_exclude_and_numeric_rules():
    schema = [
        ColumnSchema("Age", NUMERIC),
        ColumnSchema("HTN", BINARY),
        ColumnSchema("Dead", BINARY, "target"),
    ]
    ds = _ds(schema, [{"Age": 50.0, "HTN": "no", "Dead": "yes"}])
    t = to_transactions(ds, exclude=["Dead"])
    assert t.transactions[0] == frozenset({"HTN=no"})


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.sampled_from("abcdef"), max_size=6), min_size=1, max_size=40))
def test_masks_match_membership(rows):
    from gwofi.dataset import TransactionSet

    t = TransactionSet.from_iterable(rows)
    for item, mask in t.masks.items():
        for i, tr in enumerate(t.transactions):
            assert bool(mask >> i & 1) == (item in tr)


# ------------------------------------------------------------------ encoding

def test_binary_encoding():
    ds = _ds([ColumnSchema("b", BINARY)], [{"b": v} for v in ("yes", "no", "yes")])
    fm = binarize_features(ds)
    assert fm.X[:, 0].tolist() == [1.0, 0.0, 1.0]


def test_onehot_three_levels():
    ds = _ds([ColumnSchema("c", CATEGORICAL)], [{"c": v} for v in ("a", "b", "c", "b")])
    fm = binarize_features(ds)
    assert fm.names == ("c=a", "c=b", "c=c")
    assert np.all(fm.X.sum(axis=1) == 1)


def test_standardized_on_training_rows():
    rng = np.random.default_rng(0)
    vals = rng.normal(3, 2, 40)
    ds = _ds([ColumnSchema("x", NUMERIC)], [{"x": float(v)} for v in vals])
    train = np.arange(0, 40, 2)
    col = binarize_features(ds, train).X[train, 0]
    assert abs(col.mean()) < 1e-9
    assert abs(col.var() - 1) < 1e-9


def test_target_labels():
    schema = [ColumnSchema("o", CATEGORICAL, "target")]
    ds = _ds(schema, [{"o": v} for v in ("death", "alive", "death")])
    assert target_labels(ds, "o", "death").tolist() == [1, 0, 1]
    with pytest.raises(DataError):
        target_labels(ds, "o")
