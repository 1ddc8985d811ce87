"""Seeded synthetic datasets with known structure.

``python -m gwofi.synthetic OUTDIR`` writes a small clinical-shaped example
(data, schema, bin rules and a config) that the CLI can run end to end.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

from .binspecs import binspecs_for
from .dataset import (
    BINARY,
    CATEGORICAL,
    MISSING,
    NUMERIC,
    ColumnSchema,
    Dataset,
    save_table,
    write_binspecs,
    write_schema,
)


def _yn(flags) -> list[str]:
    return ["yes" if f else "no" for f in flags]


def _binary_dataset(features: dict[str, np.ndarray], target: str, labels, provenance: str) -> Dataset:
    schema = [ColumnSchema(name, BINARY) for name in features]
    schema.append(ColumnSchema(target, BINARY, "target"))
    cols = {name: _yn(v) for name, v in features.items()}
    cols[target] = _yn(labels)
    n = len(labels)
    records = [{name: cols[name][i] for name in cols} for i in range(n)]
    return Dataset(tuple(schema), records, provenance)


def planted_conjunction(n: int = 500, n_features: int = 30, noise: float = 0.05,
                        seed: int = 0) -> Dataset:
    """Features f1..fN ~ Bernoulli(0.5); label = f1 AND f2, flipped with prob ``noise``."""
    rng = np.random.default_rng(seed)
    F = rng.random((n, n_features)) < 0.5
    y = F[:, 0] & F[:, 1]
    y ^= rng.random(n) < noise
    feats = {f"f{j + 1}": F[:, j] for j in range(n_features)}
    return _binary_dataset(feats, "label", y, f"planted_conjunction(seed={seed})")


def planted_majority(n: int = 400, n_informative: int = 3, n_noise: int = 30,
                     noise: float = 0.05, seed: int = 0) -> Dataset:
    """Label is the majority vote of the first ``n_informative`` features.

    Informative columns are ``s1..sK``; the rest ``z1..zM`` are independent
    of the label.
    """
    rng = np.random.default_rng(seed)
    S = rng.random((n, n_informative)) < 0.5
    Z = rng.random((n, n_noise)) < 0.5
    y = S.sum(axis=1) * 2 > n_informative
    y ^= rng.random(n) < noise
    feats = {f"s{j + 1}": S[:, j] for j in range(n_informative)}
    feats.update({f"z{j + 1}": Z[:, j] for j in range(n_noise)})
    return _binary_dataset(feats, "label", y, f"planted_majority(seed={seed})")


def planted_implication(n: int = 400, n_noise: int = 8, marker_rate: float = 0.2,
                        background: float = 0.15, seed: int = 0) -> Dataset:
    """``Marker=yes`` always implies ``Outcome=pos``; otherwise pos at ``background``."""
    rng = np.random.default_rng(seed)
    marker = rng.random(n) < marker_rate
    outcome = marker | (rng.random(n) < background)
    feats = {"Marker": marker}
    feats.update({f"x{j + 1}": rng.random(n) < 0.5 for j in range(n_noise)})
    schema = [ColumnSchema(name, BINARY) for name in feats]
    schema.append(ColumnSchema("Outcome", CATEGORICAL, "target"))
    cols = {name: _yn(v) for name, v in feats.items()}
    cols["Outcome"] = ["pos" if o else "neg" for o in outcome]
    records = [{name: cols[name][i] for name in cols} for i in range(n)]
    return Dataset(tuple(schema), records, f"planted_implication(seed={seed})")


# ----------------------------------------------------------- clinical-shaped

CLINICAL_BINARY = (
    "THTN", "Diabetes", "CurrentSmoker", "VENTOption", "HFinHospital",
    "AspirinHos", "StatinsHos", "ClopidogrelHos", "BetaBlockersHos", "ACEinhibitorsHos",
)
CLINICAL_NUMERIC = (
    "Age", "BMI", "Glucose", "EarlyCr", "HighestCr", "LastEF",
    "FirstCPK", "HighestCPK", "SBP", "HR", "GFR", "LOS",
)
# lab columns that go missing at random
MISSING_PRONE = ("BMI", "Glucose", "LastEF", "HR", "GFR")


def clinical_schema() -> tuple[ColumnSchema, ...]:
    cols = [ColumnSchema("Gender", CATEGORICAL)]
    cols += [ColumnSchema(c, NUMERIC) for c in CLINICAL_NUMERIC]
    cols.append(ColumnSchema("WorstKLLIPclass", CATEGORICAL))
    cols += [ColumnSchema(c, BINARY) for c in CLINICAL_BINARY]
    cols.append(ColumnSchema("InhospitalMortality", CATEGORICAL, "target"))
    return tuple(cols)


def clinical_dataset(n: int = 600, seed: int = 0, missing_rate: float = 0.03) -> Dataset:
    """Cohort-shaped records with a rare mortality outcome and missing labs."""
    rng = np.random.default_rng(seed)
    male = rng.random(n) < 0.77
    age = np.clip(rng.normal(61, 12, n), 19, 94).round()
    bmi = np.clip(rng.normal(26.2, 4.0, n), 15, 55).round(1)
    killip = rng.choice(["one", "two", "three", "four"], size=n, p=[0.71, 0.15, 0.03, 0.11])
    shock = killip == "four"
    ef = np.clip(rng.normal(42, 9, n) - 8 * shock, 10, 65).round()
    glucose = np.clip(rng.normal(157, 70, n), 61, 590).round()
    early_cr = np.clip(rng.normal(1.1, 0.35, n) + 0.3 * shock, 0.3, 9.0).round(2)
    highest_cr = (early_cr + np.abs(rng.normal(0.15, 0.3, n))).round(2)
    first_cpk = np.clip(np.exp(rng.normal(6.5, 1.2, n)), 5, 18000).round()
    highest_cpk = (first_cpk * (1 + rng.random(n))).round()
    sbp = np.clip(rng.normal(134, 28, n) - 30 * shock, 50, 240).round()
    hr = np.clip(rng.normal(78, 18, n) + 15 * shock, 30, 200).round()
    gfr = np.clip(rng.normal(70, 18, n) - 10 * (early_cr > 1.5), 5, 128).round(1)
    vent = rng.random(n) < 0.02 + 0.3 * shock
    logit = (-4.6 + 2.2 * shock + 0.05 * (age - 60) + 1.0 * (ef <= 35)
             + 0.8 * (early_cr > 1.5) + 1.5 * vent)
    death = rng.random(n) < 1 / (1 + np.exp(-logit))
    los = np.where(death, rng.exponential(2.5, n), rng.gamma(3.0, 2.0, n)).round(1)
    binaries = {
        "THTN": rng.random(n) < 0.45,
        "Diabetes": rng.random(n) < 0.3,
        "CurrentSmoker": rng.random(n) < 0.35,
        "VENTOption": vent,
        "HFinHospital": rng.random(n) < 0.08 + 0.4 * shock,
        "AspirinHos": rng.random(n) < 0.97,
        "StatinsHos": rng.random(n) < 0.9,
        "ClopidogrelHos": rng.random(n) < 0.85,
        "BetaBlockersHos": rng.random(n) < 0.75 - 0.3 * shock,
        "ACEinhibitorsHos": rng.random(n) < 0.6,
    }
    numeric = {
        "Age": age, "BMI": bmi, "Glucose": glucose, "EarlyCr": early_cr,
        "HighestCr": highest_cr, "LastEF": ef, "FirstCPK": first_cpk,
        "HighestCPK": highest_cpk, "SBP": sbp, "HR": hr, "GFR": gfr, "LOS": los,
    }
    holes = {c: rng.random(n) < missing_rate for c in MISSING_PRONE}
    records = []
    for i in range(n):
        rec = {"Gender": "male" if male[i] else "female"}
        for c, v in numeric.items():
            rec[c] = MISSING if c in holes and holes[c][i] else float(v[i])
        rec["WorstKLLIPclass"] = str(killip[i])
        for c, v in binaries.items():
            rec[c] = "yes" if v[i] else "no"
        rec["InhospitalMortality"] = "death" if death[i] else "alive"
        records.append(rec)
    return Dataset(clinical_schema(), records, f"clinical_dataset(n={n}, seed={seed})")


EXAMPLE_CONFIG = """\
# example run over the synthetic cohort
data.path = data.csv
data.schema = schema.tsv
data.binspec = binspec.tsv
data.target = InhospitalMortality
data.positive = death
data.exclude = LOS, LOS2

mining.min_support = 0.01
mining.max_len = 2
mining.rank_by = max_confidence
mining.top = 25

augment.min_support = 0.1
augment.max_len = 2
augment.max_itemsets = 200
augment.ablation = true

gwo.pack_size = 10
gwo.max_iter = 15
gwo.workers = 2

classifier.kind = naive_bayes
fitness.w_size = 0.01
fitness.folds = 5
seed = 0
output.dir = out
"""


def write_example(out_dir, n: int = 600, seed: int = 0) -> Path:
    """Write data.csv, schema.tsv, binspec.tsv and gwofi.cfg; return the config path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = clinical_dataset(n, seed)
    save_table(ds, out / "data.csv")
    write_schema(ds.schema, out / "schema.tsv")
    write_binspecs(binspecs_for(ds.names), out / "binspec.tsv")
    cfg = out / "gwofi.cfg"
    cfg.write_text(EXAMPLE_CONFIG, encoding="utf-8")
    return cfg


def write_dataset(ds: Dataset, out_dir) -> tuple[Path, Path]:
    """Save ``ds`` as data.csv plus schema.tsv under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_table(ds, out / "data.csv")
    write_schema(ds.schema, out / "schema.tsv")
    return out / "data.csv", out / "schema.tsv"


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print("usage: python -m gwofi.synthetic OUTDIR", file=sys.stderr)
        sys.exit(1)
    print(write_example(sys.argv[1]))
