"""Confusion metrics, rank-sum AUROC and stratified resampling plans."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np
from scipy.stats import rankdata

from .classifiers import train
from .errors import DataError, SplitError, UndefinedAurocError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.tn + self.fp

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def _binary(y, name: str) -> np.ndarray:
    y = np.asarray(y)
    if y.size and not set(np.unique(y).tolist()) <= {0, 1}:
        raise DataError(f"{name} must be 0/1 labels")
    return y.astype(np.int8)


def confusion(y_true, y_pred) -> ConfusionCounts:
    t = _binary(y_true, "y_true")
    p = _binary(y_pred, "y_pred")
    if t.shape != p.shape:
        raise DataError(f"length mismatch: {t.size} labels vs {p.size} predictions")
    return ConfusionCounts(
        tp=int(((t == 1) & (p == 1)).sum()),
        tn=int(((t == 0) & (p == 0)).sum()),
        fp=int(((t == 0) & (p == 1)).sum()),
        fn=int(((t == 1) & (p == 0)).sum()),
    )


def metrics(c: ConfusionCounts) -> tuple[float | None, float | None, float | None]:
    """(accuracy, sensitivity, specificity); None where a denominator is zero."""
    accuracy = (c.tp + c.tn) / c.total if c.total else None
    sensitivity = c.tp / (c.tp + c.fn) if c.tp + c.fn else None
    specificity = c.tn / (c.tn + c.fp) if c.tn + c.fp else None
    return accuracy, sensitivity, specificity


def auroc(scores, labels) -> float:
    """Probability that a random positive outscores a random negative.

    Ties count one half.  Computed from the Mann-Whitney rank sum of the
    positives using mid-ranks.
    """
    s = np.asarray(scores, dtype=float)
    y = _binary(labels, "labels")
    if s.shape != y.shape:
        raise DataError("scores and labels differ in length")
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAurocError("AUROC needs both classes")
    ranks = rankdata(s, method="average")
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


@dataclass(frozen=True)
class SplitPlan:
    kind: str              # "kfold" or "holdout"
    folds: np.ndarray      # fold id per row; for holdout 1 marks test rows
    seed: int
    n_folds: int

    def splits(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        """(train rows, test rows) per fold, in fold order."""
        test_ids = range(self.n_folds) if self.kind == "kfold" else (1,)
        for f in test_ids:
            yield np.flatnonzero(self.folds != f), np.flatnonzero(self.folds == f)

    def __len__(self):
        return self.n_folds if self.kind == "kfold" else 1


def stratified_split(labels, kind: str = "kfold", seed: int = 0, k: int = 5,
                     test_fraction: float = 0.2) -> SplitPlan:
    """Stratified k-fold or holdout assignment.

    Rows of each class are shuffled with ``seed`` and dealt round-robin over
    the folds; the deal continues across classes so fold sizes differ by at
    most one.  ``k`` may exceed the minority count only for leave-one-out
    (``k == len(labels)``).
    """
    y = _binary(labels, "labels")
    n = y.size
    n_pos = int(y.sum())
    minority = min(n_pos, n - n_pos)
    if minority == 0:
        raise SplitError("stratified split needs both classes")
    rng = np.random.default_rng(seed)
    folds = np.zeros(n, dtype=int)
    if kind == "kfold":
        if k < 2:
            raise SplitError("k-fold needs k >= 2")
        if k > minority and k != n:
            raise SplitError(f"k={k} exceeds the minority class count {minority}")
        offset = 0
        for cls in (1, 0):
            rows = rng.permutation(np.flatnonzero(y == cls))
            folds[rows] = (offset + np.arange(rows.size)) % k
            offset = (offset + rows.size) % k
        return SplitPlan("kfold", folds, seed, k)
    if kind == "holdout":
        if not 0 < test_fraction < 1:
            raise SplitError("test_fraction must lie in (0, 1)")
        for cls in (1, 0):
            rows = rng.permutation(np.flatnonzero(y == cls))
            m = int(round(test_fraction * rows.size))
            if rows.size >= 2:
                m = min(max(m, 1), rows.size - 1)
            else:
                m = 0
            folds[rows[:m]] = 1
        return SplitPlan("holdout", folds, seed, 2)
    raise SplitError(f"unknown split kind {kind!r}")


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    auroc: float | None
    selected_feature_count: int
    counts: ConfusionCounts
    scores: np.ndarray | None = field(default=None, repr=False, compare=False)

    def tsv_row(self, method: str) -> str:
        def fmt(v, pct=False):
            if v is None:
                return "NA"
            return f"{100 * v:.2f}" if pct else f"{v:.4f}"

        return "\t".join([
            method,
            str(self.selected_feature_count),
            fmt(self.accuracy, pct=True),
            fmt(self.sensitivity),
            fmt(self.specificity),
            fmt(self.auroc),
        ])


REPORT_HEADER = "method\tselected_features\taccuracy_pct\tsensitivity\tspecificity\tauroc"


def report_from(y_true, y_pred, scores, n_features: int) -> MetricsReport:
    c = confusion(y_true, y_pred)
    acc, sens, spec = metrics(c)
    try:
        auc = auroc(scores, y_true)
    except UndefinedAurocError:
        auc = None
    return MetricsReport(acc, sens, spec, auc, n_features, c, np.asarray(scores, dtype=float))


def evaluate_model(X_train, y_train, X_test, y_test, kind: str, hp, seed: int = 0,
                   binary=None) -> MetricsReport:
    """Train on the training rows and report metrics on the test rows."""
    model = train(kind, X_train, y_train, hp, seed=seed, binary=binary)
    X_test = np.asarray(X_test, dtype=float)
    y_test = _binary(y_test, "y_test")
    return report_from(y_test, model.predict(X_test), model.score(X_test), X_test.shape[1])


def mean_report(reports: list[MetricsReport]) -> MetricsReport:
    """Fold-averaged metrics (undefined folds skipped); counts are summed."""
    def avg(name):
        vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        return float(np.mean(vals)) if vals else None

    c = ConfusionCounts(*(sum(getattr(r.counts, f) for r in reports) for f in ("tp", "tn", "fp", "fn")))
    return MetricsReport(
        avg("accuracy"), avg("sensitivity"), avg("specificity"), avg("auroc"),
        reports[0].selected_feature_count, c,
    )
