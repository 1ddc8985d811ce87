"""End-to-end flow: load, impute, discretize, mine, augment, optimize, evaluate."""
from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from threading import Lock

import numpy as np

from .apriori import (
    AssociationRule,
    Itemset,
    MiningConfig,
    generate_rules,
    itemsets_to_tsv,
    min_count_for,
    mine_frequent,
    mine_with_count,
    rank_rules,
    rules_to_tsv,
    token_allowed,
)
from .binspecs import binspecs_for
from .classifiers import (
    DECISION_TREE,
    LINEAR_SVM,
    NAIVE_BAYES,
    NaiveBayesParams,
    SvmParams,
    TreeParams,
    canonical_kind,
    model_to_text,
    train,
)
from .config import PipelineConfig
from .dataset import (
    Dataset,
    FeatureMatrix,
    TransactionSet,
    binarize_features,
    discretize,
    impute_chained,
    load_table,
    make_token,
    read_binspecs,
    read_schema,
    target_labels,
    to_transactions,
    token_column,
)
from .errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    GwofiError,
    LeakageError,
    NumericError,
)
from .evaluation import (
    REPORT_HEADER,
    MetricsReport,
    SplitPlan,
    auroc,
    evaluate_model,
    mean_report,
    stratified_split,
)
from .gwo import ContinuousDim, GwoConfig, SearchSpace, optimize

log = logging.getLogger(__name__)

SHORT_KIND = {LINEAR_SVM: "SVM", NAIVE_BAYES: "NB", DECISION_TREE: "DT"}


# ----------------------------------------------------------------- stages

@contextmanager
def stage(name: str):
    """Prefix errors raised inside the block with the stage name."""
    try:
        yield
    except GwofiError as exc:
        if getattr(exc, "stage", None):
            raise
        tagged = type(exc)(f"[{name}] {exc}")
        tagged.stage = name
        raise tagged from exc
    except OSError as exc:
        tagged = DataError(f"[{name}] {exc}")
        tagged.stage = name
        raise tagged from exc
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        tagged = NumericError(f"[{name}] {type(exc).__name__}: {exc}")
        tagged.stage = name
        raise tagged from exc


def retarget(ds: Dataset, target: str) -> Dataset:
    """Make ``target`` the only target column; former targets become features."""
    ds.column_schema(target)
    roles = {c.name: "feature" for c in ds.schema if c.role == "target" and c.name != target}
    roles[target] = "target"
    return ds.with_roles(roles)


def load_prepared(cfg: PipelineConfig) -> Dataset:
    """Load, impute and discretize; the result carries the configured target."""
    with stage("load"):
        if cfg.data_path is None or cfg.schema_path is None:
            raise ConfigError("a dataset path and a schema path are required")
        ds = load_table(cfg.data_path, read_schema(cfg.schema_path))
    with stage("impute"):
        ds = impute_chained(ds, sweeps=cfg.impute_sweeps, seed=cfg.seed)
    with stage("discretize"):
        specs = []
        if cfg.use_binspecs:
            specs = read_binspecs(cfg.binspec_path) if cfg.binspec_path else binspecs_for(ds.names)
        if specs:
            ds = discretize(ds, specs, sex_column=cfg.sex_column)
        target = cfg.target or ds.target_column()
        ds = retarget(ds, target)
    return ds


# ----------------------------------------------------------- augmentation

@dataclass(frozen=True)
class ColumnEntry:
    name: str
    kind: str                       # "feature" or "itemset"
    items: tuple[str, ...] = ()     # itemset members, empty for base features
    sources: tuple[str, ...] = ()   # dataset columns the column depends on


@dataclass(frozen=True)
class AugmentedMatrix:
    X: np.ndarray
    binary: np.ndarray
    registry: tuple[ColumnEntry, ...]
    n_base: int

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.registry)

    @property
    def n_itemsets(self) -> int:
        return len(self.registry) - self.n_base

    @property
    def shape(self):
        return self.X.shape


def indicator(items, t: TransactionSet) -> np.ndarray:
    """0/1 vector marking transactions that contain every item."""
    acc = (1 << t.n) - 1
    masks = t.masks
    for item in items:
        acc &= masks.get(item, 0)
    raw = np.frombuffer(acc.to_bytes((t.n + 7) // 8 or 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[: t.n].astype(float)


def augment_features(base: FeatureMatrix, itemsets, transactions: TransactionSet,
                     target: str | None = None) -> AugmentedMatrix:
    """Append one indicator column per itemset to ``base``."""
    itemsets = list(itemsets)
    if transactions.n != base.X.shape[0]:
        raise DimensionMismatchError(
            f"{transactions.n} transactions for a matrix with {base.X.shape[0]} rows"
        )
    registry = [ColumnEntry(n, "feature", (), (s,)) for n, s in zip(base.names, base.sources)]
    cols = [base.X]
    for s in itemsets:
        items = s.items if isinstance(s, Itemset) else tuple(sorted(s))
        sources = tuple(sorted({token_column(i) for i in items}))
        if target is not None and target in sources:
            raise LeakageError(f"itemset {{{','.join(items)}}} references the target {target!r}")
        cols.append(indicator(items, transactions)[:, None])
        registry.append(ColumnEntry("{" + ",".join(items) + "}", "itemset", items, sources))
    X = np.hstack(cols) if itemsets else base.X.copy()
    binary = np.concatenate([base.binary, np.ones(len(itemsets), dtype=bool)])
    return AugmentedMatrix(X, binary, tuple(registry), len(base.names))


def _select_itemsets(cfg: PipelineConfig, trans: TransactionSet, y: np.ndarray,
                     train_rows: np.ndarray) -> list[Itemset]:
    t = trans
    if cfg.augment_item_value is not None:
        keep = cfg.augment_item_value
        t = TransactionSet.from_iterable(
            {i for i in tr if i.partition("=")[2] == keep} for tr in trans.transactions
        )
    found = mine_frequent(t, MiningConfig(cfg.augment_min_support, cfg.augment_max_len))
    found = [s for s in found if len(s) >= cfg.augment_min_len]
    if cfg.prefilter_confidence is not None:
        in_train = np.zeros(t.n, dtype=bool)
        in_train[train_rows] = True
        kept = []
        for s in found:
            rows = (indicator(s.items, t) > 0) & in_train
            if not rows.any():
                continue
            p = float(y[rows].mean())
            if max(p, 1.0 - p) >= cfg.prefilter_confidence:
                kept.append(s)
        found = kept
    if cfg.augment_max_itemsets and len(found) > cfg.augment_max_itemsets:
        found = sorted(found, key=lambda s: (-s.count, len(s), s.items))[: cfg.augment_max_itemsets]
        found.sort(key=lambda s: (len(s), s.items))
    return found


# ---------------------------------------------------------- search space

def build_search_space(n_features: int, kind: str, cfg: PipelineConfig | None = None) -> SearchSpace:
    """Feature mask dims followed by the classifier's hyperparameters."""
    if n_features < 1:
        raise ConfigError("the search space needs at least one feature")
    cfg = cfg or PipelineConfig()
    kind = canonical_kind(kind)
    if kind == LINEAR_SVM:
        cont = (ContinuousDim(*cfg.range_lambda, scale="log10"),)
    elif kind == DECISION_TREE:
        cont = (ContinuousDim(*cfg.range_max_depth), ContinuousDim(*cfg.range_min_leaf))
    else:
        cont = (ContinuousDim(*cfg.range_alpha, scale="log10"),)
    return SearchSpace(n_features, cont)


def decode_hyperparams(kind: str, values, svm_epochs: int = 20, class_weighting: bool = True):
    kind = canonical_kind(kind)
    values = [float(v) for v in values]
    if kind == LINEAR_SVM:
        return SvmParams(lam=values[0], epochs=svm_epochs, class_weighting=class_weighting)
    if kind == DECISION_TREE:
        return TreeParams(max_depth=max(1, int(round(values[0]))), min_leaf=max(1, int(round(values[1]))))
    return NaiveBayesParams(alpha=values[0])


def fixed_hyperparams(cfg: PipelineConfig):
    if cfg.classifier == LINEAR_SVM:
        return SvmParams(lam=cfg.svm_lambda, epochs=cfg.svm_epochs, class_weighting=cfg.class_weighting)
    if cfg.classifier == DECISION_TREE:
        return TreeParams(max_depth=cfg.tree_max_depth, min_leaf=cfg.tree_min_leaf)
    return NaiveBayesParams(alpha=cfg.nb_alpha)


# ---------------------------------------------------------------- fitness

def _matrix(data):
    if isinstance(data, (AugmentedMatrix, FeatureMatrix)):
        return data.X, data.binary
    X = np.asarray(data, dtype=float)
    return X, None


def gwofi_fitness(position, data, labels, kind: str, plan: SplitPlan,
                  weights: tuple[float, float] = (0.99, 0.01), seed: int = 0,
                  svm_epochs: int = 20, class_weighting: bool = True) -> float:
    """Weighted CV error plus subset size; 1.0 for an empty mask or a failed fold.

    ``position`` is decoded: the first ``n_features`` entries are the mask
    (values > 0.5 are on) and the rest are the classifier's hyperparameters.
    """
    X, binary = _matrix(data)
    y = np.asarray(labels)
    n = X.shape[1]
    position = np.asarray(position, dtype=float)
    mask = position[:n] > 0.5
    if not mask.any():
        return 1.0
    w_err, w_size = weights
    try:
        hp = decode_hyperparams(kind, position[n:], svm_epochs, class_weighting)
        Xm = X[:, mask]
        bm = None if binary is None else binary[mask]
        aucs = []
        for tr, te in plan.splits():
            model = train(kind, Xm[tr], y[tr], hp, seed=seed, binary=bm)
            aucs.append(auroc(model.score(Xm[te]), y[te]))
    except GwofiError as exc:
        log.warning("fitness fell back to 1.0: %s", exc)
        return 1.0
    return w_err * (1.0 - float(np.mean(aucs))) + w_size * (int(mask.sum()) / n)


class CachedFitness:
    """Memoized :func:`gwofi_fitness`; safe to call from worker threads."""

    def __init__(self, data, labels, kind, plan, weights, seed=0, svm_epochs=20,
                 class_weighting=True):
        self.args = (data, labels, kind, plan)
        self.kwargs = dict(weights=weights, seed=seed, svm_epochs=svm_epochs,
                           class_weighting=class_weighting)
        self.n = _matrix(data)[0].shape[1]
        # tree hyperparameters are rounded before use, so round the key too
        self.rounded = canonical_kind(kind) == DECISION_TREE
        self.cache: dict[bytes, float] = {}
        self.lock = Lock()
        self.calls = 0

    def key(self, position) -> bytes:
        position = np.asarray(position, dtype=float)
        head = (position[: self.n] > 0.5).astype(np.uint8).tobytes()
        tail = position[self.n:]
        if self.rounded:
            tail = np.round(tail)
        return head + np.asarray(tail, dtype=float).tobytes()

    def __call__(self, position) -> float:
        k = self.key(position)
        with self.lock:
            self.calls += 1
            if k in self.cache:
                return self.cache[k]
        value = gwofi_fitness(position, *self.args, **self.kwargs)
        with self.lock:
            self.cache[k] = value
        return value


# ------------------------------------------------------------------ reports

@dataclass
class ArmResult:
    name: str                      # "augmented", "original" or "fixed"
    method: str                    # label used in report.tsv
    registry: tuple[ColumnEntry, ...]
    mask: np.ndarray
    hyperparams: object
    cv: MetricsReport | None
    holdout: MetricsReport
    history: list[float] = field(default_factory=list)
    trace: list[str] = field(default_factory=list)
    best_fitness: float | None = None
    model_text: str = ""

    @property
    def selected(self) -> tuple[ColumnEntry, ...]:
        return tuple(e for e, on in zip(self.registry, self.mask) if on)

    @property
    def selected_count(self) -> int:
        return int(np.sum(self.mask))

    @property
    def search_dims(self) -> int:
        return len(self.registry)


@dataclass
class RunReport:
    target: str
    positive: str | None
    arms: list[ArmResult]
    rules: dict[str, list[AssociationRule]] = field(default_factory=dict)
    rule_mode: str = "multi"
    rank_by: str = "max_confidence"
    info: dict[str, object] = field(default_factory=dict)

    @property
    def primary(self) -> ArmResult:
        return self.arms[0]

    @property
    def selected(self):
        return self.primary.selected

    @property
    def selected_count(self) -> int:
        return self.primary.selected_count

    @property
    def hyperparams(self):
        return self.primary.hyperparams

    @property
    def history(self) -> list[float]:
        return self.primary.history

    def arm(self, name: str) -> ArmResult:
        for a in self.arms:
            if a.name == name:
                return a
        raise KeyError(name)

    def report_tsv(self) -> str:
        lines = [REPORT_HEADER]
        for a in self.arms:
            if a.cv is not None:
                lines.append(a.cv.tsv_row(f"{a.method} [cv]"))
            lines.append(a.holdout.tsv_row(f"{a.method} [holdout]"))
        return "\n".join(lines) + "\n"

    def rules_tsv(self) -> str:
        everything = [r for group in self.rules.values() for r in group]
        return rules_to_tsv(rank_rules(everything, self.rank_by))

    def trace_text(self) -> str:
        lines = []
        for a in self.arms:
            lines.append(f"# arm={a.name}")
            lines.extend(a.trace)
        return "\n".join(lines) + "\n"

    def selected_tsv(self) -> str:
        lines = ["arm\tcolumn\tname\tkind"]
        for a in self.arms:
            for j, (e, on) in enumerate(zip(a.registry, a.mask)):
                if on:
                    lines.append(f"{a.name}\t{j}\t{e.name}\t{e.kind}")
        return "\n".join(lines) + "\n"

    def summary_tsv(self) -> str:
        rows = [("target", self.target), ("positive", self.positive or "")]
        rows += sorted((k, v) for k, v in self.info.items())
        for a in self.arms:
            rows.append((f"{a.name}.search_dims", a.search_dims))
            rows.append((f"{a.name}.selected_count", a.selected_count))
            if a.best_fitness is not None:
                rows.append((f"{a.name}.best_fitness", f"{a.best_fitness:.12g}"))
            for k, v in dataclasses.asdict(a.hyperparams).items():
                rows.append((f"{a.name}.{k}", f"{v:.12g}" if isinstance(v, float) else v))
        return "key\tvalue\n" + "".join(f"{k}\t{v}\n" for k, v in rows)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {
            "report.tsv": self.report_tsv(),
            "trace.log": self.trace_text(),
            "model.txt": self.primary.model_text,
            "selected.tsv": self.selected_tsv(),
            "summary.tsv": self.summary_tsv(),
        }
        if self.rules:
            files[f"rules_{self.target}.tsv"] = self.rules_tsv()
        written = []
        for name, text in files.items():
            path = out / name
            path.write_text(text, encoding="utf-8", newline="\n")
            written.append(path)
        return written


# ---------------------------------------------------------------- running

@dataclass
class Prepared:
    ds: Dataset
    target: str
    labels: np.ndarray
    train_rows: np.ndarray
    test_rows: np.ndarray
    base: FeatureMatrix
    transactions: TransactionSet
    itemsets: list[Itemset]


def prepare(cfg: PipelineConfig, ds: Dataset | None = None) -> Prepared:
    """Everything up to and including itemset mining for augmentation."""
    if ds is None:
        ds = load_prepared(cfg)
    target = ds.target_column()
    with stage("split"):
        y = target_labels(ds, target, cfg.positive)
        holdout = stratified_split(y, "holdout", seed=cfg.seed, test_fraction=cfg.test_fraction)
        train_rows, test_rows = next(holdout.splits())
    with stage("encode"):
        dropped = {c: "ignore" for c in cfg.exclude if c in ds.names and c != target}
        cls_ds = ds.with_roles(dropped)
        base = binarize_features(cls_ds, train_rows, cfg.encoding)
        if base.X.shape[1] == 0:
            raise DataError("no feature columns left after exclusions")
        trans = to_transactions(cls_ds, exclude=[target])
    itemsets = []
    if cfg.augment:
        with stage("mine"):
            itemsets = _select_itemsets(cfg, trans, y, train_rows)
    return Prepared(ds, target, y, train_rows, test_rows, base, trans, itemsets)


def _arm_method(name: str, kind: str) -> str:
    short = SHORT_KIND[canonical_kind(kind)]
    if name == "augmented":
        return f"GWO + Apriori + {short}"
    if name == "original":
        return f"Original dataset + GWO + {short}"
    return f"Fixed + {short}"


def _final_fit(name, cfg, data: AugmentedMatrix, prep: Prepared, mask, hp, cv) -> ArmResult:
    cols = np.flatnonzero(mask)
    X = data.X[:, cols]
    bm = data.binary[cols]
    y = prep.labels
    tr, te = prep.train_rows, prep.test_rows
    with stage("evaluate"):
        model = train(cfg.classifier, X[tr], y[tr], hp, seed=cfg.seed, binary=bm)
        holdout = evaluate_model(X[tr], y[tr], X[te], y[te], cfg.classifier, hp, seed=cfg.seed, binary=bm)
        reports = [
            evaluate_model(X[tr][a], y[tr][a], X[tr][b], y[tr][b], cfg.classifier, hp,
                           seed=cfg.seed, binary=bm)
            for a, b in cv.splits()
        ]
    return ArmResult(
        name=name,
        method=_arm_method(name, cfg.classifier),
        registry=data.registry,
        mask=np.asarray(mask, dtype=int),
        hyperparams=hp,
        cv=mean_report(reports),
        holdout=holdout,
        model_text=model_to_text(model),
    )


def _run_arm(name: str, cfg: PipelineConfig, data: AugmentedMatrix, prep: Prepared, executor) -> ArmResult:
    y_train = prep.labels[prep.train_rows]
    with stage("optimize"):
        cv = stratified_split(y_train, "kfold", seed=cfg.seed, k=cfg.cv_folds)
        space = build_search_space(data.X.shape[1], cfg.classifier, cfg)
        train_data = AugmentedMatrix(data.X[prep.train_rows], data.binary, data.registry, data.n_base)
        fitness = CachedFitness(
            train_data, y_train, cfg.classifier, cv, (cfg.w_err, cfg.w_size),
            seed=cfg.seed, svm_epochs=cfg.svm_epochs, class_weighting=cfg.class_weighting,
        )
        trace: list[str] = []
        gcfg = GwoConfig(cfg.pack_size, cfg.max_iter, cfg.seed, cfg.transfer_steepness)
        best, history = optimize(space, fitness, gcfg, executor=executor, trace=trace.append)
        mask, cont = space.split(best.position)
        hp = decode_hyperparams(cfg.classifier, cont, cfg.svm_epochs, cfg.class_weighting)
    if not mask.any():
        raise NumericError("[optimize] the optimizer selected no features")
    arm = _final_fit(name, cfg, data, prep, mask, hp, cv)
    arm.history = history
    arm.trace = trace
    arm.best_fitness = best.fitness
    return arm


def _arms(cfg: PipelineConfig, prep: Prepared) -> list[tuple[str, AugmentedMatrix]]:
    with stage("augment"):
        plain = augment_features(prep.base, [], prep.transactions, prep.target)
        arms = []
        if cfg.augment:
            arms.append(("augmented", augment_features(prep.base, prep.itemsets, prep.transactions, prep.target)))
        if not cfg.augment or cfg.ablation:
            arms.append(("original", plain))
    return arms


def _info(prep: Prepared) -> dict[str, object]:
    return {
        "n_rows": prep.ds.n_rows,
        "n_train": len(prep.train_rows),
        "n_test": len(prep.test_rows),
        "n_base_features": len(prep.base.names),
        "n_itemsets": len(prep.itemsets),
        "n_positive": int(prep.labels.sum()),
    }


def run_gwofi(cfg: PipelineConfig, ds: Dataset | None = None, with_rules: bool = True) -> RunReport:
    """Full run: optimize each arm, evaluate on the holdout, mine rules, write outputs."""
    prep = prepare(cfg, ds)
    results = []
    executor = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for name, data in _arms(cfg, prep):
            results.append(_run_arm(name, cfg, data, prep, executor))
    finally:
        if executor is not None:
            executor.shutdown()
    report = RunReport(prep.target, cfg.positive, results, rule_mode=cfg.rule_mode,
                       rank_by=cfg.rank_by, info=_info(prep))
    if with_rules:
        report.rules = mine_factor_rules(cfg, ds=prep.ds)
    if cfg.out_dir is not None:
        with stage("write"):
            report.write(cfg.out_dir)
    return report


def train_fixed(cfg: PipelineConfig, ds: Dataset | None = None) -> RunReport:
    """Train on every column with the configured hyperparameters (no search)."""
    prep = prepare(cfg, ds)
    name, data = _arms(cfg, prep)[0]
    cv = stratified_split(prep.labels[prep.train_rows], "kfold", seed=cfg.seed, k=cfg.cv_folds)
    arm = _final_fit("fixed", cfg, data, prep, np.ones(data.X.shape[1], dtype=int), fixed_hyperparams(cfg), cv)
    report = RunReport(prep.target, cfg.positive, [arm], info=_info(prep))
    if cfg.out_dir is not None:
        with stage("write"):
            report.write(cfg.out_dir)
    return report


# ------------------------------------------------------------------ rules

def rule_targets(cfg: PipelineConfig, ds: Dataset) -> list[str]:
    """Consequent tokens: configured tokens or columns, else the target's values."""
    wanted = cfg.rule_targets or (ds.target_column(),)
    tokens = set()
    for w in wanted:
        if "=" in w:
            tokens.add(w)
            continue
        if w not in ds.names:
            raise ConfigError(f"unknown rule target column {w!r}")
        tokens.update(make_token(w, v) for v in ds.column(w) if isinstance(v, str))
    if not tokens:
        raise ConfigError("the rule target set is empty")
    return sorted(tokens)


def factor_rules(t: TransactionSet, targets, mining: MiningConfig,
                 rank_by: str = "max_confidence", top: int = 0) -> dict[str, list[AssociationRule]]:
    """Ranked rules X -> {y} per consequent token y.

    For each y only the transactions holding y are mined, which yields exactly
    the antecedents whose union with y is frequent in ``t``.
    """
    targets = list(targets)
    if not targets:
        raise ConfigError("the rule target set is empty")
    n = t.n
    threshold = min_count_for(mining.min_support, n) if n else 1
    ante_len = mining.antecedent_max_len or mining.max_len
    out: dict[str, list[AssociationRule]] = {}
    for y in targets:
        column = token_column(y)
        projected = TransactionSet.from_iterable(
            [i for i in tr if token_column(i) != column and token_allowed(i, mining)]
            for tr in t.transactions if y in tr
        )
        found = mine_with_count(projected, threshold, ante_len, n=n) if projected.n else []
        joint = [Itemset(s.items + (y,), s.count, n) for s in found]
        cfg_y = dataclasses.replace(mining, consequent_whitelist=frozenset({y}))
        ranked = rank_rules(generate_rules(joint, t, cfg_y), rank_by)
        out[y] = ranked[:top] if top else ranked
    return out


def mining_config_for(cfg: PipelineConfig, mode: str | None = None) -> MiningConfig:
    mode = mode or cfg.rule_mode
    if mode in ("single", "single-antecedent"):
        ante = 1
    elif mode in ("multi", "filtered", "filtered-antecedent"):
        ante = cfg.max_len
    else:
        raise ConfigError(f"unknown rule mode {mode!r}")
    columns = None
    if mode.startswith("filtered"):
        if not cfg.antecedent_columns:
            raise ConfigError("filtered mode needs mining.antecedent_columns")
        columns = frozenset(cfg.antecedent_columns)
    return MiningConfig(
        min_support=cfg.min_support,
        max_len=cfg.max_len + 1,
        min_confidence=cfg.min_confidence,
        antecedent_max_len=ante,
        antecedent_columns=columns,
        antecedent_value=cfg.antecedent_value if mode.startswith("filtered") else None,
    )


def mine_factor_rules(cfg: PipelineConfig, mode: str | None = None,
                      ds: Dataset | None = None) -> dict[str, list[AssociationRule]]:
    """Rule tables grouped by consequent for the multi, single or filtered mode."""
    if ds is None:
        ds = load_prepared(cfg)
    with stage("rules"):
        mining = mining_config_for(cfg, mode)
        t = to_transactions(ds, exclude=cfg.rule_exclude)
        return factor_rules(t, rule_targets(cfg, ds), mining, cfg.rank_by, cfg.rule_top)


def mine_itemsets(cfg: PipelineConfig, ds: Dataset | None = None) -> str:
    """Frequent itemsets over every tokenized column, as TSV."""
    if ds is None:
        ds = load_prepared(cfg)
    with stage("mine"):
        t = to_transactions(ds, exclude=cfg.rule_exclude)
        return itemsets_to_tsv(mine_frequent(t, MiningConfig(cfg.min_support, cfg.max_len)))
