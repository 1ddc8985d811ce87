"""Pipeline configuration and its ``key = value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .classifiers import canonical_kind
from .errors import ConfigError

RULE_MODES = ("multi", "single", "filtered")


@dataclass(frozen=True)
class PipelineConfig:
    data_path: Path | None = None
    schema_path: Path | None = None
    # None = built-in bins for whichever source columns are present
    binspec_path: Path | None = None
    use_binspecs: bool = True
    target: str | None = None
    positive: str | None = None
    # columns kept out of the classifier (length of stay leaks the outcome)
    exclude: tuple[str, ...] = ("LOS", "LOS2")
    sex_column: str = "Gender"
    encoding: str = "onehot"
    impute_sweeps: int = 5

    min_support: float = 0.005
    max_len: int = 4
    min_confidence: float = 0.0
    rule_mode: str = "multi"
    rank_by: str = "max_confidence"
    rule_targets: tuple[str, ...] = ()
    antecedent_columns: tuple[str, ...] = ()
    antecedent_value: str | None = None
    rule_exclude: tuple[str, ...] = ()
    rule_top: int = 0

    augment: bool = True
    ablation: bool = False
    # augmentation mines its own, coarser itemsets; the rule defaults explode here
    augment_min_support: float = 0.05
    augment_max_len: int = 3
    augment_min_len: int = 2
    augment_max_itemsets: int = 2000
    prefilter_confidence: float | None = None
    # keep only tokens with this value (e.g. "yes") when mining for augmentation
    augment_item_value: str | None = None

    pack_size: int = 20
    max_iter: int = 100
    transfer_steepness: float = 10.0
    workers: int = 1

    classifier: str = "linear_svm"
    svm_epochs: int = 20
    class_weighting: bool = True
    # fixed hyperparameters for the `train` command
    nb_alpha: float = 1.0
    tree_max_depth: int = 5
    tree_min_leaf: int = 1
    svm_lambda: float = 1e-3
    # search ranges for the optimizer
    range_lambda: tuple[float, float] = (1e-4, 1e2)
    range_alpha: tuple[float, float] = (1e-3, 10.0)
    range_max_depth: tuple[float, float] = (1.0, 20.0)
    range_min_leaf: tuple[float, float] = (1.0, 50.0)

    w_err: float = 0.99
    w_size: float = 0.01
    cv_folds: int = 5
    test_fraction: float = 0.2

    seed: int = 0
    out_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "classifier", canonical_kind(self.classifier))
        if not 0 < self.w_err <= 1 or abs(self.w_err + self.w_size - 1.0) > 1e-9:
            raise ConfigError("fitness weights need w_err in (0, 1] and w_err + w_size = 1")
        if self.rule_mode not in RULE_MODES:
            raise ConfigError(f"mode must be one of {', '.join(RULE_MODES)}")
        if self.encoding not in ("onehot", "label"):
            raise ConfigError("encoding must be onehot or label")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        for name in ("min_support", "augment_min_support"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1]")
        if self.max_len < 1 or self.augment_max_len < 1:
            raise ConfigError("itemset lengths must be >= 1")
        if not 0 < self.test_fraction < 1:
            raise ConfigError("split.test_fraction must lie in (0, 1)")
        if self.cv_folds < 2:
            raise ConfigError("fitness.folds must be >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


def _bool(v: str) -> bool:
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _list(v: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in v.split(",") if p.strip())


def _pair(v: str) -> tuple[float, float]:
    parts = _list(v)
    if len(parts) != 2:
        raise ValueError("expected 'low, high'")
    return float(parts[0]), float(parts[1])


def _opt_float(v: str) -> float | None:
    return None if v.lower() in ("", "none", "off") else float(v)


# file key -> (field name, parser)
KEYS = {
    "data.path": ("data_path", Path),
    "data.schema": ("schema_path", Path),
    "data.binspec": ("binspec_path", Path),
    "data.use_binspecs": ("use_binspecs", _bool),
    "data.target": ("target", str),
    "data.positive": ("positive", str),
    "data.exclude": ("exclude", _list),
    "data.sex_column": ("sex_column", str),
    "data.encoding": ("encoding", str),
    "impute.sweeps": ("impute_sweeps", int),
    "mining.min_support": ("min_support", float),
    "mining.max_len": ("max_len", int),
    "mining.min_confidence": ("min_confidence", float),
    "mining.mode": ("rule_mode", str),
    "mining.rank_by": ("rank_by", str),
    "mining.targets": ("rule_targets", _list),
    "mining.antecedent_columns": ("antecedent_columns", _list),
    "mining.antecedent_value": ("antecedent_value", str),
    "mining.exclude": ("rule_exclude", _list),
    "mining.top": ("rule_top", int),
    "augment.enabled": ("augment", _bool),
    "augment.ablation": ("ablation", _bool),
    "augment.min_support": ("augment_min_support", float),
    "augment.max_len": ("augment_max_len", int),
    "augment.min_len": ("augment_min_len", int),
    "augment.max_itemsets": ("augment_max_itemsets", int),
    "augment.prefilter_confidence": ("prefilter_confidence", _opt_float),
    "augment.item_value": ("augment_item_value", str),
    "gwo.pack_size": ("pack_size", int),
    "gwo.max_iter": ("max_iter", int),
    "gwo.transfer_steepness": ("transfer_steepness", float),
    "gwo.workers": ("workers", int),
    "classifier.kind": ("classifier", str),
    "classifier.epochs": ("svm_epochs", int),
    "classifier.class_weighting": ("class_weighting", _bool),
    "classifier.alpha": ("nb_alpha", float),
    "classifier.max_depth": ("tree_max_depth", int),
    "classifier.min_leaf": ("tree_min_leaf", int),
    "classifier.lambda": ("svm_lambda", float),
    "search.lambda": ("range_lambda", _pair),
    "search.alpha": ("range_alpha", _pair),
    "search.max_depth": ("range_max_depth", _pair),
    "search.min_leaf": ("range_min_leaf", _pair),
    "fitness.w_err": ("w_err", float),
    "fitness.w_size": ("w_size", float),
    "fitness.folds": ("cv_folds", int),
    "split.test_fraction": ("test_fraction", float),
    "seed": ("seed", int),
    "output.dir": ("out_dir", Path),
}
_PATH_FIELDS = {"data_path", "schema_path", "binspec_path", "out_dir"}


def parse_config(text: str, base_dir: Path | str = ".") -> PipelineConfig:
    """Parse ``key = value`` lines; relative paths resolve against ``base_dir``."""
    base_dir = Path(base_dir)
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, parse = KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
        if name in _PATH_FIELDS and not parsed.is_absolute():
            parsed = base_dir / parsed
        if key == "data.binspec" and value.lower() == "none":
            values["use_binspecs"] = False
            continue
        values[name] = parsed
    # keep the weights consistent when only one of them is given
    if "w_size" in values and "w_err" not in values:
        values["w_err"] = 1.0 - values["w_size"]
    elif "w_err" in values and "w_size" not in values:
        values["w_size"] = 1.0 - values["w_err"]
    return PipelineConfig(**values)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"no such config file: {path}")
    return parse_config(path.read_text(encoding="utf-8"), path.parent)


def config_to_text(cfg: PipelineConfig) -> str:
    """Inverse of :func:`parse_config` for the fields that are set."""
    lines = []
    for key, (name, _) in KEYS.items():
        v = getattr(cfg, name)
        if v is None:
            continue
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"
