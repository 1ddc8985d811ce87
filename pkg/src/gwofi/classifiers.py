"""Shallow binary classifiers: naive Bayes, CART tree, linear max-margin model.

Labels may be given as {0, 1} or {-1, +1}; predictions are always 0/1 with
1 the positive class.  Every model exposes ``score`` (higher means more
positive) for AUROC and ``predict``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import (
    ConfigError,
    DataError,
    DegenerateLabelsError,
    DimensionMismatchError,
    EmptyNodeError,
)

NAIVE_BAYES = "naive_bayes"
DECISION_TREE = "decision_tree"
LINEAR_SVM = "linear_svm"
KIND_ALIASES = {
    "nb": NAIVE_BAYES, "naive_bayes": NAIVE_BAYES,
    "tree": DECISION_TREE, "decision_tree": DECISION_TREE, "cart": DECISION_TREE,
    "svm": LINEAR_SVM, "linear_svm": LINEAR_SVM,
}
VAR_FLOOR = 1e-9
FORMAT_VERSION = 1


def canonical_kind(kind: str) -> str:
    try:
        return KIND_ALIASES[kind.lower()]
    except KeyError:
        raise ConfigError(f"unknown classifier kind {kind!r}") from None


@dataclass(frozen=True)
class NaiveBayesParams:
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("naive Bayes smoothing must be > 0")


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 5
    min_leaf: int = 1

    def __post_init__(self):
        if self.max_depth < 1 or self.min_leaf < 1:
            raise ConfigError("tree max_depth and min_leaf must be >= 1")


@dataclass(frozen=True)
class SvmParams:
    lam: float = 1e-3
    epochs: int = 20
    class_weighting: bool = True

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError("regularization must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")


def _labels01(y) -> np.ndarray:
    y = np.asarray(y)
    values = set(np.unique(y).tolist())
    if not values <= {0, 1} and not values <= {-1, 1}:
        raise DataError(f"labels must be 0/1 or -1/+1, got {sorted(values)}")
    out = (y == 1).astype(np.int8)
    if out.min() == out.max():
        raise DegenerateLabelsError("training labels contain a single class")
    return out


def _as_matrix(X, n_features: int) -> tuple[np.ndarray, bool]:
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DimensionMismatchError(f"expected {n_features} features, got shape {np.shape(X)}")
    return X, single


class _Model:
    kind: str
    n_features: int

    def score(self, X):
        X, single = _as_matrix(X, self.n_features)
        s = self._score(X)
        return float(s[0]) if single else s

    def predict(self, X):
        X, single = _as_matrix(X, self.n_features)
        p = self._predict(X)
        return int(p[0]) if single else p


# ---------------------------------------------------------------- naive Bayes

@dataclass
class NaiveBayesModel(_Model):
    hp: NaiveBayesParams
    log_prior: np.ndarray          # (2,)
    binary: np.ndarray             # (d,) bool
    p_one: np.ndarray              # (2, d_binary) P(x=1 | class)
    mean: np.ndarray               # (2, d_cont)
    var: np.ndarray                # (2, d_cont)
    seed: int = 0
    kind: str = field(default=NAIVE_BAYES, init=False)

    @property
    def n_features(self) -> int:
        return self.binary.size

    @property
    def priors(self) -> np.ndarray:
        return np.exp(self.log_prior)

    def joint_log_likelihood(self, X) -> np.ndarray:
        X, _ = _as_matrix(X, self.n_features)
        xb = X[:, self.binary]
        xc = X[:, ~self.binary]
        out = np.tile(self.log_prior, (X.shape[0], 1))
        if xb.shape[1]:
            lp, lq = np.log(self.p_one), np.log1p(-self.p_one)
            out += xb @ lp.T + (1.0 - xb) @ lq.T
        if xc.shape[1]:
            for c in (0, 1):
                z = (xc - self.mean[c]) ** 2 / self.var[c]
                out[:, c] += -0.5 * (z + np.log(2 * np.pi * self.var[c])).sum(axis=1)
        return out

    def predict_proba(self, X) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return np.exp(jll - logsumexp(jll, axis=1, keepdims=True))

    def _score(self, X):
        jll = self.joint_log_likelihood(X)
        return jll[:, 1] - jll[:, 0]

    def _predict(self, X):
        return (self._score(X) > 0).astype(np.int8)


def _binary_columns(X: np.ndarray) -> np.ndarray:
    return np.all((X == 0) | (X == 1), axis=0)


def train_naive_bayes(X, y, hp: NaiveBayesParams = NaiveBayesParams(), binary=None, seed: int = 0):
    """Bernoulli likelihoods for 0/1 columns, Gaussian for the rest.

    ``binary`` overrides the per-column detection of indicator columns.
    """
    X = np.asarray(X, dtype=float)
    y = _labels01(y)
    binary = _binary_columns(X) if binary is None else np.asarray(binary, dtype=bool)
    if binary.size != X.shape[1]:
        raise DimensionMismatchError("binary mask length differs from feature count")
    counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
    log_prior = np.log(counts / counts.sum())
    xb = X[:, binary]
    xc = X[:, ~binary]
    p_one = np.empty((2, xb.shape[1]))
    mean = np.empty((2, xc.shape[1]))
    var = np.empty((2, xc.shape[1]))
    for c in (0, 1):
        rows = y == c
        p_one[c] = (xb[rows].sum(axis=0) + hp.alpha) / (counts[c] + 2 * hp.alpha)
        mean[c] = xc[rows].mean(axis=0)
        var[c] = np.maximum(xc[rows].var(axis=0), VAR_FLOOR)
    return NaiveBayesModel(hp, log_prior, binary, p_one, mean, var, seed)


# ---------------------------------------------------------------------- CART

def gini_impurity(class_counts) -> float:
    a, b = class_counts
    if a < 0 or b < 0:
        raise ValueError("class counts must be non-negative")
    n = a + b
    if n == 0:
        raise EmptyNodeError("Gini impurity of an empty node")
    return 1.0 - (a / n) ** 2 - (b / n) ** 2


def _best_split(X: np.ndarray, y: np.ndarray, min_leaf: int):
    n = X.shape[0]
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    ys = y[order].astype(float)
    pos_left = np.cumsum(ys, axis=0)[:-1]
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    pos_right = ys.sum(axis=0) - pos_left
    # n * weighted child Gini = n_l - (p_l^2 + q_l^2)/n_l + n_r - (p_r^2 + q_r^2)/n_r
    sq_left = (pos_left ** 2 + (n_left - pos_left) ** 2) / n_left
    sq_right = (pos_right ** 2 + (n_right - pos_right) ** 2) / n_right
    weighted = (n - sq_left - sq_right) / n
    valid = (xs[1:] != xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    weighted = np.where(valid, weighted, np.inf)
    cand = weighted <= weighted.min() + 1e-12
    feature = int(np.flatnonzero(cand.any(axis=0))[0])
    i = int(np.argmax(cand[:, feature]))
    threshold = (xs[i, feature] + xs[i + 1, feature]) / 2.0
    return feature, float(threshold)


@dataclass
class TreeModel(_Model):
    hp: TreeParams
    feature: np.ndarray      # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray        # (nodes, 2) class fractions (neg, pos)
    n_samples: np.ndarray
    n_features: int
    seed: int = 0
    kind: str = field(default=DECISION_TREE, init=False)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.feature.size, dtype=int)
        for i in range(self.feature.size):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by each row."""
        X, _ = _as_matrix(X, self.n_features)
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            internal = f >= 0
            if not internal.any():
                return node
            go_left = X[rows, np.maximum(f, 0)] <= self.threshold[node]
            step = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, step, node)

    def _score(self, X):
        return self.value[self.apply(X), 1]

    def _predict(self, X):
        return (self._score(X) > 0.5).astype(np.int8)


def train_decision_tree(X, y, hp: TreeParams = TreeParams(), seed: int = 0) -> TreeModel:
    """Greedy binary CART on Gini impurity.

    Nodes split whenever they are impure, shallower than ``max_depth`` and
    some threshold leaves ``min_leaf`` rows on both sides, even if the split
    does not lower the impurity (XOR-like targets need such splits).
    """
    X = np.asarray(X, dtype=float)
    y = _labels01(y)
    nodes: list[list] = []   # feature, threshold, left, right, neg_frac, pos_frac, n

    def grow(idx: np.ndarray, depth: int) -> int:
        ys = y[idx]
        pos = int(ys.sum())
        me = len(nodes)
        nodes.append([-1, 0.0, -1, -1, 1 - pos / idx.size, pos / idx.size, idx.size])
        if pos in (0, idx.size) or depth >= hp.max_depth or idx.size < 2 * hp.min_leaf:
            return me
        split = _best_split(X[idx], ys, hp.min_leaf)
        if split is None:
            return me
        f, thr = split
        go_left = X[idx, f] <= thr
        left = grow(idx[go_left], depth + 1)
        right = grow(idx[~go_left], depth + 1)
        nodes[me][:4] = [f, thr, left, right]
        return me

    grow(np.arange(X.shape[0]), 0)
    arr = list(zip(*nodes))
    return TreeModel(
        hp,
        feature=np.array(arr[0], dtype=int),
        threshold=np.array(arr[1], dtype=float),
        left=np.array(arr[2], dtype=int),
        right=np.array(arr[3], dtype=int),
        value=np.column_stack([arr[4], arr[5]]).astype(float),
        n_samples=np.array(arr[6], dtype=int),
        n_features=X.shape[1],
        seed=seed,
    )


# -------------------------------------------------------------- linear model

@dataclass
class LinearModel(_Model):
    hp: SvmParams
    w: np.ndarray
    b: float
    seed: int = 0
    kind: str = field(default=LINEAR_SVM, init=False)

    @property
    def n_features(self) -> int:
        return self.w.size

    def _score(self, X):
        return X @ self.w + self.b

    def _predict(self, X):
        return (self._score(X) >= 0).astype(np.int8)


def train_linear_svm(X, y, hp: SvmParams = SvmParams(), seed: int = 0) -> LinearModel:
    """Weighted hinge loss + L2 penalty by stochastic subgradient steps.

    Step size is 1/(lam*t) over a seeded reshuffle each epoch; the bias is
    treated as the weight of a constant feature.  Returns the average of all
    iterates.
    """
    X = np.asarray(X, dtype=float)
    y01 = _labels01(y)
    ys = np.where(y01 == 1, 1.0, -1.0)
    n, d = X.shape
    if hp.class_weighting:
        n_pos = y01.sum()
        per_class = {1: n / (2.0 * n_pos), 0: n / (2.0 * (n - n_pos))}
        c = np.where(y01 == 1, per_class[1], per_class[0])
    else:
        c = np.ones(n)
    cy = c * ys
    rng = np.random.default_rng(seed)
    lam = hp.lam
    w = np.zeros(d)
    b = 0.0
    w_sum = np.zeros(d)
    b_sum = 0.0
    t = 0
    for _ in range(hp.epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            xi = X[i]
            violated = ys[i] * (xi @ w + b) < 1.0
            shrink = 1.0 - 1.0 / t
            w *= shrink
            b *= shrink
            if violated:
                w += (eta * cy[i]) * xi
                b += eta * cy[i]
            w_sum += w
            b_sum += b
    return LinearModel(hp, w_sum / t, float(b_sum / t), seed)


# ------------------------------------------------------------------ dispatch

def train(kind: str, X, y, hp, seed: int = 0, binary=None):
    kind = canonical_kind(kind)
    if kind == NAIVE_BAYES:
        return train_naive_bayes(X, y, hp, binary=binary, seed=seed)
    if kind == DECISION_TREE:
        return train_decision_tree(X, y, hp, seed=seed)
    return train_linear_svm(X, y, hp, seed=seed)


def predict(model: _Model, x):
    return model.predict(x)


def score(model: _Model, x):
    return model.score(x)


# ------------------------------------------------------------- serialization

def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def _ints(values) -> str:
    return " ".join(str(int(v)) for v in np.ravel(values))


def model_to_text(model: _Model) -> str:
    """Flat, versioned text form; floats are written with full precision."""
    lines = [f"gwofi-model\t{FORMAT_VERSION}", f"kind\t{model.kind}", f"seed\t{model.seed}"]
    if isinstance(model, NaiveBayesModel):
        lines += [
            f"alpha\t{float(model.hp.alpha)!r}",
            f"binary\t{_ints(model.binary)}",
            f"log_prior\t{_fmt(model.log_prior)}",
            f"p_one\t{model.p_one.shape[1]}\t{_fmt(model.p_one)}",
            f"mean\t{model.mean.shape[1]}\t{_fmt(model.mean)}",
            f"var\t{model.var.shape[1]}\t{_fmt(model.var)}",
        ]
    elif isinstance(model, TreeModel):
        lines += [
            f"max_depth\t{model.hp.max_depth}",
            f"min_leaf\t{model.hp.min_leaf}",
            f"n_features\t{model.n_features}",
            f"feature\t{_ints(model.feature)}",
            f"threshold\t{_fmt(model.threshold)}",
            f"left\t{_ints(model.left)}",
            f"right\t{_ints(model.right)}",
            f"value\t{_fmt(model.value)}",
            f"n_samples\t{_ints(model.n_samples)}",
        ]
    else:
        lines += [
            f"lam\t{float(model.hp.lam)!r}",
            f"epochs\t{model.hp.epochs}",
            f"class_weighting\t{int(model.hp.class_weighting)}",
            f"w\t{_fmt(model.w)}",
            f"b\t{float(model.b)!r}",
        ]
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> _Model:
    fields = {}
    for line in text.splitlines():
        if line:
            key, _, rest = line.partition("\t")
            fields[key] = rest
    if fields.get("gwofi-model") != str(FORMAT_VERSION):
        raise DataError("not a gwofi model file or unsupported version")

    def floats(key):
        return np.array([float(v) for v in fields[key].split()], dtype=float)

    def ints(key):
        return np.array([int(v) for v in fields[key].split()], dtype=int)

    def matrix(key):
        width, _, rest = fields[key].partition("\t")
        vals = np.array([float(v) for v in rest.split()], dtype=float)
        return vals.reshape(2, int(width))

    kind = fields["kind"]
    seed = int(fields["seed"])
    if kind == NAIVE_BAYES:
        return NaiveBayesModel(
            NaiveBayesParams(float(fields["alpha"])),
            floats("log_prior"),
            ints("binary").astype(bool),
            matrix("p_one"),
            matrix("mean"),
            matrix("var"),
            seed,
        )
    if kind == DECISION_TREE:
        return TreeModel(
            TreeParams(int(fields["max_depth"]), int(fields["min_leaf"])),
            ints("feature"),
            floats("threshold"),
            ints("left"),
            ints("right"),
            floats("value").reshape(-1, 2),
            ints("n_samples"),
            int(fields["n_features"]),
            seed,
        )
    if kind == LINEAR_SVM:
        return LinearModel(
            SvmParams(float(fields["lam"]), int(fields["epochs"]), fields["class_weighting"] == "1"),
            floats("w"),
            float(fields["b"]),
            seed,
        )
    raise DataError(f"unknown model kind {kind!r}")
