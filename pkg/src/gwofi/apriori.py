"""Levelwise frequent-itemset mining, rule generation and null-invariant measures.

Counting is done on vertical bitmasks: each token owns a Python ``int`` whose
bit *i* is set when transaction *i* contains the token, so the support count
of an itemset is the popcount of the AND of its members' masks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dataset import TransactionSet
from .errors import ConfigError, CountConsistencyError, UndefinedSupportError

MEASURES = (
    "support",
    "confidence",
    "max_confidence",
    "kulczynski",
    "cosine",
    "imbalance_ratio",
)
RANK_KEYS = MEASURES + ("count",)
TSV_COLUMNS = ("antecedent", "consequent", "support", "count") + MEASURES[1:]


@dataclass(frozen=True)
class Itemset:
    items: tuple[str, ...]
    count: int
    n: int

    def __post_init__(self):
        items = tuple(sorted(set(self.items)))
        if len(items) != len(self.items):
            raise ValueError(f"duplicate items in {self.items}")
        object.__setattr__(self, "items", items)
        if not 0 <= self.count <= self.n:
            raise CountConsistencyError(f"count {self.count} outside [0, {self.n}]")

    @property
    def support(self) -> float:
        return self.count / self.n

    def __len__(self):
        return len(self.items)

    @property
    def label(self) -> str:
        return "{" + ",".join(self.items) + "}"


@dataclass(frozen=True)
class MeasureSet:
    support: float
    confidence: float
    max_confidence: float
    kulczynski: float
    cosine: float
    imbalance_ratio: float

    def get(self, name: str) -> float:
        if name not in MEASURES:
            raise ConfigError(f"unknown measure {name!r}; choose from {', '.join(MEASURES)}")
        return getattr(self, name)


def compute_measures(n_a: int, n_b: int, n_ab: int, n: int) -> MeasureSet:
    """Rule measures for A -> B from integer counts.

    ``n_a`` and ``n_b`` count transactions containing A and B, ``n_ab`` those
    containing both, ``n`` all transactions.  Everything except support is
    independent of ``n``.
    """
    if n_a <= 0 or n_b <= 0 or n_ab < 0 or n_ab > min(n_a, n_b) or max(n_a, n_b) > n:
        raise CountConsistencyError(
            f"inconsistent counts n_A={n_a}, n_B={n_b}, n_AB={n_ab}, n={n}"
        )
    conf_ab = n_ab / n_a
    conf_ba = n_ab / n_b
    return MeasureSet(
        support=n_ab / n,
        confidence=conf_ab,
        max_confidence=max(conf_ab, conf_ba),
        kulczynski=(conf_ab + conf_ba) / 2,
        cosine=n_ab / math.sqrt(n_a * n_b),
        imbalance_ratio=abs(n_a - n_b) / (n_a + n_b - n_ab),
    )


@dataclass(frozen=True)
class MiningConfig:
    min_support: float = 0.005
    max_len: int = 4
    min_confidence: float = 0.0
    consequent_whitelist: frozenset = frozenset()
    antecedent_max_len: int | None = None
    # antecedent tokens must come from these columns (None = any column)
    antecedent_columns: frozenset | None = None
    # antecedent tokens must carry this value, e.g. "yes"
    antecedent_value: str | None = None

    def __post_init__(self):
        if not 0 < self.min_support <= 1:
            raise ConfigError(f"min_support must lie in (0, 1], got {self.min_support}")
        if self.max_len < 1:
            raise ConfigError(f"max_len must be >= 1, got {self.max_len}")
        if not 0 <= self.min_confidence <= 1:
            raise ConfigError(f"min_confidence must lie in [0, 1], got {self.min_confidence}")
        if self.antecedent_max_len is not None and self.antecedent_max_len < 1:
            raise ConfigError("antecedent_max_len must be >= 1")
        object.__setattr__(self, "consequent_whitelist", frozenset(self.consequent_whitelist))
        if self.antecedent_columns is not None:
            object.__setattr__(self, "antecedent_columns", frozenset(self.antecedent_columns))


@dataclass(frozen=True)
class AssociationRule:
    antecedent: Itemset
    consequent: Itemset
    joint_count: int
    measures: MeasureSet = field(compare=False)

    @property
    def label(self) -> str:
        return f"{self.antecedent.label} => {self.consequent.label}"


def min_count_for(min_support: float, n: int) -> int:
    """Smallest integer c with c / n >= min_support."""
    c = max(0, math.ceil(min_support * n))
    while c > 0 and (c - 1) / n >= min_support:
        c -= 1
    while c / n < min_support:
        c += 1
    return c


def count_itemset(items: Iterable[str], t: TransactionSet) -> int:
    masks = t.masks
    acc = (1 << t.n) - 1
    for item in items:
        acc &= masks.get(item, 0)
        if not acc:
            return 0
    return acc.bit_count()


def itemset_support(items: Iterable[str], t: TransactionSet) -> float:
    """Fraction of transactions containing every item (1.0 for no items)."""
    if t.n == 0:
        raise UndefinedSupportError("support is undefined on an empty transaction set")
    return count_itemset(items, t) / t.n


def mine_frequent(t: TransactionSet, cfg: MiningConfig) -> list[Itemset]:
    """All itemsets of size 1..max_len with support >= min_support.

    Candidates of size k+1 come from joining size-k itemsets that share their
    first k-1 (sorted) items; a candidate survives only if all its size-k
    subsets were frequent.  Output is ordered by (size, items).
    """
    if t.n == 0:
        return []
    return mine_with_count(t, min_count_for(cfg.min_support, t.n), cfg.max_len)


def mine_with_count(t: TransactionSet, threshold: int, max_len: int, n: int | None = None) -> list[Itemset]:
    """Levelwise mining with an absolute count threshold.

    ``n`` is the reference size stored on the itemsets; it defaults to
    ``t.n`` and may be larger when ``t`` is a projection of a bigger set.
    """
    n = t.n if n is None else n
    threshold = max(threshold, 1)
    masks = t.masks
    level = {
        (item,): mask for item, mask in masks.items() if mask.bit_count() >= threshold
    }
    out: list[Itemset] = []
    k = 1
    while level:
        keys = sorted(level)
        out.extend(Itemset(key, level[key].bit_count(), n) for key in keys)
        if k >= max_len:
            break
        nxt: dict[tuple, int] = {}
        for i, a in enumerate(keys):
            prefix = a[:-1]
            for b in keys[i + 1:]:
                if b[:-1] != prefix:
                    break
                cand = a + (b[-1],)
                if any(cand[:j] + cand[j + 1:] not in level for j in range(k - 1)):
                    continue
                mask = level[a] & level[b]
                if mask.bit_count() >= threshold:
                    nxt[cand] = mask
        level = nxt
        k += 1
    return out


def token_allowed(token: str, cfg: MiningConfig) -> bool:
    """Whether ``token`` may appear in an antecedent under ``cfg``."""
    column, _, value = token.partition("=")
    if cfg.antecedent_columns is not None and column not in cfg.antecedent_columns:
        return False
    return cfg.antecedent_value is None or value == cfg.antecedent_value


def _antecedent_ok(x: Sequence[str], cfg: MiningConfig) -> bool:
    if cfg.antecedent_max_len is not None and len(x) > cfg.antecedent_max_len:
        return False
    return all(token_allowed(i, cfg) for i in x)


def generate_rules(
    frequent: Sequence[Itemset], t: TransactionSet, cfg: MiningConfig
) -> list[AssociationRule]:
    """Rules X -> {y} for every frequent itemset holding a whitelisted token y.

    X is the rest of the itemset and must be non-empty.  Antecedent
    constraints and ``min_confidence`` from ``cfg`` are applied.
    """
    whitelist = cfg.consequent_whitelist
    if not whitelist:
        return []
    known = {s.items: s.count for s in frequent}

    def count_of(items):
        if items not in known:
            known[items] = count_itemset(items, t)
        return known[items]

    rules = []
    for s in frequent:
        for y in s.items:
            if y not in whitelist:
                continue
            x = tuple(i for i in s.items if i != y)
            if not x or not _antecedent_ok(x, cfg):
                continue
            n_x = count_of(x)
            n_y = count_of((y,))
            m = compute_measures(n_x, n_y, s.count, t.n)
            if m.confidence < cfg.min_confidence:
                continue
            rules.append(AssociationRule(Itemset(x, n_x, t.n), Itemset((y,), n_y, t.n), s.count, m))
    return rules


def rank_rules(rules: Iterable[AssociationRule], key: str = "max_confidence") -> list[AssociationRule]:
    """Descending by ``key``; ties by higher count, then antecedent, then consequent."""
    if key not in RANK_KEYS:
        raise ConfigError(f"unknown ranking key {key!r}; choose from {', '.join(RANK_KEYS)}")

    def sort_key(r: AssociationRule):
        value = r.joint_count if key == "count" else r.measures.get(key)
        return (-value, -r.joint_count, r.antecedent.items, r.consequent.items)

    return sorted(rules, key=sort_key)


def rules_to_tsv(rules: Iterable[AssociationRule]) -> str:
    lines = ["\t".join(TSV_COLUMNS)]
    for r in rules:
        m = r.measures
        lines.append("\t".join([
            r.antecedent.label,
            r.consequent.label,
            f"{m.support:.4f}",
            str(r.joint_count),
            f"{m.confidence:.4f}",
            f"{m.max_confidence:.4f}",
            f"{m.kulczynski:.4f}",
            f"{m.cosine:.4f}",
            f"{m.imbalance_ratio:.4f}",
        ]))
    return "\n".join(lines) + "\n"


def read_rules_tsv(text: str) -> list[dict]:
    """Parse a rule report back into dicts (items as tuples, numbers as floats)."""
    lines = [ln for ln in text.splitlines() if ln]
    header = lines[0].split("\t")
    if tuple(header) != TSV_COLUMNS:
        raise ValueError(f"unexpected rule report header: {header}")
    rows = []
    for ln in lines[1:]:
        cells = dict(zip(header, ln.split("\t")))
        row = {
            "antecedent": tuple(cells["antecedent"].strip("{}").split(",")),
            "consequent": tuple(cells["consequent"].strip("{}").split(",")),
            "count": int(cells["count"]),
        }
        for name in MEASURES:
            row[name] = float(cells[name])
        rows.append(row)
    return rows


def itemsets_to_tsv(itemsets: Iterable[Itemset]) -> str:
    lines = ["itemset\tsize\tcount\tsupport"]
    for s in itemsets:
        lines.append(f"{s.label}\t{len(s)}\t{s.count}\t{s.support:.6f}")
    return "\n".join(lines) + "\n"
