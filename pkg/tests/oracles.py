"""Independent reference implementations used as test oracles.

Each function recomputes a quantity the slow, obvious way so the library's
optimized code can be checked against it.
"""
from __future__ import annotations

import itertools
import math


def powerset_frequent(transactions, min_support: float, max_len: int) -> dict[tuple, int]:
    """Every itemset of size 1..max_len with count / n >= min_support, by enumeration."""
    n = len(transactions)
    items = sorted(set().union(*transactions)) if transactions else []
    out = {}
    for k in range(1, max_len + 1):
        for combo in itertools.combinations(items, k):
            s = set(combo)
            count = sum(1 for t in transactions if s <= t)
            if count / n >= min_support:
                out[combo] = count
    return out


def pair_auroc(scores, labels) -> float:
    """Fraction of (positive, negative) pairs ordered correctly; ties score 1/2."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def set_measures(a: set, b: set, n: int) -> dict[str, float]:
    """Rule measures from explicit transaction-id sets."""
    ab = len(a & b)
    ca, cb = ab / len(a), ab / len(b)
    return {
        "support": ab / n,
        "confidence": ca,
        "max_confidence": max(ca, cb),
        "kulczynski": (ca + cb) / 2,
        "cosine": ab / math.sqrt(len(a) * len(b)),
        "imbalance_ratio": abs(len(a) - len(b)) / (len(a) + len(b) - ab),
    }


def tally(y_true, y_pred) -> tuple[int, int, int, int]:
    tp = tn = fp = fn = 0
    for t, p in zip(y_true, y_pred):
        if t == 1 and p == 1:
            tp += 1
        elif t == 0 and p == 0:
            tn += 1
        elif t == 0:
            fp += 1
        else:
            fn += 1
    return tp, tn, fp, fn


def rule_decompositions(frequent: dict[tuple, int], whitelist) -> set[tuple]:
    """All (X, y) with X non-empty, y whitelisted and X + {y} frequent."""
    out = set()
    for items in frequent:
        for y in items:
            if y in whitelist and len(items) > 1:
                out.add((tuple(i for i in items if i != y), y))
    return out
