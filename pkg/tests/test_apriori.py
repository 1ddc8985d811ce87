import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from gwofi.apriori import (
    MEASURES,
    AssociationRule,
    Itemset,
    MeasureSet,
    MiningConfig,
    compute_measures,
    count_itemset,
    generate_rules,
    itemset_support,
    min_count_for,
    mine_frequent,
    rank_rules,
    read_rules_tsv,
    rules_to_tsv,
)
from gwofi.dataset import TransactionSet
from gwofi.errors import ConfigError, CountConsistencyError, UndefinedSupportError
from oracles import powerset_frequent, rule_decompositions, set_measures

FIVE_PATIENTS = [
    {"HTN=yes", "ChestPain=yes"},
    {"HTN=yes", "ChestPain=yes"},
    {"HTN=no", "ChestPain=yes"},
    {"HTN=yes", "ChestPain=no"},
    {"HTN=no", "ChestPain=no"},
]


def ts(rows):
    return TransactionSet.from_iterable(rows)


def random_transactions(rng, n_items, n_rows, density):
    items = [f"i{k:02d}" for k in range(n_items)]
    return [{i for i in items if rng.random() < density} for _ in range(n_rows)]


# ------------------------------------------------------------------- mining

def test_five_patient_counts():
    found = {s.items: s for s in mine_frequent(ts(FIVE_PATIENTS), MiningConfig(0.1, 2))}
    assert found[("HTN=yes",)].count == 3
    assert found[("HTN=yes",)].support == pytest.approx(0.6)
    pair = found[("ChestPain=yes", "HTN=yes")]
    assert pair.count == 2 and pair.support == pytest.approx(0.4)


def test_full_support_without_shared_item():
    assert mine_frequent(ts(FIVE_PATIENTS), MiningConfig(1.0, 3)) == []


def test_empty_transaction_set():
    assert mine_frequent(ts([]), MiningConfig()) == []


def test_output_order_is_size_then_items():
    out = mine_frequent(ts(FIVE_PATIENTS), MiningConfig(0.2, 2))
    keys = [(len(s), s.items) for s in out]
    assert keys == sorted(keys)


@pytest.mark.parametrize("case", range(40))
def test_matches_powerset_oracle(case):
    rng = random.Random(case)
    rows = random_transactions(rng, rng.randint(1, 10), rng.randint(1, 120), rng.uniform(0.2, 0.7))
    ms = rng.choice([0.05, 0.1, 0.25, 0.4, 1 / 3])
    max_len = rng.randint(1, 4)
    mined = {s.items: s.count for s in mine_frequent(ts(rows), MiningConfig(ms, max_len))}
    assert mined == powerset_frequent(rows, ms, max_len)


def test_min_count_boundary():
    # 0.3 * 10 is 3.0000000000000004 in binary floating point
    assert min_count_for(0.3, 10) == 3
    for n in range(1, 60):
        for ms in (0.01, 0.1, 0.3, 0.5, 0.7, 1.0):
            c = min_count_for(ms, n)
            assert c / n >= ms and (c == 0 or (c - 1) / n < ms)


# ------------------------------------------------------------------ support

def test_support_truncated_to_four_places():
    # 163/2816 = 0.057883, which truncates (not rounds) to 0.0578
    s = Itemset(("a",), 163, 2816).support
    assert math.floor(s * 1e4) / 1e4 == 0.0578
    assert s == pytest.approx(0.0578, abs=1e-4)


def test_support_edge_cases():
    t = ts(FIVE_PATIENTS)
    assert itemset_support((), t) == 1.0
    assert itemset_support(("Smoker=yes",), t) == 0.0
    with pytest.raises(UndefinedSupportError):
        itemset_support(("a",), ts([]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sets(st.sampled_from("abcde")), min_size=1, max_size=30),
       st.sets(st.sampled_from("abcde"), max_size=3))
def test_count_matches_scan(rows, items):
    assert count_itemset(items, ts(rows)) == sum(1 for r in rows if items <= r)


# ----------------------------------------------------------------- measures

@pytest.mark.parametrize("counts, expected", [
    ((315, 172, 163, 2816), dict(support=0.0579, confidence=0.5175, max_confidence=0.9477,
                                 kulczynski=0.7326, cosine=0.7003, imbalance_ratio=0.4413)),
    ((83, 172, 57, 2816), dict(confidence=0.6867, max_confidence=0.6867, kulczynski=0.5090,
                               cosine=0.4771, imbalance_ratio=0.4495)),
    ((2807, 2644, 2638, 2816), dict(confidence=0.9398, max_confidence=0.9977, kulczynski=0.9688,
                                    cosine=0.9683, imbalance_ratio=0.0579)),
])
def test_fixed_rule_measures(counts, expected):
    m = compute_measures(*counts)
    for name, value in expected.items():
        assert m.get(name) == pytest.approx(value, abs=1e-3), name


def test_identical_sets():
    m = compute_measures(40, 40, 40, 100)
    assert (m.confidence, m.max_confidence, m.kulczynski, m.cosine) == (1, 1, 1, 1)
    assert m.imbalance_ratio == 0


@pytest.mark.parametrize("counts", [(0, 5, 0, 10), (5, 5, 6, 10), (5, 20, 3, 10), (5, 5, -1, 10)])
def test_inconsistent_counts(counts):
    with pytest.raises(CountConsistencyError):
        compute_measures(*counts)


def test_unknown_measure_name():
    with pytest.raises(ConfigError):
        compute_measures(2, 2, 1, 4).get("lift")


@st.composite
def count_quads(draw):
    n_ab = draw(st.integers(0, 200))
    n_a = n_ab + draw(st.integers(0, 200))
    n_b = n_ab + draw(st.integers(0, 200))
    if n_a == 0 or n_b == 0:
        n_a, n_b = n_a + 1, n_b + 1
    n = n_a + n_b - n_ab + draw(st.integers(0, 500))
    return n_a, n_b, n_ab, n


@settings(max_examples=200)
@given(count_quads())
def test_measure_ranges(q):
    m = compute_measures(*q)
    for name in MEASURES:
        assert 0.0 <= m.get(name) <= 1.0 + 1e-12
    assert m.confidence <= m.max_confidence
    assert m.cosine <= m.max_confidence + 1e-12


@settings(max_examples=100)
@given(count_quads())
def test_measures_match_set_oracle(q):
    n_a, n_b, n_ab, n = q
    a = set(range(n_a))
    b = set(range(n_a - n_ab, n_a - n_ab + n_b))
    expected = set_measures(a, b, n)
    m = compute_measures(n_a, n_b, n_ab, n)
    for name, value in expected.items():
        assert m.get(name) == pytest.approx(value, abs=1e-12)


# -------------------------------------------------------------------- rules

def test_empty_whitelist():
    t = ts(FIVE_PATIENTS)
    assert generate_rules(mine_frequent(t, MiningConfig(0.1, 2)), t, MiningConfig(0.1, 2)) == []


def test_single_antecedent_mode():
    t = ts(FIVE_PATIENTS)
    cfg = MiningConfig(0.1, 3, consequent_whitelist={"HTN=yes"}, antecedent_max_len=1)
    rules = generate_rules(mine_frequent(t, cfg), t, cfg)
    assert rules and all(len(r.antecedent) == 1 for r in rules)


@pytest.mark.parametrize("case", range(20))
def test_rule_count_matches_decompositions(case):
    rng = random.Random(100 + case)
    rows = random_transactions(rng, rng.randint(2, 8), rng.randint(10, 80), 0.5)
    t = ts(rows)
    whitelist = set(rng.sample(t.items, min(2, len(t.items))))
    cfg = MiningConfig(0.1, 3, consequent_whitelist=whitelist)
    rules = generate_rules(mine_frequent(t, cfg), t, cfg)
    expected = rule_decompositions(powerset_frequent(rows, 0.1, 3), whitelist)
    assert {(r.antecedent.items, r.consequent.items[0]) for r in rules} == expected


def test_antecedent_filters():
    rows = [{"Drug=yes", "Age=old", "Out=dead"}, {"Drug=no", "Age=old", "Out=dead"},
            {"Drug=yes", "Age=young", "Out=alive"}]
    t = ts(rows)
    cfg = MiningConfig(0.1, 3, consequent_whitelist={"Out=dead"},
                       antecedent_columns={"Drug"}, antecedent_value="yes")
    rules = generate_rules(mine_frequent(t, cfg), t, cfg)
    assert [r.antecedent.items for r in rules] == [("Drug=yes",)]


def test_min_confidence_filter():
    t = ts(FIVE_PATIENTS)
    cfg = MiningConfig(0.1, 2, min_confidence=0.6, consequent_whitelist={"ChestPain=yes"})
    rules = generate_rules(mine_frequent(t, cfg), t, cfg)
    assert rules and all(r.measures.confidence >= 0.6 for r in rules)


# ------------------------------------------------------------------ ranking

def _rule(x, y, count, max_conf):
    m = MeasureSet(0.1, max_conf, max_conf, 0.5, 0.5, 0.1)
    return AssociationRule(Itemset((x,), 10, 100), Itemset((y,), 10, 100), count, m)


def test_rank_descending():
    rules = [_rule("a", "y", 1, 0.9), _rule("b", "y", 1, 0.95), _rule("c", "y", 1, 0.5)]
    assert [r.measures.max_confidence for r in rank_rules(rules)] == [0.95, 0.9, 0.5]


def test_rank_ties_by_count():
    rules = [_rule("a", "y", 3, 0.8), _rule("b", "y", 7, 0.8), _rule("c", "y", 5, 0.8)]
    assert [r.joint_count for r in rank_rules(rules)] == [7, 5, 3]


def test_rank_unknown_key():
    with pytest.raises(ConfigError):
        rank_rules([], "lift")


@pytest.mark.parametrize("seed", range(10))
def test_rank_is_permutation_invariant(seed):
    rng = random.Random(seed)
    rules = [_rule(f"x{i}", "y", rng.randint(1, 3), rng.choice([0.5, 0.7, 0.9])) for i in range(25)]
    ref = rank_rules(rules)
    shuffled = rules[:]
    rng.shuffle(shuffled)
    assert rank_rules(shuffled) == ref


def test_tsv_round_trip():
    t = ts(FIVE_PATIENTS)
    cfg = MiningConfig(0.1, 2, consequent_whitelist={"ChestPain=yes"})
    rules = rank_rules(generate_rules(mine_frequent(t, cfg), t, cfg))
    rows = read_rules_tsv(rules_to_tsv(rules))
    assert [r["antecedent"] for r in rows] == [r.antecedent.items for r in rules]
    assert all(abs(row["max_confidence"] - r.measures.max_confidence) < 5e-5 for row, r in zip(rows, rules))
