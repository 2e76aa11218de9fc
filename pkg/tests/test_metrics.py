import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subalign.corpus import AlignmentSet, GoldAlignment
from subalign.metrics import InvalidGoldError, Metrics, score

link_sets = st.sets(st.tuples(st.integers(0, 4), st.integers(0, 5), st.integers(0, 5)), max_size=30)


def test_formula_case():
    gold = GoldAlignment.from_links([(0, 0, 0), (0, 1, 1), (0, 2, 2)], [(0, 3, 3)])
    pred = AlignmentSet([(0, 0, 0), (0, 1, 1), (0, 3, 3), (0, 4, 4)])
    m = score(pred, gold)
    assert (m.n_predicted, m.n_predicted_possible, m.n_predicted_sure, m.n_sure) == (4, 3, 2, 3)
    assert m.precision == pytest.approx(0.75, abs=1e-12)
    assert m.recall == pytest.approx(2 / 3, abs=1e-12)
    assert m.f1 == pytest.approx(12 / 17, abs=1e-12)


def test_perfect():
    gold = GoldAlignment.from_links([(0, 0, 0), (1, 1, 0)])
    m = score(gold.sure, gold)
    assert m.precision == m.recall == m.f1 == 1.0


def test_disjoint():
    gold = GoldAlignment.from_links([(0, 0, 0)])
    m = score(AlignmentSet([(0, 1, 1)]), gold)
    assert m.precision == 0.0 and m.f1 == 0.0


def test_empty_prediction():
    m = score(AlignmentSet(), GoldAlignment.from_links([(0, 0, 0)]))
    assert m.precision == 0.0 and m.f1 == 0.0


def test_no_sure_links_rejected():
    with pytest.raises(InvalidGoldError):
        score(AlignmentSet(), GoldAlignment.from_links([], [(0, 0, 0)]))


def test_export():
    m = Metrics.from_counts(4, 3, 2, 3)
    doc = json.loads(m.to_json(seed=3))
    assert doc["seed"] == 3 and doc["n_predicted"] == 4
    header, row = m.to_csv().splitlines()
    assert header.split(",") == list(m.to_dict())


@settings(max_examples=300)
@given(link_sets, link_sets, link_sets, st.sets(st.tuples(st.integers(5, 9), st.integers(0, 5), st.integers(0, 5))))
def test_properties(sure, extra_possible, pred, noise):
    if not sure:
        return
    gold = GoldAlignment.from_links(sure, extra_possible)
    a = AlignmentSet(pred)
    m = score(a, gold)
    # links on sentences outside gold coverage are ignored
    assert score(a | AlignmentSet(noise), gold) == m
    assert 0 <= m.f1 <= 2 * min(m.precision, m.recall) + 1e-12
    for link in set(gold.possible) - set(a):
        assert score(a | AlignmentSet([link]), gold).precision >= m.precision - 1e-12
    for link in set(gold.sure) - set(a):
        assert score(a | AlignmentSet([link]), gold).recall >= m.recall - 1e-12
