import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfret import errors
from surfret.descriptor import Descriptor
from surfret.retrieval import QueryError, batch_classify, build_index, classify_nn


def _index(vectors, volumes, labels=None, ids=None):
    n = len(vectors)
    ids = ids or [f"t{i:03d}" for i in range(n)]
    labels = labels or [f"c{i}" for i in range(n)]
    return build_index(zip(ids, labels, np.asarray(vectors, float), volumes))


def test_build_examples():
    rng = np.random.default_rng(0)
    assert len(_index(rng.random((2, 363)), [1, 1])) == 2
    with pytest.raises(errors.DimensionMismatch):
        build_index([("a", "X", np.zeros(363), 1.0), ("b", "Y", np.zeros(121), 1.0)])
    with pytest.raises(errors.DuplicateId):
        build_index([("p1", "X", np.zeros(3), 1.0), ("p1", "Y", np.ones(3), 1.0)])
    with pytest.raises(errors.EmptyIndex):
        build_index([])
    with pytest.raises(ValueError):
        build_index([("p1", "X", np.zeros(3), 0.0)])


def test_classify_examples():
    idx = _index([[0, 0], [1, 0]], [1, 1], labels=["X", "Y"])
    assert classify_nn(([0.1, 0], 1.0), idx).predicted_label == "X"

    # volume 130 at distance 0.1 is excluded, 110 at distance 0.5 is kept
    idx = _index([[0.1, 0], [0.5, 0]], [130, 110], labels=["X", "Y"])
    r = classify_nn(([0, 0], 100.0), idx)
    assert r.predicted_label == "Y" and not r.waived
    assert r.excluded.tolist() == [True, False]
    assert r.nearest_distance == pytest.approx(0.5)

    # everything excluded: nearest overall, flagged
    r = classify_nn(([0, 0], 10.0), idx)
    assert r.waived and r.predicted_label == "X" and r.excluded.all()


def test_ranking_invariants():
    rng = np.random.default_rng(1)
    idx = _index(rng.random((50, 6)), rng.uniform(80, 120, 50))
    r = classify_nn((rng.random(6), 100.0), idx)
    kept = r.distances[~r.excluded]
    assert np.all(np.diff(kept) >= 0) and np.all(np.diff(r.distances) >= 0)
    assert r.predicted_label == np.array(r.labels)[~r.excluded][0]


def test_ties_broken_by_id_regardless_of_insertion_order():
    rows = [("b", "B", np.ones(3), 1.0), ("a", "A", np.ones(3), 1.0), ("c", "C", np.ones(3), 1.0)]
    for perm in ([0, 1, 2], [2, 1, 0], [1, 2, 0]):
        r = classify_nn((np.zeros(3), 1.0), build_index([rows[i] for i in perm]))
        assert r.train_ids == ("a", "b", "c") and r.predicted_label == "A"


def test_query_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatch):
        classify_nn((np.zeros(4), 1.0), _index(np.zeros((2, 3)) + [[0], [1]], [1, 1]))


def test_accepts_descriptor_objects():
    idx = _index([[0, 0], [1, 0]], [5, 5], labels=["X", "Y"])
    assert classify_nn(Descriptor("m", [0.9, 0], 5.0), idx).predicted_label == "Y"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_infinite_tolerance_is_plain_nearest_neighbour(seed):
    rng = np.random.default_rng(seed)
    n, d = rng.integers(1, 30), rng.integers(1, 8)
    vecs = rng.integers(0, 3, (n, d)).astype(float)        # small lattice forces ties
    vols = rng.uniform(1, 1000, n)
    idx = _index(vecs, vols)
    q = rng.integers(0, 3, d).astype(float)
    r = classify_nn((q, rng.uniform(1, 1000)), idx, np.inf)
    best = min(range(n), key=lambda i: (np.sqrt(((vecs[i] - q) ** 2).sum()), f"t{i:03d}"))
    assert r.nearest_id == f"t{best:03d}" and not r.waived


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_excluded_entries_do_not_matter(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 25))
    vecs, vols = rng.random((n, 4)), rng.uniform(50, 150, n)
    ids = [f"t{i:03d}" for i in range(n)]
    q = (rng.random(4), 100.0)
    full = classify_nn(q, _index(vecs, vols, ids=ids))
    if full.waived:
        return
    keep = [i for i in range(n) if ids[i] in set(np.array(full.train_ids)[~full.excluded])]
    sub = classify_nn(q, _index(vecs[keep], vols[keep], labels=[f"c{i}" for i in keep],
                                ids=[ids[i] for i in keep]))
    assert sub.train_ids == tuple(np.array(full.train_ids)[~full.excluded])
    assert np.array_equal(sub.distances, full.distances[~full.excluded])
    assert (sub.predicted_label, sub.nearest_id) == (full.predicted_label, full.nearest_id)


def test_keep_truncates_after_allowed_entries():
    idx = _index([[0.1], [0.2], [0.3], [0.4]], [500, 100, 500, 100])
    r = classify_nn(([0.0], 100.0), idx, keep=1)
    assert r.train_ids == ("t000", "t001")
    assert r.nearest_id == "t001"


def test_other_denominators():
    idx = _index([[0.0]], [125.0])
    assert classify_nn(([0.0], 100.0), idx, denominator="max").excluded.tolist() == [False]
    assert classify_nn(([0.0], 100.0), idx, denominator="min").excluded.tolist() == [True]


def test_batch_examples_and_equivalence():
    rng = np.random.default_rng(2)
    idx = _index(rng.random((40, 5)), rng.uniform(80, 120, 40))
    assert batch_classify([], idx) == []
    queries = [(rng.random(5), v) for v in (90.0, 100.0, 110.0)]
    out = batch_classify(queries, idx, ids=["a", "b", "c"])
    assert [r.query_id for r in out] == ["a", "b", "c"]
    many = [(rng.random(5), rng.uniform(50, 150)) for _ in range(60)]
    seq = [classify_nn(q, idx) for q in many]
    assert batch_classify(many, idx) == seq
    assert batch_classify(many, idx, jobs=4) == seq


def test_batch_records_per_item_errors():
    idx = _index(np.eye(3), [1, 1, 1])
    out = batch_classify([(np.zeros(3), 1.0), (np.zeros(2), 1.0), (np.ones(3), 1.0)], idx)
    assert isinstance(out[1], QueryError) and out[1].position == 1
    assert isinstance(out[1].error, errors.DimensionMismatch)
    assert not isinstance(out[0], QueryError) and not isinstance(out[2], QueryError)
