import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikiease import fit
from wikiease.featurize import FeatureMatrix, ParseError
from wikiease.recommend import (
    AlignmentError,
    InteractionSet,
    align,
    load_interactions,
    recommend_all,
    score_user,
    top_r,
)
from wikiease.vocab import Vocabulary


def test_threshold():
    raw = load_interactions(["u1\te1\t4.0", "u1\te2\t2.0"], 3.5)
    assert raw.users == {"u1": frozenset({"e1"})}


def test_threshold_inclusive():
    assert load_interactions(["u1\te1\t3.5"], 3.5).users["u1"] == {"e1"}


def test_duplicates_collapse():
    assert load_interactions(["u1\te1", "u1\te1"]).users == {"u1": frozenset({"e1"})}


def test_unrated_always_kept():
    raw = load_interactions(["u1\te1", "u2\te2\t1.0"], 3.5)
    assert raw.users == {"u1": frozenset({"e1"})}


@pytest.mark.parametrize("lines", [["u1"], ["u1\te1\tgood"], ["u1\te1\t1\t2"], ["u1\te1\tnan"]])
def test_malformed(lines):
    with pytest.raises(ParseError, match="line 1"):
        load_interactions(lines)


def test_all_filtered_is_error():
    with pytest.raises(ParseError, match="no interactions"):
        load_interactions(["u1\te1\t1.0"], 3.5)


@pytest.fixture
def pair_model(identical_pair):
    return fit(identical_pair, 2.0)


def test_align_intersects():
    raw = load_interactions(["u1\ta", "u1\tzz", "u2\tzz", "u3\tb"])
    inter = align(raw, Vocabulary(["a", "b"]))
    assert inter.users == {"u1": frozenset({0}), "u3": frozenset({1})}
    assert (inter.dropped_entities, inter.dropped_pairs, inter.dropped_users) == (1, 2, 1)


def test_align_identity(pair_model):
    raw = load_interactions(["u1\ta", "u1\tb"])
    inter = align(raw, pair_model)
    assert inter.users == {"u1": frozenset({0, 1})}
    assert inter.dropped_users == inter.dropped_entities == 0


def test_align_no_overlap(pair_model):
    with pytest.raises(AlignmentError, match="no overlap"):
        align(load_interactions(["u1\tx"]), pair_model)


def test_interaction_set_invariants():
    with pytest.raises(ValueError):
        InteractionSet({"u": frozenset()}, Vocabulary(["a"]))
    with pytest.raises(ValueError):
        InteractionSet({"u": frozenset({3})}, Vocabulary(["a"]))


def test_score_user(pair_model):
    np.testing.assert_allclose(score_user({0}, pair_model), [0.0, 0.5])
    np.testing.assert_allclose(score_user({0, 1}, pair_model), [0.5, 0.5])
    np.testing.assert_array_equal(score_user({1}, np.zeros((3, 3))), [0, 0, 0])


def test_score_user_empty(pair_model):
    with pytest.raises(ValueError):
        score_user(set(), pair_model)


@pytest.mark.parametrize(
    "scores, hist, r, expect",
    [
        ([0.0, 0.5], {0}, 1, [1]),
        ([1, 1, 1, 1, 1], set(), 3, [0, 1, 2]),
        ([0.9, 0.5, 0.7], {0}, 2, [2, 1]),
        ([0.9, 0.5, 0.7], {0, 1}, 5, [2]),
        ([0.0, -0.0, 0.0], set(), 3, [0, 1, 2]),
    ],
)
def test_top_r(scores, hist, r, expect):
    assert top_r(np.array(scores, dtype=float), hist, r) == expect


def test_recommend_all(pair_model):
    inter = align(load_interactions(["u1\ta", "u2\ta", "u2\tb"]), pair_model)
    out = recommend_all(inter, pair_model, 5)
    assert out == {"u1": [(1, 0.5)], "u2": []}


score_vecs = st.lists(st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 1)), min_size=1, max_size=25)


@given(score_vecs, st.data())
@settings(max_examples=200, deadline=None)
def test_top_r_properties(scores, data):
    n = len(scores)
    hist = data.draw(st.sets(st.integers(0, n - 1)))
    r1 = data.draw(st.integers(1, n + 2))
    r2 = data.draw(st.integers(r1, n + 3))
    s = np.array(scores)
    a, b = top_r(s, hist, r1), top_r(s, hist, r2)
    assert b[: len(a)] == a
    assert not set(b) & hist
    assert len(b) == min(r2, n - len(hist))
    # brute force: sort candidates by (-score, index)
    brute = sorted((j for j in range(n) if j not in hist), key=lambda j: (-s[j], j))[:r2]
    assert b == brute


@given(st.integers(2, 8), st.data())
@settings(max_examples=50, deadline=None)
def test_score_additive(n, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 10_000)))
    w = rng.normal(size=(n, n))
    np.fill_diagonal(w, 0)
    items = data.draw(st.sets(st.integers(0, n - 1), min_size=2))
    items = sorted(items)
    cut = data.draw(st.integers(1, len(items) - 1))
    h1, h2 = set(items[:cut]), set(items[cut:])
    np.testing.assert_allclose(score_user(h1 | h2, w), score_user(h1, w) + score_user(h2, w), atol=1e-12)
