import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import j_scalar_loops
from shotsplit.fld import ClassSummary, SegmentSummaries, criterion_J, criterion_from_summaries


def scalars(*values):
    return [np.array([[float(v)]]) for v in values]


def test_scalar_example_in_the_ridge_limit():
    c1, c2 = scalars(0, 2), scalars(4, 6)
    assert j_scalar_loops([0, 2], [4, 6]) == 8.0
    res = criterion_J(c1, c2, ridge=0.0)
    assert res.j == pytest.approx(8.0, abs=1e-6)
    assert res.j_row == res.j_col
    assert res.j == res.j_row + res.j_col


def test_scalar_example_converges_as_ridge_shrinks():
    c1, c2 = scalars(0, 2), scalars(4, 6)
    gaps = [8.0 - criterion_J(c1, c2, ridge=r).j for r in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(g > 0 for g in gaps)
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_default_ridge_value():
    # eps = 1e-6 * 4 + 1e-12 per direction
    expected = 2 * 16 / (4 + 4e-6 + 1e-12)
    assert criterion_J(scalars(0, 2), scalars(4, 6)).j == pytest.approx(expected, rel=1e-14)


def random_class(rng, n, shape=(6, 14), shift=0.0):
    return rng.normal(size=(n,) + shape) + shift


def test_equal_classes_give_zero():
    rng = np.random.default_rng(0)
    c = random_class(rng, 5)
    assert criterion_J(c, c).j == 0.0


def test_swap_symmetry_is_exact():
    rng = np.random.default_rng(1)
    a, b = random_class(rng, 4), random_class(rng, 7, shift=0.5)
    assert criterion_J(a, b).j == criterion_J(b, a).j


def test_translation_invariance():
    rng = np.random.default_rng(2)
    a, b = random_class(rng, 5), random_class(rng, 6, shift=1.0)
    t = rng.normal(size=(6, 14)) * 10
    base = criterion_J(a, b).j
    assert criterion_J(a + t, b + t).j == pytest.approx(base, rel=1e-9)


def test_singletons_are_finite():
    rng = np.random.default_rng(3)
    res = criterion_J(random_class(rng, 1), random_class(rng, 1))
    assert np.isfinite(res.j) and res.j >= 0


def test_identical_singletons_give_zero():
    m = np.ones((1, 6, 14))
    assert criterion_J(m, m).j == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 50.0), st.floats(0.01, 10.0))
def test_separation_is_monotone(gap, extra):
    spread = [-1.0, 0.0, 1.0]
    a = scalars(*spread)
    near = criterion_J(a, scalars(*(v + gap for v in spread))).j
    far = criterion_J(a, scalars(*(v + gap + extra for v in spread))).j
    assert far > near > 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_non_negative_and_split_consistent(n1, n2, seed):
    rng = np.random.default_rng(seed)
    res = criterion_J(random_class(rng, n1, (3, 4)), random_class(rng, n2, (3, 4)))
    assert res.j_row >= 0 and res.j_col >= 0
    assert res.j == res.j_row + res.j_col


def test_matches_textbook_scatters():
    rng = np.random.default_rng(4)
    a, b = random_class(rng, 4, (3, 5)), random_class(rng, 6, (3, 5), shift=0.3)
    m1, m2 = a.mean(0), b.mean(0)
    m = (4 * m1 + 6 * m2) / 10
    sb_col = 4 * (m1 - m).T @ (m1 - m) + 6 * (m2 - m).T @ (m2 - m)
    sw_col = sum((x - m1).T @ (x - m1) for x in a) + sum((x - m2).T @ (x - m2) for x in b)
    sb_row = 4 * (m1 - m) @ (m1 - m).T + 6 * (m2 - m) @ (m2 - m).T
    sw_row = sum((x - m1) @ (x - m1).T for x in a) + sum((x - m2) @ (x - m2).T for x in b)

    def ratio(sb, sw):
        eps = 1e-6 * np.trace(sw) / sw.shape[0] + 1e-12
        return np.trace(np.linalg.inv(sw + eps * np.eye(sw.shape[0])) @ sb)

    res = criterion_J(a, b)
    assert res.j_col == pytest.approx(ratio(sb_col, sw_col), rel=1e-9)
    assert res.j_row == pytest.approx(ratio(sb_row, sw_row), rel=1e-9)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        criterion_J(np.zeros((2, 6, 14)), np.zeros((2, 5, 14)))


def test_empty_class():
    with pytest.raises(ValueError):
        criterion_J(np.zeros((0, 6, 14)), np.zeros((2, 6, 14)))


def test_segment_summaries_match_direct_path():
    stack = np.random.default_rng(5).normal(size=(12, 6, 14))
    table = SegmentSummaries(stack)
    direct = criterion_J(stack[2:5], stack[5:11]).j
    assert table.criterion((2, 5), (5, 11)) == direct
    assert table.summary(2, 5) is table.summary(2, 5)
    with pytest.raises(ValueError):
        table.summary(5, 5)


def test_summary_of_identical_samples_has_zero_scatter():
    s = ClassSummary.from_samples(np.tile(np.linspace(0.3, 7.1, 84).reshape(6, 14), (9, 1, 1)))
    assert np.all(s.scatter_col == 0) and np.all(s.scatter_row == 0)
    res = criterion_from_summaries(s, s)
    assert res.j == 0.0
