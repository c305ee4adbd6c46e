import warnings
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selgames.cp import (
    ConstantE,
    ConstantG,
    GenericEval,
    Nbhd,
    Reindexed,
    closure_contains_e,
    finite_illegal,
    in_nbhd,
    shrinking_family,
    sublevel,
    test_family as make_test_family,
    test_function as make_test_function,
    with_full_sublevel,
)
from selgames.errors import ApproximateOnly, BudgetExhausted
from selgames.groups import CIRCLE, PRODUCT, REAL_LINE
from selgames.spaces import (
    CONVERGENT_SEQUENCE,
    RATIONAL_INTERVAL,
    AffineMap,
    Empty,
    PointComplement,
    Whole,
    ball_cover,
    ball_union,
    canonical_u0,
    contains,
    covers_whole,
    finite_cover,
)

X = RATIONAL_INTERVAL
GRID = (Q(1), Q(1, 2), Q(1, 4), Q(1, 8))
HALF_BALL = ball_union([(Q(0), Q(1, 2))])


def example_fn(G=REAL_LINE):
    return make_test_function([Q(0)], HALF_BALL, X, G)


def test_test_function_examples():
    f = example_fn()
    assert f.eval(Q(0)) == REAL_LINE.identity
    assert f.eval(Q(3, 4)) == REAL_LINE.marked
    assert f.eval(Q(1, 4)) == Q(1, 2)


def test_in_nbhd_examples():
    assert in_nbhd(ConstantE(X, REAL_LINE), Nbhd((Q(1, 3),), Q(1, 100)))
    g = ConstantG(X, REAL_LINE, REAL_LINE.marked)
    assert not in_nbhd(g, Nbhd((Q(0),), REAL_LINE.separation))
    f = example_fn()
    assert not in_nbhd(f, Nbhd((Q(1, 4),), Q(1, 2)))
    assert in_nbhd(f, Nbhd((Q(1, 4),), Q(3, 4)))


def test_generic_eval_is_flagged():
    f = GenericEval(X, REAL_LINE, lambda x: x, "id")
    with pytest.warns(ApproximateOnly):
        in_nbhd(f, Nbhd((Q(0),), Q(1)))
    with pytest.warns(ApproximateOnly):
        sublevel(f, 2)


def test_closure_examples():
    assert closure_contains_e(make_test_family(canonical_u0(X), X, REAL_LINE), 8, 2, GRID)
    illegal = finite_illegal([ConstantG(X, REAL_LINE, REAL_LINE.marked)])
    result = closure_contains_e(illegal, 8, 2, GRID)
    assert not result and result.failed.eps <= REAL_LINE.separation
    assert closure_contains_e(shrinking_family(X, REAL_LINE), 8, 2, GRID)


def test_closure_lazy_budget():
    with pytest.raises(BudgetExhausted):
        closure_contains_e(shrinking_family(X, REAL_LINE), 4, 1, (Q(1, 1000),), budget=16)


def test_sublevel_examples():
    assert sublevel(ConstantE(X, REAL_LINE), 3) == Whole()
    assert sublevel(ConstantG(X, REAL_LINE, REAL_LINE.marked), 1) == Empty()
    assert sublevel(example_fn(), 4) == ball_union([(Q(0), Q(1, 8))])
    # 1/n above the whole arc: the sublevel is everything
    assert sublevel(example_fn(CIRCLE), 1) == Whole()


def test_with_full_sublevel_contains_whole_sublevel():
    fam = with_full_sublevel(ball_cover(X, 2), X, REAL_LINE)
    assert any(covers_whole(sublevel(f, 2), X) for _, f in fam.members(16))


def test_family_never_contains_e():
    for fam in (make_test_family(canonical_u0(X), X, REAL_LINE), shrinking_family(X, CIRCLE),
                with_full_sublevel(ball_cover(X, 1), X, PRODUCT)):
        assert not any(isinstance(f, ConstantE) for _, f in fam.members(64))


def test_test_family_is_exhaustive_over_pairs():
    cover = finite_cover([PointComplement(Q(1)), PointComplement(Q(0))])
    fam = make_test_family(cover, X, REAL_LINE)
    seen = {(f.cover_index, f.F) for _, f in fam.members(400)}
    # every subset of the first four points lying in each member appears
    for q, U in cover.members(0):
        inside = [p for p in X.prefix(4) if contains(U, p)]
        assert (q, tuple(sorted(inside))) in seen


def corpus():
    """Test functions over U0, ball covers and a reindexing, on both exact spaces and all groups."""
    out = []
    for space in (RATIONAL_INTERVAL, CONVERGENT_SEQUENCE):
        for G in (REAL_LINE, CIRCLE, PRODUCT):
            for cover in (canonical_u0(space), ball_cover(space, 2)):
                fam = make_test_family(cover, space, G)
                out.extend(f for _, f in fam.members(6))
    inner = make_test_function([Q(1, 2)], ball_union([(Q(1, 2), Q(1, 3))]), X, REAL_LINE)
    out.append(Reindexed(X, AffineMap(Q(-1), Q(1)), inner))
    return out


CORPUS = corpus()


def test_corpus_size():
    assert len(CORPUS) >= 50


@pytest.mark.parametrize("n", range(1, 9))
def test_sublevel_matches_eval_exactly(n):
    eps = Q(1, n)
    for f in CORPUS:
        U = sublevel(f, n)
        for x in f.space.prefix(64):
            assert contains(U, x) == (f.group.norm(f.eval(x)) < eps), (f.descriptor, n, x)


def test_sublevels_are_nested_and_contain_f():
    for f in CORPUS[::5]:
        pts = f.space.prefix(64)
        for n in range(1, 8):
            outer, inner = sublevel(f, n), sublevel(f, n + 1)
            assert all(contains(outer, x) for x in pts if contains(inner, x))
            if hasattr(f, "F"):
                assert all(contains(inner, x) for x in f.F)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 300), st.integers(0, 63))
def test_test_function_off_u_is_g(t, j):
    fam = make_test_family(canonical_u0(CONVERGENT_SEQUENCE), CONVERGENT_SEQUENCE, PRODUCT)
    f = fam.member(t)
    x = CONVERGENT_SEQUENCE.point(j)
    if x in f.F:
        assert f.eval(x) == PRODUCT.identity
    if not contains(f.U, x):
        assert f.eval(x) == PRODUCT.marked


def test_closure_of_test_family_follows_cover():
    for cover in (canonical_u0(X), ball_cover(X, 1)):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert closure_contains_e(make_test_family(cover, X, CIRCLE), 8, 2, GRID)
