from fractions import Fraction as Q

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selgames.errors import BudgetExhausted, NotContained, NotProper
from selgames.spaces import (
    CONVERGENT_SEQUENCE,
    RATIONAL_INTERVAL,
    RATIONAL_SQUARE,
    AffineMap,
    BallUnion,
    Empty,
    PointComplement,
    Space,
    Whole,
    ball_cover,
    ball_union,
    canonical_u0,
    contains,
    covers_whole,
    dist,
    distance_to_complement,
    dovetail_subset,
    finite_cover,
    omega_check,
    parse_open_set,
    pick_witness_outside,
    urysohn,
)

SPACES = [RATIONAL_INTERVAL, CONVERGENT_SEQUENCE, RATIONAL_SQUARE]
EXACT_SPACES = [RATIONAL_INTERVAL, CONVERGENT_SEQUENCE]

indices = st.integers(min_value=0, max_value=200)
radii = st.fractions(min_value=Q(1, 64), max_value=Q(1, 2), max_denominator=64)


def test_contains_examples():
    half_ball = ball_union([(Q(0), Q(1, 2))])
    assert contains(half_ball, Q(1, 4))
    assert not contains(PointComplement(Q(1, 3)), Q(1, 3))
    assert not contains(half_ball, Q(1, 2))  # strict at the boundary


@pytest.mark.parametrize("X", SPACES, ids=lambda X: X.name)
def test_enumeration_is_injective_and_in_space(X):
    pts = X.prefix(300)
    assert len(set(pts)) == 300
    assert all(X.is_member(p) for p in pts)


def test_enumeration_orders():
    assert RATIONAL_INTERVAL.prefix(6) == (0, 1, Q(1, 2), Q(1, 3), Q(2, 3), Q(1, 4))
    assert CONVERGENT_SEQUENCE.prefix(4) == (0, 1, Q(1, 2), Q(1, 3))
    assert RATIONAL_SQUARE.point(0) == (0, 0)


@settings(max_examples=60)
@given(indices, indices, indices)
def test_metric_axioms(i, j, k):
    for X in SPACES:
        a, b, c = X.point(i), X.point(j), X.point(k)
        assert dist(a, b) == dist(b, a)
        assert (dist(a, b) == 0) == (a == b)
        assert dist(a, c) <= dist(a, b) + dist(b, c)


def test_dovetail_subsets_are_exhaustive():
    seen = {dovetail_subset(j) for j in range(1, 2 * 64, 2)}
    # every nonempty subset of {0..5} shows up among the odd slots
    assert len([s for s in seen if max(s) < 6]) == 63
    assert dovetail_subset(0) == (0,) and dovetail_subset(4) == (0, 1, 2)


def test_canonical_u0_members_and_witness():
    U0 = canonical_u0(RATIONAL_INTERVAL)
    assert U0.member(0) == PointComplement(RATIONAL_INTERVAL.point(0))
    for n in range(20):
        assert U0.member(n).witness == RATIONAL_INTERVAL.point(n)
    assert omega_check(U0, RATIONAL_INTERVAL, 8, 3)


def test_omega_check_examples():
    assert omega_check(canonical_u0(RATIONAL_INTERVAL), RATIONAL_INTERVAL, 6, 2, budget=64).ok
    single = finite_cover([ball_union([(Q(0), Q(1, 2))])])
    result = omega_check(single, RATIONAL_INTERVAL, 6, 1)
    assert result.counterexample == (Q(1),)  # first enumerated x with x >= 1/2
    improper = omega_check(finite_cover([Whole()]), RATIONAL_INTERVAL, 4, 1)
    assert not improper and improper.improper == Whole()


def test_omega_check_lazy_budget():
    with pytest.raises(BudgetExhausted) as info:
        omega_check(ball_cover(RATIONAL_INTERVAL, 1), RATIONAL_INTERVAL, 40, 3, budget=8)
    assert info.value.witness is not None


@pytest.mark.parametrize("X", EXACT_SPACES, ids=lambda X: X.name)
@pytest.mark.parametrize("n", [1, 4])
def test_ball_covers_are_omega_covers(X, n):
    assert omega_check(ball_cover(X, n), X, 16, 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3))
def test_omega_check_monotone_in_depth(m, k):
    X = RATIONAL_INTERVAL
    cover = finite_cover([PointComplement(X.point(i)) for i in range(5)])
    if omega_check(cover, X, 6, 3).ok:
        assert omega_check(cover, X, m, k).ok
    big = omega_check(cover, X, m, k)
    if not big.ok:
        assert not omega_check(cover, X, 6, 3).ok


def test_pick_witness_outside():
    assert pick_witness_outside(PointComplement(Q(1, 3)), RATIONAL_INTERVAL) == Q(1, 3)
    assert pick_witness_outside(ball_union([(Q(0), Q(1, 2))]), RATIONAL_INTERVAL) == 1
    with pytest.raises(NotProper):
        pick_witness_outside(Whole(), RATIONAL_INTERVAL)


@settings(max_examples=50)
@given(st.lists(st.tuples(indices, radii), min_size=1, max_size=4))
def test_witness_is_outside(balls):
    X = RATIONAL_INTERVAL
    U = ball_union([(X.point(i), r) for i, r in balls])
    if covers_whole(U, X):
        return
    w = pick_witness_outside(U, X, budget=4096)
    assert X.is_member(w) and not contains(U, w)


def test_covers_whole_examples():
    X = RATIONAL_INTERVAL
    assert covers_whole(ball_union([(Q(0), Q(2, 3)), (Q(1, 2), Q(2, 3))]), X)
    assert not covers_whole(ball_union([(Q(0), Q(1, 2)), (Q(1), Q(1, 2))]), X)
    assert covers_whole(Whole(), X)
    assert not covers_whole(Empty(), X)


def test_covers_whole_on_sequence_skips_gaps():
    # (1/3 + 1/100, 1/2 - 1/100) holds no point of the sequence, so the gap does not matter
    U = ball_union([(Q(0), Q(1, 3) + Q(1, 100)), (Q(3, 4), Q(1, 4) + Q(1, 100))])
    assert covers_whole(U, CONVERGENT_SEQUENCE)
    assert not covers_whole(U, RATIONAL_INTERVAL)
    V = ball_union([(Q(0), Q(1, 3) + Q(1, 100)), (Q(1), Q(1, 4))])
    assert not covers_whole(V, CONVERGENT_SEQUENCE)  # 1/2 is left out


def test_distance_to_complement():
    X = RATIONAL_INTERVAL
    U = ball_union([(Q(1, 2), Q(1, 4))])
    assert distance_to_complement(Q(1, 2), U, X) == Q(1, 4)
    assert distance_to_complement(Q(1, 3), PointComplement(Q(1, 2)), X) == Q(1, 6)
    assert distance_to_complement(Q(0), Whole(), X) is None
    # on the sequence the nearest outside point is a sequence point, not a gap endpoint
    V = ball_union([(Q(0), Q(2, 5))])
    assert distance_to_complement(Q(0), V, CONVERGENT_SEQUENCE) == Q(1, 2)
    assert distance_to_complement(Q(0), V, RATIONAL_INTERVAL) == Q(2, 5)


@settings(max_examples=40)
@given(st.lists(st.tuples(indices, radii), min_size=1, max_size=4), indices)
def test_distance_to_complement_matches_scan(balls, j):
    for X in EXACT_SPACES:
        U = ball_union([(X.point(i), r) for i, r in balls])
        x = X.point(j)
        if not contains(U, x) or covers_whole(U, X):
            continue
        D = distance_to_complement(x, U, X)
        outside = [p for p in X.prefix(2000) if not contains(U, p)]
        # exact distance is a lower bound for every outside point and is approached by them
        assert all(dist(x, p) >= D for p in outside)
        assert D > 0


def test_open_set_literals_round_trip():
    for U in [Whole(), Empty(), PointComplement(Q(2, 3)), ball_union([(Q(0), Q(1, 8)), (Q(1), Q(1, 4))]),
              ball_union([((Q(0), Q(1, 2)), Q(1, 3))])]:
        assert parse_open_set(U.descriptor) == U


def test_ball_union_merges_overlaps():
    U = ball_union([(Q(0), Q(1, 2)), (Q(1, 2), Q(1, 4))])
    assert isinstance(U, BallUnion)
    assert all(contains(U, x) == (x < Q(3, 4)) for x in RATIONAL_INTERVAL.prefix(100))


def test_urysohn_examples():
    X = RATIONAL_INTERVAL
    U = ball_union([(Q(0), Q(1, 2))])
    phi = urysohn([Q(0)], U, X)
    assert phi(Q(1, 4)) == Q(1, 2)
    assert phi(Q(0)) == 0
    assert phi(Q(3, 4)) == 1
    with pytest.raises(NotContained):
        urysohn([Q(3, 4)], U, X)
    with pytest.raises(NotProper):
        urysohn([Q(0)], Whole(), X)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(indices, radii), min_size=1, max_size=3), st.sets(indices, max_size=4))
def test_urysohn_bounds_and_lipschitz(balls, chosen):
    for X in EXACT_SPACES:
        U = ball_union([(X.point(i), r) for i, r in balls])
        if covers_whole(U, X):
            continue
        F = [X.point(i) for i in chosen if contains(U, X.point(i))]
        phi = urysohn(F, U, X)
        pts = X.prefix(64)
        for y in pts:
            v = phi(y)
            assert 0 <= v <= 1
            if y in F:
                assert v == 0
            if not contains(U, y):
                assert v == 1
        if phi.scales:
            L = min(phi.scales)
            for y in pts[:24]:
                for z in pts[:24]:
                    assert abs(phi(y) - phi(z)) <= dist(y, z) / L


def test_reindexed_space():
    Y = Space.reindexed(RATIONAL_INTERVAL, AffineMap(Q(-1), Q(1)))
    assert Y.prefix(3) == (1, 0, Q(1, 2))
    assert Y.is_member(Q(2, 3)) and not Y.is_member(Q(3, 2))
    U = ball_union([(Q(1), Q(1, 4))])  # around the reflected 0
    assert distance_to_complement(Q(1), U, Y) == Q(1, 4)
    assert omega_check(canonical_u0(Y), Y, 8, 2)
