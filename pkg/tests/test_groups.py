from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from selgames.groups import CIRCLE, FULL, PRODUCT, REAL_LINE, Group, group_literal, parse_group, threshold_le

GROUPS = [REAL_LINE, CIRCLE, PRODUCT, Group("circle", marked="1/3"), Group("real_line", marked=Q(-2))]
params = st.fractions(min_value=0, max_value=1, max_denominator=50)
epsilons = st.fractions(min_value=Q(1, 100), max_value=3, max_denominator=100)


def test_ball_preimage_examples():
    assert REAL_LINE.ball_preimage(Q(1, 3)) == Q(1, 3)
    assert REAL_LINE.ball_preimage(2) is FULL
    assert CIRCLE.ball_preimage(Q(1, 8)) == Q(1, 4)


def test_dist_examples():
    assert REAL_LINE.dist(Q(0), Q(0)) == 0
    assert CIRCLE.dist(Q(0), Q(3, 4)) == Q(1, 4)
    assert PRODUCT.dist((Q(0), Q(0)), (Q(1, 2), Q(3, 4))) == Q(1, 2)


@pytest.mark.parametrize("G", GROUPS, ids=str)
def test_arc_endpoints(G):
    assert G.norm(G.arc(Q(0))) == 0
    assert G.arc(Q(1)) == G.marked
    assert G.separation > 0


@pytest.mark.parametrize("G", GROUPS, ids=str)
@given(a=params, b=params, c=params)
def test_metric_axioms(G, a, b, c):
    x, y, z = G.arc(a), G.arc(b), G.arc(c)
    assert G.dist(x, y) == G.dist(y, x)
    assert (G.dist(x, y) == 0) == (x == y)
    assert G.dist(x, z) <= G.dist(x, y) + G.dist(y, z)


@pytest.mark.parametrize("G", GROUPS, ids=str)
@given(t=params)
def test_arc_norm_is_linear(G, t):
    assert G.norm(G.arc(t)) == G.arc_norm(t) == t * G.separation


@pytest.mark.parametrize("G", GROUPS, ids=str)
def test_arc_is_injective_on_grid(G):
    grid = [Q(i, 64) for i in range(65)]
    assert len({G.arc(t) for t in grid}) == len(grid)


@pytest.mark.parametrize("G", GROUPS, ids=str)
@given(e1=epsilons, e2=epsilons)
def test_threshold_monotone(G, e1, e2):
    lo, hi = sorted([e1, e2])
    assert threshold_le(G.ball_preimage(lo), G.ball_preimage(hi))


@pytest.mark.parametrize("G", GROUPS, ids=str)
@given(eps=epsilons)
def test_threshold_consistent(G, eps):
    t_eps = G.ball_preimage(eps)
    grid = [Q(i, 64) for i in range(65)]
    if t_eps is FULL:
        assert all(G.norm(G.arc(t)) < eps for t in grid)
        return
    assert all(G.norm(G.arc(t)) < eps for t in grid if t < t_eps)
    assert all(G.norm(G.arc(t)) >= eps for t in grid if t >= t_eps)


def test_group_operations():
    assert CIRCLE.op(Q(3, 4), Q(1, 2)) == Q(1, 4)
    assert CIRCLE.inv(Q(1, 4)) == Q(3, 4)
    g = PRODUCT.marked
    assert PRODUCT.op(g, PRODUCT.inv(g)) == PRODUCT.identity


def test_invalid_groups():
    with pytest.raises(ValueError):
        Group("circle", marked=Q(3, 4))
    with pytest.raises(ValueError):
        Group("real_line", marked=0)
    with pytest.raises(ValueError):
        Group("torus")


@pytest.mark.parametrize("G", GROUPS, ids=str)
def test_literal_round_trip(G):
    assert parse_group(group_literal(G)) == G
