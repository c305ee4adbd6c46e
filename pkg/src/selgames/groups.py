"""Metrizable arc-connected groups with exact metrics.

Elements are exact rationals (the real line), rationals in [0, 1) read mod 1
(the circle), or tuples of factor elements (finite products with the max
metric).  Each group carries a marked element g != e and the arc
gamma(t) = t * g, along which the distance to e grows linearly, so the set of
arc parameters inside a metric ball around e is an exact initial segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .spaces import ONE, ZERO, rational


class _Full:
    """Threshold meaning the whole arc lies inside the ball."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Full"

    __str__ = __repr__


FULL = _Full()
Threshold = Union[Fraction, _Full]


def threshold_le(a: Threshold, b: Threshold) -> bool:
    if b is FULL:
        return True
    if a is FULL:
        return False
    return a <= b


@dataclass(frozen=True)
class Group:
    kind: str
    factors: tuple = ()
    marked: object = None

    def __post_init__(self):
        if self.kind == "product":
            if len(self.factors) < 2:
                raise ValueError("a product needs at least two factors")
            object.__setattr__(self, "marked", tuple(f.marked for f in self.factors))
            return
        if self.kind not in ("real_line", "circle"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        default = ONE if self.kind == "real_line" else Fraction(1, 2)
        g = default if self.marked is None else rational(self.marked)
        if g == 0:
            raise ValueError("the marked element must differ from the identity")
        if self.kind == "circle" and not 0 < g <= Fraction(1, 2):
            # keeps the arc t -> t*g inside the half-circle where distance is linear
            raise ValueError("circle marked element must lie in (0, 1/2]")
        object.__setattr__(self, "marked", g)

    @classmethod
    def product(cls, *factors: Group) -> Group:
        return cls("product", tuple(factors))

    @property
    def name(self) -> str:
        if self.kind == "product":
            return "product(" + ",".join(f.name for f in self.factors) + ")"
        default = ONE if self.kind == "real_line" else Fraction(1, 2)
        return self.kind if self.marked == default else f"{self.kind}[g={self.marked}]"

    def __str__(self):
        return self.name

    @property
    def identity(self):
        if self.kind == "product":
            return tuple(f.identity for f in self.factors)
        return ZERO

    def normalize(self, a):
        if self.kind == "product":
            return tuple(f.normalize(x) for f, x in zip(self.factors, a))
        a = rational(a)
        return a % 1 if self.kind == "circle" else a

    def op(self, a, b):
        if self.kind == "product":
            return tuple(f.op(x, y) for f, x, y in zip(self.factors, a, b))
        return (a + b) % 1 if self.kind == "circle" else a + b

    def inv(self, a):
        if self.kind == "product":
            return tuple(f.inv(x) for f, x in zip(self.factors, a))
        return (-a) % 1 if self.kind == "circle" else -a

    def dist(self, a, b) -> Fraction:
        if self.kind == "product":
            return max(f.dist(x, y) for f, x, y in zip(self.factors, a, b))
        if self.kind == "circle":
            d = abs(a - b) % 1
            return min(d, 1 - d)
        return abs(a - b)

    def norm(self, a) -> Fraction:
        return self.dist(a, self.identity)

    @property
    def separation(self) -> Fraction:
        """r = d(g, e)."""
        return self.norm(self.marked)

    def arc(self, t: Fraction):
        """gamma(t) = t * g for t in [0, 1]."""
        if self.kind == "product":
            return tuple(f.arc(t) for f in self.factors)
        return t * self.marked if self.kind == "real_line" else (t * self.marked) % 1

    def arc_norm(self, t: Fraction) -> Fraction:
        """d(gamma(t), e) without building the element; equals t * r."""
        if self.kind == "product":
            return max(f.arc_norm(t) for f in self.factors)
        return t * abs(self.marked)

    def ball_preimage(self, eps: Fraction) -> Threshold:
        """Supremum t such that d(gamma(s), e) < eps for every s < t.

        Returns FULL when the whole arc (t = 1 included) lies in the ball.
        """
        eps = rational(eps)
        if eps <= 0:
            raise ValueError("eps must be positive")
        if self.kind == "product":
            parts = [f.ball_preimage(eps) for f in self.factors]
            finite = [p for p in parts if p is not FULL]
            return min(finite) if finite else FULL
        g = abs(self.marked)
        if eps > g:
            return FULL
        return eps / g


REAL_LINE = Group("real_line")
CIRCLE = Group("circle")
PRODUCT = Group.product(REAL_LINE, CIRCLE)


def parse_group(spec) -> Group:
    """Group literal: ``real_line``, ``circle``, a mapping ``{kind, marked}``, or
    ``{product: [<group>, <group>, ...]}``."""
    if isinstance(spec, str):
        return Group(spec)
    if isinstance(spec, dict):
        if "product" in spec:
            return Group.product(*(parse_group(s) for s in spec["product"]))
        return Group(spec["kind"], marked=spec.get("marked"))
    raise ValueError(f"cannot parse group literal {spec!r}")


def group_literal(G: Group):
    if G.kind == "product":
        return {"product": [group_literal(f) for f in G.factors]}
    if G.name == G.kind:
        return G.kind
    return {"kind": G.kind, "marked": str(G.marked)}
