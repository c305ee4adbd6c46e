"""Strategy translations between the cover games on X and the tightness games
at e in C_p(X, G), plus transport of tightness strategies along homeomorphisms
induced by point bijections.

Forward direction: a function family A_n is read through its sublevel sets
U_{f,n}.  Either the proper ones form an omega-cover (the inning is
non-degenerate and the cover strategy picks from them), or some member is
uniformly within 1/n of e and is selected on its own.  Converse direction:
a cover is wrapped as the family of test functions f_{F,U} over it, and each
selected test function hands back its U.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .cp import (
    ConstantE,
    ConstantG,
    CpFunction,
    FnFamily,
    Reindexed,
    TestFn,
    Translated,
    sublevel,
)
from .errors import (
    BudgetExhausted,
    CertificateMismatch,
    IllegalMove,
    NonTestMember,
    NormalizationRequired,
)
from .games import Depth, Game, Strategy, describe
from .groups import Group
from .oracle import cover_tests, u0_cover
from .spaces import (
    AffineMap,
    CoverFamily,
    OpenSet,
    Space,
    Whole,
    covers_whole,
    fmt_point,
    omega_check,
)

_COVER_GAME = {Game.CFT: Game.GFIN_OMEGA, Game.SCFT: Game.G1_OMEGA}
_TIGHTNESS_GAME = {v: k for k, v in _COVER_GAME.items()}


# ---------------------------------------------------------------------------
# the degeneracy dichotomy


@dataclass(frozen=True)
class InningClassification:
    """Outcome of reading A_n through its sublevel sets at level n.

    ``cover`` holds the proper sublevels in enumeration order with ``sources``
    giving the family index each one came from.  A degenerate inning carries
    the counterexample K to the omega-cover check and the certificate f_n
    (with its family index) whose sublevel is all of X.
    """

    branch: str  # NonDegenerate | Degenerate
    n: int
    cover: CoverFamily
    sources: tuple
    K: Optional[tuple] = None
    certificate: Optional[CpFunction] = None
    certificate_index: Optional[int] = None

    @property
    def degenerate(self) -> bool:
        return self.branch == "Degenerate"

    def representative(self, V: OpenSet) -> int:
        """Family index of the first member whose sublevel is V."""
        for j, U in enumerate(self.cover.members(0)):
            if U[1] == V:
                return self.sources[j]
        raise KeyError(V)

    def log(self) -> dict:
        notes = {"branch": self.branch, "extracted": len(self.sources)}
        if self.degenerate:
            notes["K"] = [fmt_point(x) for x in self.K]
            notes["certificate"] = f"{self.certificate_index}: {self.certificate.descriptor}"
        return notes


def _is_whole(U: OpenSet, X: Space) -> bool:
    return isinstance(U, Whole) or covers_whole(U, X)


def classify_inning(A: FnFamily, n: int, depth: Depth = Depth(), budget: int = 256) -> InningClassification:
    """Decide which side of the dichotomy inning n falls on, with a certificate.

    Scans the first ``budget`` members of A.  If their proper sublevels pass
    the omega-cover check the inning is non-degenerate.  Otherwise the check
    names a finite K no proper sublevel contains; the first member within 1/n
    of e on K must then have a sublevel covering X, which is verified.
    """
    if A.finite or A.kind == "FiniteIllegal":
        raise IllegalMove("I", n, f"finite family {A} cannot accumulate at e")
    return _classify(A, n, depth, budget)


@lru_cache(maxsize=2048)
def _classify(A: FnFamily, n: int, depth: Depth, budget: int) -> InningClassification:
    X = A.space
    sources, sets = [], []
    for i, f in A.members(budget):
        U = sublevel(f, n)
        if not _is_whole(U, X):
            sources.append(i)
            sets.append(U)
    cover = CoverFamily("Extracted", f"sublevels_n{n}({A.descriptor})", members=sets)
    result = omega_check(cover, X, depth.m, depth.k, budget)
    if result.ok:
        return InningClassification("NonDegenerate", n, cover, tuple(sources))
    K = result.counterexample
    eps = Fraction(1, n)
    for i, f in A.members(budget):
        if all(f.dist_to_e(x) < eps for x in K):
            if not _is_whole(sublevel(f, n), X):
                raise CertificateMismatch(
                    f"inning {n}: {f.descriptor} is within 1/{n} of e on K but its sublevel is proper")
            return InningClassification("Degenerate", n, cover, tuple(sources), K, f, i)
    raise BudgetExhausted(
        f"inning {n}: neither an omega-cover of sublevels nor a certificate among {budget} members", K)


# ---------------------------------------------------------------------------
# cover strategy -> tightness strategy


class MengerToCFT(Strategy):
    """Tightness strategy built from a cover strategy sigma.

    Each inning the family is classified; sigma sees the extracted cover (or
    the canonical point-complement cover in degenerate innings) and its picks
    are answered with the first family member realizing each picked sublevel.
    Degenerate innings are answered with the certificate alone.
    """

    def __init__(self, sigma: Strategy, space: Space, group: Group, depth: Depth = Depth(),
                 budget: int = 256):
        if sigma.game not in _TIGHTNESS_GAME:
            raise ValueError(f"{sigma} does not play a cover game")
        self.sigma = sigma
        self.space = space
        self.group = group
        self.depth = depth
        self.budget = budget
        self.game = _TIGHTNESS_GAME[sigma.game]
        prefix = "menger_to_cft" if self.game is Game.CFT else "rothberger_to_scft"
        self.name = f"{prefix}({sigma.name})"
        self.markov = sigma.markov
        self._notes: dict = {}

    def fresh(self) -> MengerToCFT:
        return type(self)(self.sigma.fresh(), self.space, self.group, self.depth, self.budget)

    def _fed(self, c: InningClassification) -> CoverFamily:
        return u0_cover(self.space) if c.degenerate else c.cover

    def respond(self, moves, n):
        classes = [classify_inning(A, i, self.depth, self.budget) for i, A in enumerate(moves, 1)]
        c = classes[-1]
        fed = tuple(self._fed(ci) for ci in classes)
        picks = self.sigma.respond(fed, n)
        self._notes = c.log()
        self._notes["fed"] = fed[-1].descriptor
        self._notes["sigma"] = [f"{j}: {describe(V)}" for j, V in picks]
        if c.degenerate:
            return [(c.certificate_index, c.certificate)]
        A = moves[-1]
        response = []
        for _, V in picks:
            i = c.representative(V)
            response.append((i, A.member(i)))
        return response

    def annotation(self):
        return dict(self._notes)


class RothbergerToSCFT(MengerToCFT):
    """Single-selection form: sigma picks one member, answered by one function."""


def menger_to_cft(sigma: Strategy, space: Space, group: Group, **kw) -> MengerToCFT:
    if sigma.game is not Game.GFIN_OMEGA:
        raise ValueError(f"{sigma} plays {sigma.game.value}, not GfinOmega")
    return MengerToCFT(sigma, space, group, **kw)


def rothberger_to_scft(sigma: Strategy, space: Space, group: Group, **kw) -> RothbergerToSCFT:
    if sigma.game is not Game.G1_OMEGA:
        raise ValueError(f"{sigma} plays {sigma.game.value}, not G1Omega")
    return RothbergerToSCFT(sigma, space, group, **kw)


# ---------------------------------------------------------------------------
# tightness strategy -> cover strategy


class CFTToMenger(Strategy):
    """Cover strategy built from a tightness strategy tau.

    Player I's cover is wrapped as its test-function family; every function
    tau selects names the cover member it was built over.
    """

    def __init__(self, tau: Strategy, space: Space, group: Group):
        if tau.game not in _COVER_GAME:
            raise ValueError(f"{tau} does not play a tightness game")
        self.tau = tau
        self.space = space
        self.group = group
        self.game = _COVER_GAME[tau.game]
        prefix = "cft_to_menger" if self.game is Game.GFIN_OMEGA else "scft_to_rothberger"
        self.name = f"{prefix}({tau.name})"
        self.markov = tau.markov
        self._notes: dict = {}

    def fresh(self) -> CFTToMenger:
        return type(self)(self.tau.fresh(), self.space, self.group)

    def respond(self, moves, n):
        families = tuple(cover_tests(C, self.space, self.group) for C in moves)
        picks = self.tau.respond(families, n)
        cover = moves[-1]
        response = []
        for i, h in picks:
            if not isinstance(h, TestFn) or h.cover_index is None:
                raise NonTestMember(f"inning {n}: selected #{i} {describe(h)} carries no (F, U) tag")
            response.append((h.cover_index, cover.member(h.cover_index)))
        self._notes = {"fed": families[-1].descriptor, "tau": [f"{i}: {describe(h)}" for i, h in picks]}
        return response

    def annotation(self):
        return dict(self._notes)


class SCFTToRothberger(CFTToMenger):
    """Single-selection form: the one selected test function names one member."""


def cft_to_menger(tau: Strategy, space: Space, group: Group) -> CFTToMenger:
    if tau.game is not Game.CFT:
        raise ValueError(f"{tau} plays {tau.game.value}, not CFT")
    return CFTToMenger(tau, space, group)


def scft_to_rothberger(tau: Strategy, space: Space, group: Group) -> SCFTToRothberger:
    if tau.game is not Game.SCFT:
        raise ValueError(f"{tau} plays {tau.game.value}, not SCFT")
    return SCFTToRothberger(tau, space, group)


# ---------------------------------------------------------------------------
# transport along function-space homeomorphisms


def _reindex(space: Space, h: AffineMap, f: CpFunction) -> CpFunction:
    """f o h on ``space``, folding nested reindexings and constants."""
    if isinstance(f, ConstantE):
        return ConstantE(space, f.group)
    if isinstance(f, ConstantG):
        return ConstantG(space, f.group, f.value)
    if isinstance(f, Translated):
        return _translate(f.shift, _reindex(space, h, f.inner))
    if isinstance(f, Reindexed):
        h, f = h.then(f.map), f.inner
    if h.is_identity and f.space == space:
        return f
    return Reindexed(space, h, f)


def _translate(c, f: CpFunction) -> CpFunction:
    """x -> c * f(x), folding nested translations and the identity shift."""
    G = f.group
    if isinstance(f, Translated):
        c, f = G.op(c, f.shift), f.inner
    if c == G.identity:
        return f
    if isinstance(f, ConstantE):
        return ConstantG(f.space, G, c)
    return Translated(c, f)


@dataclass(frozen=True)
class FnSpaceHomeomorphism:
    """phi: C_p(X, G) -> C_p(Y, G), phi(f) = c * (f o h) for a point bijection
    h: Y -> X and an optional left translation c.

    ``provenance`` is ``InducedByPointMap`` or, after :meth:`normalized`,
    ``IdentityCorrection``.
    """

    source: Space
    target: Space
    group: Group
    point_map: AffineMap
    translation: object = None
    provenance: str = "InducedByPointMap"

    @classmethod
    def induced(cls, X: Space, image: AffineMap, G: Group) -> FnSpaceHomeomorphism:
        """The homeomorphism induced by x -> image(x) from X onto its image Y."""
        Y = Space.reindexed(X, image)
        return cls(X, Y, G, image.inverse())

    def forward(self, f: CpFunction) -> CpFunction:
        g = _reindex(self.target, self.point_map, f)
        return g if self.translation is None else _translate(self.translation, g)

    def backward(self, f: CpFunction) -> CpFunction:
        if self.translation is not None:
            f = _translate(self.group.inv(self.translation), f)
        return _reindex(self.source, self.point_map.inverse(), f)

    def is_normalized(self, sample: int = 64) -> bool:
        image = self.forward(ConstantE(self.source, self.group))
        return all(image.dist_to_e(y) == 0 for y in self.target.prefix(sample))

    def normalized(self) -> FnSpaceHomeomorphism:
        """Compose with left translation by phi(e)^-1 so that e maps to e."""
        shift = self.forward(ConstantE(self.source, self.group)).eval(self.target.point(0))
        c = None if self.translation is None else self.group.op(self.group.inv(shift), self.translation)
        if c is not None and c == self.group.identity:
            c = None
        return FnSpaceHomeomorphism(self.source, self.target, self.group, self.point_map, c,
                                    "IdentityCorrection")


class TransportedStrategy(Strategy):
    """tau moved from C_p(X, G) to C_p(Y, G): families are pulled back through
    phi^-1, tau answers on X, and the answers are pushed forward through phi."""

    def __init__(self, tau: Strategy, phi: FnSpaceHomeomorphism):
        self.tau = tau
        self.phi = phi
        self.game = tau.game
        self.markov = tau.markov
        self.name = f"transport({tau.name}, {phi.target.name})"

    def fresh(self) -> TransportedStrategy:
        return TransportedStrategy(self.tau.fresh(), self.phi)

    def respond(self, moves, n):
        pulled = tuple(_pull_back_family(A, self.phi) for A in moves)
        return [(i, self.phi.forward(f)) for i, f in self.tau.respond(pulled, n)]


@lru_cache(maxsize=1024)
def _pull_back_family(A: FnFamily, phi: FnSpaceHomeomorphism) -> FnFamily:
    def member(i):
        f = A.member(i)
        return None if f is None else phi.backward(f)

    return FnFamily(A.kind, f"pullback({A.descriptor})", phi.source, phi.group, generator=member)


def transport_strategy(tau: Strategy, phi: FnSpaceHomeomorphism) -> TransportedStrategy:
    if tau.game not in (Game.CFT, Game.SCFT):
        raise ValueError(f"{tau} does not play a tightness game")
    if not phi.is_normalized():
        raise NormalizationRequired(f"{phi.provenance} map sends e to a non-identity function")
    return TransportedStrategy(tau, phi)
