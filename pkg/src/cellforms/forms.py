"""Cell forms as exact rational data, evaluation, and rank/solve machinery.

A polygon's cell form is the top-degree form whose denominator collects the
difference (successor - predecessor) of every cyclically adjacent label pair
not touching infinity.  Pairs built from 0 and 1 alone are the constants
(1-0) = 1 and (0-1) = -1 and fold into a sign; every other pair is stored
orientation-normalized (larger label first in listing order, flips absorbed
into the sign) so that equal products of linear factors compare equal.

Linear algebra on forms is done through exact evaluation: a list of forms
becomes a matrix of Fraction values at random rational points, and ranks or
solves on that matrix answer dependence questions.  Sampling accidents are
guarded twice, by recomputing under a derived second seed and by checking
solutions at fresh points.
"""

from __future__ import annotations

import dataclasses
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import linalg
from .polygons import (
    INF,
    ONE,
    ZERO,
    DomainError,
    Label,
    Polygon,
    PolygonSum,
    enumerate_polygons,
    lex_key,
    var,
)
from .util import derive_seed


class PoleAtPointError(DomainError):
    """A difference factor vanishes at the requested evaluation point."""


class UnstableRankError(RuntimeError):
    """Two independent sampling seeds disagreed; retry with more points."""


# Numerators and denominators of evaluation coordinates stay below this
# bound to keep exact solves at n <= 7 fast.
_COORD_BOUND = 10**4


def _pair_sort_key(pair: tuple[Label, Label]):
    return (lex_key(pair[0]), lex_key(pair[1]))


@dataclass(frozen=True)
class BasicForm:
    """Product of linear difference factors in the denominator, with a sign.

    ``factors`` holds ordered pairs (a, b) standing for (a - b); infinity
    never appears.  Instances are built through :func:`make_form`, which
    normalizes orientation and absorbs constant factors.
    """

    n: int
    factors: tuple[tuple[Label, Label], ...]
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if len(self.factors) > self.n - 2:
            raise DomainError("too many factors for this point count")
        for a, b in self.factors:
            if INF in (a, b):
                raise DomainError("factors never involve infinity")
            if lex_key(a) <= lex_key(b):
                raise DomainError("factors must be normalized via make_form")

    def unsigned(self) -> "BasicForm":
        return dataclasses.replace(self, sign=1) if self.sign != 1 else self

    def labels(self) -> set[Label]:
        return {l for pair in self.factors for l in pair}

    def evaluate(self, coords: Mapping[Label, Fraction]) -> Fraction:
        den = Fraction(1)
        for a, b in self.factors:
            d = _value(a, coords) - _value(b, coords)
            if d == 0:
                raise PoleAtPointError(f"factor ({a}-{b}) vanishes at the point")
            den *= d
        return Fraction(self.sign) / den

    def __str__(self) -> str:
        if not self.factors:
            return str(self.sign)
        body = "".join(f"({a}-{b})" for a, b in self.factors)
        return ("-" if self.sign < 0 else "") + f"1/{body}"

    def __repr__(self) -> str:
        return f"BasicForm({self})"


def _value(label: Label, coords: Mapping[Label, Fraction]) -> Fraction:
    if label == ZERO:
        return Fraction(0)
    if label == ONE:
        return Fraction(1)
    return coords[label]


def make_form(n: int, raw_pairs: Iterable[tuple[Label, Label]], sign: int = 1) -> BasicForm:
    """Normalize raw difference pairs into a BasicForm.

    Orientation flips and the constant pairs (0,1)/(1,0) contribute only
    signs; everything else is kept as an ordered pair, sorted.
    """
    s = 1 if sign > 0 else -1
    pairs = []
    for a, b in raw_pairs:
        if INF in (a, b):
            raise DomainError("factors never involve infinity")
        if a == b:
            raise DomainError(f"degenerate factor ({a}-{b})")
        if {a, b} == {ZERO, ONE}:
            if a == ZERO:  # (0-1) = -1
                s = -s
            continue
        if lex_key(a) < lex_key(b):
            a, b = b, a
            s = -s
        pairs.append((a, b))
    return BasicForm(n, tuple(sorted(pairs, key=_pair_sort_key)), s)


def cell_form(p: Polygon) -> BasicForm:
    """The cell form of a polygon: one factor per adjacent pair off infinity."""
    raw = []
    for i, cur in enumerate(p.order):
        prev = p.order[i - 1]
        if INF in (prev, cur):
            continue
        raw.append((cur, prev))
    return make_form(p.n, raw)


class FormSum:
    """Linear combination of basic forms with exact rational coefficients.

    Keys are stored sign-positive with the sign folded into the coefficient,
    so a form and its negative always combine instead of coexisting.
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[BasicForm, Fraction] | None = None):
        self.n = n
        clean: dict[BasicForm, Fraction] = {}
        for bf, coeff in (terms or {}).items():
            if bf.n != n:
                raise DomainError("all terms in a sum must share n")
            c = Fraction(coeff) * bf.sign
            key = bf.unsigned()
            c = clean.get(key, Fraction(0)) + c
            if c:
                clean[key] = c
            else:
                clean.pop(key, None)
        self._terms = clean

    @classmethod
    def from_terms(cls, n: int, pairs: Iterable[tuple[BasicForm, Fraction]]) -> "FormSum":
        acc: dict[BasicForm, Fraction] = {}
        for bf, coeff in pairs:
            key = bf.unsigned()
            acc[key] = acc.get(key, Fraction(0)) + Fraction(coeff) * bf.sign
        return cls(n, acc)

    @classmethod
    def zero(cls, n: int) -> "FormSum":
        return cls(n)

    @classmethod
    def of(cls, bf: BasicForm, coeff: Fraction | int = 1) -> "FormSum":
        return cls.from_terms(bf.n, [(bf, Fraction(coeff))])

    def items(self) -> list[tuple[BasicForm, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: _terms_key(t[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "FormSum") -> "FormSum":
        if self.n != other.n:
            raise DomainError("mismatched point counts")
        return FormSum.from_terms(
            self.n,
            [(bf, c) for bf, c in self._terms.items()]
            + [(bf, c) for bf, c in other._terms.items()],
        )

    def __sub__(self, other: "FormSum") -> "FormSum":
        return self + (-1) * other

    def __mul__(self, scalar) -> "FormSum":
        c = Fraction(scalar)
        return FormSum(self.n, {bf: c * v for bf, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, FormSum)
            and self.n == other.n
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def key(self):
        """Canonical hashable identity, for deduplication."""
        return (self.n, tuple((bf.factors, c) for bf, c in self.items()))

    def __repr__(self) -> str:
        if self.is_zero():
            return f"FormSum(n={self.n}, 0)"
        return "FormSum(" + " + ".join(f"{c}*{bf}" for bf, c in self.items()) + ")"


def _terms_key(bf: BasicForm):
    return tuple(_pair_sort_key(p) for p in bf.factors)


@dataclass(frozen=True)
class Point:
    """Rational coordinates for t_1..t_{n-3}; no cell-form factor vanishes."""

    coords: tuple[tuple[Label, Fraction], ...]

    def __post_init__(self):
        vals = [v for _, v in self.coords]
        if any(v in (0, 1) for v in vals):
            raise DomainError("coordinates must avoid 0 and 1")
        if len(set(vals)) != len(vals):
            raise DomainError("coordinates must be pairwise distinct")
        for i, (label, _) in enumerate(self.coords, start=1):
            if label != var(i):
                raise DomainError("coordinates must cover t1..t_{n-3} in order")

    @classmethod
    def make(cls, mapping: Mapping[Label, Fraction]) -> "Point":
        items = sorted(mapping.items(), key=lambda kv: kv[0].index)
        return cls(tuple((k, Fraction(v)) for k, v in items))

    @property
    def n(self) -> int:
        return len(self.coords) + 3

    def mapping(self) -> dict[Label, Fraction]:
        return dict(self.coords)


def random_points(n: int, count: int, seed: int) -> list[Point]:
    """Deterministic pseudorandom valid points; same seed, same list."""
    if count < 1:
        raise DomainError("count must be at least 1")
    if n < 4:
        raise DomainError("need at least four marked points")
    rng = random.Random(seed)
    points: list[Point] = []
    seen: set[tuple[Fraction, ...]] = set()
    while len(points) < count:
        vals: list[Fraction] = []
        used: set[Fraction] = set()
        for _ in range(n - 3):
            while True:
                v = Fraction(
                    rng.randint(-_COORD_BOUND, _COORD_BOUND),
                    rng.randint(1, _COORD_BOUND),
                )
                if v not in (0, 1) and v not in used:
                    used.add(v)
                    vals.append(v)
                    break
        key = tuple(vals)
        if key in seen:
            continue
        seen.add(key)
        points.append(Point.make({var(i + 1): v for i, v in enumerate(vals)}))
    return points


def evaluate(f: FormSum | BasicForm, x: Point) -> Fraction:
    """Exact value of the coefficient function at a rational point."""
    coords = x.mapping()
    if isinstance(f, BasicForm):
        return f.evaluate(coords)
    total = Fraction(0)
    for bf, coeff in f._terms.items():
        total += coeff * bf.evaluate(coords)
    return total


def polygon_form(p: Polygon) -> FormSum:
    return FormSum.of(cell_form(p))


def polygon_sum_form(ps: PolygonSum) -> FormSum:
    """Push a polygon sum through the cell-form map, linearly."""
    return FormSum.from_terms(ps.n, [(cell_form(p), c) for p, c in ps.items()])


def _uniform_n(forms: Sequence[FormSum]) -> int:
    n = forms[0].n
    if any(f.n != n for f in forms):
        raise DomainError("forms must share the same point count")
    return n


def _evaluation_rows(forms: Sequence[FormSum], points: Sequence[Point]) -> list[list[Fraction]]:
    return [[evaluate(f, x) for x in points] for f in forms]


def rank(forms: Sequence[FormSum], seed: int = 0) -> int:
    """Rank over the rationals of the evaluation matrix at len(forms)+8
    points, recomputed under a derived seed; disagreement raises."""
    forms = list(forms)
    if not forms:
        return 0
    n = _uniform_n(forms)

    def compute(s: int) -> int:
        pts = random_points(n, len(forms) + 8, s)
        return linalg.rank_rows(_evaluation_rows(forms, pts))

    r1 = compute(seed)
    r2 = compute(derive_seed(seed))
    if r1 != r2:
        raise UnstableRankError(f"rank {r1} != {r2} under the derived seed")
    return r1


def basis01(n: int) -> list[Polygon]:
    """Canonical polygons with 1 directly after 0, in listing order."""
    out = []
    for p in enumerate_polygons(n):
        i = p.order.index(ZERO)
        if p.order[i + 1] == ONE:
            out.append(p)
    return out


def is_01_polygon(p: Polygon) -> bool:
    return p.successor(ZERO) == ONE


def basis01_forms(n: int) -> list[FormSum]:
    return [polygon_form(p) for p in basis01(n)]


class BasisSolver:
    """Repeated exact solves against one fixed independent basis.

    Finds an invertible square evaluation submatrix once; each expression is
    a small matrix-vector product plus consistency checks on the left-over
    sampled rows and on fresh verification points.
    """

    def __init__(self, basis: Sequence[FormSum], seed: int = 0):
        self.basis = list(basis)
        self.n = _uniform_n(self.basis)
        self.seed = seed
        k = len(self.basis)
        self.points = random_points(self.n, k + 8, seed)
        self.fresh = random_points(self.n, 8, derive_seed(seed, salt=7))
        rows = [[evaluate(b, x) for b in self.basis] for x in self.points]
        _, pivots = linalg.rref([list(col) for col in zip(*rows)])
        if len(pivots) != k:
            raise DomainError("basis is not linearly independent")
        self.pivot_rows = pivots
        square = [rows[r] for r in pivots]
        self.inverse = linalg.invert(square)
        self.rows = rows
        self.basis_fresh = [[evaluate(b, x) for b in self.basis] for x in self.fresh]

    def express(self, f: FormSum) -> list[Fraction] | None:
        if f.n != self.n:
            raise DomainError("mismatched point counts")
        vals = [evaluate(f, x) for x in self.points]
        coeffs = linalg.matvec(self.inverse, [vals[r] for r in self.pivot_rows])
        for row, b in zip(self.rows, vals):
            if sum((c * a for c, a in zip(coeffs, row)), Fraction(0)) != b:
                return None
        for row, x in zip(self.basis_fresh, self.fresh):
            lhs = sum((c * a for c, a in zip(coeffs, row)), Fraction(0))
            if lhs != evaluate(f, x):
                raise UnstableRankError(
                    "sampled solve failed verification at a fresh point"
                )
        return coeffs


def express_in_basis(
    f: FormSum, basis: Sequence[FormSum], seed: int = 0
) -> list[Fraction] | None:
    """Exact coefficients of f over an independent basis, or None when f is
    not in the span.  Verified at 8 extra fresh points."""
    if rank(list(basis), seed) != len(basis):
        raise DomainError("basis is not linearly independent")
    return BasisSolver(basis, seed).express(f)
