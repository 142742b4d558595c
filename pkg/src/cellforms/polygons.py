"""Oriented labeled polygons on configurations of n marked points.

The marked points are 0, t_1, ..., t_{n-3}, 1 and infinity.  An oriented
n-gon decorated with all n labels simultaneously names a connected component
of the real configuration locus (a cell) and a top-degree rational form (its
cell form).  This module is the purely combinatorial layer shared by both
readings: canonical rotations, the symmetric-group action, shuffles of label
sequences, and chords (splittings into two complementary consecutive arcs).

Canonical storage rotates every polygon so that infinity sits in the last
slot; a cyclic order has exactly one such rotation.  Orientation is not
quotiented out: a polygon and its reversal are distinct objects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


class DomainError(ValueError):
    """An argument lies outside an operation's domain."""


class MalformedPolygonError(DomainError):
    """A label sequence is not a permutation of the full label set."""


_KINDS = ("zero", "one", "var", "inf")

# Listing order 0 < 1 < t_1 < ... < inf (reproducible enumerations, bases,
# matrices) versus the order of the points along the standard cell
# 0 < t_1 < ... < t_{n-3} < 1 < inf.
_LEX_RANK = {"zero": 0, "one": 1, "var": 2, "inf": 3}
_CELL_RANK = {"zero": 0, "var": 1, "one": 2, "inf": 3}


@dataclass(frozen=True)
class Label:
    kind: str
    index: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown label kind {self.kind!r}")
        if self.kind == "var":
            if self.index < 1:
                raise DomainError("variable labels are 1-indexed")
        elif self.index != 0:
            raise DomainError(f"label kind {self.kind!r} carries no index")

    @property
    def is_var(self) -> bool:
        return self.kind == "var"

    def __str__(self) -> str:
        if self.kind == "zero":
            return "0"
        if self.kind == "one":
            return "1"
        if self.kind == "inf":
            return "inf"
        return f"t{self.index}"

    def __repr__(self) -> str:
        return f"<{self}>"


ZERO = Label("zero")
ONE = Label("one")
INF = Label("inf")


def var(i: int) -> Label:
    return Label("var", i)


def parse_label(text: str) -> Label:
    if text == "0":
        return ZERO
    if text == "1":
        return ONE
    if text in ("inf", "oo", "infinity"):
        return INF
    if len(text) > 1 and text[0] == "t" and text[1:].isdigit():
        return var(int(text[1:]))
    raise DomainError(f"unrecognized label {text!r}")


def lex_key(label: Label) -> tuple[int, int]:
    return (_LEX_RANK[label.kind], label.index)


def cell_key(label: Label) -> tuple[int, int]:
    return (_CELL_RANK[label.kind], label.index)


def labels_for(n: int) -> tuple[Label, ...]:
    """All n labels in listing order."""
    if n < 4:
        raise DomainError("need at least four marked points")
    return (ZERO, ONE, *(var(i) for i in range(1, n - 2)), INF)


def cell_order(n: int) -> tuple[Label, ...]:
    """All n labels in the order they appear along the standard cell."""
    if n < 4:
        raise DomainError("need at least four marked points")
    return (ZERO, *(var(i) for i in range(1, n - 2)), ONE, INF)


@dataclass(frozen=True)
class Polygon:
    """Cyclic order on the full label set, stored with infinity last."""

    order: tuple[Label, ...]

    def __post_init__(self):
        n = len(self.order)
        if n < 4:
            raise MalformedPolygonError("a polygon needs at least four labels")
        if set(self.order) != set(labels_for(n)):
            raise MalformedPolygonError(
                f"labels must be exactly 0, 1, t1..t{n - 3}, inf with no repeats: "
                f"got {[str(l) for l in self.order]}"
            )
        if self.order[-1] != INF:
            raise MalformedPolygonError(
                "canonical storage rotates infinity into the last slot; "
                "use canonicalize() for raw cyclic orders"
            )

    @property
    def n(self) -> int:
        return len(self.order)

    def sort_key(self) -> tuple[tuple[int, int], ...]:
        return tuple(lex_key(l) for l in self.order)

    def successor(self, label: Label) -> Label:
        i = self.order.index(label)
        return self.order[(i + 1) % self.n]

    def __str__(self) -> str:
        return "(" + ",".join(str(l) for l in self.order) + ")"

    def __repr__(self) -> str:
        return f"Polygon{self}"


def canonicalize(raw_order: Sequence[Label]) -> Polygon:
    """Unique rotation of a cyclic label order placing infinity last."""
    order = tuple(raw_order)
    count = sum(1 for l in order if l == INF)
    if count != 1:
        raise MalformedPolygonError("a polygon carries the label inf exactly once")
    i = order.index(INF)
    return Polygon(order[i + 1:] + order[: i + 1])


def enumerate_polygons(n: int) -> list[Polygon]:
    """All (n-1)! canonical polygons, lexicographic in listing order."""
    finite = labels_for(n)[:-1]
    return [Polygon((*perm, INF)) for perm in itertools.permutations(finite)]


def shuffle(a: Sequence[Label], b: Sequence[Label]) -> list[tuple[Label, ...]]:
    """All interleavings of a and b that preserve both internal orders."""
    a, b = tuple(a), tuple(b)
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise DomainError("shuffle factors must not repeat labels")
    if set(a) & set(b):
        raise DomainError("shuffle factors must be disjoint")
    out: list[tuple[Label, ...]] = []

    def rec(x: tuple[Label, ...], y: tuple[Label, ...], acc: tuple[Label, ...]):
        if not x:
            out.append(acc + y)
            return
        if not y:
            out.append(acc + x)
            return
        rec(x[1:], y, acc + x[:1])
        rec(x, y[1:], acc + y[:1])

    rec(a, b, ())
    return out


def act(sigma: Mapping[Label, Label], p: Polygon) -> Polygon:
    """Relabel a polygon entrywise by a bijection of its label set."""
    labels = set(p.order)
    if set(sigma.keys()) != labels or set(sigma.values()) != labels:
        raise DomainError("sigma must be a bijection of the full label set")
    return canonicalize(tuple(sigma[l] for l in p.order))


def reverse(p: Polygon) -> Polygon:
    return canonicalize(tuple(reversed(p.order)))


@dataclass(frozen=True)
class Chord:
    """A splitting of the marked points into two complementary consecutive
    arcs, stored by its canonical side: the smaller of the two sets, with
    ties broken toward the side not containing infinity."""

    side: frozenset[Label]
    n: int

    def __post_init__(self):
        if not self.side <= set(labels_for(self.n)):
            raise DomainError("chord side contains foreign labels")
        k = len(self.side)
        if not 2 <= k <= self.n - 2:
            raise DomainError("both sides of a chord need at least two labels")
        comp = len(labels_for(self.n)) - k
        if k > comp or (k == comp and INF in self.side):
            raise DomainError("chord side is not the canonical one")

    def sorted_side(self) -> tuple[Label, ...]:
        return tuple(sorted(self.side, key=cell_key))

    def sort_key(self):
        return (len(self.side), tuple(cell_key(l) for l in self.sorted_side()))

    def __str__(self) -> str:
        return "{" + ",".join(str(l) for l in self.sorted_side()) + "}"

    def __repr__(self) -> str:
        return f"Chord{self}"


def chord_between(arc: Iterable[Label], n: int) -> Chord:
    """Canonical chord for the splitting given by one of its two arcs."""
    side = frozenset(arc)
    comp = frozenset(labels_for(n)) - side
    if not side or not comp:
        raise DomainError("a chord needs two nonempty sides")
    if len(side) > len(comp) or (len(side) == len(comp) and INF in side):
        side = comp
    return Chord(side, n)


def chords(p: Polygon) -> frozenset[Chord]:
    """All chords of p: one per complementary pair of consecutive arcs."""
    n = p.n
    out = set()
    for start in range(n):
        for length in range(2, n - 1):
            arc = tuple(p.order[(start + k) % n] for k in range(length))
            out.add(chord_between(arc, n))
    return frozenset(out)


def common_chords(p: Polygon, q: Polygon) -> frozenset[Chord]:
    if p.n != q.n:
        raise DomainError("polygons with different point counts share no chords")
    return chords(p) & chords(q)


class PolygonSum:
    """Finite formal sum of same-size polygons with exact rational
    coefficients; zero coefficients are never stored."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[Polygon, Fraction] | None = None):
        self.n = n
        clean: dict[Polygon, Fraction] = {}
        for poly, coeff in (terms or {}).items():
            if poly.n != n:
                raise DomainError("all polygons in a sum must share n")
            c = Fraction(coeff)
            if c:
                clean[poly] = c
        self._terms = clean

    @classmethod
    def from_terms(cls, n: int, pairs: Iterable[tuple[Polygon, Fraction]]) -> "PolygonSum":
        acc: dict[Polygon, Fraction] = {}
        for poly, coeff in pairs:
            acc[poly] = acc.get(poly, Fraction(0)) + Fraction(coeff)
        return cls(n, acc)

    def items(self) -> list[tuple[Polygon, Fraction]]:
        return sorted(self._terms.items(), key=lambda t: t[0].sort_key())

    def coefficient(self, p: Polygon) -> Fraction:
        return self._terms.get(p, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "PolygonSum") -> "PolygonSum":
        if self.n != other.n:
            raise DomainError("mismatched point counts")
        return PolygonSum.from_terms(
            self.n, list(self._terms.items()) + list(other._terms.items())
        )

    def __sub__(self, other: "PolygonSum") -> "PolygonSum":
        return self + (-1) * other

    def __mul__(self, scalar) -> "PolygonSum":
        c = Fraction(scalar)
        return PolygonSum(self.n, {p: c * v for p, v in self._terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolygonSum)
            and self.n == other.n
            and self._terms == other._terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self._terms.items())))

    def __repr__(self) -> str:
        if self.is_zero():
            return f"PolygonSum(n={self.n}, 0)"
        body = " + ".join(f"{c}*{p}" for p, c in self.items())
        return f"PolygonSum({body})"
