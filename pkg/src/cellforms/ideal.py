"""Shuffle sums of polygons: the ideal at infinity and its relatives.

A two-part split (A, B) of the marked points other than some anchor x gives
the polygon sum over all shuffles W of A and B of [W, x].  Anchored at
infinity these sums span the kernel of the polygon-to-form map; reduction to
the 01-basis therefore goes through exact evaluation instead of rewriting.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .forms import (
    BasisSolver,
    FormSum,
    basis01_forms,
    evaluate,
    polygon_form,
    polygon_sum_form,
    random_points,
)
from .polygons import (
    INF,
    ZERO,
    DomainError,
    Label,
    Polygon,
    PolygonSum,
    canonicalize,
    cell_order,
    labels_for,
    shuffle,
)


class ReductionError(RuntimeError):
    """A cell form failed to reduce to the 01-basis; signals a bug, since
    the 01-forms span everything."""


@dataclass(frozen=True)
class Partition2:
    """Unordered pair of disjoint nonempty label sequences."""

    a: tuple[Label, ...]
    b: tuple[Label, ...]

    def __post_init__(self):
        if not self.a or not self.b:
            raise DomainError("both parts must be nonempty")
        if len(set(self.a)) != len(self.a) or len(set(self.b)) != len(self.b):
            raise DomainError("parts must not repeat labels")
        if set(self.a) & set(self.b):
            raise DomainError("parts must be disjoint")

    def union(self) -> set[Label]:
        return set(self.a) | set(self.b)


def shuffle_relation(x: Label, part: Partition2) -> PolygonSum:
    """Sum over shuffles W of the two parts of the polygon [W, x]."""
    content = part.union()
    if x in content:
        raise DomainError("the anchor point cannot appear in the partition")
    n = len(content) + 1
    expected = set(labels_for(n)) - {x}
    if content != expected:
        raise DomainError("the partition must cover every point except the anchor")
    return PolygonSum.from_terms(
        n,
        [(canonicalize((*w, x)), Fraction(1)) for w in shuffle(part.a, part.b)],
    )


def ideal_generators(n: int) -> list[PolygonSum]:
    """One shuffle sum anchored at infinity per unordered split of the
    finite points; sides are ordered along the standard cell."""
    finite = [l for l in cell_order(n) if l != INF]
    rest = finite[1:]  # 0 sits in the first part, deduplicating {A,B} ~ {B,A}
    gens = []
    for mask in range(2 ** len(rest) - 1):
        a = [ZERO] + [l for i, l in enumerate(rest) if mask >> i & 1]
        b = [l for i, l in enumerate(rest) if not mask >> i & 1]
        gens.append(shuffle_relation(INF, Partition2(tuple(a), tuple(b))))
    return gens


@dataclass(frozen=True)
class KernelReport:
    n: int
    generator_count: int
    points: int
    max_abs: Fraction
    failures: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def verify_kernel(n: int, seed: int = 0) -> KernelReport:
    """Evaluate every generator's form at random points; all must be 0."""
    gens = ideal_generators(n)
    pts = random_points(n, 20, seed)
    max_abs = Fraction(0)
    failures = []
    for i, gen in enumerate(gens):
        fs = polygon_sum_form(gen)
        worst = max((abs(evaluate(fs, x)) for x in pts), default=Fraction(0))
        if worst > max_abs:
            max_abs = worst
        if worst != 0:
            failures.append(i)
    return KernelReport(n, len(gens), len(pts), max_abs, tuple(failures))


@lru_cache(maxsize=None)
def _solver01(n: int, seed: int) -> BasisSolver:
    return BasisSolver(basis01_forms(n), seed)


def reduce_to_01(p: Polygon, seed: int = 0) -> list[Fraction]:
    """Exact coordinates of a polygon's cell form over the 01-basis."""
    coeffs = _solver01(p.n, seed).express(polygon_form(p))
    if coeffs is None:
        raise ReductionError(f"{p} did not reduce over the 01-basis")
    return coeffs


def reduce_sum_to_01(ps: PolygonSum, seed: int = 0) -> list[Fraction]:
    """Linear extension of reduce_to_01 to polygon sums."""
    coeffs = _solver01(ps.n, seed).express(polygon_sum_form(ps))
    if coeffs is None:
        raise ReductionError("a polygon sum did not reduce over the 01-basis")
    return coeffs
