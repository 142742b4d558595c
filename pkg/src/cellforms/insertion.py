"""Insertion forms: convergent shuffles spliced into convergent hosts.

Some divergent 01-forms combine into sums that do converge on the standard
cell.  The generator here enumerates such sums by taking a convergent host
pattern (a 01-polygon, or recursively a convergent combination built at a
smaller point count), distributing the variables over its slots, and
expanding one slot as a shuffle of two factor sequences; factors and plain
slot contents must be chord-free so no term forces a pole along a divisor
shared by all of them.  Every expansion is then certified by the exact pole
test, and a greedy pass extends the convergent 01-forms by independent
survivors.  The final rank is compared against the independently computed
convergent subspace: MATCH certifies the basis property on that instance, a
shortfall is reported (never silently padded), and an excess would signal
an unsound convergence test.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import linalg
from .convergence import (
    chords,
    converges_on_delta,
    convergent_subspace,
    converges_01,
    delta,
)
from .forms import (
    FormSum,
    basis01,
    evaluate,
    polygon_form,
    polygon_sum_form,
    random_points,
    rank,
)
from .polygons import (
    INF,
    ONE,
    ZERO,
    DomainError,
    Label,
    Polygon,
    PolygonSum,
    canonicalize,
    labels_for,
    shuffle,
    var,
)
from .util import derive_seed

SLOT = None  # placeholder entry inside host patterns


class DivergentInsertionError(DomainError):
    """The expanded sum fails the pole test; the spec is not admissible."""


@dataclass(frozen=True)
class InsertionSpec:
    """A host pattern with one slot, and the shuffle pair to expand there."""

    host: tuple[Label | None, ...]
    factors: tuple[tuple[Label, ...], tuple[Label, ...]]

    def __post_init__(self):
        if self.host.count(SLOT) != 1:
            raise DomainError("host patterns carry exactly one slot")
        fixed = [l for l in self.host if l is not SLOT]
        a, b = self.factors
        if not a:
            raise DomainError("the first shuffle factor must be nonempty")
        content = (*a, *b)
        if len(set(content)) != len(content):
            raise DomainError("shuffle factors must be disjoint without repeats")
        labels = (*fixed, *content)
        n = len(labels)
        if set(labels) != set(labels_for(n)) or len(labels) != n:
            raise DomainError("host and factors must cover the label set exactly once")

    @property
    def n(self) -> int:
        return len(self.host) - 1 + len(self.factors[0]) + len(self.factors[1])


def _splice(host: tuple[Label | None, ...], content: Sequence[Label]) -> Polygon:
    i = host.index(SLOT)
    return canonicalize((*host[:i], *content, *host[i + 1:]))


def expand_polygons(spec: InsertionSpec) -> PolygonSum:
    a, b = spec.factors
    return PolygonSum.from_terms(
        spec.n, [(_splice(spec.host, w), Fraction(1)) for w in shuffle(a, b)]
    )


def expand_insertion(spec: InsertionSpec, seed: int = 0) -> FormSum:
    """Expand the shuffle in the slot and certify convergence of the sum."""
    fs = polygon_sum_form(expand_polygons(spec))
    if not converges_on_delta(fs, seed):
        raise DivergentInsertionError(
            "the expanded sum does not converge on the standard cell"
        )
    return fs


def _seq_chord_free(seq: Sequence[Label], n: int) -> bool:
    """No consecutive run of the sequence matches a standard-cell chord."""
    delta_sides = {c.side for c in chords(delta(n))}
    for i in range(len(seq)):
        for j in range(i + 2, len(seq) + 1):
            if frozenset(seq[i:j]) in delta_sides:
                return False
    return True


def convergent_01_polygons(n: int) -> list[Polygon]:
    return [p for p in basis01(n) if converges_01(p)]


def _slot_assignments(free_vars: Sequence[Label], k: int, n: int):
    """Distribute free_vars over k slots: every slot nonempty, one slot a
    shuffle pair of chord-free factors, the rest chord-free plain runs.
    Yields (plain: dict slot_index -> sequence, shuffle_slot, (A, B))."""
    m = len(free_vars)
    for perm in itertools.permutations(free_vars):
        for cuts in itertools.combinations(range(1, m), k - 1):
            blocks = []
            lo = 0
            for hi in (*cuts, m):
                blocks.append(perm[lo:hi])
                lo = hi
            for j, block in enumerate(blocks):
                if len(block) < 2:
                    continue
                plains = {i: blk for i, blk in enumerate(blocks) if i != j}
                if any(not _seq_chord_free(blk, n) for blk in plains.values()):
                    continue
                # split block into an unordered factor pair; block order is
                # already enumerated by perm, so cut anywhere
                for cut in range(1, len(block)):
                    a, b = block[:cut], block[cut:]
                    if (a, b) > (b, a):
                        continue  # unordered pair, keep one representative
                    if _seq_chord_free(a, n) and _seq_chord_free(b, n):
                        yield plains, j, (a, b)


def _expand_host_sum(
    host_sum: PolygonSum,
    slot_labels: Sequence[Label],
    plains: dict[int, tuple[Label, ...]],
    shuffle_slot: int,
    pair: tuple[tuple[Label, ...], tuple[Label, ...]],
    n: int,
) -> PolygonSum:
    """Replace each slot label of every host term by its assigned content."""
    content: dict[Label, tuple[Label, ...]] = {
        slot_labels[i]: seq for i, seq in plains.items()
    }
    out: list[tuple[Polygon, Fraction]] = []
    shuffles = shuffle(*pair)
    for q, coeff in host_sum.items():
        for w in shuffles:
            content[slot_labels[shuffle_slot]] = w
            expanded: list[Label] = []
            for l in q.order:
                if l in content:
                    expanded.extend(content[l])
                else:
                    expanded.append(l)
            out.append((canonicalize(tuple(expanded)), coeff))
    return PolygonSum.from_terms(n, out)


@lru_cache(maxsize=None)
def _host_sums(m: int, seed: int) -> tuple[PolygonSum, ...]:
    """Convergent patterns at point count m: 01-polygons plus insertion
    sums, all as polygon sums over the labels of the smaller configuration."""
    singles = [
        PolygonSum.from_terms(m, [(p, Fraction(1))])
        for p in convergent_01_polygons(m)
    ]
    if m >= 5:
        singles.extend(_insertion_sums(m, seed))
    return tuple(singles)


def _candidate_sums(n: int, seed: int) -> list[PolygonSum]:
    free_vars = [var(i) for i in range(1, n - 2)]
    seen: set = set()
    cands: list[PolygonSum] = []
    for m in range(4, n):
        k = m - 3
        if len(free_vars) < k + 1:
            continue  # the shuffle slot needs two variables
        for host_sum in _host_sums(m, seed):
            slot_labels = [var(i) for i in range(1, k + 1)]
            for plains, j, pair in _slot_assignments(free_vars, k, n):
                ps = _expand_host_sum(host_sum, slot_labels, plains, j, pair, n)
                key = tuple((p.sort_key(), c) for p, c in ps.items())
                if key in seen:
                    continue
                seen.add(key)
                cands.append(ps)
    return cands


class _Echelon:
    """Incremental exact independence testing on evaluation vectors."""

    def __init__(self, n: int, size: int, seed: int):
        self.points = random_points(n, size + 8, seed)
        self.rows: list[list[Fraction]] = []

    def try_add(self, fs: FormSum) -> bool:
        vec = [evaluate(fs, x) for x in self.points]
        for row in self.rows:
            lead = next(i for i, c in enumerate(row) if c)
            if vec[lead]:
                f = vec[lead] / row[lead]
                vec = [a - f * b for a, b in zip(vec, row)]
        if any(vec):
            self.rows.append(vec)
            return True
        return False


@lru_cache(maxsize=None)
def _insertion_sums(n: int, seed: int) -> tuple[PolygonSum, ...]:
    if not 5 <= n <= 7:
        raise DomainError("insertion generation supports point counts 5..7")
    convergent01 = convergent_01_polygons(n)
    cands = []
    for ps in _candidate_sums(n, seed):
        fs = polygon_sum_form(ps)
        if converges_on_delta(fs, seed):
            cands.append((ps, fs))
    # deterministic greedy order: small sums first, then lexicographic
    cands.sort(key=lambda t: (len(t[0]), tuple(p.sort_key() for p, _ in t[0].items())))
    ech = _Echelon(n, len(basis01(n)), derive_seed(seed, salt=3))
    for p in convergent01:
        ech.try_add(polygon_form(p))
    kept = []
    for ps, fs in cands:
        if ech.try_add(fs):
            kept.append(ps)
    return tuple(kept)


def insertion_forms(n: int, seed: int = 0) -> list[FormSum]:
    """Convergent shuffle-insertion sums extending the convergent 01-forms
    to an independent set."""
    return [polygon_sum_form(ps) for ps in _insertion_sums(n, seed)]


@dataclass(frozen=True)
class DeltaBasisReport:
    n: int
    convergent01: int
    insertion: int
    rank: int
    dimension: int

    @property
    def status(self) -> str:
        if self.rank == self.dimension:
            return "MATCH"
        if self.rank < self.dimension:
            return "SHORTFALL"
        return "UNSOUND"

    @property
    def ok(self) -> bool:
        return self.rank <= self.dimension


def delta_basis(n: int, seed: int = 0) -> tuple[list[FormSum], DeltaBasisReport]:
    """Convergent 01-forms plus insertion forms, with the certification
    report comparing their rank to the convergent-subspace dimension."""
    if not 4 <= n <= 7:
        raise DomainError("supported point counts are 4..7")
    conv01 = [polygon_form(p) for p in convergent_01_polygons(n)]
    ins = insertion_forms(n, seed) if n >= 5 else []
    forms = conv01 + ins
    r = rank(forms, seed) if forms else 0
    dim = len(convergent_subspace(n, seed))
    report = DeltaBasisReport(
        n=n, convergent01=len(conv01), insertion=len(ins), rank=r, dimension=dim
    )
    return forms, report
