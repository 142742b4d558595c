"""Convergence of forms on the standard cell, tested exactly.

The standard cell orders the points 0 < t_1 < ... < t_{n-3} < 1.  Each of
its chords names a boundary divisor where the points of one arc collide; a
form integrates across that divisor exactly when its pullback through a
one-parameter collapse survives to order >= 0 once the vanishing of the
volume form is counted in.

A collapse chart substitutes t_k = base + u * scale_k for the variables of
the collapsing side (the side of the chord without infinity), freezing the
remaining variables at generic rational constants.  base is pinned to 0 or 1
when that point collides too, and is a free generic rational when the side
is variables only.  The volume form contributes u^e with

    e = (#side variables - 1)   when the side contains 0 or 1,
    e = (#side variables - 2)   when the side is variables only,

the count of ratio coordinates in the standard collapse parametrization.
Every pullback is a univariate rational function with Fraction coefficients,
so Laurent orders and residue coefficients come out exactly.  Two charts
with independent constants must agree; the denominator's power of u is
structural (it only depends on which labels sit in the side), so accidental
cancellation can only overestimate an order and the minimum over charts is
the safe answer.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from . import linalg
from .forms import BasicForm, FormSum, basis01_forms, is_01_polygon, polygon_form
from .polygons import (
    INF,
    ONE,
    ZERO,
    Chord,
    DomainError,
    Label,
    Polygon,
    cell_order,
    chords,
    common_chords,
    labels_for,
)
from .util import derive_seed, parallel_map


class UnstableChartError(RuntimeError):
    """Independent collapse charts kept disagreeing."""


def delta(n: int) -> Polygon:
    """The standard cell: marked points in the order 0, t_1, ..., t_{n-3}, 1."""
    return Polygon(cell_order(n))


def delta_chords(n: int) -> list[Chord]:
    return sorted(chords(delta(n)), key=lambda c: c.sort_key())


def converges_01(p: Polygon) -> bool:
    """Chord criterion: a 01-polygon's form converges on the standard cell
    when it shares no chord with it."""
    if not is_01_polygon(p):
        raise DomainError(f"{p} is not a 01-polygon")
    return not common_chords(p, delta(p.n))


@dataclass(frozen=True)
class BlowupChart:
    """One-parameter collapse transverse to a chord's divisor."""

    chord: Chord
    side: tuple[Label, ...]  # collapsing side; never contains infinity
    base: Fraction
    scales: tuple[tuple[Label, Fraction], ...]
    off_values: tuple[tuple[Label, Fraction], ...]
    exponent: int

    def linear_value(self, label: Label) -> tuple[Fraction, Fraction]:
        """(alpha, beta) with value = alpha + beta*u under the collapse."""
        if label == ZERO:
            return Fraction(0), Fraction(0)
        if label == ONE:
            return Fraction(1), Fraction(0)
        for l, s in self.scales:
            if l == label:
                return self.base, s
        for l, v in self.off_values:
            if l == label:
                return v, Fraction(0)
        raise DomainError(f"label {label} unknown to this chart")


def _draw_distinct(rng: random.Random, used: set[Fraction], avoid: set[Fraction]) -> Fraction:
    while True:
        v = Fraction(rng.randint(-60, 60), rng.randint(1, 11))
        if v not in used and v not in avoid:
            used.add(v)
            return v


def build_chart(c: Chord, rng: random.Random) -> BlowupChart:
    """Generic collapse chart for a chord of the standard cell."""
    n = c.n
    side = set(c.side)
    if INF in side:
        side = set(labels_for(n)) - side
    side_vars = sorted((l for l in side if l.is_var), key=lambda l: l.index)
    off_vars = sorted(
        (l for l in labels_for(n) if l.is_var and l not in side),
        key=lambda l: l.index,
    )
    used: set[Fraction] = set()
    avoid = {Fraction(0), Fraction(1)}
    if ZERO in side:
        base = Fraction(0)
        exponent = len(side_vars) - 1
    elif ONE in side:
        base = Fraction(1)
        exponent = len(side_vars) - 1
    else:
        base = _draw_distinct(rng, used, avoid)
        exponent = len(side_vars) - 2
    scales = tuple((l, _draw_distinct(rng, used, {Fraction(0)})) for l in side_vars)
    off = tuple((l, _draw_distinct(rng, used, avoid | {base})) for l in off_vars)
    return BlowupChart(
        chord=c,
        side=tuple(sorted(side, key=lambda l: (not l.is_var, l.index))),
        base=base,
        scales=scales,
        off_values=off,
        exponent=exponent,
    )


# ---------------------------------------------------------------------------
# univariate exact helpers: polynomials as coefficient lists (low to high)

def _poly_mul(p: list[Fraction], q: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_add(p: list[Fraction], q: list[Fraction]) -> list[Fraction]:
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, b in enumerate(q):
        out[i] += b
    return out


def _series_reciprocal(p: list[Fraction], order: int) -> list[Fraction]:
    """Taylor coefficients of 1/p(u) through u^order; needs p(0) != 0."""
    inv0 = 1 / p[0]
    coeffs = [inv0]
    for k in range(1, order + 1):
        s = Fraction(0)
        for i in range(1, min(k, len(p) - 1) + 1):
            s += p[i] * coeffs[k - i]
        coeffs.append(-s * inv0)
    return coeffs


def _decompose(bf: BasicForm, coeff: Fraction, chart: BlowupChart):
    """Split a pulled-back term coeff/prod(alpha_j + beta_j u) into
    (scalar, u-power, nonzero roots with multiplicity)."""
    k = coeff * bf.sign
    z = 0
    roots: dict[Fraction, int] = {}
    for a, b in bf.factors:
        aa, ba = chart.linear_value(a)
        ab, bb = chart.linear_value(b)
        alpha, beta = aa - ab, ba - bb
        if beta == 0:
            if alpha == 0:
                raise UnstableChartError("degenerate factor in chart")
            k /= alpha
        else:
            k /= beta
            r = -alpha / beta
            if r == 0:
                z += 1
            else:
                roots[r] = roots.get(r, 0) + 1
    return k, z, roots


def _chart_order(f: FormSum, chart: BlowupChart) -> int | None:
    """Laurent order in u at 0 of the pullback, or None when it vanishes
    identically on the chart line."""
    terms = [_decompose(bf, coeff, chart) for bf, coeff in f.items()]
    big_z = max(z for _, z, _ in terms)
    all_roots: dict[Fraction, int] = {}
    for _, _, roots in terms:
        for r, m in roots.items():
            all_roots[r] = max(all_roots.get(r, 0), m)
    num: list[Fraction] = [Fraction(0)]
    for k, z, roots in terms:
        part = [Fraction(0)] * (big_z - z) + [k]
        for r in sorted(all_roots):
            for _ in range(all_roots[r] - roots.get(r, 0)):
                part = _poly_mul(part, [-r, Fraction(1)])
        num = _poly_add(num, part)
    trailing = next((i for i, c in enumerate(num) if c), None)
    if trailing is None:
        return None
    return trailing - big_z


def _residue_coefficient(
    bf: BasicForm, coeff: Fraction, chart: BlowupChart
) -> Fraction:
    """Coefficient of u^(-1-e) in the pullback of one basic form."""
    k, z, roots = _decompose(bf, coeff, chart)
    if z > chart.exponent + 1:
        raise UnstableChartError(
            f"pole of order {z - chart.exponent} across {chart.chord}; "
            "cell forms should be at worst logarithmic there"
        )
    p = z - 1 - chart.exponent
    if p < 0:
        return Fraction(0)
    poly = [Fraction(1)]
    for r in sorted(roots):
        for _ in range(roots[r]):
            poly = _poly_mul(poly, [-r, Fraction(1)])
    return k * _series_reciprocal(poly, p)[p]


def _chord_rng(seed: int, c: Chord, round_: int) -> random.Random:
    tag = ",".join(str(l) for l in c.sorted_side())
    return random.Random(f"{seed}|{c.n}|{tag}|{round_}")


def pole_order(f: FormSum, c: Chord, seed: int = 0):
    """Total order (pullback Laurent order plus the volume exponent) of f
    along a chord of the standard cell; math.inf for the zero form.

    Order >= 0 means integrable across that divisor, -1 is a logarithmic
    divergence.  Two independent charts must agree; on disagreement two more
    are drawn and the minimum, if reproduced, wins.
    """
    if c not in chords(delta(f.n)):
        raise DomainError(f"{c} is not a chord of the standard cell")
    if f.is_zero():
        return math.inf

    def one(round_: int):
        chart = build_chart(c, _chord_rng(seed, c, round_))
        order = _chart_order(f, chart)
        return math.inf if order is None else order + chart.exponent

    orders = [one(0), one(1)]
    if orders[0] == orders[1]:
        return orders[0]
    orders += [one(2), one(3)]
    best = min(orders)
    if orders.count(best) >= 2:
        return best
    raise UnstableChartError(f"charts disagree on {c}: {orders}")


def converges_on_delta(f: FormSum, seed: int = 0) -> bool:
    """True when every chord of the standard cell is crossed integrably."""
    if f.is_zero():
        return True
    cs = delta_chords(f.n)
    results = parallel_map(lambda c: pole_order(f, c, seed), cs)
    return all(o >= 0 for o in results)


def chord_pole_report(f: FormSum, seed: int = 0) -> list[tuple[Chord, object]]:
    """Per-chord total orders, for reporting."""
    return [(c, pole_order(f, c, seed)) for c in delta_chords(f.n)]


def _constraint_rows(
    base: Sequence[FormSum], c: Chord, seed: int, rounds: Iterable[int]
) -> list[list[Fraction]]:
    rows = []
    for round_ in rounds:
        chart = build_chart(c, _chord_rng(seed, c, round_))
        row = []
        for f in base:
            items = f.items()
            if len(items) != 1:
                raise DomainError("constraint rows expect basic generators")
            bf, coeff = items[0]
            row.append(_residue_coefficient(bf, coeff, chart))
        rows.append(row)
    return rows


def convergent_subspace(n: int, seed: int = 0) -> list[FormSum]:
    """Basis of the subspace of the 01-span converging on the standard cell.

    Per chord, the u^(-1) coefficient of the exponent-weighted pullback must
    vanish; each chart contributes one exact linear constraint on the
    01-coordinates.  Two charts per chord to start, then every solution is
    re-verified on 8 fresh charts per chord (and re-solved with the
    violating rows added, if that ever fires).
    """
    if not 4 <= n <= 7:
        raise DomainError("supported point counts are 4..7")
    base = basis01_forms(n)
    cs = delta_chords(n)
    rows: list[list[Fraction]] = []
    for c in cs:
        rows.extend(_constraint_rows(base, c, seed, range(2)))

    for attempt in range(4):
        vectors = linalg.nullspace(rows, ncols=len(base))
        bad_rows: list[list[Fraction]] = []
        fresh = derive_seed(seed, salt=11 + attempt)
        for c in cs:
            extra = _constraint_rows(base, c, fresh, range(8))
            for row in extra:
                if any(
                    sum((r * v for r, v in zip(row, vec)), Fraction(0)) != 0
                    for vec in vectors
                ):
                    bad_rows.append(row)
        if not bad_rows:
            out = []
            for vec in vectors:
                fs = FormSum.zero(n)
                for coeff, b in zip(vec, base):
                    if coeff:
                        fs = fs + coeff * b
                out.append(fs)
            check_seed = derive_seed(seed, salt=29)
            for fs in out:
                if not converges_on_delta(fs, check_seed):
                    raise UnstableChartError(
                        "a solved convergent combination failed the pole test"
                    )
            return out
        rows.extend(bad_rows)
    raise UnstableChartError("constraints kept shifting under fresh charts")
