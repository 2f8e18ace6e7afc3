"""Exact rational sparse linear algebra.

Rows are sparse mappings from hashable column keys to ``Fraction``
coefficients.  Everything here is exact, so ranks and span tests do not
depend on row order or scaling.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping

Row = dict[Hashable, Fraction]


class Eliminator:
    """Incremental Gaussian eliminator over the rationals.

    ``last_keys`` lists keys that may only pivot when nothing else is
    left in a row (used for right-hand-side columns).
    """

    def __init__(self, last_keys: frozenset = frozenset()) -> None:
        self.pivots: dict[Hashable, Row] = {}
        self.last_keys = last_keys

    def _leading_key(self, row: Row) -> Hashable:
        normal = [k for k in row if k not in self.last_keys]
        return min(normal, key=repr) if normal else min(row, key=repr)

    def reduce(self, row: Mapping[Hashable, Fraction]) -> Row:
        """Return ``row`` reduced against the current pivot rows."""
        work: Row = {k: Fraction(v) for k, v in row.items() if v != 0}
        while work:
            lead = self._leading_key(work)
            pivot = self.pivots.get(lead)
            if pivot is None:
                return work
            factor = work[lead] / pivot[lead]
            for k, v in pivot.items():
                new = work.get(k, Fraction(0)) - factor * v
                if new == 0:
                    work.pop(k, None)
                else:
                    work[k] = new
        return work

    def add(self, row: Mapping[Hashable, Fraction]) -> bool:
        """Insert ``row``; True if it increased the rank."""
        reduced = self.reduce(row)
        if not reduced:
            return False
        self.pivots[self._leading_key(reduced)] = reduced
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rank(rows: Iterable[Mapping[Hashable, Fraction]]) -> int:
    """Rank of the span of ``rows``, by exact elimination."""
    elim = Eliminator()
    for row in rows:
        elim.add(row)
    return elim.rank


def in_span(row: Mapping[Hashable, Fraction],
            rows: Iterable[Mapping[Hashable, Fraction]]) -> bool:
    """True iff ``row`` is a rational combination of ``rows``."""
    elim = Eliminator()
    for r in rows:
        elim.add(r)
    return not elim.reduce(row)


def solve_homogeneous(equations: Iterable[Mapping[Hashable, Fraction]],
                      fixed: Mapping[Hashable, Fraction],
                      unknowns: Iterable[Hashable]) -> dict[Hashable, Fraction]:
    """Solve ``eq . x = 0`` for all equations given some fixed coordinates.

    Raises ``ValueError`` if the system is inconsistent or does not pin
    every unknown.
    """
    rhs_key = ("_rhs_",)
    elim = Eliminator(last_keys=frozenset({rhs_key}))
    for eq in equations:
        row: Row = {}
        const = Fraction(0)
        for k, v in eq.items():
            if v == 0:
                continue
            if k in fixed:
                const += v * fixed[k]
            else:
                row[k] = Fraction(v)
        if const != 0:
            row[rhs_key] = const
        if row and set(row) == {rhs_key}:
            raise ValueError("inconsistent linear system")
        elim.add(row)

    # Gauss-Jordan: back-reduce pivot rows so each pivot key appears in
    # exactly one row.
    leads = sorted(elim.pivots, key=repr, reverse=True)
    for lead in leads:
        row = elim.pivots[lead]
        for other_lead in leads:
            if other_lead is lead:
                continue
            other = elim.pivots[other_lead]
            coef = other.get(lead)
            if coef is None:
                continue
            factor = coef / row[lead]
            for k, v in row.items():
                new = other.get(k, Fraction(0)) - factor * v
                if new == 0:
                    other.pop(k, None)
                else:
                    other[k] = new

    solution: dict[Hashable, Fraction] = {}
    for lead, row in elim.pivots.items():
        if lead == rhs_key:
            raise ValueError("inconsistent linear system")
        extra = [k for k in row if k not in (lead, rhs_key)]
        if extra:
            raise ValueError("underdetermined linear system")
        solution[lead] = -row.get(rhs_key, Fraction(0)) / row[lead]

    out: dict[Hashable, Fraction] = {}
    for u in unknowns:
        if u in fixed:
            continue
        if u not in solution:
            raise ValueError(f"unknown {u!r} not determined by the system")
        out[u] = solution[u]
    return out
