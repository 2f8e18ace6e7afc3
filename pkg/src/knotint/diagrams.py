"""Chord and trivalent diagram combinatorics.

A diagram of degree n has 2n labeled vertices: k of them sit on an
oriented interval (in a fixed order along it) and s = 2n - k are free
trivalent vertices.  Every chord/edge is oriented from its lower label
to its higher label, and a diagram class carries an orientation sign
under relabeling: a label permutation contributes its parity, and every
edge whose endpoints get order-reversed contributes another -1 (the
antipodal map on the 2-sphere has degree -1).

Canonical classes fix interval labels 1..k in interval order and choose
the free labeling k+1..2n minimizing the sorted edge list.  A class
whose automorphism group contains an odd element equals its own
negative and is flagged ``is_zero``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

CHORD_DEGREE_GUARD = 6
TRIVALENT_DEGREE_GUARD = 4


class DegreeGuardError(ValueError):
    """Requested degree exceeds the enumeration guard."""


# ---------------------------------------------------------------------------
# canonical diagrams


@dataclass(frozen=True)
class Diagram:
    """A canonical diagram class.

    ``edges`` are (low, high) label pairs sorted lexicographically, with
    interval vertices labeled 1..k in interval order and free vertices
    k+1..k+s.  ``aut_count`` counts label automorphisms fixing the
    interval pointwise; ``is_zero`` marks classes killed by an
    orientation-reversing automorphism.
    """

    k: int
    s: int
    edges: tuple[tuple[int, int], ...]
    aut_count: int = 1
    is_zero: bool = False

    @property
    def vertex_count(self) -> int:
        return self.k + self.s

    @property
    def degree(self) -> int:
        return self.vertex_count // 2

    @property
    def n(self) -> int:
        return self.degree

    def key(self) -> tuple:
        return (self.k, self.s, self.edges)

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other) -> bool:
        return isinstance(other, Diagram) and self.key() == other.key()

    def __lt__(self, other: "Diagram") -> bool:
        return self.key() < other.key()

    def is_interval(self, v: int) -> bool:
        return 1 <= v <= self.k

    def chords(self) -> tuple[tuple[int, int], ...]:
        return tuple(e for e in self.edges if e[1] <= self.k)

    @property
    def has_chord(self) -> bool:
        return any(e[1] <= self.k for e in self.edges)

    @property
    def is_chord_diagram(self) -> bool:
        return self.s == 0

    def valence(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b in self.edges)

    def neighbors(self, v: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return out

    def validate(self) -> None:
        """Check the trivalent diagram invariants; raise ValueError if bad."""
        k, s = self.k, self.s
        if (k + s) % 2:
            raise ValueError("odd vertex count")
        if (k + 3 * s) % 2:
            raise ValueError("k + 3s must be even")
        if len(self.edges) != (k + 3 * s) // 2:
            raise ValueError("edge count mismatch")
        for a, b in self.edges:
            if not (1 <= a < b <= k + s):
                raise ValueError(f"bad edge ({a},{b})")
        for v in range(1, k + 1):
            if self.valence(v) != 1:
                raise ValueError(f"interval vertex {v} has valence != 1")
        for v in range(k + 1, k + s + 1):
            if self.valence(v) != 3:
                raise ValueError(f"free vertex {v} has valence != 3")
        if not self._connected():
            raise ValueError("diagram is disconnected from the interval")

    def _connected(self) -> bool:
        # The interval itself links all interval vertices.
        if self.k == 0:
            return self.s == 0
        seen = set(range(1, self.k + 1))
        stack = list(seen)
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.k + self.s

    def to_text(self) -> str:
        ivs = ",".join(str(i) for i in range(1, self.k + 1))
        fvs = ",".join(str(i) for i in range(self.k + 1, self.k + self.s + 1))
        es = ",".join(f"({a},{b})" for a, b in self.edges)
        return f"{self.degree}; I=[{ivs}]; F=[{fvs}]; E=[{es}]"

    @staticmethod
    def from_text(line: str) -> "Diagram":
        m = re.match(
            r"\s*(\d+)\s*;\s*I=\[([\d,\s]*)\]\s*;\s*F=\[([\d,\s]*)\]\s*;"
            r"\s*E=\[(.*)\]\s*$",
            line,
        )
        if not m:
            raise ValueError(f"cannot parse diagram line: {line!r}")
        ivs = [int(x) for x in m.group(2).split(",") if x.strip()]
        fvs = [int(x) for x in m.group(3).split(",") if x.strip()]
        edges = [
            (int(a), int(b))
            for a, b in re.findall(r"\((\d+)\s*,\s*(\d+)\)", m.group(4))
        ]
        diag, sign = canonicalize(tuple(ivs), edges, free=set(fvs))
        if sign < 0:
            raise ValueError("diagram text is not in canonical orientation")
        return diag


def _perm_parity(seq: Sequence[int]) -> int:
    """Parity sign of a sequence relative to its sorted order."""
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv % 2 else 1


def _free_slot_groups(base_map: dict[int, int],
                      edges: Sequence[tuple[int, int]],
                      free_set: set[int]) -> list[list[int]]:
    """Free labels grouped by the first interval position they attach to.

    The lexicographically minimal edge list must hand out slots group by
    group in this order (an assignment violating it can be improved at
    the first group's interval edge), so only within-group permutations
    need to be searched.  Legless vertices form the final group.
    """
    first_leg: dict[int, int] = {}
    for a, b in edges:
        pa, pb = base_map.get(a), base_map.get(b)
        if pa is not None and pb is None:
            first_leg[b] = min(first_leg.get(b, pa), pa)
        elif pb is not None and pa is None:
            first_leg[a] = min(first_leg.get(a, pb), pb)
    groups: dict[int, list[int]] = {}
    legless_rank = len(base_map) + 1
    for v in sorted(free_set):
        groups.setdefault(first_leg.get(v, legless_rank), []).append(v)
    return [groups[p] for p in sorted(groups)]


def canonicalize(
    interval_order: Sequence[int],
    edges: Iterable[tuple[int, int]],
    free: Iterable[int] | None = None,
) -> tuple[Diagram, int]:
    """Canonicalize a labeled diagram, returning (class, orientation sign).

    ``interval_order`` lists interval vertex labels by position on the
    interval; ``edges`` are oriented (tail, head) pairs.  The sign is the
    parity of the relabeling times -1 per edge whose orientation had to
    be restored to low-before-high.
    """
    edges = list(edges)
    interval_order = tuple(interval_order)
    k = len(interval_order)
    labels = set(interval_order)
    endpoint_labels = {v for e in edges for v in e}
    free_set = set(free) if free is not None else endpoint_labels - labels
    if free is not None and not endpoint_labels <= (labels | free_set):
        raise ValueError("edge endpoint not among declared vertices")
    all_labels = sorted(labels | free_set)
    total = len(all_labels)
    s = total - k

    base_map = {lab: pos + 1 for pos, lab in enumerate(interval_order)}
    groups = _free_slot_groups(base_map, edges, free_set)

    best_edges: tuple[tuple[int, int], ...] | None = None
    best_signs: set[int] = set()
    best_count = 0
    for group_perms in itertools.product(
            *(itertools.permutations(g) for g in groups)):
        mapping = dict(base_map)
        slot = k + 1
        for group in group_perms:
            for v in group:
                mapping[v] = slot
                slot += 1
        flips = 0
        mapped = []
        for a, b in edges:
            ma, mb = mapping[a], mapping[b]
            if ma == mb:
                raise ValueError("self-loop edge")
            if ma > mb:
                ma, mb = mb, ma
                flips += 1
            mapped.append((ma, mb))
        mapped_t = tuple(sorted(mapped))
        if best_edges is None or mapped_t < best_edges:
            best_edges = mapped_t
            sign = _perm_parity([mapping[lab] for lab in all_labels])
            best_signs = {sign * (-1 if flips % 2 else 1)}
            best_count = 1
        elif mapped_t == best_edges:
            sign = _perm_parity([mapping[lab] for lab in all_labels])
            best_signs.add(sign * (-1 if flips % 2 else 1))
            best_count += 1

    assert best_edges is not None
    is_zero = len(best_signs) > 1
    diag = Diagram(k, s, best_edges, aut_count=best_count, is_zero=is_zero)
    return diag, next(iter(best_signs))


def _canonicalize_bruteforce(
    interval_order: Sequence[int],
    edges: Iterable[tuple[int, int]],
) -> tuple[Diagram, int]:
    """Reference canonicalization searching every free relabeling."""
    edges = list(edges)
    interval_order = tuple(interval_order)
    k = len(interval_order)
    labels = set(interval_order)
    free_set = {v for e in edges for v in e} - labels
    all_labels = sorted(labels | free_set)
    total = len(all_labels)
    base_map = {lab: pos + 1 for pos, lab in enumerate(interval_order)}
    free_sorted = sorted(free_set)

    best: tuple | None = None
    best_signs: set[int] = set()
    best_count = 0
    for perm in itertools.permutations(range(k + 1, total + 1)):
        mapping = dict(base_map)
        mapping.update(zip(free_sorted, perm))
        flips = 0
        mapped = []
        for a, b in edges:
            ma, mb = mapping[a], mapping[b]
            if ma > mb:
                ma, mb = mb, ma
                flips += 1
            mapped.append((ma, mb))
        mapped_t = tuple(sorted(mapped))
        sign = _perm_parity([mapping[lab] for lab in all_labels]) * (
            -1 if flips % 2 else 1)
        if best is None or mapped_t < best:
            best = mapped_t
            best_signs = {sign}
            best_count = 1
        elif mapped_t == best:
            best_signs.add(sign)
            best_count += 1
    diag = Diagram(k, total - k, best, aut_count=best_count,
                   is_zero=len(best_signs) > 1)
    return diag, next(iter(best_signs))


# ---------------------------------------------------------------------------
# enumeration


def enumerate_chord_diagrams(n: int, guard: int = CHORD_DEGREE_GUARD) -> list[Diagram]:
    """All perfect matchings of 2n linearly ordered points, canonical order."""
    if n < 1:
        raise ValueError("degree must be positive")
    if n > guard:
        raise DegreeGuardError(f"chord enumeration capped at n <= {guard}")

    out: list[Diagram] = []

    def match(points: tuple[int, ...], acc: list[tuple[int, int]]) -> None:
        if not points:
            out.append(Diagram(2 * n, 0, tuple(sorted(acc))))
            return
        a = points[0]
        for i in range(1, len(points)):
            b = points[i]
            rest = points[1:i] + points[i + 1:]
            match(rest, acc + [(a, b)])

    match(tuple(range(1, 2 * n + 1)), [])
    return sorted(out)


def _free_multigraphs(s: int, offset: int) -> Iterator[tuple[tuple[tuple[int, int], ...], list[int]]]:
    """Yield (free-free edge multiset, leg count per free vertex).

    Free vertices are labeled offset+1 .. offset+s with valence at most 3;
    legs make up the rest of each valence.
    """
    verts = list(range(offset + 1, offset + s + 1))
    pairs = [(a, b) for i, a in enumerate(verts) for b in verts[i + 1:]]

    def rec(idx: int, degs: dict[int, int], acc: list[tuple[int, int]]):
        if idx == len(pairs):
            yield tuple(acc), [3 - degs[v] for v in verts]
            return
        a, b = pairs[idx]
        cap = min(3 - degs[a], 3 - degs[b])
        for mult in range(cap + 1):
            degs[a] += mult
            degs[b] += mult
            acc.extend([(a, b)] * mult)
            yield from rec(idx + 1, degs, acc)
            degs[a] -= mult
            degs[b] -= mult
            if mult:
                del acc[-mult:]

    if s == 0:
        yield (), []
    else:
        yield from rec(0, {v: 0 for v in verts}, [])


def enumerate_trivalent_diagrams(
    n: int, guard: int = TRIVALENT_DEGREE_GUARD, include_zero: bool = True
) -> list[Diagram]:
    """All connected canonical diagram classes of degree n.

    Classes with an orientation-reversing automorphism are included and
    flagged ``is_zero`` (they vanish in the diagram space) unless
    ``include_zero`` is false.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    if n > guard:
        raise DegreeGuardError(f"trivalent enumeration capped at n <= {guard}")

    found: set[Diagram] = set()
    for s in range(0, 2 * n):
        k = 2 * n - s
        if (k + 3 * s) % 2:
            continue
        for ff_edges, legs in _free_multigraphs(s, k):
            total_legs = sum(legs)
            if total_legs > k or (k - total_legs) % 2:
                continue
            free_verts = list(range(k + 1, k + s + 1))
            # Multiset of leg owners, then chord matchings on the rest.
            owners: list[int] = []
            for v, cnt in zip(free_verts, legs):
                owners.extend([v] * cnt)
            positions = list(range(1, k + 1))
            for leg_positions in itertools.combinations(positions, total_legs):
                rest = [p for p in positions if p not in leg_positions]
                for owner_perm in set(itertools.permutations(owners)):
                    leg_edges = [
                        (p, v) for p, v in zip(leg_positions, owner_perm)
                    ]
                    for chord_edges in _matchings(tuple(rest)):
                        edges = list(chord_edges) + leg_edges + list(ff_edges)
                        diag, _ = canonicalize(tuple(positions), edges)
                        try:
                            diag.validate()
                        except ValueError:
                            continue
                        found.add(diag)
    out = sorted(found)
    if not include_zero:
        out = [d for d in out if not d.is_zero]
    return out


@lru_cache(maxsize=None)
def _matchings(points: tuple[int, ...]) -> tuple[tuple[tuple[int, int], ...], ...]:
    if not points:
        return ((),)
    a = points[0]
    out = []
    for i in range(1, len(points)):
        b = points[i]
        rest = points[1:i] + points[i + 1:]
        for sub in _matchings(rest):
            out.append(((a, b),) + sub)
    return tuple(out)


# ---------------------------------------------------------------------------
# products, primality, rotations


def connected_sum(d1: Diagram, d2: Diagram) -> Diagram:
    """Concatenate intervals; result reduced to its rotation-minimal form.

    Closing the interval into a circle identifies products taken in
    either order, so the representative is chosen minimal over interval
    rotations; this makes the operation commutative on canonical forms.
    """
    if d1.vertex_count == 0:
        return d2
    if d2.vertex_count == 0:
        return d1
    shift_iv = d1.k
    shift_fv = d1.k + d1.s

    def relab(v: int) -> int:
        if v <= d2.k:
            return v + shift_iv
        return v + shift_fv

    # d1 free labels move up to make room for d2's interval labels.
    def relab1(v: int) -> int:
        return v if v <= d1.k else v + d2.k

    edges = [(relab1(a), relab1(b)) for a, b in d1.edges]
    edges += [(relab(a), relab(b)) for a, b in d2.edges]
    k = d1.k + d2.k
    diag, _ = canonicalize(tuple(range(1, k + 1)), edges)
    return rotation_minimal(diag)


EMPTY_DIAGRAM = Diagram(0, 0, ())


def rotate_interval(d: Diagram) -> tuple[Diagram, int]:
    """Move the last interval vertex to the front of the interval.

    Returns the canonical class of the rotated diagram and the
    orientation sign relating it to ``d``.
    """
    if d.k == 0:
        return d, 1
    order = (d.k,) + tuple(range(1, d.k))
    return canonicalize(order, d.edges)


def rotation_orbit(d: Diagram) -> list[tuple[Diagram, int]]:
    """All interval rotations of ``d`` as (class, sign) pairs."""
    out = [(d, 1)]
    cur, sign = d, 1
    for _ in range(d.k - 1):
        cur, s = rotate_interval(cur)
        sign *= s
        out.append((cur, sign))
    return out


def rotation_minimal(d: Diagram) -> Diagram:
    """Rotation-minimal representative of the cyclic class of ``d``."""
    return min((c for c, _ in rotation_orbit(d)), default=d)


def cyclic_aut_count(d: Diagram) -> int:
    """Automorphisms of the circular closure: pairs (rotation, relabel)."""
    count = 0
    cur, sign = d, 1
    for step in range(max(d.k, 1)):
        if step:
            cur, s = rotate_interval(cur)
            sign *= s
        if cur == d:
            count += d.aut_count
    return count


def is_prime(d: Diagram) -> bool:
    """True iff no interval split point factors ``d`` into two diagrams.

    A split between consecutive interval positions (or before the first /
    after the last) is separating when no chord, edge or free-vertex
    cluster connects the two sides and both sides are non-empty.
    """
    if d.vertex_count == 0:
        return False
    comps = _off_interval_components(d)
    for gap in range(0, d.k + 1):
        left = set(range(1, gap + 1))
        ok = True
        left_size = len(left)
        right_size = d.k - len(left)
        for comp_ivs, comp_size in comps:
            if not comp_ivs:
                ok = False
                break
            if all(v in left for v in comp_ivs):
                left_size += comp_size
            elif all(v not in left for v in comp_ivs):
                right_size += comp_size
            else:
                ok = False
                break
        if ok and left_size > 0 and right_size > 0:
            return False
    return True


def _off_interval_components(d: Diagram) -> list[tuple[list[int], int]]:
    """Connected components of the diagram minus the interval path.

    Each component is reported as (interval attachment points, number of
    free vertices in it).  Chords count as two-point components.
    """
    parent = {v: v for v in range(1, d.vertex_count + 1)}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in d.edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in range(1, d.vertex_count + 1):
        groups.setdefault(find(v), []).append(v)
    out = []
    for verts in groups.values():
        ivs = [v for v in verts if v <= d.k]
        free_count = len(verts) - len(ivs)
        out.append((ivs, free_count))
    return out


# ---------------------------------------------------------------------------
# diagram vectors


class DiagramVector:
    """Sparse exact-rational combination of canonical diagram classes."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Diagram, Fraction | int] | None = None):
        self.coeffs: dict[Diagram, Fraction] = {}
        if coeffs:
            for d, c in coeffs.items():
                self._add(d, Fraction(c))
        self._check()

    def _add(self, d: Diagram, c: Fraction) -> None:
        if c == 0 or d.is_zero:
            return
        new = self.coeffs.get(d, Fraction(0)) + c
        if new == 0:
            self.coeffs.pop(d, None)
        else:
            self.coeffs[d] = new

    def _check(self) -> None:
        sizes = {d.vertex_count for d in self.coeffs}
        if len(sizes) > 1:
            raise ValueError("mixed vertex counts in diagram vector")

    def __add__(self, other: "DiagramVector") -> "DiagramVector":
        out = DiagramVector(self.coeffs)
        for d, c in other.coeffs.items():
            out._add(d, c)
        out._check()
        return out

    def __sub__(self, other: "DiagramVector") -> "DiagramVector":
        return self + other.scale(-1)

    def scale(self, c: Fraction | int) -> "DiagramVector":
        c = Fraction(c)
        return DiagramVector({d: v * c for d, v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, DiagramVector) and self.coeffs == other.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        terms = " + ".join(f"({c})*[{d.to_text()}]" for d, c in sorted(
            self.coeffs.items(), key=lambda t: t[0].key()))
        return f"DiagramVector({terms or '0'})"

    @staticmethod
    def single(d: Diagram, c: Fraction | int = 1) -> "DiagramVector":
        return DiagramVector({d: Fraction(c)})

    def as_row(self) -> dict:
        return {d.key(): c for d, c in self.coeffs.items()}


# ---------------------------------------------------------------------------
# STU / 4T / IHX relations


def _resolution_pair(
    s_diag: Diagram, leg: tuple[int, int]
) -> tuple[tuple[Diagram, int], tuple[Diagram, int]] | None:
    """Resolve free vertex j of edge ``leg``=(i, j) into the interval.

    Returns canonicalized (T, sign), (U, sign) where T keeps i before the
    freed label j on the interval and U the reverse, with the two exit
    edges keeping their direction relative to the resolved vertex.  The
    relation vector is then S + T - U.  Returns None when the leg is
    doubled (both local faces carry an identically vanishing form).
    """
    i, j = leg
    if s_diag.edges.count(leg) > 1:
        return None
    exits = []
    removed_leg = False
    new_edges = []
    for a, b in s_diag.edges:
        if (a, b) == leg and not removed_leg:
            removed_leg = True
            continue
        if a == j:
            exits.append((b, "out"))
        elif b == j:
            exits.append((a, "in"))
        else:
            new_edges.append((a, b))
    assert len(exits) == 2
    (a1, d1), (a2, d2) = exits
    # First new interval vertex (label i) inherits exit 1, second (label
    # j, now on the interval) inherits exit 2; directions preserved.
    e1 = (i, a1) if d1 == "out" else (a1, i)
    e2 = (j, a2) if d2 == "out" else (a2, j)
    edges = new_edges + [e1, e2]
    base = list(range(1, s_diag.k + 1))
    pos = base.index(i)
    order_t = tuple(base[: pos + 1] + [j] + base[pos + 1:])
    order_u = tuple(base[:pos] + [j, i] + base[pos + 1:])
    return canonicalize(order_t, edges), canonicalize(order_u, edges)


def _interval_legs(d: Diagram) -> list[tuple[int, int]]:
    """Edges from an interval vertex to a free vertex, one per multi-copy."""
    return sorted({e for e in d.edges if e[0] <= d.k < e[1]})


def stu_relation_vectors(n: int, guard: int = TRIVALENT_DEGREE_GUARD) -> list[DiagramVector]:
    """All STU relation vectors of degree n over canonical classes."""
    out = []
    for s_diag in enumerate_trivalent_diagrams(n, guard=guard):
        for leg in _interval_legs(s_diag):
            pair = _resolution_pair(s_diag, leg)
            if pair is None:
                continue
            (t_diag, t_sign), (u_diag, u_sign) = pair
            vec = (
                DiagramVector.single(s_diag)
                + DiagramVector.single(t_diag, t_sign)
                - DiagramVector.single(u_diag, u_sign)
            )
            if vec:
                out.append(vec)
    return out


def four_t_relation_vectors(n: int, guard: int = CHORD_DEGREE_GUARD) -> list[DiagramVector]:
    """4T vectors over chord classes, as differences of STU resolutions.

    Generators are the diagrams with a single free vertex whose three
    edges all end on the interval; resolving two different legs of the
    same generator and subtracting eliminates the free vertex.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    if n > guard:
        raise DegreeGuardError(f"4T generation capped at n <= {guard}")
    out = []
    k = 2 * n - 1
    free_v = 2 * n
    for legs in itertools.combinations(range(1, k + 1), 3):
        rest = [p for p in range(1, k + 1) if p not in legs]
        for chords in _matchings(tuple(rest)):
            edges = [(p, free_v) for p in legs] + list(chords)
            y_diag, _ = canonicalize(tuple(range(1, k + 1)), edges)
            resolutions = []
            for leg in _interval_legs(y_diag):
                pair = _resolution_pair(y_diag, leg)
                if pair is not None:
                    resolutions.append(pair)
            for first, second in itertools.combinations(resolutions, 2):
                (ta, sa), (ua, su_a) = first
                (tb, sb), (ub, su_b) = second
                vec = (
                    DiagramVector.single(ta, sa)
                    - DiagramVector.single(ua, su_a)
                    - DiagramVector.single(tb, sb)
                    + DiagramVector.single(ub, su_b)
                )
                if vec:
                    out.append(vec)
    # Deduplicate identical vectors.
    seen = set()
    unique = []
    for v in out:
        key = tuple(sorted((d.key(), c) for d, c in v.coeffs.items()))
        if key not in seen:
            seen.add(key)
            unique.append(v)
    return unique


def ihx_relation_vectors(n: int, guard: int = TRIVALENT_DEGREE_GUARD) -> list[DiagramVector]:
    """IHX vectors: reconnections across an edge joining two free vertices."""
    out = []
    for diag in enumerate_trivalent_diagrams(n, guard=guard):
        for edge in sorted({e for e in diag.edges
                            if e[0] > diag.k and e[1] > diag.k}):
            u, v = edge
            if diag.edges.count(edge) > 1:
                continue
            exits_u, exits_v, rest = [], [], []
            removed = False
            for a, b in diag.edges:
                if (a, b) == edge and not removed:
                    removed = True
                    continue
                if a == u:
                    exits_u.append((b, "out"))
                elif b == u:
                    exits_u.append((a, "in"))
                elif a == v:
                    exits_v.append((b, "out"))
                elif b == v:
                    exits_v.append((a, "in"))
                else:
                    rest.append((a, b))
            if len(exits_u) != 2 or len(exits_v) != 2:
                continue

            def attach(x: int, exit_: tuple[int, str]) -> tuple[int, int]:
                t, dr = exit_
                return (x, t) if dr == "out" else (t, x)

            (a1, a2) = exits_u
            (b1, b2) = exits_v
            i_edges = rest + [edge, attach(u, a1), attach(u, a2),
                              attach(v, b1), attach(v, b2)]
            h_edges = rest + [edge, attach(u, a1), attach(u, b1),
                              attach(v, a2), attach(v, b2)]
            x_edges = rest + [edge, attach(u, a1), attach(u, b2),
                              attach(v, a2), attach(v, b1)]
            order = tuple(range(1, diag.k + 1))
            di, si = canonicalize(order, i_edges)
            dh, sh = canonicalize(order, h_edges)
            dx, sx = canonicalize(order, x_edges)
            # With the collision-face labeling (fixed u, v and exits keeping
            # their direction), all three face integrals agree, so the three
            # reconnections sum to zero.
            vec = (
                DiagramVector.single(di, si)
                + DiagramVector.single(dh, sh)
                + DiagramVector.single(dx, sx)
            )
            if vec:
                out.append(vec)
    return out


def quotient_dimension(
    generators: Sequence[Diagram], relations: Sequence[DiagramVector]
) -> int:
    """dim span(generators) minus the rank of the relation matrix."""
    from . import rational

    degrees = {d.vertex_count for d in generators}
    degrees |= {d.vertex_count for v in relations for d in v.coeffs}
    if len(degrees) > 1:
        raise ValueError("mixed degrees in quotient computation")
    gens = [d for d in generators if not d.is_zero]
    return len(set(gens)) - rational.rank([v.as_row() for v in relations])


def ihx_in_stu_span(n: int, guard: int = TRIVALENT_DEGREE_GUARD) -> bool:
    """True iff every IHX vector lies in the rational span of STU."""
    from . import rational

    stu_rows = [v.as_row() for v in stu_relation_vectors(n, guard=guard)]
    elim = rational.Eliminator()
    for row in stu_rows:
        elim.add(row)
    return all(not elim.reduce(v.as_row())
               for v in ihx_relation_vectors(n, guard=guard))


# ---------------------------------------------------------------------------
# weight systems


class WeightSystem:
    """Exact-rational functional on degree-n classes annihilating STU."""

    def __init__(self, degree: int, values: Mapping[Diagram, Fraction | int],
                 check: bool = True):
        self.degree = degree
        self.values = {d: Fraction(c) for d, c in values.items()}
        if check:
            for vec in stu_relation_vectors(degree):
                if self(vec) != 0:
                    raise ValueError("values do not annihilate STU")

    def __call__(self, arg: Diagram | DiagramVector) -> Fraction:
        if isinstance(arg, Diagram):
            if arg.is_zero:
                return Fraction(0)
            return self.values.get(arg, Fraction(0))
        return sum((c * self(d) for d, c in arg.coeffs.items()), Fraction(0))

    @staticmethod
    def from_chord_values(
        n: int, chord_values: Mapping[Diagram, Fraction | int]
    ) -> "WeightSystem":
        """Extend values on chord classes through the STU relations."""
        from . import rational

        diagrams = enumerate_trivalent_diagrams(n, include_zero=False)
        chords = [d for d in diagrams if d.is_chord_diagram]
        fixed = {d.key(): Fraction(chord_values.get(d, 0)) for d in chords}
        equations = [v.as_row() for v in stu_relation_vectors(n)]
        unknown_keys = [d.key() for d in diagrams if not d.is_chord_diagram]
        solved = rational.solve_homogeneous(equations, fixed, unknown_keys)
        by_key = {d.key(): d for d in diagrams}
        values = {by_key[key]: val for key, val in solved.items()}
        for d in chords:
            values[d] = fixed[d.key()]
        return WeightSystem(n, values)


def is_primitive(w: WeightSystem) -> bool:
    """True iff the weight system vanishes on every reducible class."""
    for d in enumerate_trivalent_diagrams(w.degree, include_zero=False):
        if not is_prime(d) and w(d) != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# edge-contraction boundary operator


def _contract_edge(d: Diagram, edge_index: int) -> tuple[Diagram, int] | None:
    """Contract the edge at ``edge_index``; None if a loop would appear."""
    u, v = d.edges[edge_index]
    if v <= d.k:
        raise ValueError("chords are not contractible")
    remaining = list(d.edges[:edge_index]) + list(d.edges[edge_index + 1:])
    if (u, v) in remaining:
        return None  # parallel copy becomes a loop

    def relab(x: int) -> int:
        if x == v:
            return u
        return x - 1 if x > v else x

    new_edges = [(relab(a), relab(b)) for a, b in remaining]
    order = tuple(range(1, d.k + 1))
    return canonicalize(order, new_edges)


def boundary_by_contraction(v: DiagramVector | Diagram) -> DiagramVector:
    """Signed sum of single edge contractions (free-free or interval-free).

    Contracting (u, v) merges label v into u; the term carries the sign
    (-1)**v of moving the removed coordinate block out of the
    orientation, composed with the canonicalization sign of the
    contracted class.  (An edge-position sign rule is incompatible with
    the label-parity orientation used throughout and breaks d(d(x)) = 0
    at degree 3.)  Output classes have one vertex fewer and are not
    trivalent in general.
    """
    if isinstance(v, Diagram):
        v = DiagramVector.single(v)
    out = DiagramVector()
    for d, coeff in v.coeffs.items():
        for idx, (a, b) in enumerate(d.edges):
            if b <= d.k:
                continue  # chord
            res = _contract_edge(d, idx)
            if res is None:
                continue
            contracted, sign = res
            term_sign = sign * (-1 if b % 2 else 1)
            out._add(contracted, coeff * term_sign)
    out._check()
    return out
