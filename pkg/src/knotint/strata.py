"""Combinatorial stratification of compactified configuration spaces.

A boundary stratum is encoded by a nested family of subsets of the
configuration points: subsets are pairwise disjoint or nested, each of
size at least two, and the codimension of the stratum equals the number
of subsets.  In interval mode the subsets are consecutive runs, which
reproduces the associahedron face pattern.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .diagrams import Diagram

POINT_GUARD = 8


class PointGuardError(ValueError):
    """Requested ground-set size exceeds the enumeration guard."""


@dataclass(frozen=True)
class NestedFamily:
    """A stratum of the compactified configuration space of ``ground`` points."""

    ground: int
    subsets: tuple[frozenset[int], ...]

    def __post_init__(self):
        for sub in self.subsets:
            if len(sub) < 2:
                raise ValueError("stratum subsets need at least two elements")
            if not sub <= set(range(1, self.ground + 1)):
                raise ValueError("subset outside the ground set")
        for a, b in itertools.combinations(self.subsets, 2):
            if not (a <= b or b <= a or not (a & b)):
                raise ValueError("subsets must be nested or disjoint")

    @property
    def codimension(self) -> int:
        return len(self.subsets)

    def key(self) -> tuple:
        return (self.ground, tuple(sorted(tuple(sorted(s)) for s in self.subsets)))

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        return isinstance(other, NestedFamily) and self.key() == other.key()

    def to_json_obj(self) -> dict:
        return {
            "subsets": [sorted(s) for s in sorted(self.subsets, key=sorted)],
            "codim": self.codimension,
        }


def face_contains(f1: NestedFamily, f2: NestedFamily) -> bool:
    """True iff f1's subset list is contained in f2's (f2 lies in f1's closure)."""
    if f1.ground != f2.ground:
        raise ValueError("mismatched ground sets")
    return set(f1.subsets) <= set(f2.subsets)


def _consecutive_runs(k: int) -> list[frozenset[int]]:
    return [
        frozenset(range(i, j + 1))
        for i in range(1, k + 1)
        for j in range(i + 1, k + 1)
    ]


def _all_subsets(k: int) -> list[frozenset[int]]:
    out = []
    for size in range(2, k + 1):
        out.extend(frozenset(c) for c in itertools.combinations(range(1, k + 1), size))
    return out


def enumerate_strata(
    k: int,
    max_codim: int,
    mode: Literal["abstract", "interval"] = "abstract",
    guard: int = POINT_GUARD,
) -> list[NestedFamily]:
    """All nested families on k points with at most ``max_codim`` subsets.

    ``interval`` mode restricts subsets to consecutive runs (points on a
    line segment drag everything between them into a collision).
    """
    if k > guard:
        raise PointGuardError(f"stratum enumeration capped at k <= {guard}")
    if mode not in ("abstract", "interval"):
        raise ValueError(f"unknown mode {mode!r}")
    pool = _consecutive_runs(k) if mode == "interval" else _all_subsets(k)
    pool.sort(key=sorted)

    out: list[NestedFamily] = []

    def compatible(sub: frozenset, chosen: list[frozenset]) -> bool:
        return all(sub <= c or c <= sub or not (sub & c) for c in chosen)

    def rec(start: int, chosen: list[frozenset]):
        if chosen:
            out.append(NestedFamily(k, tuple(chosen)))
        if len(chosen) == max_codim:
            return
        for i in range(start, len(pool)):
            if compatible(pool[i], chosen):
                chosen.append(pool[i])
                rec(i + 1, chosen)
                chosen.pop()

    rec(0, [])
    return out


# ---------------------------------------------------------------------------
# face classification for pulled-back configuration spaces


FaceKind = Literal["principal", "hidden", "anomalous", "infinity"]


@dataclass(frozen=True)
class FaceDescriptor:
    """A codimension-one face of the diagram's configuration space."""

    interval_subset: frozenset[int]
    free_subset: frozenset[int]
    kind: FaceKind
    empty: bool = False


class EmptyFaceError(ValueError):
    """The requested face is empty (interval subset not cyclically consecutive)."""


def _cyclically_consecutive(subset: frozenset[int], k: int) -> bool:
    """True iff the subset is a run of cyclically adjacent interval positions."""
    if len(subset) <= 1 or len(subset) == k:
        return True
    outside = sorted(set(range(1, k + 1)) - subset)
    # The complement must also be a cyclic run.
    gaps = 0
    for a, b in zip(outside, outside[1:] + [outside[0] + k]):
        if b - a > 1:
            gaps += 1
    return gaps <= 1


def classify_face(
    d: Diagram,
    interval_subset: Iterable[int],
    free_subset: Iterable[int],
    escape: bool = False,
) -> FaceDescriptor:
    """Assign the face taxonomy kind to a collision/escape subset.

    Collision faces: exactly two degenerate points are principal, all of
    them anomalous, anything in between hidden.  ``escape`` marks a face
    at infinity, which for a compact knot can only involve free points.
    """
    a = frozenset(interval_subset)
    b = frozenset(free_subset)
    if not all(1 <= v <= d.k for v in a):
        raise ValueError("interval subset out of range")
    if not all(d.k < v <= d.vertex_count for v in b):
        raise ValueError("free subset out of range")
    if escape:
        if a:
            raise ValueError("points on the knot cannot escape to infinity")
        if not b:
            raise EmptyFaceError("empty escape set")
        return FaceDescriptor(a, b, "infinity")
    if len(a) + len(b) < 2:
        raise EmptyFaceError("collision faces need at least two points")
    if not _cyclically_consecutive(a, d.k):
        raise EmptyFaceError("interval subset is not cyclically consecutive")
    size = len(a) + len(b)
    if size == d.vertex_count:
        # Takes precedence over "principal" for the one-chord diagram,
        # whose sole face is the anomalous one.
        kind: FaceKind = "anomalous"
    elif size == 2:
        kind = "principal"
    else:
        kind = "hidden"
    return FaceDescriptor(a, b, kind)


def collision_faces(d: Diagram) -> list[FaceDescriptor]:
    """All nonempty codimension-one collision faces of the diagram's space."""
    out = []
    ivs = list(range(1, d.k + 1))
    fvs = list(range(d.k + 1, d.vertex_count + 1))
    for na in range(0, d.k + 1):
        for a in itertools.combinations(ivs, na):
            if not _cyclically_consecutive(frozenset(a), d.k):
                continue
            for nb in range(0, d.s + 1):
                if na + nb < 2:
                    continue
                for b in itertools.combinations(fvs, nb):
                    out.append(classify_face(d, a, b))
    return out


def needs_anomaly_correction(d: Diagram) -> bool:
    """True iff the diagram's anomalous face may contribute.

    Diagrams containing a chord have vanishing anomalous pushforward
    (k + s > 2); the one-chord diagram itself generates the correction
    term and is excluded.
    """
    return not d.has_chord and d.vertex_count > 2


@dataclass(frozen=True)
class DisconnectionReport:
    disconnected: bool
    parts: int
    principal_pair_exception: bool


def is_disconnected_vertex_set(d: Diagram, subset: Iterable[int]) -> DisconnectionReport:
    """Split the subset by the diagram's edges within it.

    The pushforward along the corresponding face vanishes when the
    subset splits into two or more parts, except for the principal pair
    of two interval vertices (a = 2, b = 0), which is flagged.
    """
    verts = sorted(set(subset))
    if not set(verts) <= set(range(1, d.vertex_count + 1)):
        raise ValueError("subset outside the diagram's vertex set")
    index = {v: i for i, v in enumerate(verts)}
    parent = list(range(len(verts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in d.edges:
        if a in index and b in index:
            ra, rb = find(index[a]), find(index[b])
            if ra != rb:
                parent[ra] = rb
    parts = len({find(i) for i in range(len(verts))})
    a_count = sum(1 for v in verts if v <= d.k)
    b_count = len(verts) - a_count
    return DisconnectionReport(
        disconnected=parts >= 2,
        parts=parts,
        principal_pair_exception=(parts >= 2 and a_count == 2 and b_count == 0),
    )


# ---------------------------------------------------------------------------
# exports


def strata_to_json(families: Sequence[NestedFamily]) -> str:
    return json.dumps([f.to_json_obj() for f in families], indent=None)


def face_poset_dot(families: Sequence[NestedFamily]) -> str:
    """DOT graph of the covering relation of face containment."""
    fams = sorted(families, key=lambda f: (f.codimension, f.key()))
    names = {f: f"s{i}" for i, f in enumerate(fams)}
    lines = ["digraph faces {"]
    for f in fams:
        label = ";".join("".join(map(str, sorted(s))) for s in
                         sorted(f.subsets, key=sorted))
        lines.append(f'  {names[f]} [label="{{{label}}}"];')
    for f, g in itertools.permutations(fams, 2):
        if f.codimension + 1 == g.codimension and face_contains(f, g):
            lines.append(f"  {names[f]} -> {names[g]};")
    lines.append("}")
    return "\n".join(lines)
