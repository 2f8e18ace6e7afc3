import itertools

import pytest

from knotint import strata as st
from knotint import diagrams as dg

Y = dg.Diagram(3, 1, ((1, 4), (2, 4), (3, 4)))
X = dg.Diagram(4, 0, ((1, 3), (2, 4)))
D1 = dg.Diagram(2, 0, ((1, 2),))


def subsets_of(fam):
    return sorted(sorted(s) for s in fam.subsets)


def test_two_points_single_stratum():
    fams = st.enumerate_strata(2, 1)
    assert [subsets_of(f) for f in fams] == [[[1, 2]]]


def test_three_points_interval_mode():
    fams = st.enumerate_strata(3, 1, mode="interval")
    got = sorted(map(subsets_of, fams))
    assert got == [[[1, 2]], [[1, 2, 3]], [[2, 3]]]


def test_codimension_is_family_size():
    for fam in st.enumerate_strata(4, 3):
        assert fam.codimension == len(fam.subsets)


def test_abstract_codim1_count():
    for k in range(2, 7):
        fams = st.enumerate_strata(k, 1)
        assert len(fams) == 2 ** k - k - 1


def test_interval_codim1_count():
    for k in range(2, 7):
        fams = st.enumerate_strata(k, 1, mode="interval")
        assert len(fams) == k * (k - 1) // 2


def _brute_interval_families(k, codim):
    runs = [frozenset(range(i, j + 1))
            for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    out = []
    for combo in itertools.combinations(runs, codim):
        ok = all(a <= b or b <= a or not (a & b)
                 for a, b in itertools.combinations(combo, 2))
        if ok:
            out.append(frozenset(combo))
    return set(out)


def test_interval_codim2_matches_brute_force():
    for k in range(2, 7):
        fams = {frozenset(f.subsets)
                for f in st.enumerate_strata(k, 2, mode="interval")
                if f.codimension == 2}
        assert fams == _brute_interval_families(k, 2)


def test_guard():
    with pytest.raises(st.PointGuardError):
        st.enumerate_strata(9, 1)


def test_nested_family_invariants():
    with pytest.raises(ValueError):
        st.NestedFamily(3, (frozenset({1}),))
    with pytest.raises(ValueError):
        st.NestedFamily(4, (frozenset({1, 2, 3}), frozenset({2, 4})))


def test_face_contains():
    small = st.NestedFamily(3, (frozenset({1, 2}),))
    big = st.NestedFamily(3, (frozenset({1, 2}), frozenset({1, 2, 3})))
    other = st.NestedFamily(3, (frozenset({2, 3}),))
    assert st.face_contains(small, big)
    assert st.face_contains(small, small)
    assert not st.face_contains(small, other)
    assert not st.face_contains(other, small)
    with pytest.raises(ValueError):
        st.face_contains(small, st.NestedFamily(4, (frozenset({1, 2}),)))


def test_face_contains_partial_order():
    fams = st.enumerate_strata(4, 2)
    for f in fams:
        assert st.face_contains(f, f)
    for f, g in itertools.permutations(fams, 2):
        if st.face_contains(f, g) and st.face_contains(g, f):
            assert f == g
    for f, g, h in itertools.islice(itertools.permutations(fams, 3), 4000):
        if st.face_contains(f, g) and st.face_contains(g, h):
            assert st.face_contains(f, h)


def test_classify_face_kinds():
    assert st.classify_face(Y, [1, 2], []).kind == "principal"
    assert st.classify_face(Y, [1], [4]).kind == "principal"
    assert st.classify_face(Y, [1, 2, 3], [4]).kind == "anomalous"
    assert st.classify_face(Y, [1, 2], [4]).kind == "hidden"
    assert st.classify_face(Y, [], [4], escape=True).kind == "infinity"


def test_classify_face_errors():
    with pytest.raises(st.EmptyFaceError):
        st.classify_face(Y, [1], [])
    with pytest.raises(st.EmptyFaceError):
        st.classify_face(X, [1, 3], [])  # not cyclically consecutive
    with pytest.raises(ValueError):
        st.classify_face(Y, [1, 2], [4], escape=True)
    with pytest.raises(st.EmptyFaceError):
        st.classify_face(Y, [], [], escape=True)


def test_cyclic_consecutive_wraparound():
    # {4, 1} wraps around the closed interval.
    face = st.classify_face(X, [4, 1], [])
    assert face.kind == "principal"


def test_classification_partitions_faces():
    for d in (Y, X, D1):
        faces = st.collision_faces(d)
        assert len(faces) == len(set((f.interval_subset, f.free_subset)
                                     for f in faces))
        counts = {"principal": 0, "hidden": 0, "anomalous": 0}
        for f in faces:
            counts[f.kind] += 1
        assert counts["anomalous"] == 1
        assert sum(counts.values()) == len(faces)


def test_needs_anomaly_correction():
    for d in dg.enumerate_chord_diagrams(3):
        assert not st.needs_anomaly_correction(d)
    assert st.needs_anomaly_correction(Y)
    assert not st.needs_anomaly_correction(D1)
    for n in (2, 3):
        for d in dg.enumerate_trivalent_diagrams(n):
            expected = (not d.has_chord) and d.vertex_count > 2
            assert st.needs_anomaly_correction(d) == expected


def test_disconnected_vertex_set():
    rep = st.is_disconnected_vertex_set(X, [1, 3])
    assert not rep.disconnected  # joined by a chord
    rep = st.is_disconnected_vertex_set(X, [1, 2])
    assert rep.disconnected and rep.principal_pair_exception
    rep = st.is_disconnected_vertex_set(X, [1, 2, 3, 4])
    assert rep.disconnected and not rep.principal_pair_exception
    with pytest.raises(ValueError):
        st.is_disconnected_vertex_set(X, [9])


def test_exports():
    fams = st.enumerate_strata(3, 2, mode="interval")
    text = st.strata_to_json(fams)
    assert '"codim"' in text
    dot = st.face_poset_dot(fams)
    assert dot.startswith("digraph") and "->" in dot
