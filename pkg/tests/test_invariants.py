import math
from fractions import Fraction

import numpy as np
import pytest

from knotint import diagrams as dg
from knotint import invariants as iv
from knotint import knots as kn

A = dg.Diagram(4, 0, ((1, 2), (3, 4)))
N = dg.Diagram(4, 0, ((1, 4), (2, 3)))
X = iv.CROSSED_CHORDS


# -- the combinatorial oracle -------------------------------------------------

def test_pv_empty_code():
    assert iv.pv_v2(kn.GaussCode(())) == 0


def test_pv_standard_values():
    tre = kn.GaussCode.from_text("O1+ U2+ O3+ U1+ O2+ U3+")
    assert iv.pv_v2(tre) == 1
    fig8 = kn.GaussCode.from_text("O1+ U2+ O3- U4- O2+ U1+ O4- U3-")
    assert iv.pv_v2(fig8) == -1


def test_pv_from_curves():
    assert iv.v2_of_curve(kn.standard_knot("trefoil")) == 1
    assert iv.v2_of_curve(kn.standard_knot("figure8")) == -1
    assert iv.v2_of_curve(kn.standard_knot("unknot")) == 0


def test_pv_mirror_insensitive():
    # Degree-2 invariants ignore chirality: flipping all signs of the
    # trefoil code (its mirror) keeps the value.
    mirror = kn.GaussCode.from_text("O1- U2- O3- U1- O2- U3-")
    assert iv.pv_v2(mirror) == 1


def test_pv_rejects_basepoint_dependent_count():
    bad = kn.GaussCode.from_text("O1+ U2+ U1+ O2+")  # not realizable
    with pytest.raises(ValueError):
        iv.pv_v2(bad)


def test_crossing_change_skein():
    # Switching one trefoil crossing yields an unknot diagram: the jump
    # in the invariant across the switch is exactly 1.
    tre = kn.GaussCode.from_text("O1+ U2+ O3+ U1+ O2+ U3+")
    switched = kn.GaussCode.from_text("O1+ O2- O3+ U1+ U2- U3+")
    assert iv.pv_v2(tre) - iv.pv_v2(switched) == 1


def test_torus_knot_v2():
    # torus(2,5) has degree-2 invariant 3.
    assert iv.v2_of_curve(kn.standard_knot("torus(2,5)")) == 3


# -- weight systems and invariant assembly -------------------------------------

def test_degree2_weight_system():
    w = iv.degree2_weight_system()
    assert w(X) == 1
    assert dg.is_primitive(w)


def test_t_of_w_rejects_bad_weights():
    w_prod = dg.WeightSystem.from_chord_values(2, {A: 2, N: 2, X: 2})
    unk = kn.standard_knot("unknot")
    with pytest.raises(ValueError):
        iv.t_of_w(w_prod, 2, unk, budget=100, seed=0)
    w = iv.degree2_weight_system()
    with pytest.raises(ValueError):
        iv.t_of_w(w, 3, unk, budget=100, seed=0)


def test_anomaly_coefficient_policies():
    tripod = iv.TRIPOD
    assert iv.anomaly_coefficient(X, "cited-zero") == (0.0, False)
    assert iv.anomaly_coefficient(tripod, "cited-zero") == (0.0, False)
    # A degree-7 chordless diagram: legs to a 7-cycle of free vertices.
    edges = tuple((i, 7 + i) for i in range(1, 8))
    ring = tuple((7 + i, 7 + i + 1) for i in range(1, 7)) + ((8, 14),)
    d7 = dg.Diagram(7, 7, tuple(sorted(edges + ring)))
    d7.validate()
    value, warned = iv.anomaly_coefficient(d7, "cited-zero")
    assert value == 0.0 and warned
    value, warned = iv.anomaly_coefficient(d7, "all-zero")
    assert value == 0.0 and not warned
    value, warned = iv.anomaly_coefficient(d7, {d7.to_text(): 0.25})
    assert value == 0.25 and not warned
    with pytest.raises(ValueError):
        iv.anomaly_coefficient(d7, "bogus")


def test_v2_breakdown_recomputes_exactly():
    res = iv.v2(kn.standard_knot("trefoil"), budget=50_000, seed=3)
    assert res.recomputed_value() == res.value
    assert res.stderr >= 0
    obj = res.to_json_obj()
    assert obj["seed"] == 3
    assert len(obj["terms"]) == len(obj["baseline_terms"])


def test_v2_deterministic():
    a = iv.v2(kn.standard_knot("trefoil"), budget=50_000, seed=3)
    b = iv.v2(kn.standard_knot("trefoil"), budget=50_000, seed=3)
    assert a.value == b.value


def test_t_of_w_degree2_equals_v2():
    w = iv.degree2_weight_system()
    a = iv.t_of_w(w, 2, kn.standard_knot("trefoil"), budget=50_000, seed=5)
    b = iv.v2(kn.standard_knot("trefoil"), budget=50_000, seed=5)
    assert a.value == b.value


# -- universality -----------------------------------------------------------

def test_universality_combinatorial_crossed():
    w = iv.degree2_weight_system()
    rep = iv.universality_check(X, w)
    assert rep.combinatorial_sum == 1
    assert rep.combinatorial_exact
    assert rep.integral_sum is None


def test_universality_combinatorial_parallel():
    w = iv.degree2_weight_system()
    for d in (A, N):
        rep = iv.universality_check(d, w)
        assert rep.combinatorial_sum == 0
        assert rep.combinatorial_exact


def test_universality_rejects_bad_input():
    w = iv.degree2_weight_system()
    with pytest.raises(ValueError):
        iv.universality_check(dg.Diagram(2, 0, ((1, 2),)), w)
    with pytest.raises(ValueError):
        iv.universality_check(X, w, integral_path=True, budget=0)


def test_skein_resolutions_signs():
    s = kn.singular_from_chord_diagram(X)
    resolutions = iv.skein_resolutions(s)
    assert len(resolutions) == 4
    assert sorted(sign for sign, _ in resolutions) == [-1, -1, 1, 1]
