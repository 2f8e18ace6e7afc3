"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest -s tests/test_acceptance.py`` to see the per-criterion
summary lines.  Criterion 7's integral path is marked slow.
"""

import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from knotint import cli
from knotint import diagrams as dg
from knotint import integrator as ig
from knotint import invariants as iv
from knotint import knots as kn
from knotint import rational
from knotint import strata as st

A = dg.Diagram(4, 0, ((1, 2), (3, 4)))
N = dg.Diagram(4, 0, ((1, 4), (2, 3)))
X = iv.CROSSED_CHORDS


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{criterion}: {detail}"


def test_criterion_1_linking_number():
    t0 = time.time()
    k1, k2 = kn.hopf_link()
    hopf = ig.linking_integral(k1, k2, budget=10 ** 6, seed=7)
    s1, s2 = kn.split_link()
    split = ig.linking_integral(s1, s2, budget=10 ** 6, seed=7)
    oracle = kn.linking_number_by_crossings(k1, k2)
    elapsed = time.time() - t0
    ok = (abs(hopf.value - 1.0) <= max(0.02, 3 * hopf.stderr)
          and abs(split.value) <= max(0.02, 3 * split.stderr)
          and oracle == 1
          and elapsed <= 30.0)
    report("1 (linking number)", ok,
           f"hopf={hopf.value:.4f}+-{hopf.stderr:.4f} split={split.value:.4f}"
           f"+-{split.stderr:.4f} oracle={oracle} time={elapsed:.1f}s")


def test_criterion_2_type_two_invariant():
    t0 = time.time()
    budget = 4_000_000  # per integral; well under the 1e7 cap
    res_t = iv.v2(kn.standard_knot("trefoil"), budget, seed=21, workers=2)
    res_8 = iv.v2(kn.standard_knot("figure8"), budget, seed=22, workers=2)
    oracle_t = iv.v2_of_curve(kn.standard_knot("trefoil"))
    oracle_8 = iv.v2_of_curve(kn.standard_knot("figure8"))
    elapsed = time.time() - t0
    ok_t = (abs(res_t.value - 1.0) <= 3 * res_t.stderr
            and abs(res_t.value - 1.0) <= 0.1 and oracle_t == 1)
    ok_8 = (abs(res_8.value + 1.0) <= 3 * res_8.stderr
            and abs(res_8.value + 1.0) <= 0.1 and oracle_8 == -1)
    ok = ok_t and ok_8 and elapsed <= 600.0
    report("2 (type-2 invariant)", ok,
           f"trefoil={res_t.value:.4f}+-{res_t.stderr:.4f} (oracle 1), "
           f"figure8={res_8.value:.4f}+-{res_8.stderr:.4f} (oracle -1), "
           f"time={elapsed:.0f}s")


def test_criterion_3_invariance():
    budget = 2_000_000
    base = kn.standard_knot("trefoil")
    angle = 0.83
    rot = np.array([
        [math.cos(angle), -math.sin(angle), 0.0],
        [math.sin(angle), math.cos(angle), 0.0],
        [0.0, 0.0, 1.0],
    ]) @ np.array([
        [1.0, 0.0, 0.0],
        [0.0, math.cos(0.37), -math.sin(0.37)],
        [0.0, math.sin(0.37), math.cos(0.37)],
    ])
    other = base.shifted_origin(0.37).transformed(1.7 * rot, shift=(0.3, -0.2, 0.5))
    res_a = iv.v2(base, budget, seed=31, workers=2)
    res_b = iv.v2(other, budget, seed=32, workers=2)
    diff = abs(res_a.value - res_b.value)
    tol = 3 * math.hypot(res_a.stderr, res_b.stderr)
    ok = diff <= tol
    report("3 (isotopy invariance)", ok,
           f"|{res_a.value:.4f} - {res_b.value:.4f}| = {diff:.4f} <= {tol:.4f}")


def _product_weight_values_deg3():
    """Chord values of the product of the degree-1 and degree-2 systems.

    Splitting off a chord in the label-orientation convention carries
    the parity of moving its two labels out of the diagram.
    """
    w2 = iv.degree2_weight_system()
    values = {}
    for d in dg.enumerate_chord_diagrams(3):
        total = Fraction(0)
        for a, b in d.chords():
            kept = [c for c in d.chords() if c != (a, b)]
            labels = sorted(v for c in kept for v in c)
            relab = {v: i + 1 for i, v in enumerate(labels)}
            sub, sign = dg.canonicalize(
                tuple(relab[v] for v in labels),
                [(relab[x], relab[y]) for x, y in kept])
            total += (-1) ** (a + b) * sign * w2(sub)
        values[d] = total
    return values


def test_criterion_4_diagram_algebra():
    t0 = time.time()
    details = []
    ok = True
    for n in (1, 2, 3):
        cds = dg.enumerate_chord_diagrams(n)
        dim_cd = dg.quotient_dimension(cds, dg.four_t_relation_vectors(n))
        tds = dg.enumerate_trivalent_diagrams(n, include_zero=False)
        dim_td = dg.quotient_dimension(tds, dg.stu_relation_vectors(n))
        ok &= dim_cd == dim_td
        details.append(f"n={n}: {dim_cd}={dim_td}")
        ok &= dg.ihx_in_stu_span(n)
    systems = [
        iv.degree2_weight_system(),
        dg.WeightSystem.from_chord_values(2, {A: 2, N: 2, X: 2}),
        dg.WeightSystem.from_chord_values(3, _product_weight_values_deg3()),
    ]
    for w in systems:
        for vec in dg.four_t_relation_vectors(w.degree):
            ok &= w(vec) == 0
    elapsed = time.time() - t0
    ok &= elapsed <= 60.0
    report("4 (diagram algebra)", ok,
           f"dims {'; '.join(details)}; IHX in STU span n<=3; "
           f"{len(systems)} weight systems annihilate 4T; time={elapsed:.1f}s")


def test_criterion_5_graph_complex():
    checked = 0
    ok = True
    for n in (1, 2, 3):
        for d in dg.enumerate_trivalent_diagrams(n):
            if d.is_zero:
                continue
            ok &= not dg.boundary_by_contraction(dg.boundary_by_contraction(d))
            checked += 1
    report("5 (graph-complex sanity)", ok,
           f"d(d(x)) = 0 on all {checked} generators with n <= 3")


def _brute_interval_count(k, codim):
    runs = [frozenset(range(i, j + 1))
            for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    count = 0
    for combo in itertools.combinations(runs, codim):
        if all(a <= b or b <= a or not (a & b)
               for a, b in itertools.combinations(combo, 2)):
            count += 1
    return count


def test_criterion_6_strata():
    ok = True
    for k in range(2, 7):
        for codim in (1, 2):
            got = sum(1 for f in st.enumerate_strata(k, codim, mode="interval")
                      if f.codimension == codim)
            ok &= got == _brute_interval_count(k, codim)
    # Face classification partitions all collision faces.
    for d in dg.enumerate_trivalent_diagrams(2):
        faces = st.collision_faces(d)
        keys = {(f.interval_subset, f.free_subset) for f in faces}
        ok &= len(keys) == len(faces)
        ok &= all(f.kind in ("principal", "hidden", "anomalous") for f in faces)
        ok &= sum(1 for f in faces if f.kind == "anomalous") == 1
    # Anomaly-correction flags.
    for n in (1, 2, 3):
        for d in dg.enumerate_trivalent_diagrams(n):
            if d.has_chord:
                ok &= not st.needs_anomaly_correction(d)
            elif d.vertex_count > 2:
                ok &= st.needs_anomaly_correction(d)
    report("6 (strata)", ok,
           "interval codim-1/2 counts match brute force for k <= 6; "
           "face kinds partition; anomaly flags correct for n <= 3")


def test_criterion_7_universality_combinatorial():
    w = iv.degree2_weight_system()
    ok = True
    details = []
    for d in (X, A, N):
        rep = iv.universality_check(d, w)
        ok &= rep.combinatorial_exact
        details.append(f"{d.chords()}: sum={rep.combinatorial_sum}"
                       f"=w={rep.weight_value}")
    report("7a (universality, combinatorial)", ok, "; ".join(details))


@pytest.mark.slow
def test_criterion_7_universality_integral():
    w = iv.degree2_weight_system()
    budget = 10 ** 7
    t0 = time.time()
    rep_x = iv.universality_check(X, w, budget=budget, seed=71, workers=4,
                                  integral_path=True)
    rep_a = iv.universality_check(A, w, budget=budget, seed=72, workers=4,
                                  integral_path=True)
    elapsed = time.time() - t0
    ok = (abs(rep_x.integral_sum - 1.0) <= 0.2
          and abs(rep_a.integral_sum - 0.0) <= 0.2)
    report("7b (universality, integral path)", ok,
           f"crossed: {rep_x.integral_sum:.3f}+-{rep_x.integral_stderr:.3f} "
           f"(target 1); parallel: {rep_a.integral_sum:.3f}"
           f"+-{rep_a.integral_stderr:.3f} (target 0); time={elapsed:.0f}s")


def test_criterion_8_finite_type_vanishing():
    d3 = dg.Diagram(6, 0, ((1, 4), (2, 5), (3, 6)))
    singular = kn.singular_from_chord_diagram(d3)
    total = 0
    for sign, curve in iv.skein_resolutions(singular):
        total += sign * iv.v2_of_curve(curve)
    ok = total == 0
    report("8 (finite-type vanishing)", ok,
           f"alternating sum over 8 resolutions of a 3-singular knot = {total}")


def test_criterion_9_numeric_integrity(capsys, tmp_path):
    # (a) analytic differentials vs finite differences, 100 random samples.
    curve = kn.standard_knot("trefoil")
    rng = np.random.default_rng(91)
    from test_integrator import fd_density
    worst = 0.0
    for _ in range(100):
        ts = np.sort(rng.uniform(0, 1, 3))
        yp = rng.standard_normal(3) * 2.0
        sample = ig.ConfigSample(tuple(ts), (tuple(yp),))
        got = ig.pullback_density(iv.TRIPOD, curve, sample)
        oracle = fd_density((1, 2, 3), ((1, 4), (2, 4), (3, 4)), curve,
                            dict(zip((1, 2, 3), ts)), {4: yp})
        worst = max(worst, abs(got - oracle) / max(abs(oracle), 1e-12))
    ok_fd = worst <= 1e-6

    # (b) determinism: identical result bytes for 1..8 workers.
    outputs = set()
    for workers in range(1, 9):
        code = cli.main(["v2", "trefoil", "--budget", "60000", "--seed", "9",
                         "--workers", str(workers), "--output",
                         str(tmp_path / f"w{workers}.json")])
        assert code == 0
        payload = json.loads((tmp_path / f"w{workers}.json").read_text())
        outputs.add(json.dumps(payload["result"], sort_keys=True))
    ok_det = len(outputs) == 1

    # (c) diagonal cutoff sensitivity on the linking estimate.
    k1, k2 = kn.hopf_link()
    est_a = ig.linking_integral(k1, k2, budget=10 ** 6, seed=7, cutoff=1e-9)
    est_b = ig.linking_integral(k1, k2, budget=10 ** 6, seed=7, cutoff=1e-10)
    ok_cut = (abs(est_a.value - est_b.value)
              <= max(math.hypot(est_a.stderr, est_b.stderr), 1e-12))

    ok = ok_fd and ok_det and ok_cut
    report("9 (numeric integrity)", ok,
           f"FD worst rel err={worst:.2e}; determinism over 8 worker counts: "
           f"{ok_det}; cutoff shift={abs(est_a.value - est_b.value):.2e}")
