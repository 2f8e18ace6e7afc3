import random
from fractions import Fraction

import pytest

from knotint import rational


def F(x):
    return Fraction(x)


def test_rank_basic():
    rows = [{"a": F(1), "b": F(2)}, {"a": F(2), "b": F(4)}, {"b": F(1)}]
    assert rational.rank(rows) == 2


def test_rank_shuffle_invariant():
    rng = random.Random(7)
    rows = []
    for i in range(12):
        rows.append({("c", j): F(rng.randint(-4, 4)) for j in range(8)
                     if rng.random() < 0.6})
    base = rational.rank(rows)
    for _ in range(5):
        shuffled = rows[:]
        rng.shuffle(shuffled)
        scaled = [{k: v * F(rng.randint(1, 5)) for k, v in r.items()}
                  for r in shuffled]
        assert rational.rank(scaled) == base


def test_in_span():
    rows = [{"x": F(1), "y": F(1)}, {"y": F(2)}]
    assert rational.in_span({"x": F(3), "y": F(5)}, rows)
    assert not rational.in_span({"x": F(1), "z": F(1)}, rows)


def test_solve_simple():
    # x + y = 0 with y fixed to 2 -> x = -2
    sol = rational.solve_homogeneous(
        [{"x": F(1), "y": F(1)}], {"y": F(2)}, ["x"])
    assert sol["x"] == F(-2)


def test_solve_chain():
    eqs = [
        {"x": F(1), "y": F(-1)},
        {"y": F(2), "z": F(1)},
    ]
    sol = rational.solve_homogeneous(eqs, {"z": F(4)}, ["x", "y"])
    assert sol["y"] == F(-2)
    assert sol["x"] == F(-2)


def test_solve_underdetermined():
    with pytest.raises(ValueError):
        rational.solve_homogeneous([{"x": F(1), "y": F(1)}], {}, ["x", "y"])


def test_solve_inconsistent():
    with pytest.raises(ValueError):
        rational.solve_homogeneous([{"y": F(1)}], {"y": F(1)}, ["x"])
