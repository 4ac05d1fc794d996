import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from willmore_lab.bundle_count import (CASES, FormSpaceSpec, LineBundleSpec, classification_gate,
                                       constrained_oneform_dim, parse_divisor, quartic_pole_space_dim, rr_dimension)
from willmore_lab.errors import EmptyAnsatz, InconsistentFlags, OutOfScope, UndeterminedDimension
from willmore_lab.meromorphic import INF


def test_rr_examples():
    assert rr_dimension(LineBundleSpec(0, -1)) == 0
    assert rr_dimension(LineBundleSpec(1, 0, is_canonical=True)) == 1
    assert rr_dimension(LineBundleSpec(2, 5)) == 4
    assert rr_dimension(LineBundleSpec(0, 0)) == 1
    assert rr_dimension(LineBundleSpec(3, 0, is_trivial=False)) == 0
    assert rr_dimension(LineBundleSpec(3, 4, is_canonical=False)) == 2


def test_rr_flags():
    with pytest.raises(InconsistentFlags):
        LineBundleSpec(0, 3, is_trivial=True).resolved()
    with pytest.raises(InconsistentFlags):
        LineBundleSpec(1, 0, is_trivial=True, is_canonical=False).resolved()
    with pytest.raises(UndeterminedDimension):
        rr_dimension(LineBundleSpec(3, 2))


def _determined(g, c):
    return not (0 < c < 2 * g - 2)


def _flag_choices(g, c):
    k = 2 * g - 2
    if g == 0:
        return [(c == 0, c == k)]
    if c == 0 and c == k:
        return [(True, True), (False, False)]
    if c == 0:
        return [(True, False), (False, False)]
    if c == k:
        return [(False, True), (False, False)]
    return [(False, False)]


# 0 < c1 < 2g - 2 is not fixed by the table and is left out
DETERMINED = [(g, c) for g in range(4) for c in range(-8, 9) if _determined(g, c) and _determined(g, 2 * g - 2 - c)]


@pytest.mark.parametrize("g,c", DETERMINED)
def test_riemann_roch_duality(g, c):
    for triv, can in _flag_choices(g, c):
        spec = LineBundleSpec(g, c, triv, can)
        assert rr_dimension(spec) - rr_dimension(spec.dual()) == c - (g - 1)


def test_quartic_pole_space():
    assert [quartic_pole_space_dim(0, d) for d in range(6)] == [0, 0, 0, 0, 1, 3]
    assert quartic_pole_space_dim(1, 1) == 2
    assert quartic_pole_space_dim(1, 0) == 1
    assert quartic_pole_space_dim(2, 0) == 7
    with pytest.raises(ValueError):
        quartic_pole_space_dim(0, -1)


def test_form_space_examples():
    three = FormSpaceSpec(pole_bounds=[(0, 2), (1, 2), (-1, 2)], zero_bounds=[(2, 2)], residue_zero_at=[0, 1, -1])
    assert constrained_oneform_dim(three) == 1
    at_inf = FormSpaceSpec(pole_bounds=[(0, 2), (1, 2), (-1, 2)], zero_bounds=[(INF, 2)], residue_zero_at=[0, 1, -1])
    assert constrained_oneform_dim(at_inf) == 1
    assert constrained_oneform_dim(FormSpaceSpec(pole_bounds=[(0, 2), (Fraction(1, 3), 2)])) == 3
    assert constrained_oneform_dim(FormSpaceSpec(pole_bounds=[(0, 2), (1, 2)], zero_bounds=[(5, 4)])) == 0
    with pytest.raises(EmptyAnsatz):
        constrained_oneform_dim(FormSpaceSpec(pole_bounds=[(0, 1)]))
    with pytest.raises(TypeError):
        FormSpaceSpec(pole_bounds=[(0.5, 2)])
    with pytest.raises(ValueError):
        FormSpaceSpec(pole_bounds=[(0, 2)], zero_bounds=[(0, 1)])


points = st.lists(st.integers(-6, 6), min_size=2, max_size=4, unique=True)


@settings(max_examples=40, deadline=None)
@given(points, st.data())
def test_unconstrained_dimension_matches_table(pts, data):
    orders = [data.draw(st.integers(1, 3)) for _ in pts]
    spec = FormSpaceSpec(pole_bounds=list(zip(pts, orders)))
    c1 = -2 + sum(orders)
    assert constrained_oneform_dim(spec) == rr_dimension(LineBundleSpec(0, c1))


@settings(max_examples=40, deadline=None)
@given(points, st.data())
def test_residue_conditions_drop_by_points_minus_one(pts, data):
    orders = [data.draw(st.integers(1, 3)) for _ in pts]
    use_inf = data.draw(st.booleans())
    bounds = list(zip(pts, orders)) + ([(INF, data.draw(st.integers(1, 3)))] if use_inf else [])
    base = constrained_oneform_dim(FormSpaceSpec(pole_bounds=bounds))
    where = [p for p, _ in bounds]
    cut = constrained_oneform_dim(FormSpaceSpec(pole_bounds=bounds, residue_zero_at=where))
    assert base - cut == len(where) - 1


def test_parse_divisor():
    assert parse_divisor("2p1+p2") == (("p1", 2), ("p2", 1))
    assert parse_divisor("") == ()
    with pytest.raises(ValueError):
        parse_divisor("2+p")


@pytest.mark.parametrize("div,transform,cases,reason", [
    ("2p1", None, [], "odd-multiplicity"),
    ("3p1", None, ["enneper"], None),
    ("2p1+p2", "2p1+p2", [], "white-parity"),
    ("p1+p2+p3", "p1+p2+p3", ["trinoid"], None),
    ("p1+p2", None, ["catenoid", "trinoid"], None),
    ("p1+p2", "p1+p2", ["catenoid"], None),
    ("p1", None, ["trinoid"], None),
    ("", None, ["sphere"], None),
    ("3q", "p1+p2+p3", [], "riemann-roch"),
    ("2q1+p1", "p1+p2+p3", [], "white-parity"),
])
def test_classification_gate(div, transform, cases, reason):
    rep = classification_gate(div, transform)
    assert rep.cases == cases
    if reason:
        assert reason in rep.reasons
    js = rep.to_json()
    assert js["labels"] == [f"{c} admissible" for c in cases]
    assert js["cases"] == [CASES[c] for c in cases]
    json.dumps(js)


def test_white_parity_value():
    rep = classification_gate("2p1+p2", "2p1+p2")
    assert rep.candidates[0].total_curvature_quanta == -3  # int K = -6 pi


def test_gate_accepts_multiplicity_lists():
    assert classification_gate((1, 1, 1)).cases == ["trinoid"]
    with pytest.raises(OutOfScope):
        classification_gate((2, 2))
