from dataclasses import replace
from fractions import Fraction

import pytest

from elliptic_hopf.cartan import cartan_matrix
from elliptic_hopf.free_field import LITERAL, Conventions
from elliptic_hopf.lattice_series import Monomial
from elliptic_hopf.relations import (
    LITERAL_ASSIGNMENT, UNKNOWNS, CheckWindow, RelationError, calibrate_shifts, check_ef_commutator,
    check_exchange, check_h_consistency, check_pairs, check_serre, default_box, ef_forms, exchange_sides,
    float_value, literal_pole_offset, numeric_screen, pole_supports, same_rational_function, solution_conventions,
)
from elliptic_hopf.theta_products import ProductForm, StructureFunction, exchange_coefficient, pm

A2 = cartan_matrix("A2")
A3 = cartan_matrix("A3")
CW = CheckWindow()
TWISTED = Conventions(e_twist=Monomial.of(-1, p=1, q=1))
LITERAL_BOX = {u: [LITERAL_ASSIGNMENT[u]] for u in UNKNOWNS}


def test_check_pairs_cover_cartan_values():
    assert check_pairs(A2) == [(0, 0), (0, 1), (1, 0)]
    assert {A3[i, j] for i, j in check_pairs(A3)} == {2, -1, 0}


@pytest.mark.parametrize("rel", ["EE", "FF"])
@pytest.mark.parametrize("cd,i,j", [(A2, 0, 0), (A2, 0, 1), (A2, 1, 0), (A3, 0, 2)])
def test_ee_ff_literal(rel, cd, i, j):
    rep = check_exchange(rel, i, j, cd, CW)
    assert rep.status == "pass", rep.to_dict()


def test_mutation_dropped_prefactor_fails():
    sf = exchange_coefficient("EE", 2, 1, Monomial.of(x=-1))
    mutated = StructureFunction(sf.numerator * pm(1), sf.denominator, "EE without p^(-A/2)")
    rep = check_exchange("EE", 0, 0, A2, CW, coefficient=mutated)
    assert rep.status == "fail" and "exponents" in rep.witness


def test_literal_h_relation_fails_and_twist_repairs_it():
    assert check_exchange("H+E", 0, 0, A2, CW).status == "fail"
    assert check_exchange("H+E", 0, 0, A2, CW, TWISTED).status == "pass"
    assert check_h_consistency("H+E", 0, 0, A2, CW, TWISTED).status == "pass"


def test_mutation_h_shift_fails():
    bad = replace(TWISTED, h_plus=Monomial.of(p=Fraction(1, 2)))
    assert check_h_consistency("H+E", 0, 0, A2, CW, bad).status == "fail"


def test_window_without_terms_is_not_a_pass():
    rep = check_exchange("H+E", 0, 0, A2, CheckWindow(2, 2), TWISTED)
    assert rep.status == "fail" and rep.witness["reason"] == "window contains no terms"


def test_numeric_screen_agrees_with_series_check():
    good = exchange_sides("EE", 0, 1, A2)
    bad = exchange_sides("H+E", 0, 0, A2)
    assert numeric_screen([[s] for s in good])
    assert not numeric_screen([[s] for s in bad])


def test_float_value_matches_mpmath():
    form = ProductForm(Monomial.of(2, x=1), ((Monomial.of(x=1, p=Fraction(1, 2)), 1),))
    roots = {"p": 0.5, "q": 0.6, "x": 0.7}
    assert abs(float_value(form, roots) - 2 * 0.7 ** 4 * (1 - 0.7 ** 4 * 0.5 ** 2)) < 1e-12


def test_literal_ef_offset():
    rep, dec = check_ef_commutator(0, 0, A2, CW)
    assert rep.status == "fail"
    assert rep.witness["EF_over_FE"] == "p^2*q^2"
    offs = literal_pole_offset(A2)
    assert {o["offset"] for o in offs} == {"p^(1/2)"}
    assert sorted(o["found"] for o in offs) == ["p^(1/2)*q", "p^(3/2)*q"]


def test_ef_distinct_nodes():
    # literally the two orderings differ by a monomial; the twist makes them commute
    assert check_ef_commutator(0, 1, A2, CW)[0].status == "fail"
    rep, dec = check_ef_commutator(0, 1, A2, CW, TWISTED)
    assert rep.status == "pass" and not dec.terms


def test_same_rational_function():
    u = Monomial.of(x=1, q=1)
    f = ProductForm(Monomial.of(-1, x=1, q=1), ((u.inverse(), -1),))
    g = ProductForm(Monomial(), ((u, -1),))     # 1/(1-u) = -u^-1/(1-u^-1)
    assert same_rational_function(g, ProductForm(Monomial(-1), ((u.inverse(), -1),)) * u.inverse())
    assert not same_rational_function(f, g)


def test_ef_calibration_certificate():
    box = {u: [Fraction(0), Fraction(1, 2)] for u in UNKNOWNS}
    res = calibrate_shifts(("EF",), A2, box, CW)
    assert res.found and not res.literal["passed"]
    sol = res.solutions[0]
    assert sol["ratio_class"] == "1" and sol["evidence"] == "certified"
    assert (sol["e_twist"], sol["h_plus"], sol["h_minus"]) == ("-p^(1/2)*q", "q^(-1/2)", "p^(1/2)*q^(1/2)")
    rep, dec = check_ef_commutator(0, 0, A2, CW, solution_conventions(sol))
    assert rep.status == "pass"
    assert sorted(t.support for t in dec.terms) == ["p*q", "q"]
    assert {t.reference_ratio for t in dec.terms} == {"(q^-1)"}
    assert sol["residual"]["H"] == "fail"


def test_ef_calibration_literal_only_box():
    res = calibrate_shifts(("EF",), A2, LITERAL_BOX, CW)
    assert not res.found and res.scanned == 1 and res.classes == 1
    assert res.literal["witness"]["check"] == "EF:0:0"


def test_exchange_calibration_literal_class():
    res = calibrate_shifts(("EE", "FF", "H"), A2, LITERAL_BOX, CW)
    assert res.found
    sol = res.solutions[0]
    assert sol["e_twist"] == "-p*q" and sol["contains_literal_assignment"]
    assert not res.literal["passed"]
    assert solution_conventions(sol) == TWISTED


def test_ratio_class_invariance():
    # shifting both oscillator shifts by the same monomial leaves every check unchanged
    s = Monomial.of(q=Fraction(1, 4), p=Fraction(-1, 2))
    moved = replace(TWISTED, e_shift=TWISTED.e_shift * s, f_shift=TWISTED.f_shift * s)
    for rel in ("EE", "FF", "H+E"):
        a = check_exchange(rel, 0, 0, A2, CW, TWISTED)
        b = check_exchange(rel, 0, 0, A2, CW, moved)
        assert a.status == b.status and a.details == b.details
    assert ef_forms(0, 0, A2, TWISTED) == ef_forms(0, 0, A2, moved)


def test_calibration_input_validation():
    with pytest.raises(RelationError):
        calibrate_shifts(("XX",), A2)
    with pytest.raises(RelationError):
        calibrate_shifts(("EE",), A2, {"alpha_E": [0]})
    assert len(default_box()["alpha_E"]) == 17


def test_serre_input_validation():
    with pytest.raises(RelationError):
        check_serre("E", 0, 0, A2)
    with pytest.raises(RelationError):
        check_serre("E", 0, 1, A2, CheckWindow(1, 3))
    with pytest.raises(RelationError):
        check_serre("K", 0, 1, A2)


def test_pole_supports_shape():
    ef, _ = ef_forms(0, 0, A2, LITERAL)
    assert all(k == 1 for _, k in pole_supports(ef))
