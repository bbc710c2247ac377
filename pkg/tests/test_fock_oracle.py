from fractions import Fraction

import pytest

from elliptic_hopf.cartan import cartan_matrix
from elliptic_hopf.fock_oracle import (
    DEFAULT_POINTS, FockOracle, FockState, OracleError, RationalPoint, check_contraction, default_x4,
    exchange_spotcheck, exp_coefficients,
)
from elliptic_hopf.free_field import Conventions
from elliptic_hopf.lattice_series import Monomial

A2 = cartan_matrix("A2")
PT = DEFAULT_POINTS[0]
TWISTED = Conventions(e_twist=Monomial.of(-1, p=1, q=1))


def test_points_are_exact_fourth_powers():
    assert PT.p == Fraction(1, 16) and PT.q == Fraction(16, 81)
    assert PT.value(Monomial.of(p=Fraction(1, 4), q=Fraction(1, 2))) == Fraction(1, 2) * Fraction(4, 9)
    with pytest.raises(OracleError):
        RationalPoint(Fraction(3, 2), Fraction(1, 2))


def test_heisenberg_commutator_on_states():
    o = FockOracle(A2, PT, cutoff=6)
    base = o.apply_mode(o.vacuum(), 1, -2)
    for i, j, n in [(0, 0, 1), (0, 1, 2), (1, 1, 3)]:
        ab = o.apply_mode(o.apply_mode(base, j, -n), i, n)
        ba = o.apply_mode(o.apply_mode(base, i, n), j, -n)
        diff = ab + ba.scale(-1)
        assert diff == base.scale(o.bracket(i, j, n))


def test_opposite_modes_only():
    o = FockOracle(A2, PT, cutoff=6)
    st = o.apply_mode(o.vacuum(), 0, -1)
    assert not o.apply_mode(st, 0, 2).amps


def test_cutoff_projection():
    o = FockOracle(A2, PT, cutoff=3)
    st = o.apply_mode(o.apply_mode(o.vacuum(), 0, -2), 0, -2)
    assert st.overflow and not st.amps
    s = FockState({(((0, 1),), (0, 0)): Fraction(1), (((0, 5),), (0, 0)): Fraction(2)}, 3)
    once = s.projected()
    assert once.projected() == once and once.overflow


def test_exp_coefficients_geometric():
    # exp(sum x^n / n) = 1/(1-x)
    assert exp_coefficients([Fraction(1)] * 6) == [1] * 7
    # exp(-x) truncated through order 3 from gamma = (-1, 0, 0)
    assert exp_coefficients([Fraction(-1), Fraction(0), Fraction(0)]) == [1, -1, Fraction(1, 2), Fraction(-1, 6)]


def test_vacuum_matrix_element_charges():
    o = FockOracle(A2, PT, cutoff=2)
    got = o.vertex_matrix_element(o.vacuum(), [("E", 0, 1)], o.vacuum())
    assert got == 0          # charge mismatch
    bra = o.vacuum((1, 0))
    assert o.vertex_matrix_element(bra, [("E", 0, 1)], o.vacuum()) == 1


@pytest.mark.parametrize("xk,yk,i,j", [("E", "F", 0, 0), ("F", "E", 0, 1), ("E", "E", 1, 0)])
def test_contraction_oracle_agrees(xk, yk, i, j):
    r = check_contraction(xk, yk, i, j, A2, PT, default_x4(PT), 4)
    assert r.passed, r.to_dict()


def test_contraction_oracle_detects_wrong_convention():
    # the oracle built with other shifts must disagree with the literal product form
    wrong = FockOracle(A2, PT, 4, Conventions(e_shift=Monomial.of(p=1, q=Fraction(1, 2))))
    r = check_contraction("E", "F", 0, 0, A2, PT, default_x4(PT), 4, oracle=wrong)
    assert not r.exact_match


def test_exchange_spotcheck_follows_twist():
    sample = [(PT, default_x4(PT))]
    A1 = cartan_matrix("A1")
    assert exchange_spotcheck("EE", 0, 0, A1, sample, 4).passed
    assert not exchange_spotcheck("H+E", 0, 0, A1, sample, 4).passed
    assert exchange_spotcheck("H+E", 0, 0, A1, sample, 4, TWISTED).passed


def test_exchange_spotcheck_unknown_relation():
    with pytest.raises(OracleError):
        exchange_spotcheck("EF", 0, 0, A2)
