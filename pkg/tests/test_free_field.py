from fractions import Fraction

import pytest

from elliptic_hopf.cartan import cartan_matrix
from elliptic_hopf.free_field import (
    LITERAL, Conventions, PowerSum, bracket_value, cocycle_sign, contraction_exponent,
    contraction_product_form, exp_gamma_series, product_form_x_series, rational_point, smode_coefficient,
    vertex_spec, zero_mode_factor,
)
from elliptic_hopf.lattice_series import LatticeError, Monomial, window_equal

# fourth roots: p = 1/16, q = 16/81
PT = rational_point(Fraction(1, 2), Fraction(2, 3))
P, Q = Fraction(1, 16), Fraction(16, 81)


def direct_bracket(a, n):
    h = Fraction(a, 2)
    # p^(n h) needs a square root of p when n*a is odd; P^2 = sqrt(p)
    ph = Fraction(1, 2) ** (4 * n * h) if n * h >= 0 else Fraction(2) ** (-4 * n * h)
    pmh = 1 / ph
    return Fraction(1, n) * (1 - Q ** -n) * (ph - pmh) * (1 - (P * Q) ** n) / (1 - P ** n)


@pytest.mark.parametrize("a", [2, -1, 0])
@pytest.mark.parametrize("n", [1, 2, 3, -1, -2])
def test_bracket_closed_form(a, n):
    assert bracket_value(a, n, PT) == direct_bracket(a, n)


@pytest.mark.parametrize("a", [2, -1])
def test_bracket_antisymmetry(a):
    for n in range(1, 5):
        assert bracket_value(a, -n, PT) == -bracket_value(a, n, PT)


def test_bracket_mode_zero_rejected():
    with pytest.raises(ValueError):
        bracket_value(2, 0, PT)
    with pytest.raises(ValueError):
        smode_coefficient("+", 0)


def test_simplify_preserves_values():
    cd = cartan_matrix("A2")
    for xk in ("E", "F", "H+", "H-"):
        for yk in ("E", "F"):
            X, Y = vertex_spec(xk, 0, LITERAL), vertex_spec(yk, 1, LITERAL)
            g = contraction_exponent(X, Y, cd)
            raw = PowerSum(g.numerator, g.denominator)
            for n in range(1, 5):
                assert g.simplify().value(n, PT) == raw.value(n, PT)


def test_divisible_numerator_cancels():
    nu = Monomial.of(q=1)
    g = PowerSum.term((Monomial(), 1), (nu, -1), den=[nu])     # (1 - q^n)/(1 - q^n)
    s = g.simplify()
    assert s.denominator == () and s.numerator == ((Monomial(), 1),)


@pytest.mark.parametrize("pair", [("E", "E"), ("E", "F"), ("F", "E"), ("F", "F")])
@pytest.mark.parametrize("a", [2, -1])
def test_product_form_equals_exponential_sum(pair, a):
    A = ((2, a), (a, 2)) if a != 2 else ((2,),)
    j = 0 if a == 2 else 1
    d = contraction_product_form(pair[0], pair[1], 0, j, A)
    lhs, _ = exp_gamma_series(d.gamma, 3, 12)
    rhs, _ = product_form_x_series(d.form, 3, 12)
    rep = window_equal(lhs, rhs)
    assert rep.equal, rep.to_dict()


def test_charges():
    assert [vertex_spec(k, 0).charge for k in ("E", "F", "H+", "H-")] == [1, -1, 0, 0]
    with pytest.raises(ValueError):
        vertex_spec("K", 0)


def test_conventions_validation():
    assert LITERAL.is_literal
    with pytest.raises(LatticeError):
        Conventions(e_shift=Monomial.of(2, p=1))
    with pytest.raises(LatticeError):
        Conventions(h_plus=Monomial.of(x=1))
    twisted = Conventions(e_twist=Monomial.of(-1, p=1, q=1))
    assert not twisted.is_literal and twisted.describe()["e_twist"] == "-p*q"


def test_zero_mode_factor():
    A = ((2,),)
    E = vertex_spec("E", 0)
    mono, sign = zero_mode_factor([(E, Monomial.of(z=1)), (E, Monomial.of(w=1))], A)
    assert mono == Monomial.of(z=2) and sign == 1


def test_cocycle_relation():
    cd = cartan_matrix("A3")
    for i in cd.nodes():
        for j in cd.nodes():
            if i != j:
                assert cocycle_sign(i, j, cd) * cocycle_sign(j, i, cd) == (-1) ** (cd[i, j] % 2)
