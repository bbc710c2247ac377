from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from elliptic_hopf.lattice_series import (
    DENOM, LatticeError, Monomial, NotInvertible, Series, VariableTable, Window, format_rational,
    lattice_points, to_quarters, window_equal,
)

TABLE = VariableTable.standard(("x",))
# unbounded in x, nome degree <= 3: truncation by nome degree is an ideal, so
# the truncated ring satisfies the ring axioms exactly
RING = Window(nome_cap=12)

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
exponents = st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(-8, 8))


@st.composite
def series(draw, max_terms=5):
    terms = draw(st.dictionaries(exponents, coeffs, max_size=max_terms))
    return Series(TABLE, RING, terms)


@st.composite
def invertible(draw):
    lead = draw(st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(-6, 6)))
    c = draw(coeffs.filter(lambda v: v != 0))
    rest = draw(st.dictionaries(exponents, coeffs, max_size=4))
    d0 = lead[0] + lead[1]
    terms = {e: v for e, v in rest.items() if e[0] + e[1] > d0}
    terms[lead] = c
    return Series(TABLE, RING, terms)


ring_settings = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@ring_settings
@given(series(), series(), series())
def test_addition_axioms(a, b, c):
    zero = Series.zero(TABLE, RING)
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a + zero == a
    assert a - a == zero


@ring_settings
@given(series(), series(), series())
def test_multiplication_axioms(a, b, c):
    one = Series.one(TABLE, RING)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * one == a
    assert a * (b + c) == a * b + a * c


@ring_settings
@given(invertible())
def test_invert_multiply_back(a):
    inv = a.invert()
    rep = window_equal(a * inv, Series.one(TABLE, RING))
    assert rep.equal, rep.to_dict()


@ring_settings
@given(series(), st.integers(-4, 4), st.integers(0, 4))
def test_monomial_shift_matches_product(a, ex, eq):
    m = Monomial(Fraction(3, 2), {"x": ex, "q": eq})
    assert a.mul_monomial(m) == a * Series.from_monomial(TABLE, RING, m)


def test_quarter_conversion():
    assert to_quarters(Fraction(3, 4)) == 3
    assert to_quarters(-2) == -8
    with pytest.raises(Exception):
        to_quarters(Fraction(1, 3))


def test_monomial_algebra():
    m = Monomial.of(2, x=1, p=Fraction(1, 2))
    assert m.power_of("p") == Fraction(1, 2)
    assert (m * m.inverse()).is_one()
    assert (m ** 2).coeff == 4
    assert str(Monomial.of(-1, q=Fraction(1, 4))) == "-q^(1/4)"
    assert m.evaluate({"x": 2, "p": Fraction(1, 3)}) == 2 * 2 ** 4 * Fraction(1, 3) ** 2


def test_geometric_series_and_cancellation():
    w = Window.natural({"x": (-3, 3)}, nome_cap=3)
    one = Series.one(TABLE, w)
    u = Monomial.of(x=1, q=1)
    s = one.mul_one_minus(u, -1)
    # 1/(1 - xq) = sum (xq)^k, k <= 3
    assert len(s) == 4 and s.truncated
    assert s.mul_one_minus(u, 1) == one


def test_negative_power_needs_termination():
    with pytest.raises(NotInvertible):
        Series.one(TABLE, RING).mul_one_minus(Monomial.of(x=1), -1)


def test_bounded_window_inverse_of_spectral_factor():
    w = Window.natural({"x": (0, 4)}, nome_cap=2)
    s = Series.one(TABLE, w).mul_one_minus(Monomial.of(x=1), -1)
    assert sorted(s.terms) == [(0, 0, 4 * k) for k in range(5)]


def test_substitute_shift():
    w = Window.natural({"x": (-2, 2)}, nome_cap=4)
    s = Series.from_monomial(TABLE, w, Monomial.of(x=1))
    t = s.substitute("x", Monomial.of(-1, p=Fraction(1, 2)))
    assert t.coefficient(Monomial.of(x=1, p=Fraction(1, 2))) == -1


def test_substitute_rejects_off_lattice():
    w = Window.natural({"x": (-2, 2)}, nome_cap=4)
    s = Series.from_monomial(TABLE, w, Monomial.of(x=Fraction(1, 4)))
    with pytest.raises(LatticeError):
        s.substitute("x", Monomial.of(p=Fraction(1, 2)))


def test_window_equal_reports_first_witness():
    w = Window.natural({"x": (-1, 1)}, nome_cap=1)
    a = Series.from_monomials(TABLE, w, [Monomial.of(x=1), Monomial.of(3, q=1)])
    b = Series.from_monomials(TABLE, w, [Monomial.of(x=1), Monomial.of(2, q=1)])
    rep = window_equal(a, b)
    assert not rep
    exps, lhs, rhs = rep.witness
    assert exps == {"q": 1} and (lhs, rhs) == (3, 2)
    assert rep.to_dict()["witness"]["lhs"] == "3/1"


def test_table_mismatch():
    other = VariableTable.standard(("y",))
    with pytest.raises(LatticeError):
        Series.one(TABLE, RING) + Series.one(other, RING)


def test_serialization_is_canonical():
    w = Window.natural({"x": (-1, 1)}, nome_cap=1)
    a = Series.from_monomials(TABLE, w, [Monomial.of(Fraction(1, 2), q=1), Monomial.of(x=-1)])
    b = Series.from_monomials(TABLE, w, [Monomial.of(x=-1), Monomial.of(Fraction(1, 2), q=1)])
    assert a.serialize() == b.serialize()
    assert "1/2" in a.serialize() and format_rational(2) == "2/1"


def test_lattice_points_count():
    pts = list(lattice_points({"a": (-1, 1), "b": (0, 2)}))
    assert len(pts) == 9 and DENOM == 4


def test_invert_with_positive_degree_leading_term():
    # leading q^(1/4), next term q^(1/2): the remainder has relative degree 1/4
    a = Series(TABLE, RING, {(0, 1, 0): 1, (0, 2, 0): 3})
    assert window_equal(a * a.invert(), Series.one(TABLE, RING)).equal
    # a degree-zero remainder in x never terminates without an x bound
    with pytest.raises(NotInvertible):
        Series(TABLE, RING, {(0, 1, 0): 1, (0, 1, 4): 1}).invert()
