from fractions import Fraction

import mpmath
import pytest

from elliptic_hopf.lattice_series import Monomial, Series, VariableTable, Window, window_equal
from elliptic_hopf.theta_products import (
    Family, ProductForm, Q, ScalingProbeConfig, check_theta_identities, clear_common, exchange_coefficient,
    jacobi_theta_sum, pm, pochhammer, scaling_probe, structure_psi, theta, theta_form,
)

TABLE = VariableTable.standard(("x",))


def pentagonal(cap):
    """Euler's pentagonal sum for (q; q)_inf, an oracle independent of the product code."""
    out = {}
    for k in range(-cap - 1, cap + 2):
        d = k * (3 * k - 1) // 2
        if 0 <= d <= cap:
            out[(0, 4 * d, 0)] = (-1) ** (k % 2)
    return out


def test_euler_pentagonal():
    w = Window.natural({"x": (-1, 1)}, nome_cap=12)
    s = pochhammer(Q, [Q], w, TABLE)
    assert window_equal(s, Series(TABLE, w, pentagonal(12))).equal


def test_theta_identities_pass():
    res = check_theta_identities(6, 6)
    assert set(res) == {"triple_product", "quasi_periodicity", "inversion"}
    assert all(v["equal"] for v in res.values())
    assert res["triple_product"]["compared_terms"] == 8      # n = -3..4 have n(n-1)/2 <= 6


def test_triple_product_detects_wrong_nome():
    table = VariableTable.standard(("z",))
    w = Window.natural({"z": (-4, 4)}, nome_cap=4)
    z = Monomial.of(z=1)
    wrong = theta(z, Q * pm(Fraction(1, 4)), w, table)
    assert not window_equal(wrong, jacobi_theta_sum(table, w), w).equal


def test_two_nome_family_members():
    f = Family(Monomial.of(x=1), (pm(1), Q))
    members = list(f.members(8))          # degrees 0, 4, 8 in quarters
    assert len(members) == 6


def test_family_rejects_nonpositive_generator():
    with pytest.raises(ValueError):
        Family(Monomial.of(x=1), (Monomial.of(x=1),))


def test_expansion_matches_numeric_value():
    form = theta_form(Monomial.of(x=1, p=Fraction(1, 2)), Q) * ProductForm(Monomial.of(2, x=-1))
    w = Window.natural({"x": (-6, 6)}, nome_cap=10)
    s = form.expand(TABLE, w)
    pt = {"p": mpmath.mpf("0.02"), "q": mpmath.mpf("0.03"), "x": mpmath.mpf("0.9")}
    total = sum(m.coeff * mpmath.mpf(pt["p"]) ** m.power_of("p") * pt["q"] ** m.power_of("q")
                * pt["x"] ** m.power_of("x") for m in s.monomials())
    assert abs(total - form.evaluate(pt)) < 1e-8


def test_psi_unitarity():
    pt = {"p": mpmath.mpf("0.13"), "q": mpmath.mpf("0.21"), "x": mpmath.mpc("0.7", "0.4")}
    inv_pt = dict(pt, x=1 / pt["x"])
    for a in (2, -1, 0):
        for kind in ("q", "qt"):
            sf = structure_psi(kind, 0, 0, a, 1)
            v = sf.ratio().evaluate(pt) * sf.ratio().evaluate(inv_pt)
            assert abs(v - 1) < 1e-12


def test_exchange_coefficient_a_zero_is_trivial():
    sf = exchange_coefficient("EE", 0, 1, Monomial.of(x=1))
    pt = {"p": mpmath.mpf("0.1"), "q": mpmath.mpf("0.2"), "x": mpmath.mpf("0.5")}
    assert abs(sf.ratio().evaluate(pt) - 1) < 1e-25


def test_exchange_coefficient_unknown_relation():
    with pytest.raises(ValueError):
        exchange_coefficient("EH", 2, 1, Monomial.of(x=1))


def test_clear_common_removes_degree_zero_denominators():
    u = Monomial.of(x=1)
    side = [ProductForm(factors=((u, -1),)), ProductForm(factors=((u, -2), (Q, 1)))]
    cleared, mult = clear_common([side])
    assert dict(mult.factors) == {u: 2}
    assert all(not t.zero_degree_poles() for t in cleared[0])


def test_scaling_probe_converges():
    cfg = ScalingProbeConfig(tuple(Fraction(1, 2 ** k) for k in range(1, 5)), -1, -2, 0.3)
    rep = scaling_probe(cfg)
    assert rep.converging
    assert len(rep.values) == 4 and len(rep.differences) == 3


def test_scaling_probe_validates_schedule():
    with pytest.raises(ValueError):
        ScalingProbeConfig((Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)), -1, -2, 0.3)
    with pytest.raises(ValueError):
        ScalingProbeConfig(tuple(Fraction(1, 2 ** k) for k in range(1, 5)), 1, -2, 0.3)
