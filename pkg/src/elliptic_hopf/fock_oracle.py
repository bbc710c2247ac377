"""Truncated Fock space with exact rational amplitudes.

Parameters are instantiated through their fourth roots (``p = P**4`` with
``P`` rational) so that every quarter-lattice monomial evaluates to an exact
rational number.  A basis state is a multiset of creation modes
``a_i[-n]`` (stored as sorted ``(i, n)`` pairs, ``n > 0``) together with a
lattice charge vector; the momentum eigenvalue is ``A @ charge``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

import mpmath

from .cartan import CartanData
from .free_field import (
    LITERAL, Conventions, PowerSum, VertexOperatorSpec, _lambda_form, bracket_form,
    cocycle_sign, contraction_product_form, vertex_spec,
)
from .lattice_series import Monomial
from .theta_products import EXCHANGE_RELATIONS, ProductForm, exchange_coefficient


class OracleError(ValueError):
    pass


# --------------------------------------------------------------------------
# parameter points


@dataclass(frozen=True)
class RationalPoint:
    """Fourth roots of the nomes; ``p = p4**4`` and ``q = q4**4``."""

    p4: Fraction
    q4: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p4", Fraction(self.p4))
        object.__setattr__(self, "q4", Fraction(self.q4))
        if not (0 < self.p4 < 1 and 0 < self.q4 < 1):
            raise OracleError("need 0 < p, q < 1")

    @property
    def roots(self) -> dict:
        return {"p": self.p4, "q": self.q4}

    @property
    def p(self) -> Fraction:
        return self.p4 ** 4

    @property
    def q(self) -> Fraction:
        return self.q4 ** 4

    def value(self, m: Monomial) -> Fraction:
        return Fraction(m.evaluate(self.roots))

    def __str__(self):
        return f"p={self.p}, q={self.q}"


DEFAULT_POINTS = (
    RationalPoint(Fraction(1, 2), Fraction(2, 3)),
    RationalPoint(Fraction(1, 3), Fraction(1, 2)),
    RationalPoint(Fraction(2, 5), Fraction(3, 4)),
)


# --------------------------------------------------------------------------
# states


@dataclass
class FockState:
    amps: dict                   # (modes, charge) -> Fraction
    cutoff: int
    overflow: bool = False

    @classmethod
    def vacuum(cls, rank: int, cutoff: int, charge: Sequence[int] | None = None) -> "FockState":
        ch = tuple(charge) if charge is not None else (0,) * rank
        return cls({((), ch): Fraction(1)}, cutoff)

    @staticmethod
    def energy(modes) -> int:
        return sum(n for _, n in modes)

    def momentum(self, charge, A) -> tuple:
        return tuple(sum(A[i][j] * charge[j] for j in range(len(charge))) for i in range(len(charge)))

    def projected(self, cutoff: int | None = None) -> "FockState":
        """Drop basis states above the energy cutoff (idempotent)."""
        n = self.cutoff if cutoff is None else cutoff
        keep = {k: v for k, v in self.amps.items() if self.energy(k[0]) <= n and v}
        return FockState(keep, n, self.overflow or len(keep) < len([v for v in self.amps.values() if v]))

    def __add__(self, other: "FockState") -> "FockState":
        out = dict(self.amps)
        for k, v in other.amps.items():
            out[k] = out.get(k, 0) + v
        return FockState({k: v for k, v in out.items() if v}, min(self.cutoff, other.cutoff),
                         self.overflow or other.overflow)

    def scale(self, c) -> "FockState":
        return FockState({k: v * c for k, v in self.amps.items() if v * c}, self.cutoff, self.overflow)

    def coefficient(self, modes=(), charge=None) -> Fraction:
        if charge is None:
            charge = next(iter(self.amps))[1] if self.amps else ()
        return self.amps.get((tuple(sorted(modes)), tuple(charge)), Fraction(0))

    def __eq__(self, other):
        return isinstance(other, FockState) and self.amps == other.amps


# --------------------------------------------------------------------------
# the oracle


class FockOracle:
    def __init__(self, cartan: CartanData, point: RationalPoint, cutoff: int = 6,
                 conv: Conventions = LITERAL):
        self.cartan = cartan
        self.A = cartan.matrix
        self.rank = cartan.rank
        self.point = point
        self.cutoff = cutoff
        self.conv = conv
        self._bracket = {}

    # -- modes -------------------------------------------------------------

    def bracket(self, i: int, j: int, n: int) -> Fraction:
        """``[a_i[n], a_j[-n]]`` at the instantiated point."""
        key = (i, j, n)
        if key not in self._bracket:
            form = bracket_form(self.A[i][j])
            self._bracket[key] = Fraction(0) if form.is_zero else form.value(abs(n), self.point.roots) / n
        return self._bracket[key]

    def vacuum(self, charge=None) -> FockState:
        return FockState.vacuum(self.rank, self.cutoff, charge)

    def apply_mode(self, state: FockState, i: int, n: int) -> FockState:
        if n == 0:
            raise OracleError("mode index must be nonzero")
        out: dict = {}
        overflow = state.overflow
        for (modes, ch), amp in state.amps.items():
            if n < 0:
                new = tuple(sorted(modes + ((i, -n),)))
                if FockState.energy(new) > state.cutoff:
                    overflow = True
                    continue
                key = (new, ch)
                out[key] = out.get(key, 0) + amp
            else:
                counts = Counter(modes)
                for (j, m), k in counts.items():
                    if m != n:
                        continue
                    b = self.bracket(i, j, n)
                    if not b:
                        continue
                    rest = list(modes)
                    rest.remove((j, m))
                    key = (tuple(rest), ch)
                    out[key] = out.get(key, 0) + amp * k * b
        return FockState({k: v for k, v in out.items() if v}, state.cutoff, overflow)

    def _exp_modes(self, state: FockState, i: int, coeffs: dict) -> FockState:
        """``prod_n exp(coeffs[n] a_i[n])`` applied to ``state`` within the cutoff."""
        for n in sorted(coeffs):
            c = coeffs[n]
            if not c:
                continue
            total, term, k = state, state, 0
            while True:
                k += 1
                term = self.apply_mode(term, i, n).scale(Fraction(c) / k)
                if not term.amps:
                    break
                total = total + term
            state = FockState(total.amps, state.cutoff, state.overflow)
        return state

    def apply_vertex(self, state: FockState, spec: VertexOperatorSpec, z: Fraction) -> FockState:
        """``X_i(z)`` acting on ``state``; ``z`` is a nonzero rational."""
        i = spec.node
        N = self.cutoff
        roots = self.point.roots
        ann, cre = Counter(), Counter()
        for part in spec.parts:
            arg = self.point.value(part.shift) * z
            for n in range(1, N + 1):
                lam_p = _lambda_form(part.boson, 1).value(n, roots)
                lam_m = _lambda_form(part.boson, -1).value(n, roots)
                ann[n] += lam_p * arg ** (-n)
                cre[n] += lam_m * arg ** n
        state = self._exp_modes(state, i, dict(ann))
        state = self._exp_modes(state, i, {-n: c for n, c in cre.items()})
        out: dict = {}
        for (modes, ch), amp in state.amps.items():
            mom = sum(self.A[i][j] * ch[j] for j in range(self.rank))
            factor = Fraction(1)
            for part in spec.parts:
                factor *= (self.point.value(part.twist) * z) ** (part.charge * mom)
            q = spec.charge
            if self.conv.cocycle and q % 2:
                for j in range(self.rank):
                    if ch[j] % 2:
                        factor *= cocycle_sign(i, j, self.A)
            new_ch = tuple(c + (q if j == i else 0) for j, c in enumerate(ch))
            key = (modes, new_ch)
            out[key] = out.get(key, 0) + amp * factor
        return FockState({k: v for k, v in out.items() if v}, state.cutoff, state.overflow)

    def pairing(self, bra: FockState, ket: FockState) -> Fraction:
        """Bilinear form: bra modes act as the matching annihilators."""
        total = Fraction(0)
        for (modes, ch), amp in bra.amps.items():
            s = FockState({k: v for k, v in ket.amps.items() if k[1] == ch}, ket.cutoff)
            for (i, n) in modes:
                s = self.apply_mode(s, i, n)
            total += amp * s.coefficient((), ch)
        return total

    def vertex_matrix_element(self, bra: FockState, word: Sequence[tuple], ket: FockState) -> Fraction:
        """``<bra| X1(z1) X2(z2) ... |ket>``; ``word`` holds ``(kind, node, z)`` triples."""
        state = ket
        for kind, node, z in reversed(list(word)):
            state = self.apply_vertex(state, vertex_spec(kind, node, self.conv), Fraction(z))
        return self.pairing(bra, state)


def default_x4(point: RationalPoint) -> Fraction:
    """Fourth root of a spectral ratio well inside every contraction's disc of convergence.

    The nearest singularity of any E/F/H contraction sits no closer than
    ``q p^(3/2)`` (the E F pair); ``x = (5/11)^4 p^2 q`` stays far inside it.
    """
    return Fraction(5, 11) * point.p4 ** 2 * point.q4


# --------------------------------------------------------------------------
# closed power sums straight from a product form


def product_form_gamma(form: ProductForm, n: int, point: RationalPoint, var: str = "x") -> Fraction:
    """``n [x^n] log(form)`` at the point, summed in closed form.

    A finite factor ``(1 - x mu)^m`` contributes ``-m mu^n``; a family
    ``(x mu | g1..gr)^m`` contributes ``-m mu^n / prod (1 - g_k^n)``.
    """
    if form.prefactor.exps.get(var):
        raise OracleError("prefactor must not depend on the expansion variable")
    r = point.roots
    total = Fraction(0)

    def strip(u):
        if u.exps.get(var, 0) != 4:
            raise OracleError(f"argument {u} must be linear in {var}")
        return Monomial(u.coeff, {k: v for k, v in u.quarters if k != var})

    for u, m in form.factors:
        total += -m * Fraction((strip(u) ** n).evaluate(r))
    for f in form.families:
        val = Fraction((strip(f.base) ** n).evaluate(r))
        for g in f.gens:
            val /= 1 - Fraction((g ** n).evaluate(r))
        total += -f.mult * val
    return total


def exp_coefficients(gammas: Sequence[Fraction]) -> list:
    """Coefficients of ``exp(sum gamma_n x^n / n)`` from ``k c_k = sum gamma_n c_{k-n}``."""
    c = [Fraction(1)]
    for k in range(1, len(gammas) + 1):
        c.append(sum(gammas[n - 1] * c[k - n] for n in range(1, k + 1)) / k)
    return c


# --------------------------------------------------------------------------
# comparisons


@dataclass
class ContractionCheck:
    pair: str
    point: str
    x: str
    oracle: Fraction
    truncated_closed_form: Fraction
    exact_match: bool
    full_value: float
    tail_estimate: float
    within_tail: bool

    @property
    def passed(self) -> bool:
        return self.exact_match and self.within_tail

    def to_dict(self) -> dict:
        return {"pair": self.pair, "point": self.point, "x": self.x,
                "oracle": str(self.oracle), "closed_form_truncated": str(self.truncated_closed_form),
                "exact_match": self.exact_match,
                "full_value": mpmath.nstr(self.full_value, 15),
                "tail_estimate": mpmath.nstr(self.tail_estimate, 6),
                "within_tail": self.within_tail, "passed": self.passed}


def _to_mp(fr: Fraction):
    return mpmath.mpf(fr.numerator) / fr.denominator


def check_contraction(xk: str, yk: str, i: int, j: int, cartan: CartanData, point: RationalPoint,
                      x4: Fraction, cutoff: int = 6, conv: Conventions = LITERAL,
                      oracle: FockOracle | None = None) -> ContractionCheck:
    """Vacuum element ``<charge| X_i(1) Y_j(x) |0>`` against the contraction product form.

    ``x = x4**4``.  The oracle must reproduce ``sign * zero_mode(z=1) *
    sum_{k<=N} c_k x^k`` exactly, with ``c_k`` rebuilt from the product form
    by closed power sums; the full mpmath value of the product form must lie
    within the estimated truncation tail.
    """
    x4 = Fraction(x4)
    x = x4 ** 4
    oracle = oracle or FockOracle(cartan, point, cutoff, conv)
    desc = contraction_product_form(xk, yk, i, j, cartan, conv)
    X, Y = desc.X, desc.Y
    charge = [0] * cartan.rank
    charge[i] += X.charge
    charge[j] += Y.charge
    ket = oracle.vacuum()
    bra = oracle.vacuum(charge)
    got = oracle.vertex_matrix_element(bra, [(xk, i, 1), (yk, j, x)], ket)
    extra = 14
    gammas = [product_form_gamma(desc.form, n, point) for n in range(1, cutoff + extra + 1)]
    coeffs = exp_coefficients(gammas)
    zm = desc.zero_mode
    zm_val = Fraction(Monomial(zm.coeff, {k: v for k, v in zm.quarters if k not in ("z", "w")})
                      .evaluate(point.roots)) * desc.sign
    trunc = zm_val * sum(coeffs[k] * x ** k for k in range(cutoff + 1))
    tail = abs(zm_val) * sum(abs(coeffs[k]) * x ** k for k in range(cutoff + 1, len(coeffs)))
    with mpmath.workdps(30):
        pt = {"p": _to_mp(point.p), "q": _to_mp(point.q), "x": _to_mp(x)}
        full = _to_mp(zm_val) * desc.form.evaluate(pt).real
        ok_tail = abs(full - _to_mp(got)) <= 2 * _to_mp(tail) + mpmath.mpf(10) ** -25
    return ContractionCheck(f"{xk}_{i}{yk}_{j}", str(point), str(x), got, trunc, got == trunc,
                            full, _to_mp(tail), bool(ok_tail))


@dataclass
class SpotcheckReport:
    relation: str
    i: int
    j: int
    samples: list
    passed: bool

    def to_dict(self) -> dict:
        return {"relation": self.relation, "i": self.i, "j": self.j,
                "samples": self.samples, "passed": self.passed}


_PAIR = {
    "EE": ("E", "E"), "FF": ("F", "F"),
    "H+H+": ("H+", "H+"), "H-H-": ("H-", "H-"), "H+H-": ("H+", "H-"),
    "H+E": ("H+", "E"), "H-E": ("H-", "E"), "H+F": ("H+", "F"), "H-F": ("H-", "F"),
}


def exchange_spotcheck(relation: str, i: int, j: int, cartan: CartanData,
                       samples: Iterable[tuple] | None = None, cutoff: int = 6,
                       conv: Conventions = LITERAL, c=1) -> SpotcheckReport:
    """Numeric check of ``X_i(z) Y_j(w) = S(z/w) Y_j(w) X_i(z)`` in cleared form.

    The left ordering is taken from the oracle at ``z = 1``, ``w = x`` (the
    region where its mode sums converge).  The right ordering lives in the
    opposite region, so its contraction is continued analytically through
    the product form; the structure function ``S`` is evaluated from its
    theta products.  ``den(S) * LHS`` and ``num(S) * RHS`` must agree within
    the oracle's truncation tail.
    """
    if relation not in _PAIR:
        raise OracleError(f"unknown or unsupported relation {relation!r}")
    xk, yk = _PAIR[relation]
    samples = list(samples) if samples is not None else [(pt, default_x4(pt)) for pt in DEFAULT_POINTS]
    a = cartan.matrix[i][j]
    rows, ok = [], True
    for point, x4 in samples:
        chk = check_contraction(xk, yk, i, j, cartan, point, x4, cutoff, conv)
        rev = contraction_product_form(yk, xk, j, i, cartan, conv)
        x = Fraction(x4) ** 4
        with mpmath.workdps(30):
            pt = {"p": _to_mp(point.p), "q": _to_mp(point.q), "x": _to_mp(x)}
            inv = {"p": pt["p"], "q": pt["q"], "x": 1 / pt["x"]}
            zm = rev.zero_mode
            # reversed word Y_j(w) X_i(z): its zero-mode monomial is written in
            # z (for Y's slot) and w (for X's slot); here Y sits at x and X at 1
            zval = _eval_zero_mode(zm, {"z": pt["x"], "w": mpmath.mpf(1)}, pt) * rev.sign
            # its contraction depends on (X's position)/(Y's position) = 1/x
            rhs_op = zval * rev.form.evaluate(inv)
            sf = exchange_coefficient(relation, a, c, Monomial.of(y=1))
            ypt = {"p": pt["p"], "q": pt["q"], "y": 1 / pt["x"]}
            num, den = sf.numerator.evaluate(ypt), sf.denominator.evaluate(ypt)
            lhs = den * _to_mp(chk.oracle)
            rhs = num * rhs_op
            scale = abs(den) * (abs(_to_mp(chk.oracle)) + chk.tail_estimate)
            tol = 4 * abs(den) * chk.tail_estimate + scale * mpmath.mpf(10) ** -20
            good = abs(lhs - rhs) <= tol
        ok = ok and bool(good) and chk.exact_match
        rows.append({"point": str(point), "x": str(x), "lhs": mpmath.nstr(lhs.real, 15),
                     "rhs": mpmath.nstr(rhs.real, 15), "tolerance": mpmath.nstr(tol, 6),
                     "passed": bool(good) and chk.exact_match})
    return SpotcheckReport(relation, i, j, rows, ok)


def _eval_zero_mode(m: Monomial, spectral: dict, nomes: dict):
    v = mpmath.mpf(m.coeff.numerator) / m.coeff.denominator
    for k, e in m.quarters:
        base = spectral[k] if k in spectral else nomes[k]
        v *= mpmath.power(base, mpmath.mpf(e) / 4)
    return v
