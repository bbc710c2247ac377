"""Product forms for Pochhammer symbols, theta functions and structure functions.

A :class:`ProductForm` is ``prefactor * prod (1 - u)^m * prod (u0 | g1..gk)^m``
kept symbolically.  Expansion first flattens every factor (family members
included) into a multiplicity table over canonically oriented arguments: an
argument of negative nome degree is flipped with ``1 - u = -u (1 - 1/u)`` so
that every surviving denominator is invertible in the nome-graded ring.
Factors of nome degree exactly zero (``1 - z/w``, ``1 - qx/p``) cannot be
inverted there; they must be cleared by the caller (see :func:`clear_common`).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Sequence

import mpmath

from .lattice_series import (
    DENOM, ONE, LatticeError, Monomial, NotInvertible, Series, VariableTable, Window, _Clipper, to_quarters,
    window_equal,
)

NOMES = ("p", "q")
P = Monomial.of(p=1)
Q = Monomial.of(q=1)


def pm(power) -> Monomial:
    """``p**power``."""
    return Monomial.of(p=Fraction(power))


def _deg(u: Monomial) -> int:
    return u.nome_degree(NOMES)


def _orient(u: Monomial):
    """Return ``(flip, v)`` with ``1 - u = flip * (1 - v)`` and ``v`` canonical."""
    d = _deg(u)
    if d > 0:
        return ONE, u
    if d == 0:
        spec = u.spectral_part(NOMES)
        key = [v for _, v in spec] or [v for _, v in u.quarters]
        if not key:
            raise LatticeError(f"degenerate factor 1 - {u}")
        first = next(v for v in key if v)
        if first > 0:
            return ONE, u
    return -u, u.inverse()


@dataclass(frozen=True)
class Family:
    """``(base | gens)_inf ** mult``: product of ``1 - base * g^k`` over k >= 0."""

    base: Monomial
    gens: tuple
    mult: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gens", tuple(self.gens))
        for g in self.gens:
            if _deg(g) <= 0:
                raise ValueError(f"Pochhammer generator {g} must have positive nome degree")
            if g.coeff != 1:
                raise ValueError("Pochhammer generators carry no coefficient")

    def members(self, cap: int) -> Iterable[Monomial]:
        """Members ``base * g^k`` with nome degree <= cap (finitely many)."""
        d0 = _deg(self.base)
        degs = [_deg(g) for g in self.gens]

        def rec(i, cur, d):
            if i == len(self.gens):
                yield cur
                return
            while d <= cap:
                yield from rec(i + 1, cur, d)
                cur = cur * self.gens[i]
                d += degs[i]

        if d0 <= cap:
            yield from rec(0, self.base, d0)


@dataclass(frozen=True)
class ProductForm:
    prefactor: Monomial = ONE
    factors: tuple = ()        # ((u, m), ...)
    families: tuple = ()       # (Family, ...)

    def __post_init__(self):
        c = Counter()
        for u, m in self.factors:
            c[u] += m
        object.__setattr__(self, "factors", tuple(sorted(((u, m) for u, m in c.items() if m),
                                                         key=lambda t: (str(t[0]), t[1]))))
        fams = Counter()
        for f in self.families:
            fams[(f.base, f.gens)] += f.mult
        object.__setattr__(self, "families", tuple(Family(b, g, m) for (b, g), m in
                                                   sorted(fams.items(), key=lambda t: str(t[0])) if m))

    @classmethod
    def monomial(cls, m: Monomial) -> "ProductForm":
        return cls(m)

    def __mul__(self, other):
        if isinstance(other, Monomial):
            return ProductForm(self.prefactor * other, self.factors, self.families)
        return ProductForm(self.prefactor * other.prefactor, self.factors + other.factors,
                           self.families + other.families)

    __rmul__ = __mul__

    def inverse(self) -> "ProductForm":
        return ProductForm(self.prefactor.inverse(), tuple((u, -m) for u, m in self.factors),
                           tuple(Family(f.base, f.gens, -f.mult) for f in self.families))

    def __truediv__(self, other):
        if isinstance(other, Monomial):
            return self * other.inverse()
        return self * other.inverse()

    def __neg__(self):
        return ProductForm(-self.prefactor, self.factors, self.families)

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return ProductForm(self.prefactor ** n, tuple((u, m * n) for u, m in self.factors),
                           tuple(Family(f.base, f.gens, f.mult * n) for f in self.families))

    def map_monomials(self, fn) -> "ProductForm":
        """Apply ``fn`` to every monomial (prefactor, arguments, family bases)."""
        return ProductForm(fn(self.prefactor), tuple((fn(u), m) for u, m in self.factors),
                           tuple(Family(fn(f.base), f.gens, f.mult) for f in self.families))

    def substitute(self, var: str, m: Monomial) -> "ProductForm":
        """Shift ``var -> m * var`` everywhere (``var**e`` picks up ``m**e``)."""
        return self.map_monomials(lambda u: _subst(u, var, m, keep=True))

    def replace(self, var: str, m: Monomial) -> "ProductForm":
        """Replace ``var`` by the monomial ``m`` outright."""
        return self.map_monomials(lambda u: _subst(u, var, m, keep=False))

    @property
    def is_finite(self) -> bool:
        return not self.families

    def flatten(self, cap: int):
        """``(prefactor, {u: m})`` with every ``u`` canonically oriented.

        Family members of degree above ``cap`` are omitted; they contribute
        ``1 + O(cap)`` to any expansion built on the result.
        """
        pref = self.prefactor
        table = Counter()
        items = [(u, m) for u, m in self.factors]
        for f in self.families:
            items.extend((u, f.mult) for u in f.members(cap))
        for u, m in items:
            flip, v = _orient(u)
            if not flip.is_one():
                pref = pref * flip ** m
            table[v] += m
        return pref, {u: m for u, m in table.items() if m}

    def zero_degree_poles(self, cap: int = 0) -> dict:
        _, t = self.flatten(max(cap, 0))
        return {u: -m for u, m in t.items() if m < 0 and _deg(u) == 0}

    def expand(self, table: VariableTable, window: Window) -> Series:
        """Windowed expansion in the nome-graded ring, exact through the window cap."""
        cap = window.nome_cap
        pref, _ = self.flatten(max(cap, 0))
        inner = cap - _deg(pref)
        if inner < 0:
            return Series(table, window, {}, prec=cap)
        pref, fl = self.flatten(inner)
        # intermediate products may leave the spectral window and come back,
        # so work in a window wide enough to hold every reachable exponent
        reach = {}
        for u, m in fl.items():
            d = _deg(u)
            if d > inner:
                continue
            for k, v in u.spectral_part(NOMES):
                if d > 0:
                    slope = Fraction(abs(v), d)
                    reach[k] = max(reach.get(k, (0, 0))[0], slope), reach.get(k, (0, 0))[1]
                elif m > 0:
                    reach[k] = reach.get(k, (0, 0))[0], reach.get(k, (0, 0))[1] + abs(v) * m
        sp = {}
        for k, (lo, hi) in window.bounds.items():
            lo, hi = lo - pref.exps.get(k, 0), hi - pref.exps.get(k, 0)
            slope, extra = reach.get(k, (0, 0))
            b = int(slope * inner) + extra + 1
            sp[k] = (min(lo, -b), max(hi, b))
        s = Series.one(table, Window(sp, inner, None))
        for u, m in sorted(fl.items(), key=lambda t: (_deg(t[0]), str(t[0]))):
            if _deg(u) > inner:
                continue
            s = s.mul_one_minus(u, m)
        shift = [0] * len(table)
        for k, v in pref.quarters:
            shift[table.index(k)] = v
        clip = _Clipper(table, window)
        terms = {}
        for e, c in s.terms.items():
            e2 = tuple(a + b for a, b in zip(e, shift))
            if clip.inside(e2):
                terms[e2] = c * pref.coeff
        return Series(table, window, terms, truncated=True, prec=min(s.prec + _deg(pref), cap))

    def evaluate(self, point: dict, nterms_tol=None):
        """High-precision complex value; ``point`` maps variable -> complex value."""
        val = mpmath.mpc(_eval_mono(self.prefactor, point))
        for u, m in self.factors:
            val *= (1 - _eval_mono(u, point)) ** m
        for f in self.families:
            val *= _eval_family(f, point) ** f.mult
        return val

    def __str__(self):
        parts = [] if self.prefactor.is_one() else [f"({self.prefactor})"]
        for u, m in self.factors:
            parts.append(f"(1 - {u})" + ("" if m == 1 else f"^{m}"))
        for f in self.families:
            gens = ",".join(str(g) for g in f.gens)
            parts.append(f"({f.base}|{gens})" + ("" if f.mult == 1 else f"^{f.mult}"))
        return " ".join(parts) or "1"


def _widen(w: Window, m: Monomial) -> Window:
    b = w.bounds
    if not b:
        return w
    ex = m.exps
    return Window({k: (lo - ex.get(k, 0), hi - ex.get(k, 0)) for k, (lo, hi) in b.items()}, w.nome_cap, w.nome_floor)


def _subst(u: Monomial, var: str, m: Monomial, keep: bool) -> Monomial:
    e = u.exps.get(var, 0)
    if not e:
        return u
    r = Fraction(e, DENOM)
    if m.coeff != 1 and r.denominator != 1:
        raise LatticeError("fractional power of a substituted coefficient")
    scaled = Monomial(Fraction(m.coeff) ** int(r) if m.coeff != 1 else 1,
                      {k: to_quarters(Fraction(v, DENOM) * r) for k, v in m.quarters})
    base = u if keep else Monomial(u.coeff, {k: v for k, v in u.quarters if k != var})
    return base * scaled


def _eval_mono(m: Monomial, point):
    v = mpmath.mpf(m.coeff.numerator) / m.coeff.denominator if isinstance(m.coeff, Fraction) else mpmath.mpf(m.coeff)
    for k, e in m.quarters:
        v *= mpmath.power(point[k], mpmath.mpf(e) / DENOM)
    return v


def _eval_family(f: Family, point):
    return _eval_nested(_eval_mono(f.base, point), [_eval_mono(g, point) for g in f.gens])


def _eval_nested(b, gens):
    if len(gens) == 1:
        return mpmath.qp(b, gens[0])
    eps = mpmath.mpf(10) ** (-mpmath.mp.dps)
    total = mpmath.mpc(1)
    cur = b
    while abs(cur) > eps:
        total *= _eval_nested(cur, gens[1:])
        cur *= gens[0]
    return total


# --------------------------------------------------------------------------
# sums of product forms and clearing


def clear_common(sides: Sequence[Sequence[ProductForm]], cap: int = 0):
    """Multiply every term of every side by the zero-degree denominators.

    Each side is a list of product-form terms (a sum).  Returns the cleared
    sides and the multiplier that was applied.
    """
    need = Counter()
    for side in sides:
        for term in side:
            for u, k in term.zero_degree_poles(cap).items():
                need[u] = max(need[u], k)
    mult = ProductForm(ONE, tuple(need.items()))
    return [[t * mult for t in side] for side in sides], mult


def expand_sum(terms: Iterable[ProductForm], table: VariableTable, window: Window) -> Series:
    total = Series.zero(table, window)
    for t in terms:
        total = total + t.expand(table, window)
    return total


# --------------------------------------------------------------------------
# Pochhammer symbols and theta functions


def pochhammer_form(u: Monomial, nomes: Sequence[Monomial], mult: int = 1) -> ProductForm:
    return ProductForm(ONE, (), (Family(u, tuple(nomes), mult),))


def pochhammer(u: Monomial, nomes: Sequence[Monomial], w: Window, table: VariableTable | None = None) -> Series:
    """Windowed expansion of ``prod (1 - u q1^i1 ... qm^im)``."""
    for g in nomes:
        if _deg(g) <= 0:
            raise ValueError(f"Pochhammer nome {g} must have positive nome degree")
    table = table or _table_for([u, *nomes])
    return pochhammer_form(u, nomes).expand(table, w)


def theta_form(u: Monomial, nome: Monomial) -> ProductForm:
    """``theta_a(u) = (u|a)(a/u|a)(a|a)``."""
    if _deg(nome) <= 0:
        raise ValueError(f"theta nome {nome} must have positive nome degree")
    return ProductForm(ONE, (), (Family(u, (nome,)), Family(nome / u, (nome,)), Family(nome, (nome,))))


def theta(u: Monomial, nome: Monomial, w: Window, table: VariableTable | None = None) -> Series:
    table = table or _table_for([u, nome])
    return theta_form(u, nome).expand(table, w)


def jacobi_theta_sum(table: VariableTable, w: Window, var: str = "z", nome: str = "q") -> Series:
    """Independent oracle: ``sum_n (-1)^n q^(n(n-1)/2) z^n`` restricted to ``w``."""
    cap = w.nome_cap
    terms = {}
    iz, iq = table.index(var), table.index(nome)
    n = 0
    while True:
        hit = False
        for k in {n, -n}:
            d = k * (k - 1) // 2 * DENOM
            if d <= cap:
                e = [0] * len(table)
                e[iz], e[iq] = k * DENOM, d
                terms[tuple(e)] = (-1) ** (k % 2)
                hit = True
        if not hit and n > 1:
            break
        n += 1
    return Series(table, w, terms)


def _table_for(monos) -> VariableTable:
    names = set()
    for m in monos:
        names.update(k for k, _ in m.quarters)
    spectral = sorted(n for n in names if n not in NOMES)
    return VariableTable.standard(tuple(spectral) or ("x",))


# --------------------------------------------------------------------------
# structure functions


@dataclass(frozen=True)
class StructureFunction:
    numerator: ProductForm
    denominator: ProductForm
    label: str
    i: int = 0
    j: int = 0
    c: Fraction = Fraction(1)

    def ratio(self) -> ProductForm:
        return self.numerator / self.denominator

    def inverse(self) -> "StructureFunction":
        return StructureFunction(self.denominator, self.numerator, f"inv({self.label})", self.j, self.i, self.c)

    def __mul__(self, other: "StructureFunction") -> "StructureFunction":
        return StructureFunction(self.numerator * other.numerator, self.denominator * other.denominator,
                                 f"{self.label}*{other.label}", self.i, self.j, self.c)

    def expand_ratio(self, table, window) -> Series:
        """Expansion of the ratio; only legitimate when all poles are invertible."""
        return self.ratio().expand(table, window)


def tilde(qnome: Monomial, c) -> Monomial:
    """The second nome ``q~ = q p^c``."""
    return qnome * pm(c)


def structure_psi(kind: str, i: int, j: int, A, c=1, arg: Monomial | None = None,
                  qnome: Monomial = Q) -> StructureFunction:
    """``psi^{(q)}_{ij}(x)`` or ``psi^{(q~)}_{ij}(x)`` as a theta ratio.

    ``A`` is the Cartan matrix (or directly the entry ``A_ij``).
    """
    a = _entry(A, i, j)
    x = arg if arg is not None else Monomial.of(x=1)
    xi = x.inverse()
    h = Fraction(a, 2)
    sign = (-1) ** (a % 2)
    if kind == "q":
        nome, pref = qnome, Monomial(sign) * pm(-h)
        num, den = xi * pm(h), xi * pm(-h)
    elif kind in ("qt", "q~", "tilde"):
        nome, pref = tilde(qnome, c), Monomial(sign) * pm(h)
        num, den = xi * pm(-h), xi * pm(h)
    else:
        raise ValueError(f"unknown psi kind {kind!r}")
    return StructureFunction(theta_form(num, nome) * pref, theta_form(den, nome), f"psi^({kind})", i, j, Fraction(c))


def _entry(A, i, j) -> int:
    if isinstance(A, int):
        return A
    try:
        n = len(A)
    except TypeError:
        return int(A)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"node indices ({i}, {j}) out of range for rank {n}")
    return int(A[i][j])


EXCHANGE_RELATIONS = ("H+H+", "H-H-", "H+H-", "H+E", "H-E", "H+F", "H-F", "EE", "FF")


def exchange_coefficient(relation: str, a: int, c, ratio: Monomial, qnome: Monomial = Q) -> StructureFunction:
    """Coefficient ``S`` in ``X_i(z) Y_j(w) = S(z/w) Y_j(w) X_i(z)``.

    ``ratio`` is the monomial standing for ``z/w``; ``qnome`` is the algebra's
    ``q`` (``q^(n)`` inside the family) and ``q~ = qnome p^c``.
    """
    c = Fraction(c)
    h = Fraction(a, 2)
    sign = Monomial((-1) ** (a % 2))
    qt = tilde(qnome, c)
    y = ratio
    th = theta_form

    if relation in ("H+H+", "H-H-"):
        num = th(y * pm(h), qnome) * th(y * pm(-h), qt)
        den = th(y * pm(-h), qnome) * th(y * pm(h), qt)
    elif relation == "H+H-":
        num = th(y * pm((a + c) / 2), qnome) * th(y * pm(-(a + c) / 2), qt)
        den = th(y * pm(-(a - c) / 2), qnome) * th(y * pm((a - c) / 2), qt)
    elif relation in ("H+E", "H-E"):
        s = c / 4 if relation == "H+E" else -c / 4
        num = th(y * pm(h + s), qnome) * sign * pm(-h)
        den = th(y * pm(-h + s), qnome)
    elif relation in ("H+F", "H-F"):
        s = -c / 4 if relation == "H+F" else c / 4
        num = th(y * pm(-h + s), qt) * sign * pm(h)
        den = th(y * pm(h + s), qt)
    elif relation == "EE":
        num = th(y * pm(h), qnome) * sign * pm(-h)
        den = th(y * pm(-h), qnome)
    elif relation == "FF":
        num = th(y * pm(-h), qt) * sign * pm(h)
        den = th(y * pm(h), qt)
    else:
        raise ValueError(f"unknown exchange relation {relation!r}")
    return StructureFunction(num, den, relation, c=c)


def serre_coefficient_f(kind: str, A, i: int, j: int, c=1, z1="z1", z2="z2", w="w", qnome: Monomial = Q):
    """Cleared ``f^{(a)}_{ij}(z1/w, z2/w)`` as ``(numerator terms, denominator terms)``.

    Numerator ``(psi_ii(z2/z1) + 1)(psi_ij(w/z1) psi_ij(w/z2) + 1)`` and
    denominator ``psi_ij(w/z2) + psi_ii(z2/z1) psi_ij(w/z1)``, both multiplied
    by every theta denominator so that each is a sum of theta products.
    """
    if _entry(A, i, j) != -1:
        raise ValueError("the Serre coefficient needs A_ij = -1")
    m = Monomial.of
    s1 = structure_psi(kind, i, i, A, c, m(**{z2: 1, z1: -1}), qnome)
    s2 = structure_psi(kind, i, j, A, c, m(**{w: 1, z1: -1}), qnome)
    s3 = structure_psi(kind, i, j, A, c, m(**{w: 1, z2: -1}), qnome)
    N1, D1 = s1.numerator, s1.denominator
    N2, D2 = s2.numerator, s2.denominator
    N3, D3 = s3.numerator, s3.denominator
    numerator = [N1 * N2 * N3, N1 * D2 * D3, D1 * N2 * N3, D1 * D2 * D3]
    denominator = [N3 * D1 * D2, N1 * N2 * D3]
    return numerator, denominator


# --------------------------------------------------------------------------
# numeric scaling probe


@dataclass(frozen=True)
class ScalingProbeConfig:
    epsilons: tuple
    hbar: complex
    eta: complex
    u: complex
    a_ij: int = 2
    kind: str = "q"
    dps: int = 32

    def __post_init__(self):
        eps = [Fraction(e) for e in self.epsilons]
        if len(eps) < 4:
            raise ValueError("the scaling probe needs at least four epsilon values")
        if any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("epsilons must be positive and strictly decreasing")
        with mpmath.workdps(self.dps):
            for e in eps:
                e = mpmath.mpf(e.numerator) / e.denominator
                if abs(mpmath.exp(e * self.hbar)) >= 1 or abs(mpmath.exp(e / self.eta)) >= 1:
                    raise ValueError("need |exp(eps*hbar)| < 1 and |exp(eps/eta)| < 1")
        object.__setattr__(self, "epsilons", tuple(eps))


@dataclass
class ScalingReport:
    values: list
    differences: list
    converging: bool

    def to_dict(self):
        return {"values": [mpmath.nstr(v, 20) for v in self.values],
                "differences": [mpmath.nstr(d, 12) for d in self.differences],
                "converging": self.converging}


def scaling_probe(cfg: ScalingProbeConfig) -> ScalingReport:
    """Evaluate ``psi`` at ``p = e^(eps hbar), q = e^(eps/eta), x = e^(i eps u)``.

    Passes when successive differences decrease over the last three steps.
    No limiting value is asserted.
    """
    sf = structure_psi(cfg.kind, 0, 0, cfg.a_ij, 1)
    vals = []
    with mpmath.workdps(cfg.dps):
        for e in cfg.epsilons:
            e = mpmath.mpf(e.numerator) / e.denominator
            pt = {"p": mpmath.exp(e * cfg.hbar), "q": mpmath.exp(e / cfg.eta),
                  "x": mpmath.exp(1j * e * cfg.u)}
            if cfg.a_ij == 0:
                vals.append(mpmath.mpc(1))
                continue
            vals.append(sf.numerator.evaluate(pt) / sf.denominator.evaluate(pt))
        diffs = [abs(b - a) for a, b in zip(vals, vals[1:])]
    tail = diffs[-3:]
    ok = all(b < a for a, b in zip(tail, tail[1:])) or all(d == 0 for d in tail)
    return ScalingReport(vals, diffs, ok)


# --------------------------------------------------------------------------
# theta identities


def check_theta_identities(kz=6, knome=6) -> dict:
    """Triple product against the Jacobi sum, quasi-periodicity and inversion.

    Every identity is compared coefficient-wise in the window
    ``z in [-kz, kz]``, nome degree ``<= knome`` (natural units).
    """
    table = VariableTable.standard(("z",))
    w = Window.natural({"z": (-Fraction(kz), Fraction(kz))}, Fraction(knome))
    z, q = Monomial.of(z=1), Q
    th = theta_form(z, q)
    out = {
        "triple_product": window_equal(th.expand(table, w), jacobi_theta_sum(table, w), w),
        # theta(q z) = -z^-1 theta(z)
        "quasi_periodicity": window_equal(theta_form(q * z, q).expand(table, w),
                                          (th * ProductForm(Monomial.of(-1, z=-1))).expand(table, w), w),
        # theta(q / z) = theta(z)
        "inversion": window_equal(theta_form(q / z, q).expand(table, w), th.expand(table, w), w),
    }
    return {k: v.to_dict() for k, v in out.items()}
