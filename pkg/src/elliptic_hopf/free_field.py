"""Level-one free field realization.

Heisenberg modes ``a_i[n]`` pair as

    [a_i[n], a_j[m]] = delta_{n+m,0} B_ij(n),
    B_ij(n) = (1/n)(1 - q^-n)(p^{nA/2} - p^{-nA/2})(1 - (pq)^n)/(1 - p^n),

and every current is a normal-ordered exponential built from one or more
*parts*.  A part carries a lattice charge (``+1`` for the E-type boson,
``-1`` for the F-type one), the argument shift of its oscillator field and
the argument shift seen by its momentum operator.  ``E`` and ``F`` have one
part each; ``H+`` and ``H-`` are the normal-ordered composites
``:E(z h) F(z/h):`` and ``:E(z/h) F(z h):`` with ``h = p^(1/4)``.

Moving the annihilation half of part ``a`` (at ``z``) past the creation half
of part ``b`` (at ``w``) produces ``exp(sum_n gamma_n x^n / n)`` with
``x = w/z`` and

    gamma_n = n B_ij(n) lambda_a(n) lambda_b(-n) (sigma_b / sigma_a)^n,

where ``lambda_E(n) = 1/(q^n - 1)`` and ``lambda_F(n) = 1/((pq)^-n - 1)``.
Every ``gamma_n`` is a finite sum of ``mu^n`` over a product of
``(1 - nu^n)``; that shape is :class:`PowerSum`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .cartan import CartanData, cartan_matrix
from .lattice_series import ONE, LatticeError, Monomial, Series, VariableTable, Window
from .theta_products import NOMES, Family, ProductForm, _deg

KINDS = ("E", "F", "H+", "H-")


def _mono(**kw) -> Monomial:
    return Monomial.of(**{k: Fraction(v) for k, v in kw.items()})


# --------------------------------------------------------------------------
# conventions


@dataclass(frozen=True)
class Conventions:
    """Shift and sign conventions of the realization.

    ``e_shift``/``f_shift`` are the oscillator argument shifts of E and F
    (literal values ``(pq)^(1/2)`` and ``q^(1/2)``).  ``h_plus`` builds
    ``H+(z) = :E(z h+) F(z/h+):`` and ``h_minus`` builds
    ``H-(z) = :E(z/h-) F(z h-):`` (both ``p^(1/4)`` literally).  ``e_twist``/``f_twist``
    rescale the argument of the momentum factor ``z^(+-P)`` (identity in the
    literal reading).  ``cocycle`` switches on the lattice two-cocycle.
    """

    e_shift: Monomial = _mono(p=Fraction(1, 2), q=Fraction(1, 2))
    f_shift: Monomial = _mono(q=Fraction(1, 2))
    h_plus: Monomial = _mono(p=Fraction(1, 4))
    h_minus: Monomial = _mono(p=Fraction(1, 4))
    e_twist: Monomial = ONE
    f_twist: Monomial = ONE
    cocycle: bool = False

    def __post_init__(self):
        for name in ("e_shift", "f_shift", "h_plus", "h_minus", "e_twist", "f_twist"):
            m = getattr(self, name)
            if any(k not in NOMES for k, _ in m.quarters):
                raise LatticeError(f"{name} must be a pure nome monomial")
            # momentum twists only ever appear raised to integer powers, so
            # they may carry a sign; oscillator shifts may not
            if m.coeff not in ((1, -1) if name.endswith("twist") else (1,)):
                raise LatticeError(f"{name} has coefficient {m.coeff}")

    @classmethod
    def literal(cls) -> "Conventions":
        return cls()

    def describe(self) -> dict:
        return {
            "e_shift": str(self.e_shift),
            "f_shift": str(self.f_shift),
            "h_plus": str(self.h_plus),
            "h_minus": str(self.h_minus),
            "e_twist": str(self.e_twist),
            "f_twist": str(self.f_twist),
            "cocycle": self.cocycle,
        }

    @property
    def is_literal(self) -> bool:
        return self == Conventions()


LITERAL = Conventions()


# --------------------------------------------------------------------------
# vertex operator specs


@dataclass(frozen=True)
class Part:
    charge: int          # +1 (e^{Q}) or -1 (e^{-Q})
    boson: str           # 'E' -> lambda_E, 'F' -> lambda_F
    shift: Monomial      # oscillator argument shift
    twist: Monomial      # momentum argument shift


@dataclass(frozen=True)
class VertexOperatorSpec:
    kind: str
    node: int
    parts: tuple

    @property
    def charge(self) -> int:
        return sum(pt.charge for pt in self.parts)


def vertex_spec(kind: str, node: int, conv: Conventions = LITERAL) -> VertexOperatorSpec:
    e = Part(1, "E", conv.e_shift, conv.e_twist)
    f = Part(-1, "F", conv.f_shift, conv.f_twist)
    if kind == "E":
        parts = (e,)
    elif kind == "F":
        parts = (f,)
    elif kind in ("H+", "H-"):
        s = conv.h_plus if kind == "H+" else conv.h_minus.inverse()
        parts = (replace(e, shift=e.shift * s, twist=e.twist * s),
                 replace(f, shift=f.shift / s, twist=f.twist / s))
    else:
        raise ValueError(f"unknown current kind {kind!r}")
    return VertexOperatorSpec(kind, node, parts)


# --------------------------------------------------------------------------
# power sums:  sum_mu c_mu mu^n / prod_j (1 - nu_j^n)


def _vec(m: Monomial) -> dict:
    return dict(m.quarters)


@dataclass(frozen=True)
class PowerSum:
    numerator: tuple = ()      # ((mu, c), ...) sorted
    denominator: tuple = ()    # (nu, ...) sorted

    @staticmethod
    def make(num: dict, den: Sequence[Monomial]) -> "PowerSum":
        num = {m: c for m, c in num.items() if c}
        return PowerSum(tuple(sorted(num.items(), key=lambda t: str(t[0]))),
                        tuple(sorted(den, key=str)))

    @staticmethod
    def term(*pairs, den=()) -> "PowerSum":
        c = Counter()
        for m, k in pairs:
            c[m] += k
        return PowerSum.make(dict(c), list(den))

    def __mul__(self, other: "PowerSum") -> "PowerSum":
        c = Counter()
        for a, ca in self.numerator:
            for b, cb in other.numerator:
                c[a * b] += ca * cb
        return PowerSum.make(dict(c), list(self.denominator) + list(other.denominator))

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    def value(self, n: int, point=None):
        """``gamma_n`` exactly: a Fraction at a rational ``point`` (4th-root table)."""
        num = sum(c * (mu ** n).evaluate(point) for mu, c in self.numerator)
        den = 1
        for nu in self.denominator:
            den *= 1 - (nu ** n).evaluate(point)
        return Fraction(num) / den

    def simplify(self) -> "PowerSum":
        """Orient denominators to positive nome degree and cancel exact factors."""
        num = dict(self.numerator)
        den = []
        for nu in self.denominator:
            d = _deg(nu)
            if d == 0:
                raise LatticeError(f"denominator 1 - ({nu})^n has nome degree 0 and cannot be capped")
            if d < 0:
                # 1/(1 - nu^n) = -nu^-n / (1 - nu^-n)
                num = {m * nu.inverse(): -c for m, c in num.items()}
                nu = nu.inverse()
            den.append(nu)
        changed = True
        while changed and num:
            changed = False
            for k, nu in enumerate(den):
                q = _divide_one_minus(num, nu)
                if q is not None:
                    num = q
                    del den[k]
                    changed = True
                    break
        return PowerSum.make(num, den)

    def __str__(self):
        top = " + ".join(f"{c}*({m})^n" for m, c in self.numerator) or "0"
        bot = "".join(f"(1 - ({nu})^n)" for nu in self.denominator)
        return f"[{top}]" + (f" / {bot}" if bot else "")


def _divide_one_minus(num: dict, nu: Monomial):
    """Exact quotient of ``sum c mu^n`` by ``1 - nu^n``, or None."""
    v = _vec(nu)
    keys = sorted(v)
    i0 = next(k for k in keys if v[k])
    step = v[i0]   # cosets of <nu> are labelled by the residue of mu[i0] mod step
    cosets: dict = {}
    for mu, c in num.items():
        e = _vec(mu)
        k = e.get(i0, 0) // step
        rep = mu / nu ** k
        cosets.setdefault(rep, {})
        cosets[rep][k] = cosets[rep].get(k, 0) + c
    out = Counter()
    for rep, poly in cosets.items():
        if sum(poly.values()) != 0:
            return None
        lo, hi = min(poly), max(poly)
        acc = 0
        for k in range(lo, hi):
            acc += poly.get(k, 0)
            if acc:
                out[rep * nu ** k] += acc
    return {m: c for m, c in out.items() if c}


def bracket_form(a: int) -> PowerSum:
    """``n [a_i[n], a_j[-n]]`` for Cartan entry ``a``."""
    if a == 0:
        return PowerSum()
    h = Fraction(a, 2)
    return (PowerSum.term((ONE, 1), (_mono(q=-1), -1))
            * PowerSum.term((_mono(p=h), 1), (_mono(p=-h), -1))
            * PowerSum.term((ONE, 1), (_mono(p=1, q=1), -1), den=[_mono(p=1)]))


def _lambda_form(boson: str, sign: int) -> PowerSum:
    """``lambda(sign * n)`` as a power sum in ``n``."""
    q, pq = _mono(q=1), _mono(p=1, q=1)
    if boson == "E":
        # 1/(q^n - 1) = -1/(1-q^n);  1/(q^-n - 1) = q^n/(1-q^n)
        return PowerSum.term((ONE, -1), den=[q]) if sign > 0 else PowerSum.term((q, 1), den=[q])
    if boson == "F":
        # 1/((pq)^-n - 1) = (pq)^n/(1-(pq)^n);  1/((pq)^n - 1) = -1/(1-(pq)^n)
        return PowerSum.term((pq, 1), den=[pq]) if sign > 0 else PowerSum.term((ONE, -1), den=[pq])
    raise ValueError(boson)


def bracket_value(a: int, n: int, point=None):
    """Closed form of ``[a_i[n], a_j[-n]]``.

    Without ``point`` the structured :class:`PowerSum` of ``n`` times the
    bracket is returned (for ``n > 0``); with a rational ``point`` (a map of
    4th roots, see :func:`rational_point`) the exact value is returned for
    any ``n != 0``.
    """
    if n == 0:
        raise ValueError("mode index must be nonzero")
    form = bracket_form(a)
    if point is None:
        if n < 0:
            raise ValueError("symbolic form is given for positive n; use B(-n) = -B(n)")
        return form
    if form.is_zero:
        return Fraction(0)
    return form.value(n, point) / n


def smode_coefficient(sign: str, n: int, point=None):
    """Scalar multiplying ``a_i[n]`` in ``s^+_i[n]`` or ``s^-_i[n]``."""
    if n == 0:
        raise ValueError("mode index must be nonzero")
    if sign == "+":
        form = _lambda_form("E", 1 if n > 0 else -1)
    elif sign == "-":
        form = _lambda_form("F", 1 if n > 0 else -1)
        form = PowerSum.make({m: -c for m, c in form.numerator}, list(form.denominator))
    else:
        raise ValueError("sign must be '+' or '-'")
    if point is None:
        return form
    return form.value(abs(n), point)


def mode_weight(part: Part, n: int, point):
    """Coefficient of ``a[n] (shifted z)^-n`` inside the exponent of ``part``."""
    lam = _lambda_form(part.boson, 1 if n > 0 else -1).value(abs(n), point)
    return lam


# --------------------------------------------------------------------------
# contractions


@dataclass(frozen=True)
class PartContraction:
    gamma: PowerSum
    zero_mode: Monomial     # contribution to the z-independent zero-mode factor
    power: int              # exponent of z from z^{P} past e^{Q}


def part_gamma(a: Part, b: Part, entry: int) -> PowerSum:
    if entry == 0:
        return PowerSum()
    ratio = b.shift / a.shift
    g = (bracket_form(entry) * _lambda_form(a.boson, 1) * _lambda_form(b.boson, -1)
         * PowerSum.term((ratio, 1)))
    return g.simplify()


def contraction_exponent(X: VertexOperatorSpec, Y: VertexOperatorSpec, A) -> PowerSum:
    """``gamma_n`` for ``X_i(z) Y_j(w)``, summed over the parts of both currents."""
    entry = _entry(A, X.node, Y.node)
    total: Counter = Counter()
    dens = None
    forms = [part_gamma(a, b, entry) for a in X.parts for b in Y.parts]
    forms = [f for f in forms if not f.is_zero]
    if not forms:
        return PowerSum()
    # bring to a common denominator (all share their factors up to multiplicity)
    common = Counter()
    for f in forms:
        for nu, k in Counter(f.denominator).items():
            common[nu] = max(common[nu], k)
    for f in forms:
        extra = common - Counter(f.denominator)
        mult = PowerSum.term((ONE, 1))
        for nu, k in extra.items():
            for _ in range(k):
                mult = mult * PowerSum.term((ONE, 1), (nu, -1))
        for m, c in (PowerSum.make(dict(f.numerator), []) * mult).numerator:
            total[m] += c
    dens = [nu for nu, k in sorted(common.items(), key=lambda t: str(t[0])) for _ in range(k)]
    return PowerSum.make(dict(total), dens).simplify()


def _entry(A, i, j) -> int:
    if isinstance(A, int):
        return A
    if isinstance(A, CartanData):
        return A[i, j]
    return int(A[i][j])


def power_sum_product_form(g: PowerSum, var: str = "x") -> ProductForm:
    """``exp(sum_n g_n x^n / n)`` as a product form."""
    x = Monomial.of(**{var: 1})
    g = g.simplify()
    factors, families = [], []
    for mu, c in g.numerator:
        base = x * mu
        if not g.denominator:
            factors.append((base, -c))
        else:
            families.append(Family(base, tuple(g.denominator), -c))
    return ProductForm(ONE, tuple(factors), tuple(families))


@dataclass(frozen=True)
class ContractionDescriptor:
    X: VertexOperatorSpec
    Y: VertexOperatorSpec
    gamma: PowerSum
    form: ProductForm
    zero_mode: Monomial      # nome part and z-power of the zero-mode factor
    sign: int

    def to_dict(self) -> dict:
        return {"pair": f"{self.X.kind}_{self.X.node}{self.Y.kind}_{self.Y.node}",
                "gamma": str(self.gamma), "product_form": str(self.form),
                "zero_mode": str(self.zero_mode), "sign": self.sign}


@lru_cache(maxsize=4096)
def _descriptor(xk, i, yk, j, conv, matrix) -> ContractionDescriptor:
    X, Y = vertex_spec(xk, i, conv), vertex_spec(yk, j, conv)
    g = contraction_exponent(X, Y, matrix)
    zm, sign = zero_mode_factor([(X, Monomial.of(z=1)), (Y, Monomial.of(w=1))], matrix, conv)
    return ContractionDescriptor(X, Y, g, power_sum_product_form(g), zm, sign)


def contraction_product_form(xk: str, yk: str, i: int, j: int, A, conv: Conventions = LITERAL) -> ContractionDescriptor:
    """Descriptor for ``X_i(z) Y_j(w) = sign * zero_mode * C(w/z) :X Y:``."""
    matrix = A.matrix if isinstance(A, CartanData) else tuple(tuple(r) for r in A)
    return _descriptor(xk, i, yk, j, conv, matrix)


def cocycle_sign(i: int, j: int, A) -> int:
    """``eps(i, j)`` with ``eps(i,j) eps(j,i) = (-1)^A_ij``."""
    a = _entry(A, i, j)
    if i == j:
        return -1
    return (-1) ** (a % 2) if i < j else 1


def zero_mode_factor(word, A, conv: Conventions = LITERAL):
    """Monomial and sign from commuting momenta past later lattice charges.

    ``word`` is a sequence of ``(spec, argument monomial)``.  Each part's
    momentum ``(twist * argument)^(charge P_i)`` passes every later part's
    ``e^(charge' Q_j)`` and leaves ``(twist * argument)^(charge charge' A_ij)``.
    """
    mono, sign = ONE, 1
    for k, (X, zx) in enumerate(word):
        for Y, _ in word[k + 1:]:
            a = _entry(A, X.node, Y.node)
            if a == 0 and not conv.cocycle:
                continue
            for pa in X.parts:
                for pb in Y.parts:
                    e = pa.charge * pb.charge * a
                    if e:
                        mono = mono * (pa.twist * zx) ** e
            if conv.cocycle:
                if (X.charge * Y.charge) % 2:
                    sign *= cocycle_sign(X.node, Y.node, A)
    return mono, sign


# --------------------------------------------------------------------------
# independent oracles for the product form


def exp_gamma_series(g: PowerSum, kx: int, nome_cap: int, var: str = "x"):
    """``exp(sum_{n<=kx} g_n x^n / n)`` summed directly, as an x-power series.

    Returns ``(series, prec)``; coefficients are exact for total nome degree
    ``<= prec`` (quarter units) and x-degree ``<= kx``.  The expansion region
    is ``|x|`` small, the same region a vacuum matrix element lives in.
    """
    g = g.simplify()
    table = VariableTable.standard((var,))
    low = min([_deg(mu) for mu, _ in g.numerator] + [0])
    floor = low * kx
    work = nome_cap - floor
    w = Window({var: (0, 4 * kx)}, work, floor)
    ix = table.index(var)
    expo = Series.zero(table, w)
    for n in range(1, kx + 1):
        terms = Counter()
        for mu, c in g.numerator:
            base = mu ** n
            # sum over nu multi-indices: prod 1/(1 - nu^n)
            stack = [(base * Monomial.of(**{var: n}), 0)]
            while stack:
                m, idx = stack.pop()
                if idx == len(g.denominator):
                    e = [0] * len(table)
                    for k, v in m.quarters:
                        e[table.index(k)] = v
                    if _deg(m) <= work:
                        terms[tuple(e)] += Fraction(c * m.coeff, n)
                    continue
                nu = g.denominator[idx] ** n
                cur = m
                while _deg(cur) <= work + 0:
                    stack.append((cur, idx + 1))
                    cur = cur * nu
        expo = expo + Series(table, w, {e: v for e, v in terms.items() if v})
    # exp via the recursion k c_k = sum_n n g_n c_{k-n} on x-degree slices
    one = Series.one(table, w)
    result, power = one, one
    for k in range(1, kx + 1):
        power = power * expo
        result = result + power.scale(Fraction(1, _factorial(k)))
    return _settle(result, var, kx, nome_cap, floor), nome_cap


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def product_form_x_series(form: ProductForm, kx: int, nome_cap: int, var: str = "x"):
    """Expand a product form in the region ``|x|`` small (x-series with a nome floor).

    Factors containing ``var`` are expanded geometrically in ``var``; pure
    nome factors follow the nome grading.
    """
    table = VariableTable.standard((var,))
    factors = list(form.factors)
    low = 0
    for u, m in factors:
        ev = u.exps.get(var, 0)
        if ev <= 0:
            raise LatticeError(f"factor (1 - {u}) is not a positive power series in {var}")
        low = min(low, Fraction(_deg(u), ev // 4))
    for f in form.families:
        ev = f.base.exps.get(var, 0)
        if ev <= 0 or any(g.exps.get(var, 0) for g in f.gens):
            raise LatticeError("family base must carry a positive power of the expansion variable")
        low = min(low, Fraction(_deg(f.base), ev // 4))
    floor = int(low * kx) if low * kx == int(low * kx) else int(low * kx) - 1
    work = nome_cap - floor
    for f in form.families:
        factors.extend((u, f.mult) for u in f.members(work))
    w = Window({var: (0, 4 * kx)}, work, floor)
    s = Series.one(table, w)
    for u, m in sorted(factors, key=lambda t: str(t[0])):
        s = s.mul_one_minus(u, m)
    s = s.mul_monomial(form.prefactor) if not form.prefactor.is_one() else s
    return _settle(s, var, kx, nome_cap, floor), nome_cap


def _settle(s: Series, var: str, kx: int, cap: int, floor: int) -> Series:
    """Restrict a work-window result to nome degree ``<= cap``, where it is exact."""
    w = Window({var: (0, 4 * kx)}, cap, floor)
    nidx = s.table.nome_idx
    terms = {e: c for e, c in s.terms.items() if floor <= sum(e[k] for k in nidx) <= cap}
    return Series(s.table, w, terms, truncated=True, prec=cap)


def rational_point(p: Fraction, q: Fraction, **spectral) -> dict:
    """A point for exact evaluation: ``p = P^4`` etc.  Arguments are the 4th roots."""
    pt = {"p": Fraction(p), "q": Fraction(q)}
    pt.update({k: Fraction(v) for k, v in spectral.items()})
    return pt
