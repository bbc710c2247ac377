"""Exact sparse Laurent series on a quarter-integer exponent lattice.

Exponents are stored as integer numerators over the global denominator 4, so
``p**(1/2)`` is stored as ``{'p': 2}``.  Coefficients are ``int`` or
``fractions.Fraction``; nothing in this module ever touches a float.

A :class:`Series` lives in a :class:`Window`: per spectral variable exponent
bounds plus a cap on the total nome degree.  Products are truncated to the
window and record that they were truncated.  Soundness of truncation is the
caller's business: nome truncation is exact as long as the operands' nome
degrees are bounded below (see :attr:`Series.prec`), spectral truncation is
exact for operands that are power series in the truncated variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping

DENOM = 4

NOME = "nome"
SPECTRAL = "spectral"


class LatticeError(ValueError):
    """An exponent left the quarter lattice or tables did not match."""


class NotInvertible(ArithmeticError):
    pass


def to_quarters(value) -> int:
    """Convert a rational exponent to its numerator over 4."""
    v = Fraction(value) * DENOM
    if v.denominator != 1:
        raise LatticeError(f"exponent {value} is not on the quarter lattice")
    return int(v)


def _norm(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


def format_rational(c) -> str:
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


# --------------------------------------------------------------------------
# variables


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    note: str = ""


class VariableTable:
    """Ordered, immutable set of variables.

    The order fixes the layout of exponent vectors in every :class:`Series`
    built on this table.
    """

    def __init__(self, variables: Iterable[Variable | tuple]):
        vs = []
        for v in variables:
            if not isinstance(v, Variable):
                v = Variable(*v)
            if v.kind not in (NOME, SPECTRAL):
                raise ValueError(f"unknown variable kind {v.kind!r}")
            vs.append(v)
        names = [v.name for v in vs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self._vars = tuple(vs)
        self._index = {v.name: k for k, v in enumerate(vs)}
        self.nome_idx = tuple(k for k, v in enumerate(vs) if v.kind == NOME)
        self.spectral_idx = tuple(k for k, v in enumerate(vs) if v.kind == SPECTRAL)

    @classmethod
    def standard(cls, spectral: Iterable[str] = ("x",), nomes: Iterable[str] = ("p", "q")):
        return cls([Variable(n, NOME) for n in nomes] + [Variable(s, SPECTRAL) for s in spectral])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._vars)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self._vars

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise LatticeError(f"variable {name!r} not in table {self.names}") from None

    def kind(self, name: str) -> str:
        return self._vars[self.index(name)].kind

    def __len__(self):
        return len(self._vars)

    def __eq__(self, other):
        return isinstance(other, VariableTable) and self._vars == other._vars

    def __hash__(self):
        return hash(self._vars)

    def __repr__(self):
        return f"VariableTable({', '.join(f'{v.name}:{v.kind}' for v in self._vars)})"


# --------------------------------------------------------------------------
# monomials


@dataclass(frozen=True)
class Monomial:
    """``coeff * prod(var**(quarters[var]/4))``.

    ``quarters`` is kept as a sorted tuple of ``(name, numerator)`` pairs with
    zero entries removed, so monomials hash and compare structurally.
    """

    coeff: object = 1
    quarters: tuple = ()

    def __post_init__(self):
        q = self.quarters
        if isinstance(q, Mapping):
            q = q.items()
        q = tuple(sorted((str(k), int(v)) for k, v in q if v))
        object.__setattr__(self, "quarters", q)
        object.__setattr__(self, "coeff", _norm(Fraction(self.coeff)))

    @classmethod
    def of(cls, coeff=1, **powers) -> "Monomial":
        """Build from natural-unit exponents, e.g. ``Monomial.of(x=1, p=Fraction(1, 2))``."""
        return cls(coeff, {k: to_quarters(v) for k, v in powers.items()})

    @property
    def exps(self) -> dict:
        return dict(self.quarters)

    def power_of(self, name: str) -> Fraction:
        return Fraction(self.exps.get(name, 0), DENOM)

    def __mul__(self, other):
        if not isinstance(other, Monomial):
            return Monomial(self.coeff * Fraction(other), self.quarters)
        e = dict(self.quarters)
        for k, v in other.quarters:
            e[k] = e.get(k, 0) + v
        return Monomial(self.coeff * other.coeff, e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * other.inverse()

    def __neg__(self):
        return Monomial(-self.coeff, self.quarters)

    def inverse(self) -> "Monomial":
        if self.coeff == 0:
            raise NotInvertible("zero monomial")
        return Monomial(1 / Fraction(self.coeff), {k: -v for k, v in self.quarters})

    def __pow__(self, n: int) -> "Monomial":
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        return Monomial(Fraction(self.coeff) ** n, {k: v * n for k, v in self.quarters})

    def scale_exponents(self, r) -> "Monomial":
        """Raise the *variable part* to a rational power ``r`` (coefficient must be 1)."""
        if self.coeff != 1:
            raise LatticeError("cannot take fractional powers of a coefficient")
        return Monomial(1, {k: to_quarters(Fraction(v, DENOM) * Fraction(r)) for k, v in self.quarters})

    def unit(self) -> "Monomial":
        """Variable part only (coefficient 1)."""
        return Monomial(1, self.quarters)

    def nome_degree(self, nomes=("p", "q")) -> int:
        return sum(v for k, v in self.quarters if k in nomes)

    def spectral_part(self, nomes=("p", "q")) -> tuple:
        return tuple((k, v) for k, v in self.quarters if k not in nomes)

    def is_one(self) -> bool:
        return self.coeff == 1 and not self.quarters

    def evaluate(self, point: Mapping[str, object]):
        """Exact value at a point given as fourth roots: ``point[name] = name**(1/4)``."""
        val = Fraction(self.coeff)
        for k, v in self.quarters:
            val *= Fraction(point[k]) ** v
        return _norm(val)

    def __str__(self):
        parts = []
        for k, v in self.quarters:
            e = Fraction(v, DENOM)
            parts.append(k if e == 1 else f"{k}^{e}" if e.denominator == 1 else f"{k}^({e})")
        body = "*".join(parts)
        if not body:
            return str(self.coeff)
        if self.coeff == 1:
            return body
        if self.coeff == -1:
            return "-" + body
        return f"{self.coeff}*{body}"


ONE = Monomial()


# --------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Window:
    """Truncation region.

    ``spectral`` maps a spectral variable name to ``(lo, hi)`` in quarter
    units; variables absent from the mapping are unbounded.  ``nome_cap`` is
    the largest total nome degree kept (quarter units).  ``nome_floor``, when
    set, is a validated lower bound: terms below it are dropped and flagged.
    """

    spectral: tuple = ()
    nome_cap: int = 16
    nome_floor: int | None = None

    def __post_init__(self):
        s = self.spectral
        if isinstance(s, Mapping):
            s = s.items()
        s = tuple(sorted((str(k), (int(lo), int(hi))) for k, (lo, hi) in s))
        for k, (lo, hi) in s:
            if lo > hi:
                raise ValueError(f"empty spectral range for {k}: [{lo}, {hi}]")
        if self.nome_cap < 0:
            raise ValueError("nome cap must be non-negative")
        object.__setattr__(self, "spectral", s)

    @classmethod
    def natural(cls, spectral: Mapping[str, tuple] | None = None, nome_cap=4, nome_floor=None):
        """Window from natural-unit bounds, e.g. ``Window.natural({'x': (-3, 3)}, nome_cap=4)``."""
        sp = {k: (to_quarters(lo), to_quarters(hi)) for k, (lo, hi) in (spectral or {}).items()}
        floor = None if nome_floor is None else to_quarters(nome_floor)
        return cls(sp, to_quarters(nome_cap), floor)

    @classmethod
    def with_floor(cls, spectral: Mapping[str, tuple], nome_cap, max_negative_weight) -> "Window":
        """Natural-unit window whose nome floor is ``-(spectral span) * weight``.

        ``max_negative_weight`` is the largest nome-degree deficit a single
        unit of spectral degree can carry (e.g. 3/2 for a factor
        ``1 - x q^-1 p^-3/2``).
        """
        span = sum(max(abs(lo), abs(hi)) for lo, hi in spectral.values())
        return cls.natural(spectral, nome_cap, -Fraction(span) * Fraction(max_negative_weight))

    @property
    def bounds(self) -> dict:
        return dict(self.spectral)

    def intersect(self, other: "Window") -> "Window":
        a, b = self.bounds, other.bounds
        sp = {}
        for k in set(a) | set(b):
            lo = max(x[0] for x in (a.get(k), b.get(k)) if x is not None)
            hi = min(x[1] for x in (a.get(k), b.get(k)) if x is not None)
            if lo > hi:
                raise ValueError(f"windows do not intersect in {k}")
            sp[k] = (lo, hi)
        floors = [f for f in (self.nome_floor, other.nome_floor) if f is not None]
        return Window(sp, min(self.nome_cap, other.nome_cap), max(floors) if floors else None)

    def with_cap(self, cap: int) -> "Window":
        return Window(self.spectral, cap, self.nome_floor)


# --------------------------------------------------------------------------
# series


class Series:
    """Immutable truncated Laurent series.

    ``terms`` maps exponent vectors (quarter units, in table order) to
    nonzero exact coefficients.  ``prec`` is the nome degree through which the
    stored coefficients are exact; it starts at the window cap for exact
    inputs and is lowered by products with negative-degree operands.
    """

    __slots__ = ("table", "window", "terms", "truncated", "prec", "_cmp")

    def __init__(self, table: VariableTable, window: Window, terms=None, *, truncated=False, prec=None, _trusted=False):
        self.table = table
        self.window = window
        self.truncated = bool(truncated)
        self.prec = window.nome_cap if prec is None else min(prec, window.nome_cap)
        self._cmp = _Clipper(table, window)
        if _trusted:
            self.terms = terms
            return
        out = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != len(table):
                raise LatticeError("exponent vector length does not match table")
            if c == 0:
                continue
            if not self._cmp.inside(e):
                self.truncated = True
                continue
            out[e] = _norm(c)
        self.terms = out

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, table, window):
        return cls(table, window, {})

    @classmethod
    def one(cls, table, window):
        return cls.from_monomial(table, window, ONE)

    @classmethod
    def from_monomial(cls, table, window, m: Monomial):
        e = [0] * len(table)
        for k, v in m.quarters:
            e[table.index(k)] = v
        return cls(table, window, {tuple(e): m.coeff})

    @classmethod
    def from_monomials(cls, table, window, monos: Iterable[Monomial]):
        acc = {}
        for m in monos:
            e = [0] * len(table)
            for k, v in m.quarters:
                e[table.index(k)] = v
            e = tuple(e)
            acc[e] = acc.get(e, 0) + m.coeff
        return cls(table, window, acc)

    def _like(self, terms, truncated, prec, window=None):
        return Series(self.table, window or self.window, terms, truncated=truncated, prec=prec, _trusted=True)

    # inspection -----------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def nome_degree(self, e) -> int:
        return sum(e[k] for k in self.table.nome_idx)

    def min_nome_degree(self) -> int:
        """Lower bound on the nome degree of the untruncated series."""
        if not self.terms:
            return self.prec + 1
        return min(min(self.nome_degree(e) for e in self.terms), self.prec + 1)

    def coefficient(self, e):
        """Coefficient at exponent vector ``e`` (quarter units, or a Monomial)."""
        if isinstance(e, Monomial):
            v = [0] * len(self.table)
            for k, q in e.quarters:
                v[self.table.index(k)] = q
            e = tuple(v)
        e = tuple(e)
        if not self._cmp.inside(e):
            raise LatticeError(f"exponent {e} outside the window")
        return self.terms.get(e, 0)

    def monomials(self):
        names = self.table.names
        for e in sorted(self.terms):
            yield Monomial(self.terms[e], dict(zip(names, e)))

    # arithmetic -----------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, Series):
            raise TypeError(f"expected Series, got {type(other).__name__}")
        if other.table != self.table:
            raise LatticeError(f"variable-table mismatch: {self.table} vs {other.table}")

    def __add__(self, other):
        if not isinstance(other, Series):
            other = Series.from_monomial(self.table, self.window, Monomial(other))
        self._check(other)
        w = self.window if self.window == other.window else self.window.intersect(other.window)
        clip = _Clipper(self.table, w)
        trunc = self.truncated or other.truncated
        out = {}
        for src in (self.terms, other.terms):
            for e, c in src.items():
                if not clip.inside(e):
                    trunc = True
                    continue
                out[e] = out.get(e, 0) + c
        out = {e: _norm(c) for e, c in out.items() if c != 0}
        return self._like(out, trunc, min(self.prec, other.prec), w)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()}, self.truncated, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return Series.zero(self.table, self.window)
        return self._like({e: _norm(v * c) for e, v in self.terms.items()}, self.truncated, self.prec)

    def __mul__(self, other):
        if isinstance(other, Monomial):
            return self.mul_monomial(other)
        if not isinstance(other, Series):
            return self.scale(other)
        self._check(other)
        w = self.window if self.window == other.window else self.window.intersect(other.window)
        clip = _Clipper(self.table, w)
        nidx = self.table.nome_idx
        cap = w.nome_cap
        a_items = [(sum(e[k] for k in nidx), e, c) for e, c in self.terms.items()]
        b_items = sorted(((sum(e[k] for k in nidx), e, c) for e, c in other.terms.items()), key=lambda t: t[0])
        out: dict = {}
        trunc = self.truncated or other.truncated
        n = len(self.table)
        rng = range(n)
        for da, ea, ca in a_items:
            room = cap - da
            for db, eb, cb in b_items:
                if db > room:
                    trunc = True
                    break
                e = tuple([ea[k] + eb[k] for k in rng])
                if not clip.inside_spectral(e):
                    trunc = True
                    continue
                out[e] = out.get(e, 0) + ca * cb
        if clip.floor is not None:
            for e in [e for e in out if clip.below_floor(e)]:
                del out[e]
                trunc = True
        out = {e: _norm(c) for e, c in out.items() if c != 0}
        prec = min(self.prec + other.min_nome_degree(), other.prec + self.min_nome_degree())
        return self._like(out, trunc, prec, w)

    __rmul__ = __mul__

    def mul_monomial(self, m: Monomial) -> "Series":
        """Multiply by a monomial (an exponent shift plus a scalar)."""
        shift = [0] * len(self.table)
        for k, v in m.quarters:
            shift[self.table.index(k)] = v
        out = {}
        trunc = self.truncated
        for e, c in self.terms.items():
            e2 = tuple(a + b for a, b in zip(e, shift))
            if not self._cmp.inside(e2):
                trunc = True
                continue
            out[e2] = _norm(c * m.coeff)
        d = sum(shift[k] for k in self.table.nome_idx)
        return self._like(out, trunc, self.prec + d)

    def mul_one_minus(self, u: Monomial, power: int = 1) -> "Series":
        """Multiply by ``(1 - u)**power``; negative powers use geometric expansion.

        A negative power requires ``u`` to have positive nome degree, or a
        bounded spectral window in which the expansion terminates.
        """
        s = self
        if power >= 0:
            for _ in range(power):
                s = s - s.mul_monomial(u)
            return s
        if u.nome_degree([self.table.names[k] for k in self.table.nome_idx]) <= 0 and not self._terminates(u):
            raise NotInvertible(f"(1 - {u}) has no terminating expansion in this window")
        for _ in range(-power):
            acc = s
            term = s
            while True:
                term = term.mul_monomial(u)
                if not term.terms:
                    break
                acc = acc + term
            s = acc._like(acc.terms, True, acc.prec)
        return s

    def _terminates(self, u: Monomial) -> bool:
        b = self.window.bounds
        sp = dict(u.spectral_part([self.table.names[k] for k in self.table.nome_idx]))
        return any(v != 0 and k in b for k, v in sp.items())

    def substitute(self, var: str, m: Monomial) -> "Series":
        """Replace ``var**e`` by ``(m * var)**e`` term by term.

        ``m`` may carry any variables of the table; its coefficient enters as
        ``coeff**e`` so exponents of ``var`` must be integers when
        ``coeff != 1``.  Terms pushed outside the window are dropped and the
        result is flagged as truncated.
        """
        if m.coeff == 0:
            raise ValueError("substitution monomial must be nonzero")
        i = self.table.index(var)
        shift = [0] * len(self.table)
        for k, v in m.quarters:
            shift[self.table.index(k)] = v
        coeff = Fraction(m.coeff)
        out = {}
        trunc = self.truncated
        min_shift = 0
        for e, c in self.terms.items():
            ev = e[i]
            if coeff != 1 and ev % DENOM:
                raise LatticeError("fractional exponent with a non-unit substitution coefficient")
            new = []
            for k in range(len(e)):
                s = shift[k] * Fraction(ev, DENOM)
                if s.denominator != 1:
                    raise LatticeError("substitution leaves the quarter lattice")
                new.append(e[k] + int(s))
            new = tuple(new)
            if not self._cmp.inside(new):
                trunc = True
                continue
            factor = coeff ** (ev // DENOM) if coeff != 1 else 1
            out[new] = out.get(new, 0) + c * factor
            d = sum(new[k] - e[k] for k in self.table.nome_idx)
            min_shift = min(min_shift, d)
        out = {e: _norm(c) for e, c in out.items() if c != 0}
        return self._like(out, trunc, self.prec + min_shift)

    def restrict(self, window: Window) -> "Series":
        clip = _Clipper(self.table, window)
        out = {e: c for e, c in self.terms.items() if clip.inside(e)}
        return Series(self.table, window, out, truncated=self.truncated or len(out) < len(self.terms),
                      prec=self.prec, _trusted=True)

    def invert(self) -> "Series":
        """Multiplicative inverse in the window.

        The minimal-grade slice (nome degree, then total spectral degree)
        must be a single monomial ``m``; then ``1/a = m^-1 * sum (-r)^k`` with
        ``a = m (1 + r)``.
        """
        if not self.terms:
            raise NotInvertible("zero series")
        sidx = self.table.spectral_idx

        def grade(e):
            return (self.nome_degree(e), sum(e[k] for k in sidx))

        g0 = min(grade(e) for e in self.terms)
        lead = [e for e in self.terms if grade(e) == g0]
        if len(lead) != 1:
            raise NotInvertible(f"{len(lead)} terms share the minimal grade {g0}")
        e0 = lead[0]
        m = Monomial(self.terms[e0], dict(zip(self.table.names, e0)))
        minv = m.inverse()
        # work in a widened window so that the shift by m^-1 does not clip
        wide = _shift_window(self.window, self.table, m)
        a = Series(self.table, wide, self.terms, truncated=self.truncated, prec=self.prec, _trusted=True)
        r = a.mul_monomial(minv) - Series.one(self.table, wide)
        # r is measured relative to m: a degree-zero remainder term only raises
        # the spectral degree, which terminates only in a bounded window
        if not wide.spectral and any(r.nome_degree(e) == 0 for e in r.terms):
            raise NotInvertible("no terminating expansion: zero-grade remainder in an unbounded window")
        acc = Series.one(self.table, wide)
        term = acc
        neg_r = -r
        for _ in range(10_000):
            term = term * neg_r
            if not term.terms:
                break
            acc = acc + term
        else:
            raise NotInvertible("inverse expansion did not terminate")
        res = acc.mul_monomial(minv)
        d0 = m.nome_degree(self.table.names)
        out = Series(self.table, self.window, res.terms, truncated=True, prec=self.prec - 2 * d0)
        return out

    def __eq__(self, other):
        return (isinstance(other, Series) and self.table == other.table and self.window == other.window
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.table, self.window, frozenset(self.terms.items())))

    def serialize(self) -> str:
        """Canonical text form: one ``[e1, e2, ...] num/den`` line per term, sorted."""
        names = ",".join(self.table.names)
        lines = [f"# vars {names} (exponents x{DENOM})"]
        for e in sorted(self.terms):
            lines.append(f"[{', '.join(str(v) for v in e)}] {format_rational(self.terms[e])}")
        return "\n".join(lines)

    def __repr__(self):
        if not self.terms:
            return "Series(0)"
        shown = " + ".join(str(m) for m in list(self.monomials())[:8])
        more = "" if len(self.terms) <= 8 else f" + ... ({len(self.terms)} terms)"
        return f"Series({shown}{more})"


class _Clipper:
    __slots__ = ("lo", "hi", "cap", "floor", "nidx")

    def __init__(self, table: VariableTable, window: Window):
        n = len(table)
        self.lo = [None] * n
        self.hi = [None] * n
        for k, (lo, hi) in window.spectral:
            if k in table.names:
                i = table.index(k)
                self.lo[i], self.hi[i] = lo, hi
        self.cap = window.nome_cap
        self.floor = window.nome_floor
        self.nidx = table.nome_idx

    def inside_spectral(self, e) -> bool:
        for v, lo, hi in zip(e, self.lo, self.hi):
            if lo is not None and (v < lo or v > hi):
                return False
        return True

    def below_floor(self, e) -> bool:
        return self.floor is not None and sum(e[k] for k in self.nidx) < self.floor

    def inside(self, e) -> bool:
        d = sum(e[k] for k in self.nidx)
        if d > self.cap or (self.floor is not None and d < self.floor):
            return False
        return self.inside_spectral(e)


def _shift_window(w: Window, table: VariableTable, m: Monomial) -> Window:
    b = w.bounds
    ex = m.exps
    sp = {k: (lo - abs(ex.get(k, 0)), hi + abs(ex.get(k, 0))) for k, (lo, hi) in b.items()}
    d = abs(m.nome_degree([table.names[k] for k in table.nome_idx]))
    floor = None if w.nome_floor is None else w.nome_floor - d
    return Window(sp, w.nome_cap + d, floor)


# --------------------------------------------------------------------------
# comparison


@dataclass
class EqualityReport:
    equal: bool
    witness: tuple | None = None  # (exponent dict in natural units, lhs, rhs)
    compared_terms: int = 0
    precision: int | None = None
    note: str = ""

    def __bool__(self):
        return self.equal

    def to_dict(self) -> dict:
        d = {"equal": self.equal, "compared_terms": self.compared_terms}
        if self.precision is not None:
            d["nome_precision"] = format_rational(Fraction(self.precision, DENOM))
        if self.witness is not None:
            exps, lhs, rhs = self.witness
            d["witness"] = {
                "exponents": {k: format_rational(v) for k, v in exps.items()},
                "lhs": format_rational(lhs),
                "rhs": format_rational(rhs),
            }
        if self.note:
            d["note"] = self.note
        return d


def window_equal(a: Series, b: Series, w: Window | None = None) -> EqualityReport:
    """Compare two series coefficient-wise inside ``w``.

    Only nome degrees through the smaller precision are compared.  On failure
    the lexicographically first discrepant exponent vector is returned with
    both coefficients.
    """
    a._check(b)
    w = w or a.window.intersect(b.window)
    clip = _Clipper(a.table, w)
    prec = min(a.prec, b.prec, w.nome_cap)
    note = ""
    if prec < w.nome_cap:
        note = f"precision limited to nome degree {Fraction(prec, DENOM)}"
    keys = sorted(k for k in set(a.terms) | set(b.terms)
                  if clip.inside(k) and sum(k[i] for i in a.table.nome_idx) <= prec)
    for k in keys:
        ca, cb = a.terms.get(k, 0), b.terms.get(k, 0)
        if ca != cb:
            exps = {n: Fraction(v, DENOM) for n, v in zip(a.table.names, k) if v}
            return EqualityReport(False, (exps, ca, cb), len(keys), prec, note)
    return EqualityReport(True, None, len(keys), prec, note)


# free-standing aliases used by the rest of the package
def series_add(a: Series, b: Series) -> Series:
    return a + b


def series_mul(a: Series, b: Series) -> Series:
    return a * b


def series_invert(a: Series) -> Series:
    return a.invert()


def substitute(a: Series, var: str, m: Monomial) -> Series:
    return a.substitute(var, m)


def coefficient(a: Series, e):
    return a.coefficient(e)


def lattice_points(bounds: Mapping[str, tuple]) -> Iterable[dict]:
    """All exponent assignments (quarter units, step 1) in a box."""
    names = sorted(bounds)
    for combo in iproduct(*(range(bounds[n][0], bounds[n][1] + 1) for n in names)):
        yield dict(zip(names, combo))
