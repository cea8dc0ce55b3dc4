"""Exact sparse polynomial algebra over a typed variable alphabet.

Everything downstream (jets, operators, PDE towers, coalgebras) computes in
this ring.  Scalars are exact rationals (``fractions.Fraction``), so every
identity checked anywhere in the package is an equality of canonical forms
with zero tolerance.

Variable alphabet
-----------------
Three kinds of variables, with a fixed documented total order:

* base coordinates      x1, x2, ...          (``Variable.base(i)``)
* jet coordinates       u, u_x, u_xt, ...    (``Variable.jet(a, I)``)
* nilpotent generators  e1, e2, ...          (``Variable.eps(j, layer)``)

Order: base < jet < eps; base variables by index; jet variables by
(fiber, total order, subscript word in base order); eps by (layer, index).
Monomials are compared in graded lexicographic order over that variable
order, so canonical forms (and leading terms) are unique.

Jet subscripts render as repetitions of base-variable names per derivative
(``u_xx``, ``u_xt``); coefficients render as ``p/q``.

Values are immutable after construction and every operation is a pure
function of its inputs, so they can be shared across concurrent workers
without synchronization.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from jetcat import _kernel
from jetcat.errors import DimensionMismatchError

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def rat(value, den=None):
    """Coerce to an exact Rational.  Accepts ints, Fractions and 'p/q' text."""
    if den is not None:
        return Fraction(value, den)
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(value)


class MultiIndex(tuple):
    """Derivative multi-index: fixed-length tuple of non-negative ints.

    ``+`` is componentwise (not tuple concatenation); length mismatches
    raise ``DimensionMismatchError``.
    """

    __slots__ = ()

    def __new__(cls, entries):
        if type(entries) is cls:
            return entries
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError("multi-index entries must be non-negative: %r" % (entries,))
        return tuple.__new__(cls, entries)

    @classmethod
    def _mk(cls, entries):
        # internal fast path: entries known valid
        return tuple.__new__(cls, entries)

    @classmethod
    def zero(cls, m):
        return cls((0,) * m)

    @classmethod
    def unit(cls, i, m):
        if not 0 <= i < m:
            raise DimensionMismatchError("direction %d out of range for base dim %d" % (i, m))
        return cls(tuple(1 if j == i else 0 for j in range(m)))

    @property
    def degree(self):
        return sum(self)

    def __add__(self, other):
        if len(self) != len(other):
            raise DimensionMismatchError(
                "multi-index length mismatch: %d vs %d" % (len(self), len(other))
            )
        return tuple.__new__(MultiIndex, (a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        if len(self) != len(other):
            raise DimensionMismatchError(
                "multi-index length mismatch: %d vs %d" % (len(self), len(other))
            )
        diff = tuple(a - b for a, b in zip(self, other))
        if any(d < 0 for d in diff):
            raise ValueError("multi-index subtraction went negative: %r - %r" % (self, other))
        return MultiIndex(diff)

    def dominates(self, other):
        """True iff self >= other componentwise (same length)."""
        if len(self) != len(other):
            raise DimensionMismatchError(
                "multi-index length mismatch: %d vs %d" % (len(self), len(other))
            )
        return all(a >= b for a, b in zip(self, other))

    def factorial(self):
        """I! = prod of entry factorials."""
        out = 1
        for e in self:
            out *= math.factorial(e)
        return out

    def word(self):
        """Subscript word: direction index repeated per derivative, ascending."""
        out = []
        for d, e in enumerate(self):
            out.extend([d] * e)
        return tuple(out)


def mi_add(i, j):
    """Componentwise sum of two multi-indices (same length)."""
    return MultiIndex(i) + MultiIndex(j)


@functools.lru_cache(maxsize=4096)
def multi_indices(m, max_degree, min_degree=0):
    """All multi-indices of length m with min_degree <= |I| <= max_degree,
    in canonical order (degree ascending, then subscript word)."""
    out = []
    for deg in range(min_degree, max_degree + 1):
        out.extend(_indices_of_degree(m, deg))
    return tuple(out)


@functools.lru_cache(maxsize=4096)
def _indices_of_degree(m, deg):
    if m == 1:
        return (MultiIndex((deg,)),)
    res = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            res.append(MultiIndex._mk(prefix + (remaining,)))
            return
        for e in range(remaining, -1, -1):
            rec(prefix + (e,), remaining - e, slots - 1)

    rec((), deg, m)
    return tuple(res)


_BASE, _JET, _EPS = 0, 1, 2


class Variable(tuple):
    """A typed variable, encoded as its own sort key.

    The tuple payload is ``(kind, *numeric components)`` arranged so that
    plain tuple comparison realizes the documented variable order.  Instances
    are interned, so identity equality holds for equal variables.
    """

    __slots__ = ()
    _registry: dict = {}

    def __new__(cls, payload):
        reg = cls._registry
        v = reg.get(payload)
        if v is None:
            v = tuple.__new__(cls, payload)
            reg[payload] = v
        return v

    @classmethod
    def base(cls, i):
        return cls((_BASE, int(i)))

    @classmethod
    def jet(cls, fiber, index):
        index = index if isinstance(index, MultiIndex) else MultiIndex(index)
        return cls((_JET, int(fiber), index.degree, len(index)) + index.word())

    @classmethod
    def eps(cls, j, layer=0):
        return cls((_EPS, int(layer), int(j)))

    @property
    def kind(self):
        return self[0]

    @property
    def is_base(self):
        return self[0] == _BASE

    @property
    def is_jet(self):
        return self[0] == _JET

    @property
    def is_eps(self):
        return self[0] == _EPS

    @property
    def base_index(self):
        if self[0] != _BASE:
            raise TypeError("not a base variable: %r" % (self,))
        return self[1]

    @property
    def fiber(self):
        if self[0] != _JET:
            raise TypeError("not a jet variable: %r" % (self,))
        return self[1]

    @property
    def base_dim(self):
        if self[0] != _JET:
            raise TypeError("not a jet variable: %r" % (self,))
        return self[3]

    @property
    def index(self):
        """Multi-index of a jet variable."""
        if self[0] != _JET:
            raise TypeError("not a jet variable: %r" % (self,))
        m = self[3]
        entries = [0] * m
        for d in self[4:]:
            entries[d] += 1
        return MultiIndex(entries)

    @property
    def order(self):
        """Jet order |I| (0 for base and eps variables)."""
        return self[2] if self[0] == _JET else 0

    @property
    def eps_index(self):
        if self[0] != _EPS:
            raise TypeError("not an eps variable: %r" % (self,))
        return self[2]

    @property
    def layer(self):
        if self[0] != _EPS:
            raise TypeError("not an eps variable: %r" % (self,))
        return self[1]

    def shifted(self, extra):
        """Jet variable with multi-index raised by ``extra``."""
        return Variable.jet(self.fiber, self.index + extra)

    def name(self, base_names=None, fiber_names=None):
        if self[0] == _BASE:
            i = self[1]
            if base_names is not None:
                return base_names[i]
            return "x%d" % (i + 1)
        if self[0] == _JET:
            a = self[1]
            if fiber_names is not None:
                fib = fiber_names[a]
            else:
                fib = "u" if a == 0 else "u%d" % (a + 1)
            word = self[4:]
            if not word:
                return fib
            if base_names is not None:
                sub = "".join(base_names[d] for d in word)
            else:
                sub = "".join("x%d" % (d + 1) for d in word)
            return "%s_%s" % (fib, sub)
        layer, j = self[1], self[2]
        nm = "e%d" % (j + 1)
        if layer:
            nm += "l%d" % layer
        return nm

    def __repr__(self):
        return "Variable(%s)" % self.name()


def _mono_key(mono):
    """Graded-lex sort key; tuple-compare of these realizes the term order."""
    deg = 0
    body = []
    for v, e in mono:
        deg += e
        body.append((tuple(-c for c in v), e))
    return (deg, tuple(body))


def mono_degree(mono):
    return sum(e for _, e in mono)


def mono_divides(m1, m2):
    """True iff monomial m1 divides m2."""
    have = dict(m2)
    return all(have.get(v, 0) >= e for v, e in m1)


def mono_div(m1, m2):
    """m1 / m2, assuming divisibility."""
    have = dict(m1)
    for v, e in m2:
        have[v] -= e
    return tuple(sorted((v, e) for v, e in have.items() if e))


class Polynomial:
    """Immutable sparse multivariate polynomial with exact Rational coefficients.

    ``terms`` maps canonical monomials to nonzero coefficients; two
    polynomials are equal iff their term maps are equal.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None, _canonical=False):
        if terms is None:
            self.terms = {}
        elif _canonical:
            self.terms = terms
        else:
            clean = {}
            for m, c in terms.items():
                c = Fraction(c)
                if c:
                    clean[tuple(m)] = c
            self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls):
        return _P_ZERO

    @classmethod
    def one(cls):
        return _P_ONE

    @classmethod
    def constant(cls, c):
        c = Fraction(c)
        if not c:
            return _P_ZERO
        return cls({(): c}, _canonical=True)

    @classmethod
    def variable(cls, v, exp=1):
        if exp < 0:
            raise ValueError("negative exponent")
        if exp == 0:
            return _P_ONE
        return cls({((v, exp),): _ONE}, _canonical=True)

    @classmethod
    def base_var(cls, i):
        return cls.variable(Variable.base(i))

    @classmethod
    def jet_var(cls, fiber, index):
        return cls.variable(Variable.jet(fiber, index))

    @classmethod
    def eps_var(cls, j, layer=0):
        return cls.variable(Variable.eps(j, layer))

    # -- ring structure ----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Polynomial(_kernel.add_terms(self.terms, other.terms), _canonical=True)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Polynomial(_kernel.sub_terms(self.terms, other.terms), _canonical=True)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Polynomial(_kernel.sub_terms(other.terms, self.terms), _canonical=True)

    def __neg__(self):
        return Polynomial(_kernel.neg_terms(self.terms), _canonical=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Polynomial(
                _kernel.scale_terms(self.terms, Fraction(other)), _canonical=True
            )
        if isinstance(other, Polynomial):
            return Polynomial(_kernel.mul_terms(self.terms, other.terms), _canonical=True)
        return NotImplemented

    __rmul__ = __mul__

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            raise ValueError("negative power of a polynomial")
        return Polynomial(_kernel.pow_terms(self.terms, n), _canonical=True)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                raise ZeroDivisionError("polynomial divided by zero scalar")
            return self * (1 / q)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- structure ---------------------------------------------------------

    def variables(self):
        out = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def jet_variables(self):
        return {v for v in self.variables() if v.is_jet}

    def max_jet_order(self):
        """Largest |I| among jet variables present (0 if none)."""
        best = 0
        for m in self.terms:
            for v, _ in m:
                if v.is_jet and v[2] > best:
                    best = v[2]
        return best

    def base_dim_hint(self):
        """Base dimension carried by jet variables, if any (else None)."""
        for m in self.terms:
            for v, _ in m:
                if v.is_jet:
                    return v[3]
        return None

    def total_degree(self):
        return max((mono_degree(m) for m in self.terms), default=0)

    def degree_in(self, pred):
        """Max total degree counting only variables with pred(v) true."""
        best = 0
        for m in self.terms:
            d = sum(e for v, e in m if pred(v))
            if d > best:
                best = d
        return best

    def eps_degree(self):
        return self.degree_in(lambda v: v.is_eps)

    def is_constant(self):
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self):
        return self.terms.get((), _ZERO)

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), _ZERO)

    def leading(self):
        """(monomial, coefficient) maximal in graded-lex order; zero poly -> None."""
        if not self.terms:
            return None
        m = max(self.terms, key=_mono_key)
        return m, self.terms[m]

    def sorted_terms(self, reverse=True):
        return sorted(self.terms.items(), key=lambda kv: _mono_key(kv[0]), reverse=reverse)

    # -- calculus ----------------------------------------------------------

    def partial(self, v):
        """Formal partial derivative with respect to variable v."""
        out = {}
        for m, c in self.terms.items():
            for pos, (w, e) in enumerate(m):
                if w == v:
                    if e == 1:
                        dm = m[:pos] + m[pos + 1:]
                    else:
                        dm = m[:pos] + ((w, e - 1),) + m[pos + 1:]
                    q = out.get(dm, _ZERO) + c * e
                    if q:
                        out[dm] = q
                    elif dm in out:
                        del out[dm]
                    break
        return Polynomial(out, _canonical=True)

    def substitute(self, mapping: Mapping):
        """Simultaneous substitution variable -> Polynomial/Rational."""
        if not mapping:
            return self
        values = {}
        for v, p in mapping.items():
            values[v] = p if isinstance(p, Polynomial) else Polynomial.constant(p)
        acc = {}
        for m, c in self.terms.items():
            piece = {(): c}
            rest = []
            for v, e in m:
                rep = values.get(v)
                if rep is None:
                    rest.append((v, e))
                else:
                    piece = _kernel.mul_terms(piece, _kernel.pow_terms(rep.terms, e))
            if rest:
                piece = _kernel.mul_terms(piece, {tuple(rest): _ONE})
            acc = _kernel.add_terms(acc, piece)
        return Polynomial(acc, _canonical=True)

    def evaluate(self, assignment: Mapping):
        """Exact evaluation: every variable present must be assigned."""
        total = _ZERO
        for m, c in self.terms.items():
            val = c
            for v, e in m:
                try:
                    val *= Fraction(assignment[v]) ** e
                except KeyError:
                    raise KeyError("no value assigned to %r" % (v,)) from None
            total += val
        return total

    def shift_fibers(self, offset):
        """Relabel jet fibers a -> a + offset (used by PDE products)."""
        if offset == 0:
            return self
        sub = {
            v: Polynomial.variable(Variable.jet(v.fiber + offset, v.index))
            for v in self.jet_variables()
        }
        return self.substitute(sub)

    # -- normalization for witnesses ----------------------------------------

    def monic(self):
        lead = self.leading()
        if lead is None:
            return self
        return self * (1 / lead[1])

    def primitive(self):
        """Divide by rational content; fix leading coefficient positive."""
        if not self.terms:
            return self
        coeffs = list(self.terms.values())
        num_gcd = 0
        den_lcm = 1
        for c in coeffs:
            num_gcd = math.gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
        factor = Fraction(num_gcd, den_lcm)
        p = self * (1 / factor)
        if p.leading()[1] < 0:
            p = -p
        return p

    # -- Weil / eps helpers --------------------------------------------------

    def eps_decompose(self):
        """Split terms by their eps-part: {eps-monomial: coefficient Polynomial}."""
        out = {}
        for m, c in self.terms.items():
            eps_part = tuple((v, e) for v, e in m if v.is_eps)
            rest = tuple((v, e) for v, e in m if not v.is_eps)
            bucket = out.setdefault(eps_part, {})
            bucket[rest] = bucket.get(rest, _ZERO) + c
        return {
            eps: Polynomial({m: c for m, c in bucket.items() if c}, _canonical=True)
            for eps, bucket in out.items()
            if any(bucket.values())
        }

    def set_eps_zero(self):
        """Ring retraction: delete every term containing an eps variable."""
        kept = {m: c for m, c in self.terms.items() if not any(v.is_eps for v, _ in m)}
        return Polynomial(kept, _canonical=True)

    def __repr__(self):
        return "Polynomial(%s)" % poly_to_str(self)


_P_ZERO = Polynomial({}, _canonical=True)
_P_ONE = Polynomial({(): _ONE}, _canonical=True)


def exact_div(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact polynomial division p / q (raises if q does not divide p).

    Leading-term cancellation in graded-lex order; used by fraction-free
    elimination where divisibility is guaranteed.
    """
    if not q:
        raise ZeroDivisionError("division by the zero polynomial")
    quot = {}
    rem = p
    qm, qc = q.leading()
    while rem:
        rm, rc = rem.leading()
        if not mono_divides(qm, rm):
            raise ValueError("exact_div: %r does not divide %r" % (q, p))
        m = mono_div(rm, qm)
        c = rc / qc
        quot[m] = quot.get(m, _ZERO) + c
        rem = rem - q * Polynomial({m: c}, _canonical=True)
    return Polynomial(quot)


@dataclass(frozen=True)
class WeilAlgebraDescriptor:
    """Truncated polynomial algebra on ``num_generators`` nilpotent eps
    generators, with all products of more than ``order`` generators zero
    (total-degree ideal).  ``order`` = 0 kills every eps."""

    num_generators: int
    order: int

    def __post_init__(self):
        if self.num_generators < 0 or self.order < 0:
            raise ValueError("Weil descriptor needs num_generators >= 0 and order >= 0")

    def generators(self, layer=0):
        return [Variable.eps(j, layer) for j in range(self.num_generators)]


def weil_reduce(p: Polynomial, w: WeilAlgebraDescriptor) -> Polynomial:
    """Quotient by the (k+1)-st power of the eps ideal: drop every monomial of
    total eps-degree > w.order (across all layers).  Idempotent."""
    kept = {}
    for m, c in p.terms.items():
        if sum(e for v, e in m if v.is_eps) <= w.order:
            kept[m] = c
    return Polynomial(kept, _canonical=True)


def poly_partial(p: Polynomial, v: Variable) -> Polynomial:
    """Formal partial derivative (module-level alias of ``Polynomial.partial``)."""
    return p.partial(v)


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q


def taylor_shift(f: Polynomial, w: WeilAlgebraDescriptor, layer=0) -> Polynomial:
    """Truncated substitution x_j -> x_j + eps_j for every base variable:

        sum_{|I| <= k} (1/I!) (d^I f) eps^I,

    weil-reduced at order k.  ``f`` must contain only base variables, and the
    descriptor pairs generator eps_j with base variable x_j.
    """
    bad = [v for v in f.variables() if not v.is_base]
    if bad:
        raise ValueError("taylor_shift input must be a base-variable polynomial; found %r" % (bad[0],))
    n, k = w.num_generators, w.order
    out = dict(f.terms)
    derivs = {MultiIndex.zero(n): f}
    for deg in range(1, k + 1):
        for idx in _indices_of_degree(n, deg):
            j = next(d for d in range(n) if idx[d] > 0)
            g = derivs[idx - MultiIndex.unit(j, n)].partial(Variable.base(j))
            derivs[idx] = g
            if not g:
                continue
            coeff = Fraction(1, idx.factorial())
            eps_mono = tuple(
                (Variable.eps(d, layer), idx[d]) for d in range(n) if idx[d]
            )
            scaled = _kernel.scale_terms(g.terms, coeff)
            shifted = {_kernel.mono_mul(m, eps_mono): c for m, c in scaled.items()}
            out = _kernel.add_terms(out, shifted)
    return Polynomial(out, _canonical=True)


# -- rendering ---------------------------------------------------------------


def _format_coeff(c):
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def poly_to_str(p: Polynomial, base_names=None, fiber_names=None) -> str:
    """Canonical text rendering: terms descending in graded-lex order,
    DSL-parseable (``*`` products, ``^`` powers, ``p/q`` coefficients)."""
    if not p.terms:
        return "0"
    pieces = []
    for m, c in p.sorted_terms():
        factors = []
        for v, e in m:
            nm = v.name(base_names, fiber_names)
            factors.append(nm if e == 1 else "%s^%d" % (nm, e))
        body = "*".join(factors)
        if not body:
            frag = _format_coeff(abs(c))
        elif abs(c) == 1:
            frag = body
        else:
            frag = "%s*%s" % (_format_coeff(abs(c)), body)
        sign = "-" if c < 0 else "+"
        pieces.append((sign, frag))
    first_sign, first_frag = pieces[0]
    text = ("-" if first_sign == "-" else "") + first_frag
    for sign, frag in pieces[1:]:
        text += " %s %s" % (sign, frag)
    return text
