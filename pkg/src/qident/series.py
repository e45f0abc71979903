"""Exact truncated Laurent series in q over arbitrary-precision rationals.

A series is a finite set of (exponent, coefficient) pairs together with a
*reliable order*: every coefficient of q^e with e <= order is stored exactly
(a missing exponent means the coefficient is zero), while nothing is claimed
about larger exponents.  Exponents may be negative.  ``order=None`` marks an
honest Laurent polynomial whose coefficients are exact at every exponent.

Coefficients are kept as plain Python ints whenever possible and only promoted
to an exact rational type when a division leaves a remainder.  The rational
type is gmpy2's GMP-backed ``mpq`` when available, with ``fractions.Fraction``
as the pure-Python fallback; both print identically ("p" or "p/q"), so results
are byte-for-byte independent of the backend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

_BACKENDS = {"fraction": Fraction}
try:
    from gmpy2 import mpq as _mpq

    _BACKENDS["gmpy2"] = _mpq
except ImportError:  # pragma: no cover - environment without gmpy2
    _mpq = None

_backend_name = os.environ.get("QIDENT_RATIONAL", "")
if _backend_name not in _BACKENDS:
    _backend_name = "gmpy2" if _mpq is not None else "fraction"
_rational = _BACKENDS[_backend_name]


def rational_backend():
    """Name of the active exact-rational backend ("gmpy2" or "fraction")."""
    return _backend_name


def use_rational_backend(name):
    """Switch the rational backend; returns the previous name.

    Exists for the benchmark script and backend-equivalence tests.  Values
    produced under different backends interoperate (both are rational numbers)
    and format identically.
    """
    global _backend_name, _rational
    if name not in _BACKENDS:
        raise ValueError(f"unknown rational backend {name!r}")
    previous = _backend_name
    _backend_name = name
    _rational = _BACKENDS[name]
    return previous


def rat_div(a, b):
    """Exact a/b, returned as int when the quotient is integral."""
    if b == 0:
        raise ZeroDivisionError("division by zero coefficient")
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r == 0:
            return q
    value = _rational(a) / _rational(b)
    if value.denominator == 1:
        return int(value)
    return value


def rat_from_str(text):
    """Parse "p" or "p/q" into an exact coefficient (int when integral)."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return rat_div(int(num.strip()), int(den.strip()))
    return int(text)


def rat_str(value):
    """Canonical string form of a coefficient: "p" or "p/q"."""
    return str(value)


class SeriesError(Exception):
    """Base class for series-domain failures."""


class ZeroInversionError(SeriesError, ZeroDivisionError):
    """Inversion of the zero series (or a factor that is exactly zero)."""


class InsufficientPrecisionError(SeriesError):
    """A comparison or evaluation was requested beyond a reliable order."""


@dataclass(frozen=True)
class Mismatch:
    """First disagreeing coefficient found by ``first_mismatch``."""

    exponent: int
    left: object
    right: object


def _min_order(*orders):
    finite = [o for o in orders if o is not None]
    return min(finite) if finite else None


class LaurentSeries:
    """Sparse exact Laurent series with a tracked reliable order."""

    __slots__ = ("terms", "order")

    def __init__(self, terms, order, _trusted=False):
        if _trusted:
            self.terms = terms
        else:
            if order is None:
                self.terms = {e: c for e, c in terms.items() if c != 0}
            else:
                self.terms = {
                    e: c for e, c in terms.items() if c != 0 and e <= order
                }
        self.order = order

    # ---------------------------------------------------------------- factories

    @classmethod
    def zero(cls, order=None):
        return cls({}, order, _trusted=True)

    @classmethod
    def one(cls, order=None):
        return cls({0: 1}, order)

    @classmethod
    def monomial(cls, coeff, exponent, order=None):
        return cls({exponent: coeff}, order)

    @classmethod
    def from_terms(cls, pairs, order=None):
        terms = {}
        for e, c in pairs:
            c = terms.get(e, 0) + c
            if c == 0:
                terms.pop(e, None)
            else:
                terms[e] = c
        return cls(terms, order)

    # ---------------------------------------------------------------- queries

    @property
    def is_zero(self):
        return not self.terms

    @property
    def valuation(self):
        """Smallest stored exponent; None for the zero series (= +infinity)."""
        return min(self.terms) if self.terms else None

    @property
    def degree(self):
        return max(self.terms) if self.terms else None

    def coeff(self, exponent):
        if self.order is not None and exponent > self.order:
            raise InsufficientPrecisionError(
                f"coefficient of q^{exponent} beyond reliable order {self.order}"
            )
        return self.terms.get(exponent, 0)

    def coeffs_through(self, upto, start=None):
        """Coefficients [start..upto] as a list (start defaults to valuation/0)."""
        if start is None:
            v = self.valuation
            start = 0 if v is None or v > 0 else v
        return [self.coeff(e) for e in range(start, upto + 1)]

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self.terms == other.terms and self.order == other.order

    __hash__ = None

    def __bool__(self):
        return bool(self.terms)

    # ---------------------------------------------------------------- arithmetic

    def __neg__(self):
        return LaurentSeries(
            {e: -c for e, c in self.terms.items()}, self.order, _trusted=True
        )

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        order = _min_order(self.order, other.order)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        for e, c in b.items():
            s = out.get(e, 0) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        if order is not None:
            out = {e: c for e, c in out.items() if e <= order}
        return LaurentSeries(out, order, _trusted=True)

    def __sub__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        va, vb = self.valuation, other.valuation
        candidates = []
        if self.order is not None and vb is not None:
            candidates.append(self.order + vb)
        if other.order is not None and va is not None:
            candidates.append(other.order + va)
        order = min(candidates) if candidates else None
        if not self.terms or not other.terms:
            return LaurentSeries.zero(order)
        terms = _mul_terms(self.terms, other.terms, order)
        return LaurentSeries(terms, order, _trusted=True)

    def scaled(self, coeff):
        """Multiply by a scalar coefficient."""
        if coeff == 0:
            return LaurentSeries.zero(self.order)
        return LaurentSeries(
            {e: c * coeff for e, c in self.terms.items()}, self.order, _trusted=True
        )

    def shifted(self, exponent):
        """Multiply by q^exponent (shifts the reliable order as well)."""
        order = None if self.order is None else self.order + exponent
        return LaurentSeries(
            {e + exponent: c for e, c in self.terms.items()}, order, _trusted=True
        )

    def truncated(self, order):
        """Restrict to exponents <= order (never extends reliability)."""
        if order is None or (self.order is not None and order >= self.order):
            return self
        return LaurentSeries(
            {e: c for e, c in self.terms.items() if e <= order}, order, _trusted=True
        )

    def inverse(self, order=None):
        """Multiplicative inverse, reliable to order(a) - 2*val(a).

        An exact polynomial (order None) has no canonical truncation, so a
        target ``order`` for the *result* must be supplied unless the input is
        a lone monomial (whose inverse is again exact).
        """
        if not self.terms:
            raise ZeroInversionError("cannot invert the zero series")
        v = self.valuation
        if len(self.terms) == 1:
            c = self.terms[v]
            inv_order = self.order - 2 * v if self.order is not None else order
            return LaurentSeries.monomial(rat_div(1, c), -v, inv_order)
        if self.order is None:
            if order is None:
                raise SeriesError(
                    "inverse of an exact polynomial needs an explicit order"
                )
            return self.truncated(order + 2 * v).inverse()
        if order is not None:
            return self.truncated(order + 2 * v).inverse()
        # u = q^-v * self is a unit known to order M; long division inverts it.
        M = self.order - v
        u = [0] * (M + 1)
        for e, c in self.terms.items():
            u[e - v] = c
        c0 = u[0]
        w = [0] * (M + 1)
        w[0] = rat_div(1, c0)
        for k in range(1, M + 1):
            acc = 0
            for j in range(1, k + 1):
                uj = u[j]
                if uj:
                    acc += uj * w[k - j]
            w[k] = rat_div(-acc, c0) if acc else 0
        inv_order = self.order - 2 * v
        terms = {k - v: c for k, c in enumerate(w) if c != 0}
        return LaurentSeries(terms, inv_order, _trusted=True)

    # ---------------------------------------------------------------- display

    def __repr__(self):
        return f"LaurentSeries({self})"

    def __str__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for e in sorted(self.terms):
                c = self.terms[e]
                sign = "-" if (c < 0) else "+"
                mag = -c if c < 0 else c
                if e == 0:
                    mono = f"{mag}"
                else:
                    qpow = "q" if e == 1 else f"q^{e}"
                    mono = qpow if mag == 1 else f"{mag}*{qpow}"
                parts.append((sign, mono))
            first_sign, first = parts[0]
            body = ("-" if first_sign == "-" else "") + first
            for sign, mono in parts[1:]:
                body += f" {sign} {mono}"
        if self.order is None:
            return body
        return f"{body} + O(q^{self.order + 1})"


def _mul_terms(ta, tb, cap):
    """Cauchy product of two term dicts, dropping exponents above cap."""
    if len(ta) * len(tb) <= 64:
        out = {}
        for ea, ca in ta.items():
            for eb, cb in tb.items():
                e = ea + eb
                if cap is not None and e > cap:
                    continue
                s = out.get(e, 0) + ca * cb
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return out
    va, da = min(ta), max(ta)
    vb, db = min(tb), max(tb)
    if cap is not None:
        da = min(da, cap - vb)
        db = min(db, cap - va)
    la, lb = da - va + 1, db - vb + 1
    if lb > la:
        ta, tb = tb, ta
        va, vb, la, lb = vb, va, lb, la
    A = [0] * la
    for e, c in ta.items():
        i = e - va
        if i < la:
            A[i] = c
    B = [0] * lb
    for e, c in tb.items():
        i = e - vb
        if i < lb:
            B[i] = c
    total = [0] * (la + lb - 1)
    if cap is None:
        top = la + lb - 1
    else:
        top = min(la + lb - 1, cap - va - vb + 1)
    for i, ai in enumerate(A):
        if not ai:
            continue
        lim = min(lb, top - i)
        for j in range(lim):
            bj = B[j]
            if bj:
                total[i + j] += ai * bj
    base = va + vb
    return {base + k: c for k, c in enumerate(total) if c != 0}


# -------------------------------------------------------------- module-level ops


def ls_monomial(coeff, exponent, order):
    """Series coeff*q^exponent truncated at ``order``."""
    return LaurentSeries.monomial(coeff, exponent, order)


def ls_add(a, b):
    return a + b


def ls_mul(a, b):
    return a * b


def ls_invert(a):
    return a.inverse()


def first_mismatch(a, b, upto):
    """First exponent <= upto where a and b disagree, or None if they agree.

    Raises InsufficientPrecisionError when either side is not reliable through
    ``upto`` -- precision shortfalls must never masquerade as mismatches.
    """
    for s in (a, b):
        if s.order is not None and s.order < upto:
            raise InsufficientPrecisionError(
                f"comparison up to q^{upto} but reliable order is {s.order}"
            )
    exps = set(a.terms) | set(b.terms)
    for e in sorted(exps):
        if e > upto:
            break
        ca, cb = a.terms.get(e, 0), b.terms.get(e, 0)
        if ca != cb:
            return Mismatch(e, ca, cb)
    return None


def ls_eq_up_to(a, b, upto):
    """True iff every coefficient of q^e, e <= upto, agrees exactly."""
    return first_mismatch(a, b, upto) is None
