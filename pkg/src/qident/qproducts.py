"""q-shifted factorials, infinite products, and m-dependent prefactors.

The building blocks here mirror how product sides are written down: an
argument is always a signed power of q, a finite length may be negative (the
quotient convention extends (a;q)_n below zero), and an infinite product is
evaluated by multiplying exactly the factors whose exponent can still touch
the requested order -- every skipped factor is 1 + O(q^{order+1}).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .series import LaurentSeries, SeriesError, ZeroInversionError, rat_div


class ProductError(SeriesError):
    """A Pochhammer factor or prefactor denominator is not invertible."""


@dataclass(frozen=True)
class QMonomial:
    """The argument ±q^exponent of a q-shifted factorial."""

    sign: int
    exponent: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.exponent < 0:
            raise ValueError("argument exponent must be >= 0")

    def __str__(self):
        e = self.exponent
        body = "1" if e == 0 else ("q" if e == 1 else f"q^{e}")
        return body if self.sign == 1 else f"-{body}"


INFINITE = None


@dataclass(frozen=True)
class PochSpec:
    """(arg; q^step)_length with length an integer or None for infinity."""

    arg: QMonomial
    step: int
    length: object = INFINITE

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be a positive integer")
        if self.length is INFINITE and self.arg.exponent < 1:
            raise ValueError(
                "infinite product needs argument exponent >= 1 to converge"
            )

    def __str__(self):
        n = "inf" if self.length is INFINITE else str(self.length)
        return f"({self.arg};q^{self.step})_{n}"


def _factor(sign, exponent, order):
    """The single factor 1 - sign*q^exponent as an exact polynomial."""
    if exponent == 0:
        c = 1 - sign
        return LaurentSeries.monomial(c, 0, order)
    return LaurentSeries.from_terms([(0, 1), (exponent, -sign)], order)


def poch_finite(spec, order):
    """(a; q^b)_n for integer n, negative n via the quotient convention.

    For n >= 0 this is prod_{k<n} (1 - s*q^{e+bk}); for n < 0 it is
    prod_{j=1..-n} (1 - s*q^{e-bj})^{-1}, which exists only while every factor
    keeps a nonzero lowest coefficient.
    """
    n = spec.length
    if n is INFINITE:
        raise ValueError("poch_finite needs a finite length")
    s, e, b = spec.arg.sign, spec.arg.exponent, spec.step
    out = LaurentSeries.one(order)
    if n >= 0:
        for k in range(n):
            exp = e + b * k
            if order is not None and exp > order and exp > 0:
                break  # remaining factors are 1 + O(q^{order+1})
            out = out * _factor(s, exp, order)
        return out
    for j in range(1, -n + 1):
        exp = e - b * j
        if s == 1 and exp == 0:
            raise ProductError(f"factor (1 - q^0) in {spec} is exactly zero")
        fac = _factor(s, exp, None)
        try:
            out = out * fac.inverse(order=order)
        except ZeroInversionError as exc:  # pragma: no cover - guarded above
            raise ProductError(str(exc)) from exc
    return out


def poch_infinite(spec, order):
    """(a; q^b)_infinity truncated at ``order``."""
    if spec.length is not INFINITE:
        raise ValueError("poch_infinite needs an infinite spec")
    if order is None:
        raise ValueError("an infinite product needs a finite truncation order")
    s, e, b = spec.arg.sign, spec.arg.exponent, spec.step
    out = LaurentSeries.one(order)
    exp = e
    while exp <= order:
        out = out * _factor(s, exp, order)
        exp += b
    return out


def poch(spec, order):
    """Dispatch on finite/infinite length."""
    if spec.length is INFINITE:
        return poch_infinite(spec, order)
    return poch_finite(spec, order)


@dataclass(frozen=True)
class ProductExpr:
    """A ratio of infinite q-shifted factorials (denominators are units)."""

    num: tuple = ()
    den: tuple = ()

    def __post_init__(self):
        for p in self.num + self.den:
            if p.length is not INFINITE:
                raise ValueError("ProductExpr entries must be infinite products")

    def key(self):
        enc = lambda ps: tuple(
            (p.arg.sign, p.arg.exponent, p.step) for p in ps
        )
        return (enc(self.num), enc(self.den))

    def __str__(self):
        num = " ".join(str(p) for p in self.num) or "1"
        if not self.den:
            return num
        return f"{num} / [{' '.join(str(p) for p in self.den)}]"


def eval_product_expr(expr, order):
    """Numerator product times the inverse of the denominator product."""
    out = LaurentSeries.one(order)
    for p in expr.num:
        out = out * poch_infinite(p, order)
    if expr.den:
        den = LaurentSeries.one(order)
        for p in expr.den:
            den = den * poch_infinite(p, order)
        out = out * den.inverse()
    return out


@dataclass(frozen=True)
class AffineForm:
    """slope*k + intercept, evaluated at an integer index."""

    slope: int = 0
    intercept: int = 0

    def __call__(self, k):
        return self.slope * k + self.intercept

    def __str__(self):
        if self.slope == 0:
            return str(self.intercept)
        head = {1: "", -1: "-", 2: "2"}.get(self.slope, str(self.slope))
        var = f"{head}k"
        if self.intercept == 0:
            return var
        return f"{var}{self.intercept:+d}"


@dataclass(frozen=True)
class PochFamily:
    """A q-shifted factorial whose length is affine in a running index."""

    arg: QMonomial
    step: int
    length: AffineForm

    def at(self, k):
        return PochSpec(self.arg, self.step, self.length(k))


@dataclass(frozen=True)
class ExponentForm:
    """Quadratic exponent a*m^2 + b*m + c with rational a, b, c.

    Exponents such as -binom(m,2) have half-integer coefficients; evaluation
    asserts integrality at each concrete m.
    """

    quadratic: object = 0
    linear: object = 0
    constant: object = 0

    def __call__(self, m):
        value = self.quadratic * m * m + self.linear * m + self.constant
        if value != int(value):
            raise ProductError(f"exponent {value} is not an integer at m={m}")
        return int(value)


SIGN_FORMS = ("+1", "-1", "(-1)^m", "(-1)^(m-1)")


def sign_at(form, m):
    if form == "+1":
        return 1
    if form == "-1":
        return -1
    if form == "(-1)^m":
        return -1 if m % 2 else 1
    if form == "(-1)^(m-1)":
        return 1 if m % 2 else -1
    raise ValueError(f"unknown sign form {form!r}")


@dataclass(frozen=True)
class PrefactorSpec:
    """sign(m) * q^{e(m)} times finite products, divided by finite products.

    Also used for Casoratian closed forms, which put finite q-shifted
    factorials and fixed polynomial units in the numerator (e.g. the
    -q^{m-1}(q;q^2)_{m-1} and -q^{3m-1}(1+q) shapes).
    """

    sign: str = "+1"
    exponent: ExponentForm = field(default_factory=ExponentForm)
    num_pochs: tuple = ()  # PochFamily, length affine in m
    den_pochs: tuple = ()
    num_scalars: tuple = ()  # exact polynomial units, as LaurentSeries
    den_scalars: tuple = ()

    def valuation_bound(self, m):
        """Lower bound for the valuation of the evaluated prefactor.

        Positive-length factors and the fixed scalar units all have valuation
        zero; a negative-length factor 1/(1 - s*q^{e-bj}) has valuation
        max(0, bj - e), which shifts the result down when it sits in the
        denominator and is ignored (safe for a lower bound) in the numerator.
        """
        v = self.exponent(m)
        for fam in self.den_pochs:
            n = fam.length(m)
            if n < 0:
                v -= sum(
                    max(0, fam.step * j - fam.arg.exponent)
                    for j in range(1, -n + 1)
                )
        return v


def eval_prefactor(p, m, order):
    """Evaluate a PrefactorSpec at integer m, reliable to ``order``."""
    out = LaurentSeries.monomial(sign_at(p.sign, m), p.exponent(m), order)
    for s in p.num_scalars:
        out = out * s.truncated(order)
    for fam in p.num_pochs:
        out = out * poch_finite(fam.at(m), order)
    den = None
    for s in p.den_scalars:
        den = s.truncated(order) if den is None else den * s.truncated(order)
    for fam in p.den_pochs:
        f = poch_finite(fam.at(m), order)
        den = f if den is None else den * f
    if den is not None:
        if den.is_zero or den.valuation is None:
            raise ProductError("prefactor denominator is not invertible")
        out = out * den.inverse()
    return out
