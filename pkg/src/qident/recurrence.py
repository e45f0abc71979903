"""Two- and three-deep recursions with series-valued initial conditions.

Sequences are unrolled into windows of exact truncated series, extended
backward by solving for the trailing term, driven to their coefficientwise
limits, and combined into Casoratians and connection coefficients -- the
machinery that links a determinant sequence to its finitization basis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .series import (
    LaurentSeries,
    SeriesError,
    first_mismatch,
    ls_eq_up_to,
)
from .qproducts import eval_prefactor


class RecurrenceError(SeriesError):
    """Backward extension or limit detection failed."""


class DivergenceError(RecurrenceError):
    """A sequence did not stabilize within its step budget."""


@dataclass(frozen=True)
class CoeffMonomial:
    """coeff * q^(slope*n + intercept), one summand of a recursion coefficient."""

    coeff: object
    slope: int = 0
    intercept: int = 0


class CoeffFunc:
    """A recursion coefficient: sum of monomials with index-affine exponents."""

    __slots__ = ("monomials",)

    def __init__(self, monomials):
        self.monomials = tuple(monomials)

    def at(self, n):
        """Exact Laurent polynomial value at integer index n."""
        return LaurentSeries.from_terms(
            [(mo.slope * n + mo.intercept, mo.coeff) for mo in self.monomials]
        )

    def __repr__(self):
        return f"CoeffFunc({list(self.monomials)!r})"


@dataclass(frozen=True)
class RecurrenceSpec:
    """X_n = sum_i coeffs[i-1](n) * X_{n-i} with ``order`` consecutive inits."""

    order: int
    coeffs: tuple
    inits: dict

    def __post_init__(self):
        if self.order not in (2, 3):
            raise ValueError("only order-2 and order-3 recursions occur here")
        if len(self.coeffs) != self.order:
            raise ValueError("need exactly `order` coefficient functions")
        keys = sorted(self.inits)
        if len(keys) != self.order or keys != list(range(keys[0], keys[0] + self.order)):
            raise ValueError("inits must cover `order` consecutive indices")

    @property
    def init_lo(self):
        return min(self.inits)

    @property
    def init_hi(self):
        return max(self.inits)

    def step(self, values, n):
        """Value at n from the `order` predecessors stored in ``values``."""
        acc = None
        for i, cf in enumerate(self.coeffs, start=1):
            term = cf.at(n) * values[n - i]
            acc = term if acc is None else acc + term
        return acc


class SequenceWindow:
    """Contiguous values of a recurrence, indexable like the math notation."""

    __slots__ = ("spec", "values", "lo", "hi")

    def __init__(self, spec, values):
        self.spec = spec
        self.values = dict(values)
        self.lo = min(self.values)
        self.hi = max(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def covers(self, lo, hi):
        return self.lo <= lo and hi <= self.hi


def unroll_forward(spec, up_to, order=None):
    """Window of values through index up_to (inits truncated to ``order``)."""
    if up_to < spec.init_hi:
        up_to = spec.init_hi
    values = {
        k: (v if order is None else v.truncated(order))
        for k, v in spec.inits.items()
    }
    for n in range(spec.init_hi + 1, up_to + 1):
        values[n] = spec.step(values, n)
    return SequenceWindow(spec, values)


def extend_backward(window, down_to):
    """Extend a window to lower indices by solving for the trailing term.

    X_{n-order} = (X_n - sum_{i<order} c_i(n) X_{n-i}) / c_order(n); each step
    needs the trailing coefficient to be an invertible Laurent polynomial.
    """
    if down_to >= window.lo:
        return window
    spec = window.spec
    values = dict(window.values)
    for target in range(window.lo - 1, down_to - 1, -1):
        n = target + spec.order
        acc = values[n]
        for i, cf in enumerate(spec.coeffs[:-1], start=1):
            acc = acc - cf.at(n) * values[n - i]
        trailing = spec.coeffs[-1].at(n)
        if trailing.is_zero:
            raise RecurrenceError(
                f"trailing coefficient vanishes at n={n}; cannot extend backward"
            )
        ref = acc.order if acc.order is not None else None
        values[target] = acc * trailing.inverse(order=ref)
    return SequenceWindow(spec, values)


def window(spec, lo, hi, order=None):
    """Convenience: unroll forward to hi, then extend backward to lo."""
    w = unroll_forward(spec, hi, order=order)
    if lo < w.lo:
        w = extend_backward(w, lo)
    return w


def sequence_limit(spec, order, guard=3, budget=None):
    """Coefficientwise limit of the sequence, reliable to ``order``.

    Stops once val(X_n - X_{n-1}) > order for ``guard`` consecutive steps;
    failing to stabilize within the step budget signals a divergent (i.e.
    mis-encoded) recursion.
    """
    if budget is None:
        budget = 4 * order + 50
    values = {k: v.truncated(order) for k, v in spec.inits.items()}
    n = spec.init_hi
    prev = values[n]
    quiet = 0
    for _ in range(budget):
        n += 1
        cur = spec.step(values, n).truncated(order)
        values[n] = cur
        values.pop(n - spec.order, None)
        diff = cur - prev
        v = diff.valuation
        quiet = quiet + 1 if (v is None or v > order) else 0
        if quiet >= guard:
            return cur
        prev = cur
    raise DivergenceError(
        f"no coefficientwise limit within {budget} steps at order {order}"
    )


def casoratian2(p, q, m):
    """P_m Q_{m-1} - P_{m-1} Q_m."""
    return p[m] * q[m - 1] - p[m - 1] * q[m]


def casoratian3(p, q, r, m):
    """3x3 determinant with rows (P, Q, R) at indices m-1, m, m+1."""
    rows = [[p[k], q[k], r[k]] for k in (m - 1, m, m + 1)]
    return _det3(rows)


def _det2(a, b, c, d):
    return a * d - b * c


def _det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * _det2(e, f, h, i) - b * _det2(d, f, g, i) + c * _det2(d, e, g, h)


@dataclass(frozen=True)
class ConnectionCoeffs:
    """Coefficients expressing a shifted determinant sequence in the P/Q(/R) basis."""

    m: int
    lam: LaurentSeries
    mu: LaurentSeries
    nu: LaurentSeries = None

    def combo(self, limits):
        """lam*limits[0] + mu*limits[1] (+ nu*limits[2])."""
        out = self.lam * limits[0] + self.mu * limits[1]
        if self.nu is not None:
            out = out + self.nu * limits[2]
        return out


def _check_closed_form(computed, closed_form, m, label):
    expected = eval_prefactor(closed_form, m, computed.order)
    upto = min(x for x in (computed.order, expected.order) if x is not None)
    mm = first_mismatch(computed, expected, upto)
    if mm is not None:
        raise RecurrenceError(
            f"{label} at m={m} disagrees with its closed form at q^{mm.exponent}: "
            f"{mm.left} vs {mm.right}"
        )


def connection_coeffs2(p, q, d0, d1, m, closed_form=None):
    """Solve lam*P_k + mu*Q_k = (d0, d1) at k = m, m+1.

    ``closed_form``, when given, is the printed Casoratian P_mQ_{m-1}-P_{m-1}Q_m
    evaluated at this m and cross-checked against the computed one.
    """
    if closed_form is not None:
        _check_closed_form(casoratian2(p, q, m), closed_form, m, "Casoratian")
    den = p[m] * q[m + 1] - p[m + 1] * q[m]
    if den.is_zero:
        raise RecurrenceError(f"degenerate Casoratian at m={m}")
    inv = den.inverse()
    lam = (d0 * q[m + 1] - d1 * q[m]) * inv
    mu = (d1 * p[m] - d0 * p[m + 1]) * inv
    return ConnectionCoeffs(m, lam, mu)


def connection_coeffs3(p, q, r, d_vals, m, closed_form=None):
    """Solve the 3x3 system with data d_vals at rows m-1, m, m+1."""
    if closed_form is not None:
        _check_closed_form(casoratian3(p, q, r, m), closed_form, m, "Casoratian")
    rows = [(p[k], q[k], r[k]) for k in (m - 1, m, m + 1)]
    den = _det3(rows)
    if den.is_zero:
        raise RecurrenceError(f"singular connection system at m={m}")
    inv = den.inverse()
    outs = []
    for col in range(3):
        replaced = [
            [d_vals[i] if j == col else rows[i][j] for j in range(3)]
            for i in range(3)
        ]
        outs.append(_det3(replaced) * inv)
    return ConnectionCoeffs(m, outs[0], outs[1], outs[2])


@dataclass(frozen=True)
class RecurrenceCheck:
    """Outcome of re-checking a window against a candidate recursion."""

    holds: bool
    first_failing_m: int = None
    residual_valuation: int = None


def verify_recurrence_holds(win, candidate, m_range):
    """Does X_m - sum_i c_i(m) X_{m-i} vanish exactly for every m in range?"""
    for m in m_range:
        residual = win[m] - candidate.step(win.values, m)
        if not residual.is_zero:
            return RecurrenceCheck(False, m, residual.valuation)
    return RecurrenceCheck(True)
