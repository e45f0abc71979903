"""Banded determinants D_n(z), their bivariate limit F(z), and checks.

The band has -1 on the subdiagonal and z-affine entries (with row-affine
q-exponents) on the diagonal and one or two superdiagonals.  Expanding along
the last row turns evaluation into a three- or four-term recursion in n; the
full Laplace expansion is kept only as a small-n oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

from .series import LaurentSeries, SeriesError
from .recurrence import DivergenceError


class DeterminantError(SeriesError):
    """Oversize oracle request or non-stabilizing limit."""


@dataclass(frozen=True)
class BandMonomial:
    """coeff * q^(slope*i + intercept) * z^zdeg, one summand of a band entry."""

    coeff: object
    slope: int = 0
    intercept: int = 0
    zdeg: int = 0


class BandEntry:
    """A matrix entry, affine in z, with row-index-affine q-exponents."""

    __slots__ = ("monomials",)

    def __init__(self, monomials):
        self.monomials = tuple(monomials)
        if any(mo.zdeg not in (0, 1) for mo in self.monomials):
            raise ValueError("band entries are affine in z")

    def at_row(self, i, zdeg, order):
        """BivariateSeries value at 1-based row index i."""
        parts = [[] for _ in range(min(1, zdeg) + 1)]
        for mo in self.monomials:
            if mo.zdeg <= zdeg:
                parts[mo.zdeg].append((mo.slope * i + mo.intercept, mo.coeff))
        coeffs = [LaurentSeries.from_terms(p, order) for p in parts]
        while len(coeffs) <= zdeg:
            coeffs.append(LaurentSeries.zero(order))
        return BivariateSeries(coeffs)

    def at_row_subst(self, i, k, order=None):
        """Laurent value at row i with z replaced by q^k."""
        return LaurentSeries.from_terms(
            [
                (mo.slope * i + mo.intercept + k * mo.zdeg, mo.coeff)
                for mo in self.monomials
            ],
            order,
        )


@dataclass(frozen=True)
class BandSpec:
    """Diagonal, first and optional second superdiagonal; subdiagonal is -1."""

    diag: BandEntry
    super1: BandEntry
    super2: BandEntry = None

    @property
    def bandwidth(self):
        return 3 if self.super2 is not None else 2


class BivariateSeries:
    """A z-polynomial with LaurentSeries coefficients sharing one order."""

    __slots__ = ("zcoeffs",)

    def __init__(self, zcoeffs):
        zcoeffs = list(zcoeffs)
        orders = [c.order for c in zcoeffs if c.order is not None]
        if orders:
            order = min(orders)
            zcoeffs = [c.truncated(order) for c in zcoeffs]
        self.zcoeffs = zcoeffs

    @classmethod
    def constant(cls, series, zdeg):
        out = [series] + [LaurentSeries.zero(series.order) for _ in range(zdeg)]
        return cls(out)

    @property
    def zdeg(self):
        return len(self.zcoeffs) - 1

    @property
    def order(self):
        return self.zcoeffs[0].order if self.zcoeffs else None

    def __eq__(self, other):
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self.zcoeffs == other.zcoeffs

    __hash__ = None

    def __add__(self, other):
        n = max(self.zdeg, other.zdeg)
        a = self._padded(n)
        b = other._padded(n)
        return BivariateSeries([x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        n = max(self.zdeg, other.zdeg)
        a = self._padded(n)
        b = other._padded(n)
        return BivariateSeries([x - y for x, y in zip(a, b)])

    def _padded(self, zdeg):
        order = self.order
        pad = [LaurentSeries.zero(order) for _ in range(zdeg - self.zdeg)]
        return self.zcoeffs + pad

    def mul(self, other, zdeg):
        """Product truncated to z-degree ``zdeg``."""
        out = [None] * (zdeg + 1)
        for i, a in enumerate(self.zcoeffs):
            if a.is_zero and a.order is None:
                continue
            for j, b in enumerate(other.zcoeffs):
                k = i + j
                if k > zdeg:
                    break
                term = a * b
                out[k] = term if out[k] is None else out[k] + term
        orders = [c.order for c in out if c is not None and c.order is not None]
        if orders:
            order = min(orders)
        else:
            # no surviving product term: fall back to the operands' orders
            orders = [o for o in (self.order, other.order) if o is not None]
            order = min(orders) if orders else None
        return BivariateSeries(
            [LaurentSeries.zero(order) if c is None else c for c in out]
        )

    def scale_z(self, power):
        """Substitute z -> z*q^power (the k-th z-coefficient shifts by k*power)."""
        return BivariateSeries(
            [c.shifted(k * power).truncated(self.order) for k, c in enumerate(self.zcoeffs)]
        )

    def substitute(self, k):
        """Evaluate at z = q^k as a LaurentSeries."""
        out = LaurentSeries.zero(self.order)
        for j, c in enumerate(self.zcoeffs):
            out = out + c.shifted(k * j).truncated(self.order)
        return out

    def truncate_z(self, zdeg):
        if zdeg >= self.zdeg:
            return self
        return BivariateSeries(self.zcoeffs[: zdeg + 1])

    def truncate_order(self, order):
        return BivariateSeries([c.truncated(order) for c in self.zcoeffs])

    @property
    def is_zero(self):
        return all(c.is_zero for c in self.zcoeffs)

    def valuation(self):
        vals = [c.valuation for c in self.zcoeffs if c.valuation is not None]
        return min(vals) if vals else None

    def __repr__(self):
        parts = [f"z^{k}*({c})" for k, c in enumerate(self.zcoeffs)]
        return "BivariateSeries(" + " + ".join(parts) + ")"


def det_band_recursive(spec, n, zdeg, order):
    """D_n(z) via the last-row expansion recursion.

    D_k = d_k D_{k-1} + s_{k-1} D_{k-2} (+ t_{k-2} D_{k-3}), starting from
    D_0 = 1 and D_{<0} = 0, where d_i, s_i, t_i are the band entries at row i.
    """
    if n < 0:
        return BivariateSeries.constant(LaurentSeries.zero(order), zdeg)
    values = _iter_band(spec, zdeg, order)
    d = None
    for _ in range(n + 1):
        d = next(values)
    return d.truncate_order(order)


def _iter_band(spec, zdeg, order):
    """Yields D_0, D_1, D_2, ... for the band recursion."""
    zero = BivariateSeries.constant(LaurentSeries.zero(order), zdeg)
    prev3, prev2 = zero, zero
    prev1 = BivariateSeries.constant(LaurentSeries.one(order), zdeg)
    yield prev1
    k = 0
    while True:
        k += 1
        cur = spec.diag.at_row(k, zdeg, order).mul(prev1, zdeg)
        if k >= 2:
            cur = cur + spec.super1.at_row(k - 1, zdeg, order).mul(prev2, zdeg)
        if spec.super2 is not None and k >= 3:
            cur = cur + spec.super2.at_row(k - 2, zdeg, order).mul(prev3, zdeg)
        yield cur
        prev3, prev2, prev1 = prev2, prev1, cur


def band_sequence_at(spec, k, n, order):
    """D_0(q^k), ..., D_n(q^k) evaluated as a plain recurrence in q."""
    out = [LaurentSeries.one(order)]
    prev3 = prev2 = LaurentSeries.zero(order)
    prev1 = out[0]
    for i in range(1, n + 1):
        cur = spec.diag.at_row_subst(i, k, order) * prev1
        if i >= 2:
            cur = cur + spec.super1.at_row_subst(i - 1, k, order) * prev2
        if spec.super2 is not None and i >= 3:
            cur = cur + spec.super2.at_row_subst(i - 2, k, order) * prev3
        out.append(cur)
        prev3, prev2, prev1 = prev2, prev1, cur
    return out


DET_DIRECT_LIMIT = 8


def det_direct(spec, n, zdeg, order):
    """Full Laplace expansion of the n x n banded matrix (small-n oracle)."""
    if n > DET_DIRECT_LIMIT:
        raise DeterminantError(
            f"direct expansion capped at n={DET_DIRECT_LIMIT}, got {n}"
        )
    zero = BivariateSeries.constant(LaurentSeries.zero(order), zdeg)
    one = BivariateSeries.constant(LaurentSeries.one(order), zdeg)
    minus_one = BivariateSeries.constant(
        LaurentSeries.monomial(-1, 0, order), zdeg
    )

    def entry(i, j):
        # 1-based row/column of the banded matrix
        if j == i:
            return spec.diag.at_row(i, zdeg, order)
        if j == i + 1:
            return spec.super1.at_row(i, zdeg, order)
        if j == i + 2 and spec.super2 is not None:
            return spec.super2.at_row(i, zdeg, order)
        if j == i - 1:
            return minus_one
        return None

    minors = {}

    def expand(rows, cols):
        if not rows:
            return one
        key = (rows[0], cols)
        hit = minors.get(key)
        if hit is not None:
            return hit
        i = rows[0]
        total = None
        for pos, j in enumerate(cols):
            e = entry(i, j)
            if e is None or (e.is_zero and e.order is None):
                continue
            minor = expand(rows[1:], cols[:pos] + cols[pos + 1 :])
            term = e.mul(minor, zdeg)
            if pos % 2 == 1:
                term = zero - term
            total = term if total is None else total + term
        total = zero if total is None else total
        minors[key] = total
        return total

    out = expand(tuple(range(1, n + 1)), tuple(range(1, n + 1)))
    return out.truncate_order(order)


def f_from_determinant(spec, zdeg, order, guard=3, budget=None):
    """Coefficientwise limit F(z) of D_n(z), truncated to (zdeg, order)."""
    if budget is None:
        budget = 4 * order + 50
    values = _iter_band(spec, zdeg, order)
    prev = next(values)
    quiet = 0
    for _ in range(budget):
        cur = next(values)
        diff = cur - prev
        v = diff.valuation()
        quiet = quiet + 1 if (v is None or v > order) else 0
        if quiet >= guard:
            return cur.truncate_order(order)
        prev = cur
    raise DivergenceError(
        f"determinant limit did not stabilize within {budget} steps at order {order}"
    )


def substitute_z(f, k):
    """F(q^k) = sum_j a_j q^{kj}; the caller guarantees zdeg suffices."""
    return f.substitute(k)


def functional_equation_check(f, combination, order):
    """Does F(z) - sum_j alpha_j(z) * F(z q^{b_j}) vanish up to (zdeg, order)?

    ``combination`` is a list of (alpha, b) pairs with alpha a z-affine
    BivariateSeries and b a positive integer q-power scale.
    """
    residual = f
    for alpha, b in combination:
        residual = residual - alpha.mul(f.scale_z(b), f.zdeg)
    residual = residual.truncate_z(f.zdeg)
    for c in residual.zcoeffs:
        if c.order is not None and c.order < order:
            raise SeriesError(
                f"functional equation checked to q^{order} but residual is "
                f"only reliable to q^{c.order}"
            )
        if any(e <= order for e in c.terms):
            return False
    return True
