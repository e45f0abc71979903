"""Recurrence unrolling, limits, Casoratians, connection coefficients."""

import pytest

from qident.qproducts import (
    ExponentForm,
    PochSpec,
    PrefactorSpec,
    ProductExpr,
    QMonomial,
    eval_product_expr,
)
from qident.recurrence import (
    CoeffFunc,
    CoeffMonomial as CM,
    ConnectionCoeffs,
    DivergenceError,
    RecurrenceError,
    RecurrenceSpec,
    casoratian2,
    casoratian3,
    connection_coeffs2,
    connection_coeffs3,
    extend_backward,
    sequence_limit,
    unroll_forward,
    verify_recurrence_holds,
    window,
)
from qident.series import LaurentSeries, ls_eq_up_to


def lpoly(pairs, order=None):
    return LaurentSeries.from_terms(pairs, order)


def cf(*monomials):
    return CoeffFunc([CM(*mo) for mo in monomials])


def schur_spec(init0, init1, order=None):
    # X_n = X_{n-1} + q^n X_{n-2}
    return RecurrenceSpec(
        order=2,
        coeffs=(cf((1, 0, 0)), cf((1, 1, 0))),
        inits={0: init0.truncated(order), 1: init1.truncated(order)},
    )


def schur_d(order=None):
    return schur_spec(lpoly([(0, 1)]), lpoly([(0, 1), (1, 1)]), order)


def schur_e(order=None):
    return schur_spec(lpoly([(0, 1)]), lpoly([(0, 1)]), order)


class TestUnroll:
    def test_schur_step(self):
        w = unroll_forward(schur_d(), 2)
        assert w[2].terms == {0: 1, 1: 1, 2: 1}

    def test_gauss_family_reproduces_printed_value(self):
        # X_n = (1+q^{n-1})X_{n-1} + q^{n-1}X_{n-2}, inits X_{-1}=1, X_0=0
        spec = RecurrenceSpec(
            order=2,
            coeffs=(cf((1, 0, 0), (1, 1, -1)), cf((1, 1, -1))),
            inits={-1: lpoly([(0, 1)]), 0: LaurentSeries.zero()},
        )
        w = unroll_forward(spec, 1)
        assert w[1].terms == {0: 1}

    def test_series_valued_init(self):
        # X_n = (1+q+q^{2n-1})X_{n-1} + (q^{2n-2}-q)X_{n-2},
        # X_{-1} = -q/(1-q), X_0 = 1  =>  X_1 = 1+q
        order = 30
        geom = lpoly([(e, 1) for e in range(order + 1)], order)
        init_m1 = lpoly([(1, -1)]) * geom
        spec = RecurrenceSpec(
            order=2,
            coeffs=(cf((1, 0, 0), (1, 0, 1), (1, 2, -1)), cf((1, 2, -2), (-1, 0, 1))),
            inits={-1: init_m1, 0: LaurentSeries.one(order)},
        )
        w = unroll_forward(spec, 1)
        assert w[1].terms == {0: 1, 1: 1}


class TestBackward:
    def test_schur_d_backward(self):
        w = extend_backward(unroll_forward(schur_d(), 1), -2)
        assert w[-1].terms == {0: 1}
        assert w[-2].is_zero

    def test_schur_e_backward(self):
        w = extend_backward(unroll_forward(schur_e(), 1), -2)
        assert w[-1].is_zero
        assert w[-2].terms == {0: 1}

    def test_noop_when_already_covered(self):
        w = unroll_forward(schur_d(), 3)
        assert extend_backward(w, 0) is w

    def test_roundtrip(self):
        w = window(schur_d(), -2, 6)
        respec = RecurrenceSpec(
            order=2,
            coeffs=w.spec.coeffs,
            inits={-2: w[-2], -1: w[-1]},
        )
        again = unroll_forward(respec, 6)
        for n in range(-2, 7):
            assert again[n] == w[n]


class TestLimit:
    def test_schur_limit_is_rogers_ramanujan_product(self):
        order = 40
        got = sequence_limit(schur_d(order), order)
        expr = ProductExpr(
            den=(
                PochSpec(QMonomial(1, 1), 5, None),
                PochSpec(QMonomial(1, 4), 5, None),
            )
        )
        assert ls_eq_up_to(got, eval_product_expr(expr, order), order)

    def test_constant_sequence(self):
        spec = RecurrenceSpec(
            order=2,
            coeffs=(cf((1, 0, 0)), cf()),
            inits={0: LaurentSeries.one(10), 1: LaurentSeries.one(10)},
        )
        assert sequence_limit(spec, 10) == LaurentSeries.one(10)

    def test_divergence_detected(self):
        # X_n = X_{n-1} + X_{n-2} never stabilizes coefficientwise
        spec = RecurrenceSpec(
            order=2,
            coeffs=(cf((1, 0, 0)), cf((1, 0, 0))),
            inits={0: LaurentSeries.one(10), 1: LaurentSeries.one(10)},
        )
        with pytest.raises(DivergenceError):
            sequence_limit(spec, 10)


def gauss_pq(order=24):
    # the order-2 pair with c1 = 1+q^{n-1}, c2 = q^{n-1}
    coeffs = (cf((1, 0, 0), (1, 1, -1)), cf((1, 1, -1)))
    p = RecurrenceSpec(
        order=2, coeffs=coeffs, inits={-1: LaurentSeries.zero(order), 0: LaurentSeries.one(order)}
    )
    q = RecurrenceSpec(
        order=2, coeffs=coeffs, inits={-1: LaurentSeries.one(order), 0: LaurentSeries.zero(order)}
    )
    return window(p, -1, 8), window(q, -1, 8)


class TestCasoratian:
    def test_two_term_at_m1(self):
        p, q = gauss_pq()
        cas = casoratian2(p, q, 1)
        assert cas.terms == {0: -1}

    def test_antisymmetry(self):
        p, _ = gauss_pq()
        assert casoratian2(p, p, 3).is_zero

    def test_three_term_printed_inits(self):
        # rows (1, 1, 1), (1-q, 1, 1+q^2), (1-q+q^2+q^4, 1+q^4, 1+q^2-q^3)
        coeffs = (
            cf((1, 0, 0), (-1, 0, 1), (-1, 0, 2)),
            cf((1, 2, 0), (-1, 0, 3), (1, 0, 2), (1, 0, 1)),
            cf((1, 0, 3)),
        )
        mk = lambda a, b, c: RecurrenceSpec(
            order=3,
            coeffs=coeffs,
            inits={0: lpoly(a), 1: lpoly(b), 2: lpoly(c)},
        )
        p = unroll_forward(mk([(0, 1)], [(0, 1), (1, -1)], [(0, 1), (1, -1), (2, 1), (4, 1)]), 3)
        q = unroll_forward(mk([(0, 1)], [(0, 1)], [(0, 1), (4, 1)]), 3)
        r = unroll_forward(mk([(0, 1)], [(0, 1), (2, 1)], [(0, 1), (2, 1), (3, -1)]), 3)
        cas = casoratian3(p, q, r, 1)
        assert cas.terms == {5: -1}

    def test_equal_columns_vanish(self):
        p, q = gauss_pq()
        assert casoratian3(p, p, q, 2).is_zero


class TestConnection:
    def test_gauss_family_m0(self):
        order = 24
        p, q = gauss_pq(order)
        d0 = LaurentSeries.one(order)
        d1 = lpoly([(0, 2)], order)  # 1 + q^m at m = 0
        cc = connection_coeffs2(p, q, d0, d1, 0)
        assert cc.lam == LaurentSeries.one(order)
        assert cc.mu.is_zero

    def test_rogers_family_m1_gives_inverse_power(self):
        order = 24
        coeffs = (cf((1, 0, 0), (-1, 0, 2), (1, 2, -1)), cf((1, 0, 2)))
        p = window(
            RecurrenceSpec(
                order=2,
                coeffs=coeffs,
                inits={-1: LaurentSeries.one(order), 0: LaurentSeries.one(order)},
            ),
            -1,
            3,
        )
        q = window(
            RecurrenceSpec(
                order=2,
                coeffs=coeffs,
                inits={-1: lpoly([(0, 1), (-1, -1)], order), 0: LaurentSeries.one(order)},
            ),
            -1,
            3,
        )
        d0 = LaurentSeries.one(order)
        d1 = lpoly([(0, 1), (2, -1), (3, 1)], order)  # 1 - q^2 + q^{2m+1} at m=1
        closed = PrefactorSpec(sign="(-1)^(m-1)", exponent=ExponentForm(0, 2, -1))
        cc = connection_coeffs2(p, q, d0, d1, 1, closed_form=closed)
        assert cc.lam.terms == {-1: 1}

    def test_closed_form_mismatch_raises(self):
        order = 24
        p, q = gauss_pq(order)
        wrong = PrefactorSpec(sign="+1", exponent=ExponentForm(0, 0, 5))
        with pytest.raises(RecurrenceError):
            connection_coeffs2(
                p, q, LaurentSeries.one(order), lpoly([(0, 2)], order), 1, closed_form=wrong
            )

    def test_degenerate_system(self):
        p, _ = gauss_pq()
        with pytest.raises(RecurrenceError):
            connection_coeffs2(p, p, LaurentSeries.one(24), LaurentSeries.one(24), 1)

    def test_singular_three_term_system(self):
        p, q = gauss_pq()
        d = [LaurentSeries.one(24)] * 3
        with pytest.raises(RecurrenceError):
            connection_coeffs3(p, q, p, d, 1)


class TestVerifyRecurrence:
    def test_window_matches_own_spec(self):
        w = unroll_forward(schur_d(), 10)
        assert verify_recurrence_holds(w, w.spec, range(2, 11)).holds

    def test_perturbed_window_fails(self):
        w = unroll_forward(schur_d(), 6)
        bad = dict(w.values)
        bad[5] = bad[5] + LaurentSeries.monomial(1, 3)
        from qident.recurrence import SequenceWindow

        res = verify_recurrence_holds(SequenceWindow(w.spec, bad), w.spec, range(2, 7))
        assert not res.holds
        assert res.first_failing_m == 5
