import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sntbif.algebra import (
    Poly1,
    TruncMultiPoly,
    eigen2,
    solve_poly_real,
    tp_add,
    tp_compose,
    tp_diff,
    tp_mul,
)

finite = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False)
nonzero = finite.filter(lambda v: abs(v) > 1e-3)


def poly_from_roots(roots, lead=1.0):
    c = [lead]
    for r in roots:
        c = [0.0] + c
        for i in range(len(c) - 1):
            c[i] -= r * c[i + 1]
    return Poly1(c)


class TestPoly1:
    def test_evaluation_and_derivative(self):
        p = Poly1([1.0, -2.0, 0.0, 3.0])
        assert p(2.0) == 1.0 - 4.0 + 24.0
        assert p.deriv()(2.0) == -2.0 + 36.0
        assert p.degree == 3

    def test_zero_polynomial_rejected(self):
        with pytest.raises(ValueError):
            Poly1([0.0, 0.0])

    def test_trailing_zeros_trimmed(self):
        assert Poly1([1.0, 2.0, 0.0]).degree == 1

    @given(st.lists(st.floats(min_value=-3.0, max_value=3.0), min_size=1,
                    max_size=4), nonzero)
    @settings(max_examples=200, deadline=None)
    def test_constructed_roots_recovered(self, roots, lead):
        p = poly_from_roots(roots, lead)
        found = solve_poly_real(p, cluster_tol=1e-5)
        for x, _ in found:
            assert abs(p(x)) < 1e-6 * p.scale() * max(1.0, abs(x)) ** p.degree
        # clustered input roots are genuinely ambiguous; only demand
        # recovery of the well-separated ones
        for i, r in enumerate(roots):
            others = [s for j, s in enumerate(roots) if j != i]
            if others and min(abs(r - s) for s in others) < 1e-2:
                continue
            assert any(abs(x - r) < 1e-4 for x, _ in found)

    def test_double_root_multiplicity(self):
        p = poly_from_roots([1.5, 1.5, -2.0])
        found = solve_poly_real(p)
        assert any(m == 2 and abs(x - 1.5) < 1e-6 for x, m in found)

    def test_quartic_four_roots(self):
        p = poly_from_roots([-3.0, -1.0, 0.5, 2.0], lead=0.7)
        found = solve_poly_real(p)
        assert [m for _, m in found] == [1, 1, 1, 1]
        assert np.allclose([x for x, _ in found], [-3.0, -1.0, 0.5, 2.0],
                           atol=1e-9)

    def test_no_real_roots(self):
        assert solve_poly_real(Poly1([1.0, 0.0, 1.0])) == []

    def test_near_degenerate_cubic(self):
        # triple root: only ~5 digits are recoverable, and the rounded
        # coefficients may genuinely have a single real root nearby
        p = poly_from_roots([0.7, 0.7, 0.7])
        found = solve_poly_real(p, cluster_tol=1e-3)
        assert found
        assert all(abs(x - 0.7) < 1e-3 for x, _ in found)


class TestEigen2:
    @given(finite, finite, finite, finite)
    @settings(max_examples=200, deadline=None)
    def test_matches_numpy(self, a, b, c, d):
        m = np.array([[a, b], [c, d]])
        ours = sorted(eigen2(m).values, key=lambda z: (z.real, z.imag))
        ref = sorted(np.linalg.eigvals(m), key=lambda z: (z.real, z.imag))
        for u, v in zip(ours, ref):
            assert abs(u - v) < 1e-8 * max(1.0, abs(v))

    def test_complex_pair_flag(self):
        e = eigen2([[0.0, -1.0], [1.0, 0.0]])
        assert not e.is_real
        assert e.values[0] == 1j


def random_tp(rng, nvars=2, cap=4):
    return TruncMultiPoly.random(rng, nvars, cap, density=0.6)


class TestTruncMultiPoly:
    def test_var_and_coeff(self):
        x = TruncMultiPoly.var(0, 2, 3)
        y = TruncMultiPoly.var(1, 2, 3)
        p = 2.0 * x * y + x**2
        assert p.coeff((1, 1)) == 2.0
        assert p.coeff((2, 0)) == 1.0
        assert p.coeff((0, 2)) == 0.0

    def test_truncation_at_cap(self):
        x = TruncMultiPoly.var(0, 1, 2)
        assert (x**3).is_zero()

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_ring_identities(self, seed):
        rng = np.random.default_rng(seed)
        p, q, r = (random_tp(rng) for _ in range(3))
        assert tp_add(p, q) == tp_add(q, p)
        # products sum the same terms in a different order
        comm = tp_mul(p, q) - tp_mul(q, p)
        assert comm.max_abs() < 1e-12 * max(1.0, p.max_abs() * q.max_abs())
        lhs = tp_mul(p, tp_add(q, r))
        rhs = tp_add(tp_mul(p, q), tp_mul(p, r))
        assert (lhs - rhs).max_abs() < 1e-12 * max(1.0, p.max_abs()) * max(
            1.0, q.max_abs() + r.max_abs()
        )

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_product_rule(self, seed):
        rng = np.random.default_rng(seed)
        p, q = random_tp(rng), random_tp(rng)
        # d(pq) agrees with p dq + q dp below the cap; the cap itself is
        # lossy because pq drops terms whose derivative would survive
        lhs = tp_diff(tp_mul(p, q), 0).terms_up_to(p.cap - 2)
        prod = tp_add(tp_mul(p, tp_diff(q, 0)), tp_mul(q, tp_diff(p, 0)))
        rhs = prod.terms_up_to(p.cap - 2)
        for key in set(lhs) | set(rhs):
            assert abs(lhs.get(key, 0.0) - rhs.get(key, 0.0)) < 1e-10

    def test_compose_evaluate_consistency(self):
        rng = np.random.default_rng(7)
        p = random_tp(rng, nvars=2, cap=5)
        x = TruncMultiPoly.var(0, 2, 5)
        y = TruncMultiPoly.var(1, 2, 5)
        sub = tp_compose(p, [0.3 * x + 0.1 * y**2, y - 0.2 * x])
        for pt in ([0.01, 0.02], [-0.03, 0.015]):
            direct = p.evaluate(
                [0.3 * pt[0] + 0.1 * pt[1] ** 2, pt[1] - 0.2 * pt[0]]
            )
            # composition is truncated, points are small enough that the
            # dropped tail is far below the tolerance
            assert math.isclose(sub.evaluate(pt), direct, abs_tol=1e-8)

    def test_evaluate_horner_matches_direct(self):
        x = TruncMultiPoly.var(0, 2, 4)
        y = TruncMultiPoly.var(1, 2, 4)
        p = 1.0 + 2.0 * x - y + 0.5 * x * y**2
        assert p.evaluate([2.0, 3.0]) == 1.0 + 4.0 - 3.0 + 0.5 * 2.0 * 9.0
