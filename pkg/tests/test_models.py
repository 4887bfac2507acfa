import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sntbif.errors import UsageError
from sntbif.models import (
    MLVParams,
    MODELS,
    ST2MinParams,
    apply_symmetry_scaling,
    eval_field,
    eval_jacobian,
    eval_param_derivative,
    field_polys,
    reflect_st2,
)

coord = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
pval = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False)


def sample_params(model, rng):
    cls = model.params_cls
    kw = {}
    for f in dataclasses.fields(cls):
        if f.name == "eps":
            kw[f.name] = float(rng.choice([-1.0, 1.0]))
        else:
            v = float(rng.uniform(-3.0, 3.0))
            if f.name in ("k1", "k2", "k3") and abs(v) < 0.2:
                v = math.copysign(0.2, v if v != 0.0 else 1.0)
            kw[f.name] = v
    return cls(**kw)


def fd_jacobian(model, state, params, h=1e-6):
    state = np.asarray(state, dtype=float)
    cols = []
    for i in range(model.dim):
        dp = np.zeros(model.dim)
        dp[i] = h
        fp = np.asarray(eval_field(model, state + dp, params))
        fm = np.asarray(eval_field(model, state - dp, params))
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_jacobian_matches_finite_differences(name):
    model = MODELS[name]
    rng = np.random.default_rng(hash(name) % 2**32)
    for _ in range(20):
        params = sample_params(model, rng)
        state = rng.uniform(-2.0, 2.0, model.dim)
        jac = np.asarray(eval_jacobian(model, state, params))
        ref = fd_jacobian(model, state, params)
        scale = max(1.0, float(np.max(np.abs(ref))))
        assert np.max(np.abs(jac - ref)) < 1e-6 * scale


@pytest.mark.parametrize("name", sorted(MODELS))
def test_param_derivative_matches_finite_differences(name):
    model = MODELS[name]
    rng = np.random.default_rng(hash(name) % 2**31)
    for _ in range(10):
        params = sample_params(model, rng)
        state = rng.uniform(-2.0, 2.0, model.dim)
        for f in dataclasses.fields(model.params_cls):
            if f.name == "eps":
                continue
            h = 1e-6
            pp = dataclasses.replace(params, **{f.name: getattr(params, f.name) + h})
            pm = dataclasses.replace(params, **{f.name: getattr(params, f.name) - h})
            ref = (
                np.asarray(eval_field(model, state, pp))
                - np.asarray(eval_field(model, state, pm))
            ) / (2.0 * h)
            got = np.asarray(eval_param_derivative(model, state, params, f.name))
            assert np.max(np.abs(got - ref)) < 1e-5 * max(1.0, np.max(np.abs(ref)))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_field_polys_reproduce_field(name):
    model = MODELS[name]
    rng = np.random.default_rng(11)
    params = sample_params(model, rng)
    polys = field_polys(model, params)
    for _ in range(10):
        state = rng.uniform(-1.5, 1.5, model.dim)
        f = np.asarray(eval_field(model, state, params))
        for comp, poly in zip(f, polys):
            assert math.isclose(poly.evaluate(list(state)), comp,
                                rel_tol=1e-12, abs_tol=1e-12)


class TestValidation:
    def test_eps_must_be_unit(self):
        with pytest.raises(UsageError):
            ST2MinParams(a=0.1, b=0.1, k1=1.0, k2=1.0, k3=1.0, eps=0.5)

    def test_k_coefficients_nonzero(self):
        with pytest.raises(UsageError):
            ST2MinParams(a=0.1, b=0.1, k1=0.0, k2=1.0, k3=1.0)

    def test_wrong_state_dimension(self):
        p = MLVParams(b1=1.0, a11=-1.0, a12=1.0, a21=1.0, a22=-1.0, b2=1.0, e=0.0)
        with pytest.raises(UsageError):
            eval_field(MODELS["MLV"], [1.0], p)

    def test_unknown_continuation_parameter(self):
        p = MLVParams(b1=1.0, a11=-1.0, a12=1.0, a21=1.0, a22=-1.0, b2=1.0, e=0.0)
        with pytest.raises(UsageError):
            eval_param_derivative(MODELS["MLV"], [1.0, 1.0], p, "q")

    def test_scaling_rejects_zero_factor(self):
        p = MLVParams(b1=1.0, a11=-1.0, a12=1.0, a21=1.0, a22=-1.0, b2=1.0, e=0.0)
        with pytest.raises(UsageError):
            apply_symmetry_scaling(p, 0.0, 1.0, 1.0)


class TestSymmetries:
    @given(coord, coord, st.floats(min_value=0.3, max_value=2.5),
           st.floats(min_value=0.3, max_value=2.5),
           st.floats(min_value=0.3, max_value=2.5))
    @settings(max_examples=50, deadline=None)
    def test_scaling_conjugates_the_field(self, x1, x2, lam, mu, kappa):
        p = MLVParams(b1=1.3, a11=-0.7, a12=-0.4, a21=0.9, a22=0.6,
                      b2=-0.8, e=0.35)
        q, desc = apply_symmetry_scaling(p, lam, mu, kappa)
        assert (desc.lam, desc.mu, desc.kappa) == (lam, mu, kappa)
        f = np.asarray(eval_field(MODELS["MLV"], [x1, x2], p))
        g = np.asarray(eval_field(MODELS["MLV"], [lam * x1, mu * x2], q))
        # x -> (lam x1, mu x2), t -> t/kappa
        want = kappa * np.array([lam * f[0], mu * f[1]])
        assert np.allclose(g, want, rtol=1e-12, atol=1e-12)

    @given(coord, coord, pval, pval)
    @settings(max_examples=50, deadline=None)
    def test_reflection_conjugates_the_field(self, x, y, a, b):
        p = ST2MinParams(a=a, b=b, k1=1.2, k2=-0.8, k3=0.5, eps=-1.0,
                         k4=0.3, k5=-0.6)
        s2, p2 = reflect_st2([x, y], p)
        f = np.asarray(eval_field(MODELS["ST2_MIN"], [x, y], p))
        g = np.asarray(eval_field(MODELS["ST2_MIN"], s2, p2))
        assert np.allclose(g, -f, rtol=1e-12, atol=1e-12)

    def test_reflection_is_involutive(self):
        p = ST2MinParams(a=0.2, b=-0.4, k1=1.0, k2=2.0, k3=0.3)
        s2, p2 = reflect_st2([0.1, -0.2], p)
        s3, p3 = reflect_st2(s2, p2)
        assert np.allclose(s3, [0.1, -0.2])
        assert p3 == p
