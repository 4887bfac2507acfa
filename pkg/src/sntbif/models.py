"""The five built-in vector fields, with analytic Jacobians, parameter
derivatives and the exact symmetries of the harvested Lotka-Volterra model.

Models
------
MLV        planar Lotka-Volterra system with a constant harvesting /
           migration term in the prey equation; the x1-axis is invariant.
ST1_MIN    scalar minimal model of the single-zero-eigenvalue
           saddle-node/transcritical interaction.
ST2_MIN    planar minimal model of the double-zero interaction.
CUSP_UNF   standard scalar unfolding of the cusp.
DBT_TRUNC  cubic truncation of the degenerate Bogdanov-Takens unfolding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .algebra import TruncMultiPoly
from .errors import DegenerateModelError, UsageError

__all__ = [
    "MLVParams",
    "ST1MinParams",
    "ST2MinParams",
    "CuspUnfParams",
    "DBTTruncParams",
    "ModelDef",
    "MLV",
    "ST1_MIN",
    "ST2_MIN",
    "CUSP_UNF",
    "DBT_TRUNC",
    "MODELS",
    "eval_field",
    "eval_jacobian",
    "eval_param_derivative",
    "apply_symmetry_scaling",
    "reflect_st2",
    "field_polys",
]


def _check_eps(eps):
    if eps not in (1, -1, 1.0, -1.0):
        raise UsageError("eps must be +1 or -1")
    return float(eps)


@dataclass(frozen=True)
class MLVParams:
    b1: float
    a11: float
    a12: float
    a21: float
    a22: float
    b2: float
    e: float

    def as_array(self):
        return np.array(
            [self.b1, self.a11, self.a12, self.a21, self.a22, self.b2, self.e]
        )


@dataclass(frozen=True)
class ST1MinParams:
    a: float
    b: float
    eps: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))

    def as_array(self):
        return np.array([self.a, self.b, self.eps])


@dataclass(frozen=True)
class ST2MinParams:
    a: float
    b: float
    k1: float
    k2: float
    k3: float
    eps: float = 1.0
    # quartic splitting terms of the full reduction; zero keeps the model in
    # its special (heteroclinic-preserving) form
    k4: float = 0.0
    k5: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))
        if self.k1 == 0.0 or self.k2 == 0.0 or self.k3 == 0.0:
            raise DegenerateModelError("k1, k2, k3 must be nonzero")
        if self.k2 == 2.0 * math.sqrt(2.0):
            raise DegenerateModelError("k2 = 2*sqrt(2) is excluded")

    def as_array(self):
        return np.array(
            [self.a, self.b, self.k1, self.k2, self.k3, self.eps, self.k4, self.k5]
        )


@dataclass(frozen=True)
class CuspUnfParams:
    mu: float
    nu: float

    def as_array(self):
        return np.array([self.mu, self.nu])


@dataclass(frozen=True)
class DBTTruncParams:
    mu1: float
    mu2: float
    nu: float
    k2: float
    eps: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "eps", _check_eps(self.eps))

    def as_array(self):
        return np.array([self.mu1, self.mu2, self.nu, self.k2, self.eps])


@dataclass(frozen=True)
class ModelDef:
    name: str
    kernel_id: int
    dim: int
    params_cls: type


MLV = ModelDef("MLV", 0, 2, MLVParams)
ST1_MIN = ModelDef("ST1_MIN", 1, 1, ST1MinParams)
ST2_MIN = ModelDef("ST2_MIN", 2, 2, ST2MinParams)
CUSP_UNF = ModelDef("CUSP_UNF", 3, 1, CuspUnfParams)
DBT_TRUNC = ModelDef("DBT_TRUNC", 4, 2, DBTTruncParams)

MODELS = {m.name: m for m in (MLV, ST1_MIN, ST2_MIN, CUSP_UNF, DBT_TRUNC)}


def _check_state(model, state):
    state = np.atleast_1d(np.asarray(state, dtype=float))
    if state.shape != (model.dim,):
        raise UsageError(
            f"{model.name} expects a state of dimension {model.dim}, got {state.shape}"
        )
    return state


def eval_field(model: ModelDef, state, params):
    """Time derivative of ``state``."""
    s = _check_state(model, state)
    p = params
    if model is MLV:
        x1, x2 = s
        return np.array(
            [
                x1 * (p.b1 + p.a11 * x1 + p.a12 * x2) + p.e,
                x2 * (p.b2 + p.a21 * x1 + p.a22 * x2),
            ]
        )
    if model is ST1_MIN:
        x = s[0]
        return np.array([p.a * x + p.b * x * x + p.eps * x**3])
    if model is ST2_MIN:
        x, y = s
        f2 = (
            p.a * x
            + p.k1 * p.b * y
            + p.b * x * x
            + p.k2 * x * y
            + x * x * y
            + p.eps * x**3
            + p.k3 * x**4
            + p.k4 * p.b * p.b * x * x
            + p.k5 * p.b * x**3
        )
        return np.array([y, f2])
    if model is CUSP_UNF:
        z = s[0]
        return np.array([p.mu + p.nu * z + z**3])
    if model is DBT_TRUNC:
        z1, z2 = s
        return np.array(
            [
                z2,
                p.mu1
                + p.mu2 * z1
                + p.nu * z2
                + p.k2 * z1 * z2
                + z1 * z1 * z2
                + p.eps * z1**3,
            ]
        )
    raise UsageError(f"unknown model {model!r}")


def eval_jacobian(model: ModelDef, state, params):
    """Analytic Jacobian; a 2x2 array for planar models, scalar for 1-D."""
    s = _check_state(model, state)
    p = params
    if model is MLV:
        x1, x2 = s
        return np.array(
            [
                [p.b1 + 2.0 * p.a11 * x1 + p.a12 * x2, p.a12 * x1],
                [p.a21 * x2, p.b2 + p.a21 * x1 + 2.0 * p.a22 * x2],
            ]
        )
    if model is ST1_MIN:
        x = s[0]
        return p.a + 2.0 * p.b * x + 3.0 * p.eps * x * x
    if model is ST2_MIN:
        x, y = s
        d_x = (
            p.a
            + 2.0 * p.b * x
            + p.k2 * y
            + 2.0 * x * y
            + 3.0 * p.eps * x * x
            + 4.0 * p.k3 * x**3
            + 2.0 * p.k4 * p.b * p.b * x
            + 3.0 * p.k5 * p.b * x * x
        )
        d_y = p.k1 * p.b + p.k2 * x + x * x
        return np.array([[0.0, 1.0], [d_x, d_y]])
    if model is CUSP_UNF:
        z = s[0]
        return p.nu + 3.0 * z * z
    if model is DBT_TRUNC:
        z1, z2 = s
        return np.array(
            [
                [0.0, 1.0],
                [
                    p.mu2 + p.k2 * z2 + 2.0 * z1 * z2 + 3.0 * p.eps * z1 * z1,
                    p.nu + p.k2 * z1 + z1 * z1,
                ],
            ]
        )
    raise UsageError(f"unknown model {model!r}")


def eval_param_derivative(model: ModelDef, state, params, name: str):
    """Analytic derivative of the field with respect to one parameter."""
    s = _check_state(model, state)
    p = params
    if model is MLV:
        x1, x2 = s
        table = {
            "b1": [x1, 0.0],
            "a11": [x1 * x1, 0.0],
            "a12": [x1 * x2, 0.0],
            "a21": [0.0, x1 * x2],
            "a22": [0.0, x2 * x2],
            "b2": [0.0, x2],
            "e": [1.0, 0.0],
        }
    elif model is ST1_MIN:
        x = s[0]
        table = {"a": [x], "b": [x * x]}
    elif model is ST2_MIN:
        x, y = s
        table = {
            "a": [0.0, x],
            "b": [
                0.0,
                p.k1 * y + x * x + 2.0 * p.k4 * p.b * x * x + p.k5 * x**3,
            ],
        }
    elif model is CUSP_UNF:
        z = s[0]
        table = {"mu": [1.0], "nu": [z]}
    elif model is DBT_TRUNC:
        z1, z2 = s
        table = {"mu1": [1.0, 0.0], "mu2": [0.0, z1], "nu": [0.0, z2]}
    else:
        raise UsageError(f"unknown model {model!r}")
    if name not in table:
        raise UsageError(f"{model.name} has no continuable parameter {name!r}")
    return np.array(table[name])


@dataclass(frozen=True)
class ScalingDescriptor:
    """Coordinate/time action accompanying a parameter symmetry: x1 -> lam*x1,
    x2 -> mu*x2, t -> t/kappa."""

    lam: float
    mu: float
    kappa: float

    def apply_state(self, state):
        s = np.asarray(state, dtype=float)
        return np.array([self.lam * s[0], self.mu * s[1]])

    def apply_time(self, t):
        return t / self.kappa


def apply_symmetry_scaling(params: MLVParams, lam: float, mu: float, kappa: float):
    """Composite of the three continuous MLV symmetries with factors
    (lam, mu, kappa); all must be nonzero."""
    if lam == 0.0 or mu == 0.0 or kappa == 0.0:
        raise UsageError("scale factors must be nonzero")
    new = MLVParams(
        b1=kappa * params.b1,
        a11=kappa * params.a11 / lam,
        a12=kappa * params.a12 / mu,
        a21=kappa * params.a21 / lam,
        a22=kappa * params.a22 / mu,
        b2=kappa * params.b2,
        e=kappa * lam * params.e,
    )
    return new, ScalingDescriptor(lam, mu, kappa)


def reflect_st2(state, params: ST2MinParams):
    """The exact reflection symmetry of ST2_MIN:
    (x, y, a, b, k1, k2, k3) -> (-x, -y, a, -b, -k1, -k2, -k3)."""
    if not isinstance(params, ST2MinParams):
        raise UsageError("reflect_st2 applies to ST2_MIN parameters only")
    s = np.asarray(state, dtype=float)
    if s.shape != (2,):
        raise UsageError("ST2_MIN state has dimension 2")
    new = replace(
        params, b=-params.b, k1=-params.k1, k2=-params.k2, k3=-params.k3,
        k5=-params.k5,
    )
    return -s, new


def field_polys(model: ModelDef, params, cap: int = 4):
    """The field components as exact polynomials in the state variables.

    Every built-in field is polynomial in the state, so this loses nothing;
    it feeds the normal-form computations that need exact higher derivatives.
    """
    p = params
    if model.dim == 1:
        x = TruncMultiPoly.var(0, 1, cap)
        if model is ST1_MIN:
            return (p.a * x + p.b * x**2 + p.eps * x**3,)
        if model is CUSP_UNF:
            return (p.mu + p.nu * x + x**3,)
        raise UsageError(f"unknown scalar model {model!r}")
    x = TruncMultiPoly.var(0, 2, cap)
    y = TruncMultiPoly.var(1, 2, cap)
    if model is MLV:
        return (
            x * (p.b1 + p.a11 * x + p.a12 * y) + p.e,
            y * (p.b2 + p.a21 * x + p.a22 * y),
        )
    if model is ST2_MIN:
        f2 = (
            p.a * x
            + p.k1 * p.b * y
            + p.b * x**2
            + p.k2 * x * y
            + x**2 * y
            + p.eps * x**3
            + p.k3 * x**4
            + (p.k4 * p.b * p.b) * x**2
            + (p.k5 * p.b) * x**3
        )
        return (y, f2)
    if model is DBT_TRUNC:
        f2 = (
            p.mu1
            + p.mu2 * x
            + p.nu * y
            + p.k2 * x * y
            + x**2 * y
            + p.eps * x**3
        )
        return (y, f2)
    raise UsageError(f"unknown planar model {model!r}")
