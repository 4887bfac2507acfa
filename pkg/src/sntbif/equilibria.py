"""Location and classification of equilibria for the built-in models.

All equilibria come from closed-form reductions (the invariant x1-axis of
MLV, the y = 0 line of the planar minimal models) followed by a Newton
polish on the full system, so fold coincidences are detected by the
root-clustering tolerance rather than by chance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import Eigen2, Poly1, eigen2, solve_poly_real
from .errors import DegenerateModelError
from .models import (
    CUSP_UNF,
    DBT_TRUNC,
    MLV,
    ST1_MIN,
    ST2_MIN,
    ModelDef,
    eval_field,
    eval_jacobian,
)

__all__ = ["Equilibrium", "find_equilibria_mlv", "find_equilibria_min",
           "find_equilibria", "classify", "DEFAULT_TOL_EIG"]

# classification hysteresis, scaled by the spectral magnitude
DEFAULT_TOL_EIG = 1e-8

CLASS_SINK = "sink"
CLASS_SOURCE = "source"
CLASS_SADDLE = "saddle"
CLASS_FOLD = "nonhyperbolic-fold-type"
CLASS_HOPF = "nonhyperbolic-Hopf-type"
CLASS_DOUBLE_ZERO = "double-zero"
CLASS_DEGENERATE = "degenerate"


@dataclass
class Equilibrium:
    state: np.ndarray
    eigen: Eigen2 | float          # Eigen2 for planar models, scalar df/dx else
    classification: str
    residual: float
    on_axis: bool = False          # MLV: x2 == 0 exactly by construction
    multiplicity: int = 1
    outside_first_quadrant: bool = False

    def __post_init__(self):
        self.state = np.atleast_1d(np.asarray(self.state, dtype=float))


def classify(eigen, tol_eig: float = DEFAULT_TOL_EIG) -> str:
    """Classification from eigen data with a scaled near-zero band."""
    if isinstance(eigen, (int, float)):
        lam = float(eigen)
        if abs(lam) < tol_eig * max(1.0, abs(lam)):
            return CLASS_FOLD
        return CLASS_SINK if lam < 0.0 else CLASS_SOURCE
    lam1, lam2 = eigen.values
    scale = max(abs(lam1), abs(lam2), 1.0)
    near0 = [abs(l.real) < tol_eig * scale for l in (lam1, lam2)]
    if not eigen.is_real:
        if near0[0]:
            return CLASS_HOPF
        return CLASS_SINK if lam1.real < 0.0 else CLASS_SOURCE
    zero = [abs(l.real) < tol_eig * scale for l in (lam1, lam2)]
    if all(zero):
        return CLASS_DOUBLE_ZERO
    if any(zero):
        return CLASS_FOLD
    if lam1.real * lam2.real < 0.0:
        return CLASS_SADDLE
    return CLASS_SINK if lam1.real < 0.0 else CLASS_SOURCE


def _newton_polish_full(model, state, params, iters=4, fix_axis=False):
    """Newton refinement on the full system; ``fix_axis`` keeps x2 = 0."""
    s = np.atleast_1d(np.array(state, dtype=float))
    for _ in range(iters):
        f = eval_field(model, s, params)
        if model.dim == 1:
            d = eval_jacobian(model, s, params)
            if d == 0.0:
                break
            s = s - f / d
        elif fix_axis:
            # stay on the invariant axis: 1-D Newton in x1
            j = eval_jacobian(model, s, params)
            if j[0, 0] == 0.0:
                break
            s = np.array([s[0] - f[0] / j[0, 0], 0.0])
        else:
            j = eval_jacobian(model, s, params)
            try:
                s = s - np.linalg.solve(j, f)
            except np.linalg.LinAlgError:
                break
    return s


def _make_eq(model, state, params, tol_eig, multiplicity=1, on_axis=False):
    f = eval_field(model, state, params)
    residual = float(np.max(np.abs(f)))
    if model.dim == 1:
        eig = float(eval_jacobian(model, state, params))
    else:
        eig = eigen2(eval_jacobian(model, state, params))
    eq = Equilibrium(
        state=np.atleast_1d(np.asarray(state, dtype=float)),
        eigen=eig,
        classification=classify(eig, tol_eig),
        residual=residual,
        on_axis=on_axis,
        multiplicity=multiplicity,
    )
    if model is MLV and eq.state.shape == (2,) and eq.state[1] < 0.0:
        eq.outside_first_quadrant = True
    return eq


def find_equilibria_mlv(params, tol_eig: float = DEFAULT_TOL_EIG,
                        cluster_tol: float | None = None):
    """All equilibria of the MLV model at fixed parameters (at most 4).

    Axis equilibria solve a11 x1^2 + b1 x1 + e = 0 with x2 = 0 set exactly;
    interior ones come from eliminating x2 = -(b2 + a21 x1)/a22.
    """
    p = params
    if p.a11 == 0.0 or p.a22 == 0.0:
        raise DegenerateModelError("MLV equilibria need a11 != 0 and a22 != 0")
    out = []
    # invariant-axis equilibria
    axis = solve_poly_real(Poly1([p.e, p.b1, p.a11]), tol=1e-12,
                           cluster_tol=cluster_tol)
    for x1, mult in axis:
        x1 = _newton_polish_full(MLV, [x1, 0.0], p, fix_axis=True)[0]
        out.append(_make_eq(MLV, [x1, 0.0], p, tol_eig, mult, on_axis=True))
    # interior equilibria: substitute x2 = -(b2 + a21 x1)/a22
    c2 = p.a11 - p.a12 * p.a21 / p.a22
    c1 = p.b1 - p.a12 * p.b2 / p.a22
    c0 = p.e
    if not (c2 == 0.0 and c1 == 0.0 and c0 == 0.0):
        interior = solve_poly_real(Poly1([c0, c1, c2]), tol=1e-12,
                                   cluster_tol=cluster_tol)
        for x1, mult in interior:
            x2 = -(p.b2 + p.a21 * x1) / p.a22
            if abs(x2) < 1e-13 * max(1.0, abs(x1)):
                continue  # coincides with an axis equilibrium
            s = _newton_polish_full(MLV, [x1, x2], p)
            out.append(_make_eq(MLV, s, p, tol_eig, mult))
    return out[:4]


def find_equilibria_min(model: ModelDef, params,
                        tol_eig: float = DEFAULT_TOL_EIG,
                        cluster_tol: float | None = None):
    """Equilibria of the minimal/normal-form models from the closed-form
    equilibrium polynomial (with y = 0 for the planar ones)."""
    p = params
    if model is ST1_MIN:
        poly = Poly1([0.0, p.a, p.b, p.eps])
    elif model is ST2_MIN:
        if p.k3 == 0.0:
            raise DegenerateModelError("ST2_MIN equilibria need k3 != 0")
        # f2(x, 0) = x (a + b x + eps x^2 + k3 x^3) plus optional splitting terms
        poly = Poly1([0.0, p.a, p.b + p.k4 * p.b * p.b,
                      p.eps + p.k5 * p.b, p.k3])
    elif model is CUSP_UNF:
        poly = Poly1([p.mu, p.nu, 0.0, 1.0])
    elif model is DBT_TRUNC:
        poly = Poly1([p.mu1, p.mu2, 0.0, p.eps])
    else:
        raise DegenerateModelError(f"no minimal-model equilibria for {model!r}")
    roots = solve_poly_real(poly, tol=1e-12, cluster_tol=cluster_tol)
    out = []
    for x, mult in roots:
        if model.dim == 1:
            s = _newton_polish_full(model, [x], p) if mult == 1 else np.array([x])
        else:
            s = np.array([x, 0.0])
            if mult == 1:
                s = _newton_polish_full(model, s, p)
        out.append(_make_eq(model, s, p, tol_eig, mult))
    return out


def find_equilibria(model: ModelDef, params, **kw):
    if model is MLV:
        return find_equilibria_mlv(params, **kw)
    return find_equilibria_min(model, params, **kw)
