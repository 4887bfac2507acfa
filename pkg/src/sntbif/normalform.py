"""Closed-form codimension-two data and mechanical identity verifiers.

Everything here is either an exact formula (locations of the two
saddle-node/transcritical interaction points, the cusp unfolding map, the
degenerate Bogdanov-Takens embedding) or a residual computed in truncated
polynomial arithmetic, so that a nonzero result is pure rounding whenever
the underlying identity holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import TruncMultiPoly, eigen2
from .errors import DegenerateModelError, OutOfDomainError, UsageError
from .models import MLVParams, ModelDef, field_polys

__all__ = [
    "ST1Data",
    "ST2Data",
    "DBTMapData",
    "st1_point",
    "st2_point",
    "conditions_residual",
    "invariant_manifold_check",
    "manifold_factorisation_residual",
    "cusp_map",
    "cusp_map_jacobian_det",
    "st1_nondegeneracy",
    "min2_sn_curve",
    "dbt_map",
    "dbt_surfaces",
    "gamma_curves",
    "verify_st1_centre_manifold",
    "st1_reduced_dynamics",
    "first_lyapunov",
    "IDENTITY_TOL",
]

# identity thresholds are this, scaled by the largest input coefficient
IDENTITY_TOL = 1e-12


def _guard(value, name):
    if value == 0.0:
        raise DegenerateModelError(f"degeneracy: {name} = 0")
    return value


@dataclass(frozen=True)
class ST1Data:
    """Single-zero interaction point and its reduction data."""

    b2_star: float
    e_star: float
    x1_star: float
    x2_star: float
    D1: float
    D2: float
    eps: float
    # (a, b) as functions of the unfolding parameters (z3, z4):
    # a = a_z3*z3 + a_z3sq*z3^2 + a_z4*z4,  b = b_z3*z3 + b_z4*z4
    a_z3: float = 0.0
    a_z3sq: float = 0.0
    a_z4: float = 1.0
    b_z3: float = 0.0
    b_z4: float = 0.0


@dataclass(frozen=True)
class ST2Data:
    """Double-zero interaction point and normal-form coefficients."""

    x1_star: float
    e_star: float
    b2_star: float
    gamma: float
    D3: float
    D4: float
    eps: float
    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    dbt_class: str
    nondegeneracy: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DBTMapData:
    """Image of one (a, b) under the map into the versal DBT parameters."""

    a: float
    b: float
    a_bar: float
    b_bar: float
    mu1: float
    mu2: float
    nu: float
    # z1 = x + z1_const + z1_x_b * x*b,  z2 = y * z2_y  (coefficients)
    z1_const: float = 0.0
    z1_xb: float = 0.0
    z2_y: float = 1.0
    s_residual: float = 0.0


def st1_point(params: MLVParams) -> ST1Data:
    """Location of the single-zero saddle-node/transcritical point and the
    coefficients of the local parameter map."""
    p = params
    D1 = p.a11 * p.a22 - p.a12 * p.a21
    D2 = 2.0 * p.a11 * p.a22 - p.a12 * p.a21
    D3 = 2.0 * p.a11 * p.a22 - p.a12 * p.a21 - p.a22 * p.a21
    _guard(D2, "D2")
    _guard(D1, "D1")
    _guard(p.a21, "a21")
    _guard(p.a22, "a22")
    _guard(p.b1 * p.a12, "b1*a12")
    b2s = p.b1 * p.a22 * p.a21 / D2
    es = p.b1**2 * p.a22 * D1 / D2**2
    x1s = -b2s / p.a21
    eps = math.copysign(1.0, p.a22 * D1 * D2 / (p.b1 * p.a12))
    root = math.sqrt(abs(p.a22 * D1 * D2 / (p.b1 * p.a12 * p.a21**2)))
    bcoef = eps * p.a21 / D1 * root
    return ST1Data(
        b2_star=b2s,
        e_star=es,
        x1_star=x1s,
        x2_star=0.0,
        D1=D1,
        D2=D2,
        eps=eps,
        a_z3=p.a21,
        a_z3sq=p.a11 * D2 / (p.b1 * p.a12),
        a_z4=1.0,
        b_z3=-bcoef * D3 / p.a22,
        b_z4=bcoef,
    )


def st2_point(params: MLVParams) -> ST2Data:
    """Location of the double-zero interaction point, the k-coefficients of
    the reduced model, and the nondegeneracy guard values."""
    p = params
    gamma = -p.b1 * p.a12 / (2.0 * _guard(p.a11, "a11"))
    D3 = 2.0 * p.a11 * p.a22 - p.a12 * p.a21 - p.a22 * p.a21
    D4 = 2.0 * p.a11 + p.a21
    guards = {
        "gamma": gamma,
        "a11": p.a11,
        "a21": p.a21,
        "a22": p.a22,
        "D3": D3,
        "D4": D4,
        "a22+a12": p.a22 + p.a12,
        "a11-a21": p.a11 - p.a21,
        "4a11-a21": 4.0 * p.a11 - p.a21,
    }
    for name, value in guards.items():
        _guard(value, name)
    eps = -math.copysign(1.0, p.a11 * p.a21)
    root = math.sqrt(abs(p.a11 * p.a21))
    k1 = eps * root / p.a21
    k2 = -eps * D4 / root
    k3 = -root / (3.0 * p.a11)
    k4 = 16.0 * p.a11**2 * root / (3.0 * D4)
    k5 = 4.0 * eps * (2.0 * p.a11 - p.a21) * root / (3.0 * D4)
    if eps > 0.0:
        cls = "saddle"
    else:
        cls = "elliptic" if k2 * k2 - 8.0 > 0.0 else "focus"
    return ST2Data(
        x1_star=-p.b1 / (2.0 * p.a11),
        e_star=p.b1**2 / (4.0 * p.a11),
        b2_star=p.b1 * p.a21 / (2.0 * p.a11),
        gamma=gamma,
        D3=D3,
        D4=D4,
        eps=eps,
        k1=k1,
        k2=k2,
        k3=k3,
        k4=k4,
        k5=k5,
        dbt_class=cls,
        nondegeneracy=guards,
    )


def conditions_residual(k1, k2, k3, eps):
    """The two structure conditions of the reduced planar model; both vanish
    identically for coefficients coming from st2_point."""
    return (2.0 * eps * k1 * k1 - k1 * k2 - 1.0, 3.0 * k1 * k3 - 1.0)


def _min2_polys(k1, k2, k3, eps, cap=6):
    """(g, f2-on-manifold building blocks) as polys in (x, a, b)."""
    x = TruncMultiPoly.var(0, 3, cap)
    a = TruncMultiPoly.var(1, 3, cap)
    b = TruncMultiPoly.var(2, 3, cap)
    g = k1 * a + k1 * b * x + (eps * k1) * x**2 + (1.0 / 3.0) * x**3
    def f2(y):
        return (
            a * x + k1 * b * y + b * x**2 + k2 * x * y + x**2 * y
            + eps * x**3 + k3 * x**4
        )
    return x, a, b, g, f2


def invariant_manifold_check(k1, k2, k3, eps) -> TruncMultiPoly:
    """Residual of the invariance identity for the cubic manifold
    y = g(x, a, b); identically zero iff the structure conditions hold."""
    x, a, b, g, f2 = _min2_polys(k1, k2, k3, eps)
    gx = g.diff(0)
    return gx * g - f2(g)


def manifold_factorisation_residual(k1, k2, k3, eps) -> TruncMultiPoly:
    """f2(x, 0, a, b) - x*g(x, a, b)/k1; exactly zero as a polynomial, which
    places every nontrivial equilibrium on the manifold."""
    x, a, b, g, f2 = _min2_polys(k1, k2, k3, eps)
    zero = TruncMultiPoly(3, 6)
    return f2(zero) - x * g * (1.0 / k1)


def cusp_map(a, b):
    """Parameter map from the scalar minimal model onto the standard cusp
    unfolding: (a, b) -> (mu, nu)."""
    return (-a * b / 3.0 + 2.0 * b**3 / 27.0, a - b * b / 3.0)


def cusp_map_jacobian_det(a, b):
    # D(mu,nu)/D(a,b) = [[-b/3, -a/3 + 2b^2/9], [1, -2b/3]] -> det = a/3
    return a / 3.0


@dataclass(frozen=True)
class ST1Nondegeneracy:
    fold_df_da: float
    fold_d2f_dx2: float
    tc_df_da: float
    tc_d2f_dadx: float
    tc_d2f_dx2: float


def st1_nondegeneracy(b: float, eps: float = 1.0) -> ST1Nondegeneracy:
    """Fold coefficients at a = b^2/4 (x = -b/2) and transcritical
    coefficients at the origin for the scalar minimal model."""
    if b == 0.0:
        raise DegenerateModelError("b = 0 is the interaction point itself")
    # f(x, a) = a x + b x^2 + eps x^3; at the fold x = -b/2 (for eps = 1)
    x_fold = -b / 2.0
    return ST1Nondegeneracy(
        fold_df_da=x_fold,
        fold_d2f_dx2=2.0 * b + 6.0 * eps * x_fold,
        tc_df_da=0.0,
        tc_d2f_dadx=1.0,
        tc_d2f_dx2=2.0 * b,
    )


def min2_sn_curve(b, eps, k3, k1=None):
    """Closed-form fold line a_SN(b) of the planar minimal model, and the
    location x_SN of the bifurcating equilibrium when k1 is supplied."""
    disc = 1.0 - 3.0 * k3 * b
    if disc < 0.0:
        raise OutOfDomainError("requires 1 - 3*k3*b >= 0")
    a_sn = eps / (27.0 * k3 * k3) * (2.0 * math.sqrt(disc**3) - 2.0 + 9.0 * k3 * b)
    if k1 is None:
        return a_sn
    x_sn = eps * k1 * (math.sqrt(disc) - 1.0)
    return a_sn, x_sn


def dbt_map(a, b, eps, k1, k2) -> DBTMapData:
    """Map from the minimal-model parameters (a, b) into the versal DBT
    parameter space (mu1, mu2, nu); the image always lies on the embedding
    surface."""
    a_bar = a - eps * b * b / 3.0
    b_bar = b - b * b / (9.0 * k1)
    mu1 = -(eps / 3.0) * (a_bar + eps * b_bar * b_bar / 9.0) * b_bar
    mu2 = a_bar
    nu = (k1 - eps * k2 / 3.0) * b_bar
    s_res, _ = dbt_surfaces(mu1, mu2, nu, eps, k1, k2)
    return DBTMapData(
        a=a,
        b=b,
        a_bar=a_bar,
        b_bar=b_bar,
        mu1=mu1,
        mu2=mu2,
        nu=nu,
        z1_const=eps * b / 3.0 - eps * b * b / (27.0 * k1),
        z1_xb=-2.0 * eps * b / (3.0 * k2),
        z2_y=1.0 - 2.0 * eps * b / (3.0 * k2),
        s_residual=s_res,
    )


def dbt_surfaces(mu1, mu2, nu, eps, k1, k2):
    """Residuals of the embedding surface and of the saddle-node surface of
    the versal DBT unfolding."""
    c = 3.0 * k1 - eps * k2
    _guard(c, "3k1 - eps*k2")
    s_res = c**3 * mu1 + eps * c**2 * mu2 * nu + nu**3
    sn_res = 27.0 * mu1 * mu1 + 4.0 * eps * mu2**3
    return s_res, sn_res


def gamma_curves(nu, eps, k1, k2):
    """Points of the two intersection curves of the embedding surface with
    the saddle-node surface, parametrised by nu.

    Gamma_SN is the transversal intersection (image of the fold line),
    Gamma_TC the tangency (image of the transcritical line).  The mu2
    components carry a factor eps so that both curves lie on both surfaces
    for either sign of eps.
    """
    c = 3.0 * k1 - eps * k2
    _guard(c, "3k1 - eps*k2")
    gamma_sn = (-0.25 * nu**3 / c**3, -0.75 * eps * nu**2 / c**2)
    gamma_tc = (2.0 * nu**3 / c**3, -3.0 * eps * nu**2 / c**2)
    return gamma_sn, gamma_tc


# ---------------------------------------------------------------------------
# centre-manifold verification at the single-zero point


def _st1_psi(params: MLVParams, cap=3, perturbation=None):
    p = params
    D1 = p.a11 * p.a22 - p.a12 * p.a21
    D2 = 2.0 * p.a11 * p.a22 - p.a12 * p.a21
    D3 = 2.0 * p.a11 * p.a22 - p.a12 * p.a21 - p.a22 * p.a21
    z2 = TruncMultiPoly.var(0, 3, cap)
    z3 = TruncMultiPoly.var(1, 3, cap)
    z4 = TruncMultiPoly.var(2, 3, cap)
    pref = D2 / (p.b1 * p.a21 * p.a12)
    psi = pref * (
        (p.a22 * D1 / p.a21**2) * z2**2
        + p.a11 * z3**2
        - (D3 / p.a21) * z2 * z3
        + (p.a22 / p.a21) * z2 * z4
    )
    if perturbation:
        psi = psi + TruncMultiPoly(3, cap, dict(perturbation))
    return psi, (z2, z3, z4), (D1, D2, D3)


def _st1_extended_rhs(params, psi, zs, Ds):
    """(zdot1, zdot2) of the extended system with z1 substituted by psi."""
    p = params
    z2, z3, z4 = zs
    D1, D2, D3 = Ds
    lam = p.b1 * p.a12 * p.a21 / D2  # decay rate of the hyperbolic direction
    zdot1 = (
        -lam * psi
        + p.a11 * psi**2
        - (D3 / p.a21) * psi * z2
        + (p.a22 / p.a21**2) * D1 * z2**2
        + p.a11 * z3**2
        + 2.0 * p.a11 * psi * z3
        - (D3 / p.a21) * z2 * z3
        + (p.a22 / p.a21) * z2 * z4
    )
    zdot2 = p.a21 * psi * z2 + p.a21 * z2 * z3 + z2 * z4
    return zdot1, zdot2


def verify_st1_centre_manifold(params: MLVParams, psi_perturbation=None):
    """Invariance residual of the quadratic centre-manifold graph at the
    single-zero point: D(psi) . zdot2 - zdot1 on the manifold.

    All coefficients of total degree <= 2 vanish (to rounding) when the
    quadratic Taylor coefficients of psi are correct.  ``psi_perturbation``
    maps exponent triples (in z2, z3, z4) to coefficient offsets, for
    deliberate-fault checks.
    """
    st1_point(params)  # guard check
    psi, zs, Ds = _st1_psi(params, perturbation=psi_perturbation)
    zdot1, zdot2 = _st1_extended_rhs(params, psi, zs, Ds)
    residual = psi.diff(0) * zdot2 - zdot1
    return residual


def st1_reduced_dynamics(params: MLVParams):
    """zdot2 restricted to the centre manifold, as a truncated polynomial in
    (z2, z3, z4)."""
    psi, zs, Ds = _st1_psi(params)
    _, zdot2 = _st1_extended_rhs(params, psi, zs, Ds)
    return zdot2


# ---------------------------------------------------------------------------
# first Lyapunov coefficient of a planar Hopf point


def first_lyapunov(model: ModelDef, params, hopf_eq) -> float:
    """First Lyapunov coefficient at a Hopf-type equilibrium of a planar
    model, from the exact polynomial expansion of the field.

    Positive sign means the cubic normal-form term pushes orbits outward
    (an unstable small cycle coexists with the stable focus side).
    """
    if model.dim != 2:
        raise UsageError("first_lyapunov needs a planar model")
    state = np.atleast_1d(np.asarray(hopf_eq.state, dtype=float))
    eig = hopf_eq.eigen
    if eig.is_real or eig.det <= 0.0:
        raise UsageError("equilibrium is not Hopf-type")
    omega = math.sqrt(eig.det - eig.trace**2 / 4.0)

    cap = 3
    f1, f2 = field_polys(model, params, cap=cap)
    # shift the equilibrium to the origin
    u = TruncMultiPoly.var(0, 2, cap)
    v = TruncMultiPoly.var(1, 2, cap)
    shift = (u + state[0], v + state[1])
    f1 = f1.compose(shift)
    f2 = f2.compose(shift)

    j11, j12 = f1.coeff((1, 0)), f1.coeff((0, 1))
    j21, j22 = f2.coeff((1, 0)), f2.coeff((0, 1))
    # complex eigenvector for +i*omega: (J - i w I) w = 0
    # w = (j12, i*omega - j11); real/imag parts span the rotation basis
    wr = np.array([j12, (j11 + j22) / 2.0 - j11])
    wi = np.array([0.0, omega])
    T = np.column_stack([wi, wr])
    if abs(np.linalg.det(T)) < 1e-14:
        # j12 == 0: use the other row of (J - i w I)
        wr = np.array([(j11 + j22) / 2.0 - j22, j21])
        wi = np.array([omega, 0.0])
        T = np.column_stack([wi, wr])
    Tinv = np.linalg.inv(T)

    # substitute (x, y) = T (u, v) and rotate the field back
    g1 = f1.compose((T[0, 0] * u + T[0, 1] * v, T[1, 0] * u + T[1, 1] * v))
    g2 = f2.compose((T[0, 0] * u + T[0, 1] * v, T[1, 0] * u + T[1, 1] * v))
    P = Tinv[0, 0] * g1 + Tinv[0, 1] * g2
    Q = Tinv[1, 0] * g1 + Tinv[1, 1] * g2

    pxx, pxy, pyy = 2 * P.coeff((2, 0)), P.coeff((1, 1)), 2 * P.coeff((0, 2))
    qxx, qxy, qyy = 2 * Q.coeff((2, 0)), Q.coeff((1, 1)), 2 * Q.coeff((0, 2))
    pxxx, pxyy = 6 * P.coeff((3, 0)), 2 * P.coeff((1, 2))
    qxxy, qyyy = 2 * Q.coeff((2, 1)), 6 * Q.coeff((0, 3))

    return (pxxx + pxyy + qxxy + qyyy) / 16.0 + (
        pxy * (pxx + pyy) - qxy * (qxx + qyy) - pxx * qxx + pyy * qyy
    ) / (16.0 * omega)
