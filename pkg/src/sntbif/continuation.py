"""Pseudo-arclength continuation of equilibrium branches and codim-1
bifurcation curves, with sign-change localisation of codim-2 events.

The same predictor-corrector engine drives all curve types; each curve
type supplies an augmented defining system (plain equilibrium, fold with
null-vector, trace-zero for Hopf) and a set of scalar test functions whose
zeros are the embedded higher-codimension points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from .algebra import Eigen2, eigen2
from .errors import DegenerateModelError, NumericalError, UsageError
from .models import MLV, ModelDef, eval_field, eval_jacobian
from .equilibria import Equilibrium

__all__ = [
    "BranchPoint",
    "Curve",
    "CodimTwoPoint",
    "ContinuationOptions",
    "continue_equilibrium_branch",
    "continue_fold_curve",
    "continue_hopf_curve",
    "tc_curve_mlv",
    "detect_codim2",
    "detect_branch_events",
    "fold_start_from_equilibrium",
]

CURVE_KINDS = ("EQ", "SN", "TC", "HB", "NS", "HET", "HOM")
CODIM2_KINDS = ("ST1", "ST2", "BT", "CUSP", "SNHET", "T0")

# second-eigenvalue threshold separating a plain single-zero event from a
# double-zero one, relative to the spectral scale
DOUBLE_ZERO_TOL = 1e-6


@dataclass
class BranchPoint:
    state: np.ndarray
    params: dict
    eigen: object                 # Eigen2 or scalar
    tests: dict
    null_vector: np.ndarray | None = None
    flag: str = ""


@dataclass
class CodimTwoPoint:
    kind: str
    params: dict
    state: np.ndarray
    residuals: dict


@dataclass
class Curve:
    kind: str
    points: list
    markers: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    # private: raw unknown vectors and the defining problem, for event
    # refinement after the fact
    _us: list = field(default_factory=list, repr=False)
    _problem: object = None

    def param_array(self, name):
        return np.array([p.params[name] for p in self.points])


@dataclass
class ContinuationOptions:
    h0: float = 0.01
    h_max: float = 0.25
    h_min: float = 1e-10
    grow: float = 1.3
    shrink: float = 0.5
    grow_iters: int = 3            # grow h when the corrector needs fewer
    max_steps: int = 600           # per direction
    tol: float = 1e-10
    max_corr: int = 10
    param_bounds: dict | None = None
    state_bound: float = 1e4
    both_directions: bool = True
    first_direction: float = 1.0   # sign of the first active parameter's motion


# ---------------------------------------------------------------------------
# defining systems


def _fd_jacobian(fun, u, f0=None):
    if f0 is None:
        f0 = fun(u)
    m = len(f0)
    n = len(u)
    J = np.empty((m, n))
    for i in range(n):
        h = 1e-7 * max(1.0, abs(u[i]))
        up = u.copy(); up[i] += h
        um = u.copy(); um[i] -= h
        J[:, i] = (fun(up) - fun(um)) / (2.0 * h)
    return J


def _second_derivative(model, state, params, v):
    """D2F[v, v] by central differences of the field."""
    h = 1e-5 * max(1.0, float(np.max(np.abs(state))))
    fp = eval_field(model, state + h * v, params)
    fm = eval_field(model, state - h * v, params)
    f0 = eval_field(model, state, params)
    return (fp - 2.0 * f0 + fm) / (h * h)


def _fold_quadratic_coeff(model, state, params, v):
    """l . D2F[v,v] / 2 with l the unit left null vector of J."""
    j = np.atleast_2d(eval_jacobian(model, state, params))
    if j.shape == (1, 1):
        l = np.array([1.0])
    else:
        l = np.linalg.svd(j)[0][:, -1]
        # deterministic orientation; the SVD's sign is arbitrary
        if l[int(np.argmax(np.abs(l)))] < 0.0:
            l = -l
    return 0.5 * float(np.dot(l, _second_derivative(model, state, params, v)))


class _EquilibriumProblem:
    """u = (state, p); G = F(state; p)."""

    def __init__(self, model, params, free_param):
        self.model = model
        self.base = params
        self.free = (free_param,)
        self.n_state = model.dim

    def params_at(self, u):
        return dc_replace(self.base, **{self.free[0]: float(u[-1])})

    def residual(self, u):
        return np.atleast_1d(
            eval_field(self.model, u[: self.n_state], self.params_at(u)))

    def tests(self, u):
        s = u[: self.n_state]
        p = self.params_at(u)
        j = eval_jacobian(self.model, s, p)
        if self.model.dim == 1:
            return {"detJ": float(j), "trJ": float(j)}
        return {"detJ": float(np.linalg.det(j)), "trJ": float(np.trace(j))}

    def make_point(self, u):
        s = u[: self.n_state].copy()
        p = self.params_at(u)
        j = eval_jacobian(self.model, s, p)
        eig = float(j) if self.model.dim == 1 else eigen2(np.asarray(j))
        return BranchPoint(state=s, params={self.free[0]: float(u[-1])},
                           eigen=eig, tests=self.tests(u))


class _FoldProblem:
    """Planar: u = (state, v, p, q); G = [F, J v, (v.v - 1)/2].
    Scalar: u = (x, p, q); G = [f, f_x]."""

    def __init__(self, model, params, free_params):
        self.model = model
        self.base = params
        self.free = tuple(free_params)
        self.n_state = model.dim
        self.planar = model.dim == 2

    def params_at(self, u):
        return dc_replace(self.base, **{self.free[0]: float(u[-2]),
                                        self.free[1]: float(u[-1])})

    def _split(self, u):
        s = u[: self.n_state]
        v = u[self.n_state: 2 * self.n_state] if self.planar else None
        return s, v

    def residual(self, u):
        s, v = self._split(u)
        p = self.params_at(u)
        f = np.atleast_1d(eval_field(self.model, s, p))
        j = eval_jacobian(self.model, s, p)
        if not self.planar:
            return np.array([f[0], float(j)])
        return np.concatenate([f, j @ v, [0.5 * (float(v @ v) - 1.0)]])

    def null_vector(self, u):
        s, v = self._split(u)
        if self.planar:
            return v / np.linalg.norm(v)
        return np.array([1.0])

    def tests(self, u):
        s, v = self._split(u)
        p = self.params_at(u)
        j = eval_jacobian(self.model, s, p)
        out = {}
        if self.planar:
            out["trJ"] = float(np.trace(j))
            ev = eigen2(np.asarray(j))
            lam = sorted(ev.values, key=lambda z: abs(z.real))
            out["second_eig"] = float(lam[1].real)
            vv = v / np.linalg.norm(v)
        else:
            vv = np.array([1.0])
        out["fold_coeff"] = _fold_quadratic_coeff(self.model, s, p, vv)
        if self.model is MLV:
            out["x2"] = float(s[1])
            out["transverse"] = float(p.b2 + p.a21 * s[0])
        return out

    def make_point(self, u):
        s, v = self._split(u)
        p = self.params_at(u)
        j = eval_jacobian(self.model, s, p)
        eig = float(j) if self.model.dim == 1 else eigen2(np.asarray(j))
        return BranchPoint(
            state=s.copy(),
            params={self.free[0]: float(u[-2]), self.free[1]: float(u[-1])},
            eigen=eig,
            tests=self.tests(u),
            null_vector=self.null_vector(u),
        )


class _HopfProblem:
    """u = (state, p, q); G = [F, tr J]."""

    def __init__(self, model, params, free_params):
        if model.dim != 2:
            raise UsageError("Hopf curves need a planar model")
        self.model = model
        self.base = params
        self.free = tuple(free_params)
        self.n_state = 2

    def params_at(self, u):
        return dc_replace(self.base, **{self.free[0]: float(u[-2]),
                                        self.free[1]: float(u[-1])})

    def residual(self, u):
        s = u[:2]
        p = self.params_at(u)
        f = eval_field(self.model, s, p)
        j = eval_jacobian(self.model, s, p)
        return np.concatenate([f, [float(np.trace(j))]])

    def tests(self, u):
        s = u[:2]
        p = self.params_at(u)
        j = eval_jacobian(self.model, s, p)
        return {"detJ": float(np.linalg.det(j))}

    def make_point(self, u):
        s = u[:2]
        p = self.params_at(u)
        j = np.asarray(eval_jacobian(self.model, s, p))
        t = self.tests(u)
        return BranchPoint(
            state=s.copy(),
            params={self.free[0]: float(u[-2]), self.free[1]: float(u[-1])},
            eigen=eigen2(j),
            tests=t,
            flag="NS" if t["detJ"] < 0.0 else "",
        )


# ---------------------------------------------------------------------------
# predictor-corrector engine


def _correct(problem, u_pred, tangent, tol, max_corr):
    """Newton on [G; tangent.(u - u_pred)] = 0. Returns (u, iters) or None."""
    u = u_pred.copy()
    scale = max(1.0, float(np.max(np.abs(u))))
    for it in range(1, max_corr + 1):
        g = problem.residual(u)
        c = float(np.dot(tangent, u - u_pred))
        rhs = np.concatenate([g, [c]])
        if np.max(np.abs(rhs)) < tol * scale:
            return u, it
        J = np.vstack([_fd_jacobian(problem.residual, u, g), tangent])
        try:
            du = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(du)):
            return None
        u = u - du
    g = problem.residual(u)
    if np.max(np.abs(g)) < tol * scale:
        return u, max_corr
    return None


def _tangent(problem, u, prev=None):
    J = _fd_jacobian(problem.residual, u)
    if prev is None:
        # nullspace direction from the SVD
        t = np.linalg.svd(J)[2][-1]
    else:
        A = np.vstack([J, prev])
        b = np.zeros(len(u)); b[-1] = 1.0
        try:
            t = np.linalg.solve(A, b)
        except np.linalg.LinAlgError:
            t = np.linalg.svd(J)[2][-1]
    t = t / np.linalg.norm(t)
    if prev is not None and float(np.dot(t, prev)) < 0.0:
        t = -t
    return t


def _in_bounds(problem, u, opts):
    if float(np.max(np.abs(u[: problem.n_state]))) > opts.state_bound:
        return False
    if opts.param_bounds:
        vals = {name: float(u[-(len(problem.free) - i)])
                for i, name in enumerate(problem.free)}
        for name, (lo, hi) in opts.param_bounds.items():
            if name in vals and not (lo <= vals[name] <= hi):
                return False
    return True


def _run_direction(problem, u0, t0, opts, diagnostics):
    us = []
    u, t = u0, t0
    h = opts.h0
    steps = 0
    while steps < opts.max_steps:
        res = _correct(problem, u + h * t, t, opts.tol, opts.max_corr)
        if res is None:
            h *= opts.shrink
            if h < opts.h_min:
                diagnostics.append("corrector divergence at step floor")
                break
            continue
        u_new, iters = res
        t = _tangent(problem, u_new, prev=t)
        u = u_new
        us.append(u.copy())
        steps += 1
        if not _in_bounds(problem, u, opts):
            break
        if iters <= opts.grow_iters:
            h = min(h * opts.grow, opts.h_max)
    return us


def _continue_curve(problem, u0, kind, opts):
    diagnostics = []
    t0 = _tangent(problem, u0)
    # orient: first free parameter moves in the requested direction
    if math.copysign(1.0, t0[-len(problem.free)]) != math.copysign(
            1.0, opts.first_direction):
        t0 = -t0
    res = _correct(problem, u0, t0, opts.tol, opts.max_corr)
    if res is None:
        raise NumericalError("seed does not converge onto the curve")
    u0 = res[0]
    t0 = _tangent(problem, u0, prev=t0)

    fwd = _run_direction(problem, u0, t0, opts, diagnostics)
    us = [u0] + fwd
    if opts.both_directions:
        bwd = _run_direction(problem, u0, -t0, opts, diagnostics)
        us = list(reversed(bwd)) + us

    points = [problem.make_point(u) for u in us]
    return Curve(kind=kind, points=points, diagnostics=diagnostics,
                 _us=us, _problem=problem)


# ---------------------------------------------------------------------------
# public constructors


def continue_equilibrium_branch(model: ModelDef, params, free_param: str,
                                start: Equilibrium,
                                opts: ContinuationOptions | None = None) -> Curve:
    opts = opts or ContinuationOptions()
    prob = _EquilibriumProblem(model, params, free_param)
    u0 = np.concatenate([np.atleast_1d(start.state),
                         [getattr(params, free_param)]])
    if float(np.max(np.abs(prob.residual(u0)))) > 1e-6:
        raise UsageError("start point is not an equilibrium")
    return _continue_curve(prob, u0, "EQ", opts)


def fold_start_from_equilibrium(model: ModelDef, params, free_params, eq):
    """Unknown vector for continue_fold_curve from a near-fold equilibrium."""
    s = np.atleast_1d(np.asarray(eq.state, dtype=float))
    if model.dim == 1:
        u = np.concatenate([s, [getattr(params, free_params[0]),
                                getattr(params, free_params[1])]])
        return u
    j = np.asarray(eval_jacobian(model, s, params))
    v = np.linalg.svd(j)[2][-1]
    return np.concatenate([s, v, [getattr(params, free_params[0]),
                                  getattr(params, free_params[1])]])


def continue_fold_curve(model: ModelDef, params, free_params, start,
                        opts: ContinuationOptions | None = None) -> Curve:
    """``start`` is an Equilibrium near the fold or a prepacked unknown
    vector from fold_start_from_equilibrium."""
    opts = opts or ContinuationOptions()
    prob = _FoldProblem(model, params, free_params)
    if isinstance(start, np.ndarray):
        u0 = start
    else:
        u0 = fold_start_from_equilibrium(model, params, free_params, start)
    return _continue_curve(prob, u0, "SN", opts)


def continue_hopf_curve(model: ModelDef, params, free_params, start,
                        opts: ContinuationOptions | None = None) -> Curve:
    opts = opts or ContinuationOptions()
    prob = _HopfProblem(model, params, free_params)
    if isinstance(start, np.ndarray):
        u0 = start
    else:
        u0 = np.concatenate([np.atleast_1d(start.state),
                             [getattr(params, free_params[0]),
                              getattr(params, free_params[1])]])
    return _continue_curve(prob, u0, "HB", opts)


def tc_curve_mlv(params, x1_range, n=401) -> Curve:
    """The transcritical curve of MLV in closed form, parametrised by the
    axis coordinate: e = -b1 x1 - a11 x1^2, b2 = -a21 x1."""
    p = params
    if p.a21 == 0.0:
        raise DegenerateModelError("tc_curve_mlv needs a21 != 0")
    lo, hi = float(x1_range[0]), float(x1_range[1])
    points = []
    xs = np.linspace(lo, hi, n)
    for x1 in xs:
        e = -p.b1 * x1 - p.a11 * x1 * x1
        b2 = -p.a21 * x1
        pp = dc_replace(p, e=e, b2=b2)
        j = np.asarray(eval_jacobian(MLV, np.array([x1, 0.0]), pp))
        points.append(BranchPoint(
            state=np.array([x1, 0.0]),
            params={"e": e, "b2": b2},
            eigen=eigen2(j),
            tests={"axis_eig": p.b1 + 2.0 * p.a11 * x1, "transverse": 0.0},
        ))
    curve = Curve(kind="TC", points=points, _us=[np.array([x]) for x in xs],
                  _problem=_TCProblem(p))
    return curve


class _TCProblem:
    """Closed-form stand-in so TC curves refine events like the others."""

    def __init__(self, params):
        self.base = params
        self.free = ("e", "b2")
        self.n_state = 2

    def point_at(self, x1):
        p = self.base
        e = -p.b1 * x1 - p.a11 * x1 * x1
        b2 = -p.a21 * x1
        pp = dc_replace(p, e=e, b2=b2)
        j = np.asarray(eval_jacobian(MLV, np.array([x1, 0.0]), pp))
        return BranchPoint(
            state=np.array([x1, 0.0]),
            params={"e": e, "b2": b2},
            eigen=eigen2(j),
            tests={"axis_eig": p.b1 + 2.0 * p.a11 * x1, "transverse": 0.0},
        )


# ---------------------------------------------------------------------------
# codim-2 detection


def _refine_on_curve(problem, u_a, u_b, test_name, tol=1e-10, iters=100):
    """Bisection along the curve segment [u_a, u_b] on one test function."""
    if isinstance(problem, _TCProblem):
        xa, xb = float(u_a[0]), float(u_b[0])
        fa = problem.point_at(xa).tests[test_name]
        for _ in range(iters):
            xm = 0.5 * (xa + xb)
            fm = problem.point_at(xm).tests[test_name]
            if fa * fm <= 0.0:
                xb = xm
            else:
                xa, fa = xm, fm
            if abs(xb - xa) < tol:
                break
        return problem.point_at(0.5 * (xa + xb))

    direction = u_b - u_a
    length = float(np.linalg.norm(direction))
    t = direction / length

    def at(s):
        res = _correct(problem, u_a + s * direction, t, 1e-11, 12)
        if res is None:
            raise NumericalError("event refinement lost the curve")
        return res[0]

    sa, sb = 0.0, 1.0
    fa = problem.tests(at(sa))[test_name]
    for _ in range(iters):
        sm = 0.5 * (sa + sb)
        fm = problem.tests(at(sm))[test_name]
        if fa * fm <= 0.0:
            sb = sm
        else:
            sa, fa = sm, fm
        if (sb - sa) * length < tol:
            break
    return problem.make_point(at(0.5 * (sa + sb)))


def _classify_event(curve_kind, test_name, bp: BranchPoint):
    t = bp.tests
    if curve_kind == "SN":
        if test_name == "trJ":
            offaxis = abs(t.get("x2", 1.0)) > 1e-6 * max(
                1.0, float(np.max(np.abs(bp.state))))
            return "BT" if offaxis else "ST2"
        if test_name == "x2":
            scale = max(1.0, abs(t.get("second_eig", 1.0)), abs(t.get("trJ", 1.0)))
            double = abs(t.get("second_eig", 1.0)) < DOUBLE_ZERO_TOL * scale
            return "ST2" if double else "ST1"
        if test_name == "fold_coeff":
            # a vanishing quadratic coefficient at an axis crossing is the
            # ST interaction itself, not a cusp
            if abs(t.get("x2", 1.0)) < 1e-6 * max(
                    1.0, float(np.max(np.abs(bp.state)))):
                return None
            return "CUSP"
        if test_name == "transverse":
            # only an eigenvalue when the fold sits on the invariant axis,
            # and only a double zero when the fold eigenvalue joins it
            on_axis = abs(t.get("x2", 0.0)) < 1e-8 * max(
                1.0, float(np.max(np.abs(bp.state))))
            scale = max(1.0, abs(t.get("second_eig", 1.0)), abs(t.get("trJ", 1.0)))
            double = abs(t.get("second_eig", 1.0)) < DOUBLE_ZERO_TOL * scale
            return "ST2" if on_axis and double else None
    if curve_kind == "TC" and test_name == "axis_eig":
        return "ST2"
    if curve_kind in ("HB", "EQ") and test_name == "detJ":
        return "BT"
    return None


_EVENT_TESTS = {
    "SN": ("trJ", "x2", "fold_coeff", "transverse"),
    "TC": ("axis_eig",),
    "HB": ("detJ",),
}


def detect_branch_events(curve: Curve) -> list:
    """SN/TC/HB event points embedded in an equilibrium branch, localised
    by bisection on det J and tr J."""
    if curve.kind != "EQ" or curve._problem is None:
        return []
    prob = curve._problem
    out = []
    for name in ("detJ", "trJ"):
        vals = [p.tests.get(name) for p in curve.points]
        for i in range(len(vals) - 1):
            a, b = vals[i], vals[i + 1]
            if a is None or b is None or a == 0.0 or a * b >= 0.0:
                continue
            try:
                bp = _refine_on_curve(prob, curve._us[i], curve._us[i + 1],
                                      name)
            except NumericalError:
                curve.diagnostics.append(f"event refinement failed: {name}")
                continue
            if name == "trJ":
                if prob.model.dim == 1 or bp.tests["detJ"] <= 0.0:
                    continue  # neutral saddle, not a bifurcation
                bp.flag = "HB"
            else:
                # fold vs transcritical: a fold turns the branch around, so
                # the parameter motion reverses across the event (or stalls
                # right at it); a transcritical passes straight through
                seg = curve._us[i + 1] - curve._us[i]
                before = curve._us[i] - curve._us[i - 1] if i > 0 else seg
                after = (curve._us[i + 2] - curve._us[i + 1]
                         if i + 2 < len(curve._us) else seg)
                dp = abs(seg[-1]) / max(float(np.linalg.norm(seg)), 1e-300)
                turned = before[-1] * after[-1] <= 0.0
                bp.flag = "SN" if turned or dp < 0.1 else "TC"
            out.append(bp)
    curve.markers.extend(out)
    return out


def detect_codim2(curve: Curve) -> list:
    """Bisection on recorded test-function sign changes; the markers are
    appended to the curve and returned."""
    if curve._problem is None or not curve._us:
        return []
    names = _EVENT_TESTS.get(curve.kind, ())
    found = []
    for name in names:
        vals = [p.tests.get(name) for p in curve.points]
        for i in range(len(vals) - 1):
            a, b = vals[i], vals[i + 1]
            if a is None or b is None:
                continue
            if a == 0.0:
                # exact zero on a node: an event only when isolated, not
                # when the test vanishes identically along the curve
                prev = vals[i - 1] if i > 0 else None
                if b == 0.0 or prev == 0.0:
                    continue
                bp = curve.points[i]
            elif a * b >= 0.0:
                continue
            else:
                try:
                    bp = _refine_on_curve(curve._problem, curve._us[i],
                                          curve._us[i + 1], name)
                except NumericalError:
                    curve.diagnostics.append(f"event refinement failed: {name}")
                    continue
                # a jump (e.g. a null-vector orientation flip) bisects to a
                # point where the test is still large; only accept real zeros
                if abs(bp.tests[name]) > 1e-2 * max(abs(a), abs(b)):
                    continue
            kind = _classify_event(curve.kind, name, bp)
            if kind is None:
                continue
            dup = any(
                m.kind == kind and all(
                    abs(m.params[k] - bp.params[k]) < 1e-6 * max(1.0, abs(m.params[k]))
                    for k in m.params)
                for m in found)
            if dup:
                continue
            found.append(CodimTwoPoint(
                kind=kind,
                params=dict(bp.params),
                state=bp.state.copy(),
                residuals={name: abs(bp.tests[name])},
            ))
    curve.markers.extend(found)
    return found
