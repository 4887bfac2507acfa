"""Trajectory integration and global objects: invariant-manifold traces,
heteroclinic/homoclinic splitting, limit cycles, and the classification of
homoclinic-to-saddle-node fold segments.

The stepping itself happens in the backend kernel (compiled when
available); everything here works on the returned meshes and dense-output
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import backend
from .errors import NumericalError, UsageError
from .models import ModelDef, eval_field, eval_jacobian

__all__ = [
    "Trajectory",
    "Section",
    "CycleRecord",
    "ConnectionSpec",
    "ConnectionResult",
    "integrate",
    "trace_manifold",
    "connection_splitting",
    "find_connection",
    "find_limit_cycle",
    "classify_sn_segment",
    "saddle_eigenvectors",
]


@dataclass
class Trajectory:
    """Accepted mesh plus per-step dense-output coefficients."""

    t: np.ndarray          # (n+1,)
    y: np.ndarray          # (n+1, dim)
    dense: np.ndarray      # (n, 5, dim)
    status: int
    crossing: tuple | None = None   # (t, y) if truncated at a section

    @property
    def ok(self):
        return self.status == backend.STATUS_DONE

    @property
    def t_final(self):
        return float(self.t[-1])

    @property
    def y_final(self):
        return self.y[-1]

    def eval(self, t):
        """Dense-output evaluation at a single time inside the mesh."""
        ts = self.t
        increasing = ts[-1] >= ts[0]
        i = np.searchsorted(ts, t) - 1 if increasing else len(ts) - 1 - np.searchsorted(ts[::-1], t)
        if increasing:
            i = int(np.clip(i, 0, len(ts) - 2))
        else:
            i = int(np.clip(np.searchsorted(-ts, -t) - 1, 0, len(ts) - 2))
        h = ts[i + 1] - ts[i]
        if h == 0.0:
            return self.y[i].copy()
        th = (t - ts[i]) / h
        r = self.dense[i]
        return r[0] + th * (r[1] + (1.0 - th) * (r[2] + th * (r[3] + (1.0 - th) * r[4])))


@dataclass
class Section:
    """Oriented line segment in the plane used for crossings/splitting."""

    anchor: np.ndarray
    normal: np.ndarray
    direction: str = "both"      # '+', '-' or 'both'
    halfwidth: float = math.inf

    def __post_init__(self):
        self.anchor = np.asarray(self.anchor, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        nn = float(np.linalg.norm(n))
        if nn == 0.0 or not np.all(np.isfinite(self.anchor)):
            raise UsageError("section needs a finite anchor and nonzero normal")
        self.normal = n / nn

    @property
    def tangent(self):
        return np.array([-self.normal[1], self.normal[0]])

    def signed_distance(self, y):
        return float(np.dot(np.asarray(y) - self.anchor, self.normal))

    def along(self, y):
        return float(np.dot(np.asarray(y) - self.anchor, self.tangent))

    def point_at(self, s):
        return self.anchor + s * self.tangent


@dataclass
class CycleRecord:
    section_point: np.ndarray
    period: float
    multiplier: float
    stable: bool
    residual: float


@dataclass
class ConnectionSpec:
    """Which manifolds to connect and where to measure the splitting."""

    saddle_a: object                 # Equilibrium (unstable manifold traced)
    saddle_b: object                 # Equilibrium (stable manifold traced)
    section: Section
    side_a: int | None = None        # +-1 seed side; None tries both
    side_b: int | None = None
    delta: float = 1e-6
    t_budget: float = 2000.0
    crossing_filter: object = None   # predicate on the crossing point
    rtol: float = 1e-10
    atol: float = 1e-12


@dataclass
class ConnectionResult:
    splitting: float
    point_unstable: np.ndarray
    point_stable: np.ndarray
    reached: bool
    detail: str = ""


def integrate(model: ModelDef, params, state0, t_span, rtol=1e-10, atol=1e-12,
              max_steps=2_000_000) -> Trajectory:
    """Adaptive RK5(4) integration over t_span (either direction)."""
    if rtol <= 0.0 or atol <= 0.0:
        raise UsageError("tolerances must be positive")
    s0 = np.atleast_1d(np.asarray(state0, dtype=float))
    if s0.shape != (model.dim,) or not np.all(np.isfinite(s0)):
        raise UsageError("bad initial state")
    t0, t1 = float(t_span[0]), float(t_span[1])
    ts, ys, dense, status = backend.integrate_span(
        model.kernel_id, params.as_array(), s0, t0, t1, rtol, atol,
        0.0, max_steps,
    )
    return Trajectory(ts, ys, dense, status)


def section_crossings(traj: Trajectory, section: Section, t_min=None,
                      refine_iters=80):
    """All section crossings of a planar trajectory, in mesh order."""
    svals = (traj.y - section.anchor) @ section.normal
    out = []
    for i in range(len(traj.t) - 1):
        a, b = svals[i], svals[i + 1]
        if a == b or a * b > 0.0:
            continue
        if section.direction == "+" and not (a < 0.0 <= b):
            continue
        if section.direction == "-" and not (a > 0.0 >= b):
            continue
        ta, tb = traj.t[i], traj.t[i + 1]
        fa = a
        for _ in range(refine_iters):
            tm = 0.5 * (ta + tb)
            fm = section.signed_distance(traj.eval(tm))
            if fa * fm <= 0.0:
                tb = tm
            else:
                ta, fa = tm, fm
        tc = 0.5 * (ta + tb)
        yc = traj.eval(tc)
        if t_min is not None and abs(tc - traj.t[0]) < t_min:
            continue
        if abs(section.along(yc)) > section.halfwidth:
            continue
        if abs(section.signed_distance(yc)) > 1e-8 * max(
            1.0, float(np.max(np.abs(yc)))
        ):
            continue
        out.append((float(tc), yc))
    return out


def saddle_eigenvectors(model, state, params):
    """(lambda_s, v_s, lambda_u, v_u) of a planar saddle, unit vectors."""
    j = eval_jacobian(model, state, params)
    lam, vecs = np.linalg.eig(j)
    if np.iscomplexobj(lam) and np.any(np.abs(lam.imag) > 0.0):
        raise UsageError("equilibrium has complex eigenvalues; not a saddle")
    lam = lam.real
    vecs = vecs.real
    order = np.argsort(lam)
    ls, lu = lam[order[0]], lam[order[1]]
    if not (ls < 0.0 < lu):
        raise UsageError("equilibrium is not a saddle")
    vs = vecs[:, order[0]] / np.linalg.norm(vecs[:, order[0]])
    vu = vecs[:, order[1]] / np.linalg.norm(vecs[:, order[1]])
    return ls, vs, lu, vu


def trace_manifold(model: ModelDef, params, saddle, which, side=1,
                   delta=1e-6, t_budget=1000.0, section=None,
                   rtol=1e-10, atol=1e-12, n_chunks=16) -> Trajectory:
    """Integrate a one-dimensional saddle manifold branch from a linear
    seed; stops at the first admissible section crossing if one is given.

    ``which`` is 'stable' (traced backward in time) or 'unstable'.
    """
    if which not in ("stable", "unstable"):
        raise UsageError("which must be 'stable' or 'unstable'")
    if not (1e-8 <= delta <= 1e-4):
        raise UsageError("delta must lie in [1e-8, 1e-4]")
    state = np.atleast_1d(np.asarray(saddle.state, dtype=float))
    ls, vs, lu, vu = saddle_eigenvectors(model, state, params)
    v = vu if which == "unstable" else vs
    seed = state + side * delta * v
    tdir = 1.0 if which == "unstable" else -1.0

    chunk = t_budget / n_chunks
    t0 = 0.0
    pieces = []
    crossing = None
    cur = seed
    status = backend.STATUS_DONE
    for _ in range(n_chunks):
        tr = integrate(model, params, cur, (t0, t0 + tdir * chunk),
                       rtol=rtol, atol=atol)
        pieces.append(tr)
        status = tr.status
        if section is not None:
            hits = section_crossings(tr, section)
            if getattr(section, "crossing_filter", None):
                hits = [h for h in hits if section.crossing_filter(h[1])]
            if hits:
                crossing = hits[0]
                break
        if tr.status != backend.STATUS_DONE:
            break
        t0 = tr.t_final
        cur = tr.y_final

    t = np.concatenate([p.t if i == 0 else p.t[1:] for i, p in enumerate(pieces)])
    y = np.concatenate([p.y if i == 0 else p.y[1:] for i, p in enumerate(pieces)])
    dense = np.concatenate([p.dense for p in pieces]) if pieces[0].dense.size else pieces[0].dense
    return Trajectory(t, y, dense, status, crossing=crossing)


def _first_admissible_crossing(model, params, saddle, which, spec, sides):
    # the spec filter must act during tracing, otherwise the trace stops at
    # the first raw crossing and admissible later ones are never seen
    section = spec.section
    prior = getattr(section, "crossing_filter", None)
    if spec.crossing_filter is not None:
        if prior is None:
            section.crossing_filter = spec.crossing_filter
        else:
            section.crossing_filter = (
                lambda y, a=prior, b=spec.crossing_filter: a(y) and b(y))
    best = None
    try:
        for side in sides:
            tr = trace_manifold(
                model, params, saddle, which, side=side, delta=spec.delta,
                t_budget=spec.t_budget, section=section,
                rtol=spec.rtol, atol=spec.atol,
            )
            if tr.crossing is None:
                continue
            tc, yc = tr.crossing
            if best is None or abs(tc) < abs(best[0]):
                best = (tc, yc)
    finally:
        section.crossing_filter = prior
    return best


def connection_splitting(model: ModelDef, params, spec: ConnectionSpec) -> ConnectionResult:
    """Signed gap, along the section, between the unstable manifold of
    saddle A and the stable manifold of saddle B."""
    sides_a = (spec.side_a,) if spec.side_a is not None else (1, -1)
    sides_b = (spec.side_b,) if spec.side_b is not None else (1, -1)
    hit_u = _first_admissible_crossing(model, params, spec.saddle_a,
                                       "unstable", spec, sides_a)
    hit_s = _first_admissible_crossing(model, params, spec.saddle_b,
                                       "stable", spec, sides_b)
    if hit_u is None or hit_s is None:
        missing = []
        if hit_u is None:
            missing.append("unstable")
        if hit_s is None:
            missing.append("stable")
        return ConnectionResult(math.nan, np.empty(0), np.empty(0), False,
                                detail=f"no section crossing: {','.join(missing)}")
    pu, ps = hit_u[1], hit_s[1]
    gap = spec.section.along(pu) - spec.section.along(ps)
    return ConnectionResult(gap, pu, ps, True)


@dataclass
class ConnectionSearch:
    found: bool
    param: float | None
    reason: str
    iterations: int = 0


def find_connection(model: ModelDef, params, free_param: str, bracket,
                    setup, tol_param=1e-9, max_iter=200) -> ConnectionSearch:
    """Solve the splitting function for the connection parameter.

    ``setup(params)`` builds the ConnectionSpec at the current parameters
    (the saddles move with the parameter).  Bisection narrows the bracket,
    a secant step polishes once the interval is small.  A bracket without
    a sign change is a NOT-FOUND result, not an error.
    """

    def split_at(value):
        p = dc_replace(params, **{free_param: value})
        spec = setup(p)
        res = connection_splitting(model, p, spec)
        if not res.reached:
            raise NumericalError(
                f"splitting undefined at {free_param}={value}: {res.detail}")
        return res.splitting

    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = split_at(lo), split_at(hi)
    if flo == 0.0:
        return ConnectionSearch(True, lo, "exact at bracket end")
    if fhi == 0.0:
        return ConnectionSearch(True, hi, "exact at bracket end")
    if flo * fhi > 0.0:
        return ConnectionSearch(False, None, "no sign change in bracket")

    it = 0
    while hi - lo > tol_param and it < max_iter:
        it += 1
        # bisection first; secant once the bracket is narrow
        if hi - lo < 1e-4 * max(1.0, abs(lo)):
            mid = lo - flo * (hi - lo) / (fhi - flo)
            if not (lo < mid < hi):
                mid = 0.5 * (lo + hi)
        else:
            mid = 0.5 * (lo + hi)
        fmid = split_at(mid)
        if fmid == 0.0:
            return ConnectionSearch(True, mid, "converged", it)
        if flo * fmid < 0.0:
            hi, fhi = mid, fmid
        else:
            lo, flo = mid, fmid
    return ConnectionSearch(True, 0.5 * (lo + hi), "converged", it)


def _return_map(model, params, section, s, t_max, rtol, atol):
    y0 = section.point_at(s)
    f0 = eval_field(model, y0, params)
    fn = float(np.dot(f0, section.normal))
    direction = "+" if fn > 0.0 else "-"
    sec = Section(section.anchor, section.normal, direction,
                  section.halfwidth)
    tr = integrate(model, params, y0, (0.0, t_max), rtol=rtol, atol=atol)
    hits = section_crossings(tr, sec, t_min=1e-8)
    # skip the departure itself: require some transversal travel time
    hits = [h for h in hits if h[0] > 1e-6]
    if not hits:
        return None
    tc, yc = hits[0]
    return sec.along(yc), tc


def find_limit_cycle(model: ModelDef, params, section: Section, guess,
                     t_max=500.0, rtol=1e-11, atol=1e-13, tol=1e-10,
                     max_newton=30) -> CycleRecord:
    """Newton shooting on the first-return map restricted to the section."""
    guess = np.atleast_1d(np.asarray(guess, dtype=float))
    s = section.along(guess)
    ds = 1e-7 * max(1.0, abs(s))
    period = None
    for _ in range(max_newton):
        r0 = _return_map(model, params, section, s, t_max, rtol, atol)
        if r0 is None:
            raise NumericalError("no return to section within time budget")
        rp = _return_map(model, params, section, s + ds, t_max, rtol, atol)
        rm = _return_map(model, params, section, s - ds, t_max, rtol, atol)
        if rp is None or rm is None:
            raise NumericalError("return map probe left the section")
        deriv = (rp[0] - rm[0]) / (2.0 * ds)
        resid = r0[0] - s
        period = r0[1]
        if abs(resid) < tol * max(1.0, abs(s)):
            mult = deriv
            return CycleRecord(
                section_point=section.point_at(s),
                period=period,
                multiplier=mult,
                stable=abs(mult) < 1.0,
                residual=abs(resid),
            )
        denom = deriv - 1.0
        if denom == 0.0:
            raise NumericalError("singular shooting derivative")
        step = resid / denom
        # damp wild steps; the return map is only locally defined
        cap = 0.25 * max(abs(s), 10.0 * ds)
        if abs(step) > cap:
            step = math.copysign(cap, step)
        s = s - step
    raise NumericalError("cycle shooting did not converge")


def classify_sn_segment(model: ModelDef, params_on_fold, fold_point,
                        loop_radius=None, escape_radius=None,
                        t_budget=4e3, delta=1e-7,
                        rtol=1e-10, atol=1e-12):
    """Classify a fold-curve point as plain SN or SN0 (homoclinic loop to
    the saddle-node).

    The loop, when it exists, is carried by the strongly unstable
    separatrix transverse to the centre direction: it stays bounded and
    closes up on the fold point (exactly so in the coalescence limit, and
    within the fold's own splitting scale along the rest of the segment).
    So the test is: if the transverse eigenvalue is repelling, follow both
    branches of its separatrix; a branch that neither escapes nor settles
    far away, i.e. ends within ``loop_radius`` of the fold point, marks
    SN0.  A fold with attracting transverse direction only emits the
    repelling-centre orbit, which leaves along the invariant axis (MLV) or
    runs off to infinity (minimal models): plain SN.
    """
    state = np.atleast_1d(np.asarray(fold_point.state, dtype=float))
    scale = 1.0 + float(np.linalg.norm(state))
    if loop_radius is None:
        loop_radius = 0.5 * scale
    if escape_radius is None:
        escape_radius = 50.0 * scale
    j = eval_jacobian(model, state, params_on_fold)
    lam, vecs = np.linalg.eig(j)
    lam = lam.real
    vecs = vecs.real
    order = np.argsort(np.abs(lam))
    lam_t = lam[order[-1]]
    if lam_t <= 1e-9 * scale:
        return "SN"
    vt = vecs[:, order[-1]] / np.linalg.norm(vecs[:, order[-1]])
    for sign in (1.0, -1.0):
        cur = state + sign * delta * vt
        t0 = 0.0
        chunk = t_budget / 16.0
        escaped = False
        for _ in range(16):
            tr = integrate(model, params_on_fold, cur, (t0, t0 + chunk),
                           rtol=rtol, atol=atol)
            d = np.linalg.norm(tr.y - state, axis=1)
            if tr.status != backend.STATUS_DONE or np.max(d) > escape_radius:
                escaped = True
                break
            t0 = tr.t_final
            cur = tr.y_final
        if not escaped and np.linalg.norm(cur - state) < loop_radius:
            return "SN0"
    return "SN"
