"""Two-parameter bifurcation diagram assembly.

Builds the full curve inventory for a model in a parameter window: fold
curves (with the homoclinic-to-saddle-node subsegments marked), the
transcritical curve, Hopf curves with neutral-saddle segments, and the
global connection curves (heteroclinic / homoclinic) located by shooting.
Codimension-two markers come from test-function sign changes on the
curves.  Seeding is automatic; a kind that cannot be seeded is reported
as not found instead of failing the whole diagram.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields as dc_fields, replace as dc_replace

import numpy as np

from .algebra import eigen2
from .continuation import (
    BranchPoint,
    CodimTwoPoint,
    ContinuationOptions,
    Curve,
    continue_equilibrium_branch,
    continue_fold_curve,
    continue_hopf_curve,
    detect_branch_events,
    detect_codim2,
    fold_start_from_equilibrium,
    tc_curve_mlv,
)
from .equilibria import CLASS_SADDLE, find_equilibria
from .errors import NumericalError, UsageError
from .flow import (
    ConnectionSpec,
    Section,
    classify_sn_segment,
    find_connection,
    integrate,
    saddle_eigenvectors,
)
from .models import MLV, ST2_MIN, MLVParams, ST2MinParams, eval_jacobian
from .normalform import min2_sn_curve, st1_point, st2_point

__all__ = ["DiagramSpec", "Diagram", "build_diagram", "circle_events",
           "region_census"]

DIAGRAM_MODELS = {"MLV": MLV, "ST2_MIN": ST2_MIN}

# codim-2 prescan margin fraction for the automatic window
WINDOW_MARGIN = 0.2


@dataclass
class DiagramSpec:
    """Recipe for one two-parameter diagram."""

    model: str                          # "MLV" or "ST2_MIN"
    fixed: dict                         # non-active parameter values
    active: tuple = ("e", "b2")         # the two continuation parameters
    ranges: dict | None = None          # {name: (lo, hi)}; None = auto window
    curve_kinds: tuple | None = None    # None = every applicable kind
    codim2: bool = True
    out_dir: str | None = None

    def __post_init__(self):
        if self.model not in DIAGRAM_MODELS:
            raise UsageError(f"unknown model {self.model!r}")
        names = {f.name for f in
                 dc_fields(DIAGRAM_MODELS[self.model].params_cls)}
        a, b = self.active
        if a == b:
            raise UsageError("active parameters must be distinct")
        for name in self.active:
            if name not in names:
                raise UsageError(f"parameter {name!r} not in model "
                                 f"{self.model}")
        for name in self.fixed:
            if name not in names:
                raise UsageError(f"parameter {name!r} not in model "
                                 f"{self.model}")
        if self.ranges is not None:
            for name in self.active:
                lo, hi = self.ranges[name]
                if not (lo < hi):
                    raise UsageError(f"empty range for {name!r}")


@dataclass
class Diagram:
    spec: DiagramSpec
    curves: list
    codim2_points: list
    window: dict                        # final {name: (lo, hi)}
    not_found: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# shared helpers


def _window_from_points(points, active, pad=WINDOW_MARGIN, min_size=0.5):
    """Bounding box of (p, q) tuples with a proportional margin."""
    arr = np.asarray(points, dtype=float)
    out = {}
    for i, name in enumerate(active):
        lo, hi = float(arr[:, i].min()), float(arr[:, i].max())
        size = max(hi - lo, min_size)
        out[name] = (lo - pad * size, hi + pad * size)
    return out


def _in_window(params, window, slack=0.0):
    for name, (lo, hi) in window.items():
        w = slack * (hi - lo)
        if not (lo - w <= params[name] <= hi + w):
            return False
    return True


def _clip_curve(curve, window):
    curve.points = [p for p in curve.points if _in_window(p.params, window)]
    curve.markers = [m for m in curve.markers if _in_window(m.params, window)]
    return curve


def _cont_opts(window, active, extra=0.05, **kw):
    """Continuation options scaled to the window size."""
    sizes = [window[n][1] - window[n][0] for n in active]
    diag = math.hypot(*sizes)
    bounds = {n: (window[n][0] - extra * (window[n][1] - window[n][0]),
                  window[n][1] + extra * (window[n][1] - window[n][0]))
              for n in active}
    opts = ContinuationOptions(
        h0=2e-3 * diag, h_max=2e-2 * diag, max_steps=2500,
        param_bounds=bounds, state_bound=1e6,
    )
    for k, v in kw.items():
        setattr(opts, k, v)
    return opts


def _mark_sn0_segments(model, curve, n_anchors=24, flip_iters=14):
    """Flag SN0 points on a fold curve.

    Classification runs on a subsample; each flip is bisected first down
    to adjacent mesh points and then parametrically between them, and a
    point pair is inserted at the flip so every segment of the polyline
    carries an unambiguous flag.
    """
    pts = curve.points
    if len(pts) < 2:
        return

    def classify(bp):
        eq = _fold_equilibrium(model, bp)
        return classify_sn_segment(model, _params_of(model, curve, bp), eq,
                                   rtol=1e-8, atol=1e-10)

    def lerp_point(bp0, bp1, t):
        state = (1.0 - t) * bp0.state + t * bp1.state
        params = {k: (1.0 - t) * bp0.params[k] + t * bp1.params[k]
                  for k in bp0.params}
        pp = dc_replace(curve._problem.base, **params)
        j = np.asarray(eval_jacobian(model, state, pp))
        tests = dict(bp0.tests)
        tests["trJ"] = float(np.trace(j))
        if "x2" in tests:
            tests["x2"] = float(state[1])
        if "transverse" in tests:
            tests["transverse"] = float(pp.b2 + pp.a21 * state[0])
        return BranchPoint(state=state, params=params, eigen=eigen2(j),
                           tests=tests)

    idx = np.unique(np.linspace(0, len(pts) - 1, n_anchors).astype(int))
    labels = {int(i): classify(pts[int(i)]) for i in idx}
    anchors = sorted(labels)
    for a, b in zip(anchors[:-1], anchors[1:]):
        if labels[a] == labels[b]:
            continue
        lo, hi = a, b
        while hi - lo > 1:
            mid = (lo + hi) // 2
            labels[mid] = classify(pts[mid])
            if labels[mid] == labels[lo]:
                lo = mid
            else:
                hi = mid
    anchors = sorted(labels)
    flips = []                       # (index, t, label below the flip)
    for a, b in zip(anchors[:-1], anchors[1:]):
        if labels[a] == labels[b] or b != a + 1:
            continue
        t_lo, t_hi = 0.0, 1.0
        for _ in range(flip_iters):
            tm = 0.5 * (t_lo + t_hi)
            lab = classify(lerp_point(pts[a], pts[b], tm))
            if lab == labels[a]:
                t_lo = tm
            else:
                t_hi = tm
        flips.append((a, 0.5 * (t_lo + t_hi), labels[a]))
    for i, bp in enumerate(pts):
        j = max(a for a in anchors if a <= i)
        if labels[j] == "SN0":
            bp.flag = "SN0"
    # split each flip segment so both sides end exactly at the flip; keep
    # the raw unknown vectors aligned with the point list
    for a, t, low_label in reversed(flips):
        lo_pt = lerp_point(pts[a], pts[a + 1], t)
        hi_pt = lerp_point(pts[a], pts[a + 1], t)
        lo_pt.flag = "SN0" if low_label == "SN0" else ""
        hi_pt.flag = "SN0" if low_label != "SN0" else ""
        pts[a + 1: a + 1] = [lo_pt, hi_pt]
        if curve._us and len(curve._us) + 2 == len(pts):
            u_mid = (1.0 - t) * curve._us[a] + t * curve._us[a + 1]
            curve._us[a + 1: a + 1] = [u_mid, u_mid.copy()]


def _fold_equilibrium(model, bp):
    """The nonhyperbolic equilibrium carried by a fold-curve point."""
    return _EqShim(bp.state)


class _EqShim:
    def __init__(self, state):
        self.state = np.asarray(state, dtype=float)


def _params_of(model, curve, bp):
    base = curve._problem.base if curve._problem is not None else None
    if base is not None:
        return dc_replace(base, **{k: float(v) for k, v in bp.params.items()})
    raise NumericalError("curve carries no parameter context")


def _merge_codim2(markers, active, tol=1e-6):
    out = []
    for m in markers:
        dup = False
        for o in out:
            if o.kind != m.kind:
                continue
            if all(abs(o.params[n] - m.params[n])
                   < tol * max(1.0, abs(o.params[n])) for n in active):
                dup = True
                break
        if not dup:
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# MLV assembly


def _mlv_base(spec):
    vals = dict(spec.fixed)
    for name in spec.active:
        vals.setdefault(name, 0.0)
    return MLVParams(**vals)


def _mlv_interior_fold(p, b2):
    """Closed-form interior fold point at fixed b2 (double root of the
    interior elimination quadratic)."""
    c2 = p.a11 - p.a12 * p.a21 / p.a22
    c1 = p.b1 - p.a12 * b2 / p.a22
    if c2 == 0.0:
        raise NumericalError("interior fold degenerate: c2 = 0")
    x1 = -c1 / (2.0 * c2)
    x2 = -(b2 + p.a21 * x1) / p.a22
    e = c1 * c1 / (4.0 * c2)
    return e, x1, x2


def _mlv_interior_bt_b2(p, b2_lo=-500.0, b2_hi=500.0):
    """b2 of the interior Bogdanov-Takens point: trace of the Jacobian at
    the closed-form fold point crosses zero (it is affine in b2 for MLV)."""

    def tr(b2):
        e, x1, x2 = _mlv_interior_fold(p, b2)
        pp = dc_replace(p, e=e, b2=b2)
        j = np.asarray(eval_jacobian(MLV, np.array([x1, x2]), pp))
        return float(np.trace(j))

    a, b = tr(b2_lo), tr(b2_hi)
    if a == b:
        return None
    b2 = b2_lo - a * (b2_hi - b2_lo) / (b - a)
    if not (b2_lo <= b2 <= b2_hi) or abs(tr(b2)) > 1e-6 * (1 + abs(b2)):
        return None
    return b2


def _mlv_axis_fold_curve(p, window, active):
    """Axis fold line, continued from the closed-form double root."""
    e_axis = p.b1 * p.b1 / (4.0 * p.a11)
    x1f = -p.b1 / (2.0 * p.a11)
    b2_mid = 0.5 * (window["b2"][0] + window["b2"][1])
    u0 = np.array([x1f, 0.0, 1.0, 0.0, e_axis, b2_mid])
    base = dc_replace(p, e=e_axis, b2=b2_mid)
    # this branch moves in b2 only; step caps from the window diagonal
    # would leave it far too coarse when the e-span dominates
    b2_span = window["b2"][1] - window["b2"][0]
    opts = _cont_opts(window, active, h0=2e-3 * b2_span,
                      h_max=1.5e-2 * b2_span)
    curve = continue_fold_curve(MLV, base, active, u0, opts)
    return curve


def _mlv_interior_sn_curve(p, window, active):
    """Interior fold curve seeded from a fold met on an equilibrium branch
    sweep in e at fixed b2."""
    b2_s = 0.5 * (window["b2"][0] + window["b2"][1])
    e_fold, x1f, x2f = _mlv_interior_fold(p, b2_s)
    e_lo, e_hi = window["e"]
    e_start = e_fold - 0.1 * (e_hi - e_lo)
    base = dc_replace(p, e=e_start, b2=b2_s)
    # stay on the fold point's side of the transcritical line so the sweep
    # meets the fold before any axis crossing derails it
    tc_x = -b2_s / p.a21
    eqs = [q for q in find_equilibria(MLV, base) if not q.on_axis
           and (q.state[0] - tc_x) * (x1f - tc_x) > 0.0]
    if not eqs:
        raise NumericalError("no interior equilibrium to sweep from")
    start = min(eqs, key=lambda q: abs(q.state[0] - x1f))
    sizes = (e_hi - e_lo)
    opts = ContinuationOptions(
        h0=5e-3 * sizes, h_max=3e-2 * sizes, max_steps=1200,
        param_bounds={"e": (e_lo - sizes, e_fold + 0.05 * sizes)},
        state_bound=1e6,
    )
    branch = continue_equilibrium_branch(MLV, base, "e", start, opts)
    events = [bp for bp in detect_branch_events(branch) if bp.flag == "SN"]
    if not events:
        raise NumericalError("equilibrium sweep met no fold")
    ev = events[0]
    base_ev = dc_replace(base, e=float(ev.params["e"]))
    eq = _EqShim(ev.state)
    u0 = fold_start_from_equilibrium(MLV, base_ev, active, eq)
    return continue_fold_curve(MLV, base_ev, active, u0,
                               _cont_opts(window, active))


def _mlv_hopf_curve(p, window, active):
    """Hopf curve from a trace-zero scan over interior equilibria."""
    e_lo, e_hi = window["e"]
    b2_lo, b2_hi = window["b2"]

    def interior_tr(e, b2, which):
        c2 = p.a11 - p.a12 * p.a21 / p.a22
        c1 = p.b1 - p.a12 * b2 / p.a22
        disc = c1 * c1 - 4.0 * c2 * e
        if disc <= 0.0:
            return None
        x1 = (-c1 + which * math.sqrt(disc)) / (2.0 * c2)
        x2 = -(b2 + p.a21 * x1) / p.a22
        pp = dc_replace(p, e=e, b2=b2)
        j = np.asarray(eval_jacobian(MLV, np.array([x1, x2]), pp))
        return float(np.trace(j)), float(np.linalg.det(j)), x1, x2

    c2 = p.a11 - p.a12 * p.a21 / p.a22
    for b2_s in np.linspace(b2_lo + 0.05 * (b2_hi - b2_lo),
                            b2_hi - 0.05 * (b2_hi - b2_lo), 13):
        c1 = p.b1 - p.a12 * b2_s / p.a22
        if c2 == 0.0:
            break
        e_fold = c1 * c1 / (4.0 * c2)
        # the Hopf level can sit arbitrarily close under the fold level, so
        # approach it geometrically instead of scanning uniformly
        depth = e_fold - e_lo
        if depth <= 0.0:
            continue
        for which in (1.0, -1.0):
            offs = np.geomspace(1e-7 * depth, depth, 120)
            es = e_fold - offs
            vals = [interior_tr(e, b2_s, which) for e in es]
            for i in range(len(es) - 1):
                a, b = vals[i], vals[i + 1]
                if a is None or b is None or a[0] * b[0] >= 0.0:
                    continue
                lo, hi = es[i], es[i + 1]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    v = interior_tr(mid, b2_s, which)
                    if v is None:
                        break
                    if v[0] * a[0] > 0.0:
                        lo = mid
                    else:
                        hi = mid
                v = interior_tr(0.5 * (lo + hi), b2_s, which)
                if v is None or v[1] <= 0.0:
                    continue        # neutral saddle, keep scanning
                e_h = 0.5 * (lo + hi)
                base = dc_replace(p, e=e_h, b2=b2_s)
                u0 = np.array([v[2], v[3], e_h, b2_s])
                return continue_hopf_curve(MLV, base, active, u0,
                                           _cont_opts(window, active))
    raise NumericalError("trace-zero scan found no Hopf point")


def _axis_saddles(p):
    eqs = find_equilibria(MLV, p)
    return sorted([q for q in eqs if q.on_axis
                   and q.classification == CLASS_SADDLE],
                  key=lambda q: q.state[0])


def _mlv_het_setup(p, t_budget=300.0):
    """Splitting setup for the off-axis saddle-saddle connection.

    The section is the vertical line through the interior spiral that the
    connecting loop encloses; the midpoint of the two axis saddles is not
    usable because the capture spiral contracts too fast to reach it.
    """
    ax = _axis_saddles(p)
    if len(ax) != 2:
        raise NumericalError("need two axis saddles")
    lo, hi = ax[0].state[0], ax[1].state[0]
    ints = [q for q in find_equilibria(MLV, p)
            if not q.on_axis and lo < q.state[0] < hi]
    if not ints:
        raise NumericalError("no interior equilibrium between the saddles")

    def transverse_unstable(q):
        _, vs, _, vu = saddle_eigenvectors(MLV, np.asarray(q.state), p)
        return abs(vu[1]) > abs(vs[1])

    a = ax[1] if transverse_unstable(ax[1]) else ax[0]
    b = ax[0] if a is ax[1] else ax[1]
    sec = Section(np.array([ints[0].state[0], 0.0]), np.array([1.0, 0.0]))
    return ConnectionSpec(a, b, sec,
                          crossing_filter=lambda y: y[1] > 1e-9,
                          rtol=1e-8, atol=1e-10, t_budget=t_budget)


def _het_point(p, e, bracket, t_budget=300.0):
    base = dc_replace(p, e=e)
    res = find_connection(MLV, base, "b2", bracket,
                          lambda pp: _mlv_het_setup(pp, t_budget=t_budget),
                          tol_param=1e-10)
    if not res.found:
        return None
    return float(res.param)


def _mlv_het_curve(p, window, active, hb_curve):
    """Heteroclinic-cycle curve near the double-zero interaction, solved
    point by point in b2 along an e-grid; the last grid point sits a hair
    off the interaction so the curve visibly terminates there."""
    st2 = st2_point(p)
    e_star, b2_star = st2.e_star, st2.b2_star

    # b2(e) interpolation along the Hopf curve for bracket prediction
    hb = sorted(((bp.params["e"], bp.params["b2"]) for bp in hb_curve.points),
                key=lambda t: t[0])
    hb_e = np.array([t[0] for t in hb])
    hb_b2 = np.array([t[1] for t in hb])

    def hb_pred(e):
        return float(np.interp(e, hb_e, hb_b2))

    e_lo, e_hi = window["e"]
    span = e_hi - e_lo
    far = [f * (e_hi - e_star) for f in
           (0.04, 0.08, 0.15, 0.25, 0.4, 0.55, 0.7, 0.85, 0.97)]
    deltas = [0.06] + [d for d in
                       [5e-5, 3e-4, 1.5e-3, 6e-3, 0.015, 0.03, 0.1,
                        0.18, 0.3, 0.5, 0.02 * span] + far
                       if abs(d - 0.06) > 1e-12 and d > 0.0]
    solved = {}
    for de in deltas:
        e = e_star + de
        if not (e_lo <= e <= e_hi):
            continue
        if solved:
            # the curve leaves the interaction point with finite slope in
            # b2, so a chord through it predicts well at any grid spacing
            de0 = min(solved, key=lambda x: abs(math.log(x / de)))
            slope = (solved[de0] - b2_star) / de0
            pred = b2_star + slope * de
            width = max(0.25 * abs(slope) * de, 1e-7)
        else:
            pred = hb_pred(e)
            width = max(0.08 * de, 1e-6)
        # the passage time past the degenerate point diverges toward the
        # interaction, so the close grid points get a larger budget
        budget = 2500.0 if de < 0.01 else 300.0
        b2 = None
        for _ in range(4):
            try:
                b2 = _het_point(p, e, (pred - width, pred + width), budget)
            except NumericalError:
                b2 = None
                break
            if b2 is not None:
                break
            width *= 3.0
        if b2 is not None:
            solved[de] = b2
    if not solved:
        raise NumericalError("no heteroclinic point found")
    points = []
    for de in sorted(solved):
        e, b2 = e_star + de, solved[de]
        pp = dc_replace(p, e=e, b2=b2)
        ints = [q for q in find_equilibria(MLV, pp) if not q.on_axis]
        ref = min(ints, key=lambda q: abs(q.state[0] - st2.x1_star)) \
            if ints else None
        state = ref.state if ref is not None else np.array([st2.x1_star, 0.0])
        eig = ref.eigen if ref is not None else eigen2(
            np.asarray(eval_jacobian(MLV, state, pp)))
        points.append(BranchPoint(state=np.asarray(state, dtype=float),
                                  params={"e": e, "b2": b2},
                                  eigen=eig, tests={}))
    return Curve(kind="HET", points=points)


def _mlv_hom_curve(p, window, active, bt_b2):
    """Homoclinic-loop curve located as the fate boundary of the interior
    saddle's unstable separatrix: below the curve the separatrix falls
    into the coexistence focus, above it escapes.  The curve runs from
    the neighbourhood of the double-zero interaction up to the interior
    Bogdanov-Takens point, where it lands on the fold curve."""
    st2 = st2_point(p)

    def interior(e, b2):
        pp = dc_replace(p, e=e, b2=b2)
        ints = [q for q in find_equilibria(MLV, pp) if not q.on_axis]
        sad = [q for q in ints if q.classification == CLASS_SADDLE]
        foc = [q for q in ints if q.classification != CLASS_SADDLE]
        return (foc[0] if foc else None), (sad[0] if sad else None), pp

    def fate(e, b2):
        foc, sad, pp = interior(e, b2)
        if foc is None or sad is None:
            return 1.0
        f = np.asarray(foc.state)
        s = np.asarray(sad.state)
        ds = float(np.linalg.norm(f - s))
        scale = 1.0 + float(np.abs(s).max())
        _, _, _, vu = saddle_eigenvectors(MLV, s, pp)
        v = vu if float(np.dot(vu, f - s)) > 0.0 else -vu
        cur = s + 1e-7 * scale * v
        for _ in range(60):
            tr = integrate(MLV, pp, cur, (0.0, 100.0), rtol=1e-7, atol=1e-9)
            if tr.status != 0 or np.max(np.abs(tr.y)) > 50.0 * scale:
                return 1.0
            cur = tr.y[-1]
            d = float(np.linalg.norm(cur - f))
            if d < 0.3 * ds:
                tr2 = integrate(MLV, pp, cur, (0.0, 100.0),
                                rtol=1e-7, atol=1e-9)
                d2 = float(np.linalg.norm(tr2.y[-1] - f))
                if tr2.status == 0 and d2 < d:
                    return -1.0
                cur = tr2.y[-1]
        return 1.0

    e_axis = p.b1 * p.b1 / (4.0 * p.a11)
    b2_lo = st2.b2_star + 0.05
    b2_hi = min(window["b2"][1], (bt_b2 - 2.0) if bt_b2 else window["b2"][1])
    if b2_hi <= b2_lo:
        raise NumericalError("homoclinic window collapsed")
    # geometric spacing, denser toward the Bogdanov-Takens end
    n = 11
    fr = 1.0 - np.geomspace(1.0, 0.02, n)
    b2s = b2_lo + (b2_hi - b2_lo) * fr / fr[-1]
    points = []
    for b2 in b2s:
        e_int, _, _ = _mlv_interior_fold(p, b2)
        lo_ref = min(e_axis, e_int) if e_axis < e_int else e_int - 1.0
        span = e_int - lo_ref
        if span <= 0.0:
            continue
        # probe from the fold end downward for the capture/escape flip
        levels = [1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2,
                  0.1, 0.3, 0.6, 0.9]
        bracket = None
        prev = None
        for lv in levels:
            e = e_int - lv * span
            f = fate(e, b2)
            if prev is not None and f < 0.0 < prev[1]:
                bracket = (e, prev[0])
                break
            prev = (e, f)
        if bracket is None:
            continue
        lo, hi = bracket
        for _ in range(20):
            mid = 0.5 * (lo + hi)
            if fate(mid, b2) < 0.0:
                lo = mid
            else:
                hi = mid
        e_hom = 0.5 * (lo + hi)
        _, sad, pp = interior(e_hom, b2)
        if sad is None:
            continue
        points.append(BranchPoint(
            state=np.asarray(sad.state, dtype=float),
            params={"e": e_hom, "b2": float(b2)},
            eigen=sad.eigen,
            tests={"fold_gap": e_int - e_hom},
        ))
    if len(points) < 3:
        raise NumericalError("homoclinic fate boundary not resolved")
    return Curve(kind="HOM", points=points)


def _build_mlv(spec):
    p = _mlv_base(spec)
    if p.a11 == 0.0 or p.a22 == 0.0 or p.a21 == 0.0:
        raise UsageError("diagram needs a11, a21, a22 nonzero")
    st1 = st1_point(p)
    st2 = st2_point(p)
    organising = [(st1.e_star, st1.b2_star), (st2.e_star, st2.b2_star)]
    bt_b2 = _mlv_interior_bt_b2(p)
    if bt_b2 is not None:
        e_bt, _, _ = _mlv_interior_fold(p, bt_b2)
        organising.append((e_bt, bt_b2))
    if spec.ranges is not None:
        window = {n: tuple(spec.ranges[n]) for n in spec.active}
    else:
        window = _window_from_points(organising, spec.active)
    if bt_b2 is not None and not _in_window({"e": e_bt, "b2": bt_b2},
                                            window, slack=0.05):
        bt_b2_in = None
    else:
        bt_b2_in = bt_b2

    has_het = st2.eps > 0.0
    kinds = spec.curve_kinds
    if kinds is None:
        kinds = ("SN", "TC", "HB") + (("HET",) if has_het else ("HOM",))
    curves, not_found, notes = [], {}, []

    hb_curve = None
    if "SN" in kinds:
        try:
            axis = _mlv_axis_fold_curve(p, window, spec.active)
            _mark_sn0_segments(MLV, axis)
            curves.append(axis)
        except (NumericalError, UsageError) as exc:
            not_found["SN(axis)"] = str(exc)
        try:
            curves.append(_mlv_interior_sn_curve(p, window, spec.active))
        except (NumericalError, UsageError) as exc:
            not_found["SN(interior)"] = str(exc)
    if "TC" in kinds:
        try:
            xs = sorted([-window["b2"][0] / p.a21, -window["b2"][1] / p.a21])
            curves.append(tc_curve_mlv(p, xs))
        except (NumericalError, UsageError) as exc:
            not_found["TC"] = str(exc)
    if "HB" in kinds:
        try:
            hb_curve = _mlv_hopf_curve(p, window, spec.active)
            curves.append(hb_curve)
        except (NumericalError, UsageError) as exc:
            not_found["HB"] = str(exc)
    if "HET" in kinds:
        if hb_curve is None:
            not_found["HET"] = "needs the Hopf curve for bracketing"
        else:
            try:
                curves.append(_mlv_het_curve(p, window, spec.active, hb_curve))
            except (NumericalError, UsageError) as exc:
                not_found["HET"] = str(exc)
    if "HOM" in kinds:
        try:
            curves.append(_mlv_hom_curve(p, window, spec.active, bt_b2_in))
        except (NumericalError, UsageError) as exc:
            not_found["HOM"] = str(exc)

    markers = []
    if spec.codim2:
        for c in curves:
            if c._problem is not None and c._us:
                markers.extend(detect_codim2(c))
        markers.extend(_sn0_endpoint_marker(MLV, curves, spec.active, notes))
        markers = _drop_axis_bt(markers)
        markers = _merge_codim2(markers, spec.active)

    for c in curves:
        _clip_curve(c, window)
    markers = [m for m in markers if _in_window(m.params, window)]
    return Diagram(spec=spec, curves=curves, codim2_points=markers,
                   window=window, not_found=not_found, notes=notes)


def _drop_axis_bt(markers):
    """A double zero on the invariant axis is the saddle-node/transcritical
    interaction, not a generic Bogdanov-Takens point; the Hopf curve's
    det J zero there would double-report it."""
    def on_axis(m):
        scale = max(1.0, float(np.max(np.abs(m.state))))
        return abs(m.state[1]) < 1e-5 * scale

    return [m for m in markers if not (m.kind == "BT" and on_axis(m))]


def _sn0_endpoint_marker(model, curves, active, notes):
    """The far end of an SN0 segment (away from the organising point) is
    where the saddle-node loop stops closing: emitted as an SNHET marker."""
    out = []
    for c in curves:
        if c.kind != "SN":
            continue
        flags = [bp.flag == "SN0" for bp in c.points]
        if not any(flags) or all(flags):
            continue
        for i in range(len(flags) - 1):
            if flags[i] == flags[i + 1]:
                continue
            bp = c.points[i if flags[i] else i + 1]
            # skip the flip at the organising double-zero point itself,
            # recognisable by the vanishing transverse eigenvalue
            tv = bp.tests.get("transverse")
            if tv is not None and abs(tv) < 1e-3:
                continue
            out.append(CodimTwoPoint(
                kind="SNHET", params=dict(bp.params),
                state=np.asarray(bp.state, dtype=float).copy(),
                residuals={"segment_resolution": 1.0}))
            notes.append("SNHET marks the end of the homoclinic-to-"
                         "saddle-node segment; located to curve resolution")
    return out


# ---------------------------------------------------------------------------
# minimal-model assembly


def _min_base(spec):
    vals = dict(spec.fixed)
    for name in spec.active:
        vals.setdefault(name, 0.0)
    return ST2MinParams(**vals)


def _min_fold_curve(p, window, active):
    b_lo, b_hi = window["b"]
    b_seed = b_lo + 0.75 * (b_hi - b_lo)
    if 1.0 - 3.0 * p.k3 * b_seed <= 0.0:
        b_seed = b_lo + 0.25 * (b_hi - b_lo)
    a_sn, x_sn = min2_sn_curve(b_seed, p.eps, p.k3, p.k1)
    base = dc_replace(p, a=a_sn, b=b_seed)
    u0 = np.array([x_sn, 0.0, 1.0, 0.0, a_sn, b_seed])
    return continue_fold_curve(ST2_MIN, base, active, u0,
                               _cont_opts(window, active))


def _min_tc_curve(p, window, n=201):
    """The transcritical line a = 0 of the planar minimal model, exact."""
    points = []
    for b in np.linspace(window["b"][0], window["b"][1], n):
        pp = dc_replace(p, a=0.0, b=b)
        j = np.asarray(eval_jacobian(ST2_MIN, np.zeros(2), pp))
        points.append(BranchPoint(
            state=np.zeros(2), params={"a": 0.0, "b": float(b)},
            eigen=eigen2(j), tests={"crossing_eig": 0.0}))
    return Curve(kind="TC", points=points)


def _min_hopf_curve(p, window, active):
    a_lo, a_hi = window["a"]
    a_seed = a_lo + 0.25 * (0.0 - a_lo) if a_lo < 0.0 else a_lo
    base = dc_replace(p, a=a_seed, b=0.0)
    u0 = np.array([0.0, 0.0, a_seed, 0.0])
    return continue_hopf_curve(ST2_MIN, base, active, u0,
                               _cont_opts(window, active))


def _min_manifold(p):
    """Invariant-manifold graph y = g(x) of the conditioned minimal model."""
    def g(x):
        return (p.a * p.k1 + p.b * p.k1 * x + p.eps * p.k1 * x * x
                + x ** 3 / 3.0)
    return g


def _min_het_setup(p):
    eqs = find_equilibria(ST2_MIN, p)
    sads = [q for q in eqs if q.classification == CLASS_SADDLE]
    if len(sads) < 2:
        raise NumericalError("need two saddles")
    sads = sorted(sads, key=lambda q: q.state[0])[:2]
    a, b = sads[-1], sads[0]
    mid = 0.5 * (np.asarray(a.state) + np.asarray(b.state))
    direction = np.asarray(a.state) - np.asarray(b.state)
    sec = Section(mid, direction)
    g = _min_manifold(p)
    return ConnectionSpec(a, b, sec,
                          crossing_filter=lambda y: abs(y[1] - g(y[0])) > 1e-6,
                          rtol=1e-9, atol=1e-11)


def _min_het_curve(p, window, active):
    a_lo, _ = window["a"]
    grid = -np.geomspace(0.9 * abs(a_lo), 0.01 * abs(a_lo), 9)
    solved = []
    for a in grid:
        pred = -0.00975 * math.sqrt(abs(a)) if not solved else \
            solved[-1][1] * math.sqrt(a / solved[-1][0])
        width = max(0.8 * abs(pred), 1e-6)
        b_het = None
        for _ in range(3):
            base = dc_replace(p, a=float(a))
            try:
                res = find_connection(ST2_MIN, base, "b",
                                      (pred - width, pred + width),
                                      _min_het_setup, tol_param=1e-10)
            except NumericalError:
                res = None
                break
            if res.found:
                b_het = float(res.param)
                break
            width *= 3.0
        if b_het is not None:
            solved.append((float(a), b_het))
    if not solved:
        raise NumericalError("no heteroclinic point found")
    points = []
    for a, b in sorted(solved):
        pp = dc_replace(p, a=a, b=b)
        j = np.asarray(eval_jacobian(ST2_MIN, np.zeros(2), pp))
        points.append(BranchPoint(state=np.zeros(2),
                                  params={"a": a, "b": b},
                                  eigen=eigen2(j), tests={}))
    return Curve(kind="HET", points=points)


def _build_min(spec):
    p = _min_base(spec)
    if spec.ranges is not None:
        window = {n: tuple(spec.ranges[n]) for n in spec.active}
    else:
        window = {n: (-0.4, 0.4) for n in spec.active}
    kinds = spec.curve_kinds
    if kinds is None:
        kinds = ("SN", "TC", "HB") + (("HET",) if p.eps > 0.0 else ())
    curves, not_found, notes = [], {}, []
    if "SN" in kinds:
        try:
            sn = _min_fold_curve(p, window, spec.active)
            _mark_sn0_segments(ST2_MIN, sn)
            curves.append(sn)
        except (NumericalError, UsageError) as exc:
            not_found["SN"] = str(exc)
    if "TC" in kinds:
        curves.append(_min_tc_curve(p, window))
    if "HB" in kinds:
        try:
            curves.append(_min_hopf_curve(p, window, spec.active))
        except (NumericalError, UsageError) as exc:
            not_found["HB"] = str(exc)
    if "HET" in kinds:
        try:
            curves.append(_min_het_curve(p, window, spec.active))
        except (NumericalError, UsageError) as exc:
            not_found["HET"] = str(exc)
    markers = []
    if spec.codim2:
        for c in curves:
            if c._problem is not None and c._us:
                markers.extend(detect_codim2(c))
        markers = _collapse_min_origin(markers, spec.active, window)
        markers = _merge_codim2(markers, spec.active)
    for c in curves:
        _clip_curve(c, window)
    markers = [m for m in markers if _in_window(m.params, window)]
    return Diagram(spec=spec, curves=curves, codim2_points=markers,
                   window=window, not_found=not_found, notes=notes)


def _collapse_min_origin(markers, active, window):
    """The minimal model's organising double zero sits exactly at the
    parameter origin; every curve's test functions vanish there, so the
    raw detection reports it several times under different labels."""
    size = max(window[n][1] - window[n][0] for n in active)
    tol = 2e-3 * size
    near = [m for m in markers
            if all(abs(m.params[n]) < tol for n in active)]
    if not near:
        return markers
    out = [m for m in markers if m not in near]
    dist = max(max(abs(m.params[n]) for n in active) for m in near)
    out.append(CodimTwoPoint(
        kind="ST2", params={n: 0.0 for n in active},
        state=np.zeros(2), residuals={"origin_distance": dist}))
    return out


def build_diagram(spec: DiagramSpec) -> Diagram:
    if spec.model == "MLV":
        return _build_mlv(spec)
    return _build_min(spec)


# ---------------------------------------------------------------------------
# region walks


def circle_events(diagram, center, radius, skip_flags=("NS",)):
    """Crossing events of the diagram's curves with a parameter circle.

    Returns (angle, label) pairs sorted by angle in [0, 2pi); the label is
    the curve kind or, when set, the point flag (SN0 segments).  Neutral
    saddle segments are not bifurcations and are skipped.
    """
    p_name, q_name = diagram.spec.active
    cx, cy = center
    out = []
    for curve in diagram.curves:
        pts = [(bp.params[p_name] - cx, bp.params[q_name] - cy, bp.flag)
               for bp in curve.points]
        for (x0, y0, f0), (x1, y1, f1) in zip(pts[:-1], pts[1:]):
            # full quadratic intersection: a coarse segment can enter and
            # leave the circle with both endpoints outside
            dx, dy = x1 - x0, y1 - y0
            aa = dx * dx + dy * dy
            if aa == 0.0:
                continue
            bb = 2.0 * (x0 * dx + y0 * dy)
            cc = x0 * x0 + y0 * y0 - radius * radius
            disc = bb * bb - 4.0 * aa * cc
            if disc <= 0.0:
                continue
            sq = math.sqrt(disc)
            for t in ((-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)):
                if not (0.0 <= t < 1.0):
                    continue
                x = x0 + t * dx
                y = y0 + t * dy
                flag = f0 if t < 0.5 else f1
                label = flag if flag else curve.kind
                if label in skip_flags:
                    continue
                out.append((math.atan2(y, x) % (2.0 * math.pi), label))
    return sorted(out)


def region_census(model, params, box=3.0, n_seeds=6, t=200.0):
    """Coarse phase-portrait census at one parameter point: equilibrium
    classifications plus whether a bounded non-equilibrium attractor or
    repeller is visible from a ring of seeds."""
    eqs = find_equilibria(model, params)
    census = {"classes": sorted(q.classification for q in eqs)}
    bounded = 0
    for k in range(n_seeds):
        th = 2.0 * math.pi * (k + 0.5) / n_seeds
        y0 = box * 0.3 * np.array([math.cos(th), math.sin(th)])
        tr = integrate(model, params, y0, (0.0, t), rtol=1e-8, atol=1e-10)
        if tr.status == 0 and np.max(np.abs(tr.y)) < 20.0 * box:
            bounded += 1
    census["bounded_fraction"] = bounded / n_seeds
    return census
