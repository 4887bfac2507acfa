"""Command-line front end.

Subcommands: ``equilibria`` (classify equilibria at a parameter point),
``diagram`` (assemble a two-parameter diagram and write curves.csv,
points.json, diagram.svg), ``portrait`` (integrate a seed bundle plus
saddle manifolds, write trajectories.csv and portrait.svg) and ``verify``
(run an invariant suite and emit a JSON report).

All output is deterministic: fixed column orders, 17-significant-digit
decimal serialisation for the CSVs (bit-exact round trip), and
byte-identical SVG for identical input.

Exit codes: 0 success, 1 verification failure, 2 usage or config error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import fields as dc_fields, replace as dc_replace
from pathlib import Path

import numpy as np

from . import __version__
from .diagram import (DIAGRAM_MODELS, Diagram, DiagramSpec, build_diagram,
                      circle_events)
from .equilibria import CLASS_SADDLE, find_equilibria
from .errors import NumericalError, OutOfDomainError, UsageError
from .flow import trace_manifold, integrate
from .models import MODELS, MLVParams, ST2_MIN, ST2MinParams, eval_jacobian
from .normalform import (conditions_residual, cusp_map_jacobian_det, dbt_map,
                         first_lyapunov, invariant_manifold_check,
                         min2_sn_curve, st1_point, st2_point,
                         verify_st1_centre_manifold)

__all__ = ["main", "cmd_equilibria", "cmd_diagram", "cmd_portrait",
           "cmd_verify"]

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

# the two parameter sets the diagrams and suites are built around
SADDLE_SET = {"b1": 15.0, "a11": -5.0, "a12": -3.0, "a21": 2.0, "a22": 1.0}
ELLIPTIC_SET = {"b1": 15.0, "a11": 7.0, "a12": -3.0, "a21": 2.0, "a22": 1.0}

CURVE_COLORS = {
    "SN": "#d62728", "TC": "#2ca02c", "HB": "#1f77b4",
    "HET": "#9467bd", "HOM": "#8c564b", "EQ": "#7f7f7f",
    "SN0": "#ff7f0e", "NS": "#999999",
}


def _fmt17(x) -> str:
    return format(float(x), ".17g")


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc


def _build_params(model_name, values):
    if model_name not in MODELS:
        raise UsageError(f"unknown model {model_name!r}")
    cls = MODELS[model_name].params_cls
    names = {f.name for f in dc_fields(cls)}
    for key in values:
        if key not in names:
            raise UsageError(
                f"unknown parameter field {key!r} for model {model_name}")
    try:
        return cls(**{k: float(v) for k, v in values.items()})
    except TypeError as exc:
        raise UsageError(f"incomplete parameters for {model_name}: {exc}")
    except (ValueError,) as exc:
        raise UsageError(f"bad parameter value: {exc}")


def _eigen_list(eigen):
    if hasattr(eigen, "values"):
        return [complex(v) for v in eigen.values]
    return [complex(float(eigen), 0.0)]


# ---------------------------------------------------------------------------
# equilibria


def cmd_equilibria(config) -> dict:
    model_name = config.get("model")
    params = _build_params(model_name, config.get("params", {}))
    model = MODELS[model_name]
    eqs = find_equilibria(model, params)
    report = {
        "model": model_name,
        "params": {f.name: getattr(params, f.name)
                   for f in dc_fields(type(params))},
        "equilibria": [],
    }
    for q in sorted(eqs, key=lambda q: tuple(np.atleast_1d(q.state))):
        vals = _eigen_list(q.eigen)
        report["equilibria"].append({
            "state": [float(v) for v in np.atleast_1d(q.state)],
            "classification": q.classification,
            "eigenvalues": [[v.real, v.imag] for v in vals],
            "on_axis": bool(q.on_axis),
            "multiplicity": int(q.multiplicity),
            "residual": float(q.residual),
        })
    return report


# ---------------------------------------------------------------------------
# diagram serialisation


def _diagram_spec_from_config(config, out_dir) -> DiagramSpec:
    for key in ("model", "fixed"):
        if key not in config:
            raise UsageError(f"diagram config needs a {key!r} entry")
    ranges = config.get("ranges")
    if ranges is not None:
        ranges = {k: (float(v[0]), float(v[1])) for k, v in ranges.items()}
    kinds = config.get("curve_kinds")
    if kinds is not None:
        kinds = tuple(kinds)
    return DiagramSpec(
        model=config["model"],
        fixed={k: float(v) for k, v in config["fixed"].items()},
        active=tuple(config.get("active", ("e", "b2"))),
        ranges=ranges,
        curve_kinds=kinds,
        codim2=bool(config.get("codim2", True)),
        out_dir=str(out_dir) if out_dir else None,
    )


def write_curves_csv(diagram: Diagram, path):
    p_name, q_name = diagram.spec.active
    lines = ["curve_id,kind,param1_name,param1,param2_name,param2,"
             "x1,x2,eig_re1,eig_im1,eig_re2,eig_im2"]
    for i, curve in enumerate(diagram.curves):
        curve_id = f"{curve.kind.lower()}-{i}"
        for bp in curve.points:
            vals = _eigen_list(bp.eigen)
            while len(vals) < 2:
                vals.append(complex(math.nan, math.nan))
            kind = bp.flag if bp.flag else curve.kind
            state = np.atleast_1d(bp.state)
            lines.append(",".join([
                curve_id, kind,
                p_name, _fmt17(bp.params[p_name]),
                q_name, _fmt17(bp.params[q_name]),
                _fmt17(state[0]),
                _fmt17(state[1]) if len(state) > 1 else _fmt17(math.nan),
                _fmt17(vals[0].real), _fmt17(vals[0].imag),
                _fmt17(vals[1].real), _fmt17(vals[1].imag),
            ]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_points_json(diagram: Diagram, path):
    doc = {
        "schema": "sntbif-diagram/1",
        "version": __version__,
        "model": diagram.spec.model,
        "active": list(diagram.spec.active),
        "window": {k: [v[0], v[1]] for k, v in diagram.window.items()},
        "curves": [
            {"curve_id": f"{c.kind.lower()}-{i}", "kind": c.kind,
             "n_points": len(c.points)}
            for i, c in enumerate(diagram.curves)
        ],
        "codim2": [
            {"kind": m.kind,
             "params": {k: float(v) for k, v in sorted(m.params.items())},
             "state": [float(v) for v in np.atleast_1d(m.state)],
             "residuals": {k: float(v)
                           for k, v in sorted(m.residuals.items())}}
            for m in diagram.codim2_points
        ],
        "not_found": dict(sorted(diagram.not_found.items())),
        "notes": list(diagram.notes),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


class _SvgCanvas:
    """Fixed-size flat SVG builder: polylines, circles, text only."""

    W, H = 840, 620
    ML, MR, MT, MB = 70, 30, 30, 50

    def __init__(self, x_range, y_range, x_label, y_label):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 <= self.x0 or self.y1 <= self.y0:
            raise UsageError("empty drawing window")
        self.parts = [
            '<?xml version="1.0" encoding="UTF-8"?>',
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.W}" '
            f'height="{self.H}" viewBox="0 0 {self.W} {self.H}">',
            f'<rect x="0" y="0" width="{self.W}" height="{self.H}" '
            'fill="white"/>',
        ]
        self._frame(x_label, y_label)

    def px(self, x):
        w = self.W - self.ML - self.MR
        return self.ML + (x - self.x0) / (self.x1 - self.x0) * w

    def py(self, y):
        h = self.H - self.MT - self.MB
        return self.MT + (self.y1 - y) / (self.y1 - self.y0) * h

    def _frame(self, x_label, y_label):
        w = self.W - self.ML - self.MR
        h = self.H - self.MT - self.MB
        self.parts.append(
            f'<rect x="{self.ML}" y="{self.MT}" width="{w}" height="{h}" '
            'fill="none" stroke="black" stroke-width="1"/>')
        for i in range(5):
            fx = self.x0 + i * (self.x1 - self.x0) / 4.0
            fy = self.y0 + i * (self.y1 - self.y0) / 4.0
            self.text(self.px(fx), self.H - self.MB + 18,
                      format(fx, ".4g"), anchor="middle", size=11)
            self.text(self.ML - 8, self.py(fy) + 4,
                      format(fy, ".4g"), anchor="end", size=11)
        self.text((self.ML + self.W - self.MR) / 2.0, self.H - 12,
                  x_label, anchor="middle", size=13)
        self.text(16, (self.MT + self.H - self.MB) / 2.0, y_label,
                  anchor="middle", size=13, vertical=True)

    def polyline(self, xs, ys, color, dashed=False, width=1.5):
        pts = []
        for x, y in zip(xs, ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            pts.append(f"{self.px(x):.3f},{self.py(y):.3f}")
        if len(pts) < 2:
            return
        dash = ' stroke-dasharray="5 4"' if dashed else ""
        self.parts.append(
            f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash} points="{" ".join(pts)}"/>')

    def circle(self, x, y, r=4, color="black"):
        self.parts.append(
            f'<circle cx="{self.px(x):.3f}" cy="{self.py(y):.3f}" r="{r}" '
            f'fill="{color}"/>')

    def text(self, px, py, s, anchor="start", size=12, color="black",
             vertical=False):
        rot = (f' transform="rotate(-90 {px:.3f} {py:.3f})"'
               if vertical else "")
        self.parts.append(
            f'<text x="{px:.3f}" y="{py:.3f}" font-family="monospace" '
            f'font-size="{size}" fill="{color}" '
            f'text-anchor="{anchor}"{rot}>{s}</text>')

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _flag_runs(points):
    """Contiguous runs of equal point flag, as (flag, slice) pairs; each
    run slice overlaps the next point so the drawn polylines connect."""
    runs = []
    i = 0
    n = len(points)
    while i < n:
        j = i
        while j + 1 < n and points[j + 1].flag == points[i].flag:
            j += 1
        runs.append((points[i].flag, slice(i, min(j + 2, n))))
        i = j + 1
    return runs


def write_diagram_svg(diagram: Diagram, path):
    p_name, q_name = diagram.spec.active
    canvas = _SvgCanvas(diagram.window[p_name], diagram.window[q_name],
                        p_name, q_name)
    for curve in diagram.curves:
        for flag, sl in _flag_runs(curve.points):
            pts = curve.points[sl]
            color = CURVE_COLORS.get(flag or curve.kind, "black")
            xs = [bp.params[p_name] for bp in pts]
            ys = [bp.params[q_name] for bp in pts]
            canvas.polyline(xs, ys, color, dashed=(flag == "NS"))
    seen = []
    for curve in diagram.curves:
        for flag, _ in _flag_runs(curve.points):
            label = flag or curve.kind
            if label not in seen:
                seen.append(label)
    for j, label in enumerate(seen):
        y = canvas.MT + 16 + 16 * j
        x = canvas.W - canvas.MR - 90
        canvas.parts.append(
            f'<polyline fill="none" stroke="{CURVE_COLORS.get(label, "black")}"'
            f' stroke-width="2" points="{x:.3f},{y - 4:.3f} '
            f'{x + 24:.3f},{y - 4:.3f}"/>')
        canvas.text(x + 30, y, label, size=11)
    for m in diagram.codim2_points:
        x, y = m.params[p_name], m.params[q_name]
        canvas.circle(x, y, r=4)
        canvas.text(canvas.px(x) + 6, canvas.py(y) - 6, m.kind, size=11)
    Path(path).write_text(canvas.render())


def cmd_diagram(spec: DiagramSpec) -> Diagram:
    diagram = build_diagram(spec)
    out = Path(spec.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_curves_csv(diagram, out / "curves.csv")
    write_points_json(diagram, out / "points.json")
    write_diagram_svg(diagram, out / "diagram.svg")
    return diagram


# ---------------------------------------------------------------------------
# portrait


def cmd_portrait(config, out_dir=None) -> dict:
    model_name = config.get("model")
    params = _build_params(model_name, config.get("params", {}))
    model = MODELS[model_name]
    if model.dim != 2:
        raise UsageError("portraits need a planar model")
    t_span = config.get("t_span", [0.0, 50.0])
    seeds = [np.asarray(s, dtype=float) for s in config.get("seeds", [])]
    want_manifolds = bool(config.get("manifolds", True))

    rows = []                      # (traj_id, label, t array, y array)
    diagnostics = []
    tid = 0
    for s in seeds:
        tr = integrate(model, params, s, (float(t_span[0]), float(t_span[1])),
                       rtol=1e-10, atol=1e-12)
        rows.append((f"traj-{tid}", "seed", tr.t, tr.y))
        if not tr.ok:
            diagnostics.append(f"traj-{tid}: integration stopped early "
                               f"(status {tr.status})")
        tid += 1
    if want_manifolds:
        saddles = [q for q in find_equilibria(model, params)
                   if q.classification == CLASS_SADDLE]
        budget = float(config.get("manifold_t_budget", 40.0))
        for q in saddles:
            for which in ("unstable", "stable"):
                for side in (1, -1):
                    try:
                        tr = trace_manifold(model, params, q, which,
                                            side=side, t_budget=budget,
                                            rtol=1e-10, atol=1e-12)
                    except (NumericalError, UsageError) as exc:
                        diagnostics.append(f"manifold trace failed: {exc}")
                        continue
                    label = f"manifold-{which}{'+' if side > 0 else '-'}"
                    rows.append((f"traj-{tid}", label, tr.t, tr.y))
                    tid += 1

    out = Path(out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    lines = ["traj_id,label,t,x1,x2"]
    for traj_id, label, ts, ys in rows:
        for t, y in zip(ts, ys):
            lines.append(",".join([traj_id, label, _fmt17(t),
                                   _fmt17(y[0]), _fmt17(y[1])]))
    for d in diagnostics:
        lines.append(f"# {d}")
    (out / "trajectories.csv").write_text("\n".join(lines) + "\n")

    window = config.get("window")
    if window is None:
        allx = np.concatenate([ys[:, 0] for _, _, _, ys in rows]) \
            if rows else np.array([0.0, 1.0])
        ally = np.concatenate([ys[:, 1] for _, _, _, ys in rows]) \
            if rows else np.array([0.0, 1.0])
        allx = allx[np.isfinite(allx)]
        ally = ally[np.isfinite(ally)]
        def _rng(v):
            lo, hi = float(v.min()), float(v.max())
            pad = 0.08 * max(hi - lo, 1e-6)
            return (lo - pad, hi + pad)
        window = {"x1": _rng(allx), "x2": _rng(ally)}
    else:
        window = {k: (float(v[0]), float(v[1])) for k, v in window.items()}
    canvas = _SvgCanvas(window["x1"], window["x2"], "x1", "x2")
    for _, label, ts, ys in rows:
        color = "#1f77b4" if label == "seed" else (
            "#d62728" if "unstable" in label else "#2ca02c")
        canvas.polyline(ys[:, 0], ys[:, 1], color, width=1.2)
    for q in find_equilibria(model, params):
        st = np.atleast_1d(q.state)
        if (window["x1"][0] <= st[0] <= window["x1"][1]
                and window["x2"][0] <= st[1] <= window["x2"][1]):
            canvas.circle(st[0], st[1], r=3)
    (out / "portrait.svg").write_text(canvas.render())
    return {"n_trajectories": len(rows), "diagnostics": diagnostics}


# ---------------------------------------------------------------------------
# verify


def _check(report, name, residual, tol):
    ok = bool(math.isfinite(residual) and abs(residual) <= tol)
    report["checks"].append({"name": name, "residual": float(residual),
                             "tol": float(tol), "pass": ok})
    return ok


def _poly_max(poly) -> float:
    return float(poly.max_abs())


def _mlv_params(values):
    return MLVParams(**values, b2=0.0, e=0.0)


def _suite_normalform(report, overrides):
    for case, values in (("saddle", SADDLE_SET), ("elliptic", ELLIPTIC_SET)):
        p = _mlv_params(values)
        st1 = st1_point(p)
        st2 = st2_point(p)
        k1 = overrides.get("k1", st2.k1)
        k2 = overrides.get("k2", st2.k2)
        k3 = overrides.get("k3", st2.k3)
        eps = overrides.get("eps", st2.eps)
        r1, r2 = conditions_residual(k1, k2, k3, eps)
        _check(report, f"{case}.conditions_residual",
               max(abs(r1), abs(r2)), 1e-12)
        _check(report, f"{case}.manifold_invariance",
               _poly_max(invariant_manifold_check(k1, k2, k3, eps)), 1e-12)
        low = verify_st1_centre_manifold(p).terms_up_to(2)
        _check(report, f"{case}.centre_manifold_residual",
               max((abs(v) for v in low.values()), default=0.0), 1e-12)
        b = 0.3
        _check(report, f"{case}.cusp_jacobian_on_fold",
               cusp_map_jacobian_det(b * b / 4.0, b) - b * b / 12.0, 1e-14)
        d = dbt_map(0.07, -0.11, st2.eps, st2.k1, st2.k2)
        _check(report, f"{case}.dbt_surface_residual", d.s_residual, 1e-10)
        mp = ST2MinParams(a=-0.05, b=0.0, k1=st2.k1, k2=st2.k2, k3=st2.k3,
                          eps=st2.eps)
        hopf = min(find_equilibria(ST2_MIN, mp),
                   key=lambda q: float(np.linalg.norm(q.state)))
        _check(report, f"{case}.first_lyapunov",
               first_lyapunov(ST2_MIN, mp, hopf) - 0.125, 1e-9)


def _build_case_diagrams(cache):
    if "saddle" not in cache:
        cache["saddle"] = build_diagram(DiagramSpec(
            model="MLV", fixed=dict(SADDLE_SET)))
    if "elliptic" not in cache:
        cache["elliptic"] = build_diagram(DiagramSpec(
            model="MLV", fixed=dict(ELLIPTIC_SET)))
    return cache["saddle"], cache["elliptic"]


def _marker(diagram, kind):
    ms = [m for m in diagram.codim2_points if m.kind == kind]
    return ms[0] if ms else None


def _suite_continuation(report, cache):
    sad, ell = _build_case_diagrams(cache)
    for case, d in (("saddle", sad), ("elliptic", ell)):
        p = _mlv_params(SADDLE_SET if case == "saddle" else ELLIPTIC_SET)
        st1 = st1_point(p)
        st2 = st2_point(p)
        for kind, ref in (("ST1", (st1.e_star, st1.b2_star)),
                          ("ST2", (st2.e_star, st2.b2_star))):
            m = _marker(d, kind)
            if m is None:
                _check(report, f"{case}.{kind}_detected", math.inf, 1e-6)
                continue
            _check(report, f"{case}.{kind}_detected",
                   max(abs(m.params["e"] - ref[0]),
                       abs(m.params["b2"] - ref[1])), 1e-6)
        # interior fold curve against the closed-form fold level
        c2 = p.a11 - p.a12 * p.a21 / p.a22
        worst = 0.0
        n = 0
        for c in d.curves:
            if c.kind != "SN":
                continue
            for bp in c.points:
                if abs(bp.state[1]) < 1e-8:
                    continue           # axis branch has its own closed form
                c1 = p.b1 - p.a12 * bp.params["b2"] / p.a22
                worst = max(worst, abs(bp.params["e"] - c1 * c1 / (4.0 * c2)))
                n += 1
        _check(report, f"{case}.fold_curve_oracle",
               worst if n else math.inf, 1e-8)
        axis_e = p.b1 * p.b1 / (4.0 * p.a11)
        worst = max((abs(bp.params["e"] - axis_e)
                     for c in d.curves if c.kind == "SN"
                     for bp in c.points if abs(bp.state[1]) < 1e-8),
                    default=math.inf)
        _check(report, f"{case}.axis_fold_oracle", worst, 1e-8)
    bt = _marker(sad, "BT")
    _check(report, "saddle.BT_location",
           math.inf if bt is None else abs(bt.params["b2"] + 60.0 / 11.0),
           1e-6)
    bt = _marker(ell, "BT")
    _check(report, "elliptic.BT_location",
           math.inf if bt is None else
           max(abs(bt.params["b2"] - 60.0), abs(bt.params["e"] - 731.25)),
           1e-6)


def _min_spec(case):
    if case == "saddle":
        eps, k1 = 1.0, math.sqrt(10.0) / 2.0
        k2, k3 = 8.0 / math.sqrt(10.0), math.sqrt(10.0) / 15.0
    else:
        eps, k1 = -1.0, -math.sqrt(14.0) / 2.0
        k2, k3 = 16.0 / math.sqrt(14.0), -math.sqrt(14.0) / 21.0
    return DiagramSpec(model="ST2_MIN", active=("a", "b"),
                       fixed={"eps": eps, "k1": k1, "k2": k2, "k3": k3})


def _cyclic_match(labels, expected):
    """Does the cyclic sequence contain ``expected`` as a rotation prefix,
    in either orientation?"""
    for seq in (labels, labels[::-1]):
        n = len(seq)
        for s in range(n):
            rot = [seq[(s + i) % n] for i in range(len(expected))]
            if rot == list(expected):
                return True
    return False


def _suite_global(report, cache):
    sad, ell = _build_case_diagrams(cache)
    p_sad = _mlv_params(SADDLE_SET)
    st2s = st2_point(p_sad)
    het = [c for c in sad.curves if c.kind == "HET"]
    if het and het[0].points:
        bp = min(het[0].points,
                 key=lambda bp: math.hypot(bp.params["e"] - st2s.e_star,
                                           bp.params["b2"] - st2s.b2_star))
        dist = math.hypot(bp.params["e"] - st2s.e_star,
                          bp.params["b2"] - st2s.b2_star)
    else:
        dist = math.inf
    _check(report, "saddle.het_terminates_at_ST2", dist, 1e-4)

    hom = [c for c in ell.curves if c.kind == "HOM"]
    if hom and len(hom[0].points) >= 3:
        gaps = [bp.tests.get("fold_gap", math.inf) for bp in hom[0].points]
        _check(report, "elliptic.hom_lands_on_SN", gaps[-1], 1e-2)
        st2e = st2_point(_mlv_params(ELLIPTIC_SET))
        far = max(abs(bp.params["b2"] - st2e.b2_star)
                  for bp in hom[0].points)
        _check(report, "elliptic.hom_leaves_ST2_region",
               0.0 if far > 10.0 else math.inf, 1.0)
    else:
        _check(report, "elliptic.hom_lands_on_SN", math.inf, 1e-2)
        _check(report, "elliptic.hom_leaves_ST2_region", math.inf, 1.0)
    sn0 = [bp.params["b2"] for c in ell.curves if c.kind == "SN"
           for bp in c.points if bp.flag == "SN0"]
    _check(report, "elliptic.SN0_adjacent_to_ST2",
           min(sn0) - 15.0 / 7.0 if sn0 else math.inf, 1e-2)

    for case, expected in (
        ("saddle", ("HB", "HET", "TC", "SN", "SN")),
        ("elliptic", ("HB", "SN0", "TC", "TC", "SN")),
    ):
        key = f"min-{case}"
        if key not in cache:
            cache[key] = build_diagram(_min_spec(case))
        ev = circle_events(cache[key], (0.0, 0.0), 0.05)
        labels = [lab for _, lab in ev]
        _check(report, f"{case}.min_region_walk",
               0.0 if _cyclic_match(labels, expected) else math.inf, 0.5)


SUITES = {
    "normalform": lambda rep, ov, cache: _suite_normalform(rep, ov),
    "continuation": lambda rep, ov, cache: _suite_continuation(rep, cache),
    "global": lambda rep, ov, cache: _suite_global(rep, cache),
}


def cmd_verify(suite="all", overrides=None, out_dir=None) -> dict:
    overrides = overrides or {}
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; choose from "
                             f"all, {', '.join(SUITES)}")
    report = {"suite": suite, "version": __version__, "checks": []}
    cache = {}
    for name in names:
        SUITES[name](report, overrides, cache)
    report["pass"] = all(c["pass"] for c in report["checks"])
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify_report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


# ---------------------------------------------------------------------------
# entry point


def _parse_overrides(pairs):
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise UsageError(f"--seed-override expects k=v, got {item!r}")
        key, _, val = item.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"--seed-override value not numeric: {item!r}")
    return out


def _build_argparser():
    ap = argparse.ArgumentParser(
        prog="sntbif",
        description="Bifurcation curves, codim-2 points and verification "
                    "suites for the harvested Lotka-Volterra model and its "
                    "minimal interaction models.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("equilibria", "diagram", "portrait"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out-dir", default=None, metavar="PATH")
    sp = sub.add_parser("verify")
    sp.add_argument("--suite", default="all", metavar="NAME")
    sp.add_argument("--seed-override", action="append", default=[],
                    metavar="k=v")
    sp.add_argument("--out-dir", default=None, metavar="PATH")
    return ap


def main(argv=None) -> int:
    ap = _build_argparser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        if args.command == "equilibria":
            report = cmd_equilibria(_load_config(args.config))
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "diagram":
            config = _load_config(args.config)
            spec = _diagram_spec_from_config(config, args.out_dir)
            diagram = cmd_diagram(spec)
            print(json.dumps({
                "out_dir": spec.out_dir or ".",
                "curves": [c.kind for c in diagram.curves],
                "codim2": [m.kind for m in diagram.codim2_points],
                "not_found": diagram.not_found,
            }, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "portrait":
            report = cmd_portrait(_load_config(args.config), args.out_dir)
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK
        if args.command == "verify":
            report = cmd_verify(args.suite,
                                _parse_overrides(args.seed_override),
                                args.out_dir)
            print(json.dumps(report, indent=2, sort_keys=True))
            return EXIT_OK if report["pass"] else EXIT_VERIFY_FAIL
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, OutOfDomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
