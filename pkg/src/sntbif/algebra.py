"""Small exact/numerical kernels: real roots of low-degree polynomials,
2x2 eigen-analysis and truncated multivariate polynomial arithmetic.

These are the workhorses behind equilibrium location and the mechanical
normal-form identity checks, so they favour accuracy near degenerate
configurations (multiple roots, double-zero eigenvalues) over generality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

__all__ = [
    "Poly1",
    "solve_poly_real",
    "Eigen2",
    "eigen2",
    "TruncMultiPoly",
    "tp_add",
    "tp_mul",
    "tp_diff",
    "tp_compose",
]

# default clustering tolerance for coincident roots; fold detection needs a
# coarser value than generic root separation
DEFAULT_CLUSTER_TOL = 1e-7

# discriminant threshold below which closed forms are abandoned for bisection
_DEGENERATE_DISC = 1e-10


class Poly1:
    """Real univariate polynomial of degree <= 4, coefficients ascending."""

    def __init__(self, coeffs):
        c = [float(v) for v in coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if all(v == 0.0 for v in c):
            raise ValueError("zero polynomial")
        if len(c) > 5:
            raise ValueError("degree > 4 not supported")
        self.coeffs = c

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self):
        c = [i * v for i, v in enumerate(self.coeffs)][1:]
        if not c:
            c = [0.0]
        try:
            return Poly1(c)
        except ValueError:
            return None

    def scale(self):
        return max(abs(v) for v in self.coeffs)

    def __repr__(self):
        return f"Poly1({self.coeffs})"


def _newton_polish(p: Poly1, x: float, iters: int = 3) -> float:
    dp = p.deriv()
    if dp is None:
        return x
    fx = p(x)
    for _ in range(iters):
        d = dp(x)
        if d == 0.0:
            break
        step = fx / d
        # a polish is local refinement; a large quotient means f and f'
        # are both at noise level and Newton would hop to another root
        if not math.isfinite(step) or abs(step) > 0.05 * (1.0 + abs(x)):
            break
        xn = x - step
        fn = p(xn)
        # near a multiple root both f and f' are at noise level and the
        # quotient can be wild; never accept a step that grows the residual
        if abs(fn) >= abs(fx):
            break
        x, fx = xn, fn
    return x


def _roots_quadratic(c0, c1, c2):
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        # rounding can push an exact double root a few ulp negative
        scale = max(c1 * c1, abs(4.0 * c2 * c0))
        if disc > -1e-12 * scale:
            return [-c1 / (2.0 * c2)] * 2
        return []
    sq = math.sqrt(disc)
    # stable form: avoid cancellation in the smaller root
    if c1 >= 0.0:
        q = -0.5 * (c1 + sq)
    else:
        q = -0.5 * (c1 - sq)
    roots = []
    if q != 0.0:
        roots.append(q / c2)
        roots.append(c0 / q)
    else:
        roots.append(0.0)
        roots.append(-c1 / c2)
    return roots


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _roots_cubic(c0, c1, c2, c3):
    # depressed form t^3 + p t + q, x = t - c2/(3 c3)
    a = c2 / c3
    b = c1 / c3
    c = c0 / c3
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    # a double root makes disc vanish; rounding can leave it a few ulp
    # positive, which would silently drop two roots, so classify relative
    # to the terms that formed it
    disc_scale = max((q / 2.0) ** 2, abs(p / 3.0) ** 3)
    roots = []
    if disc > 1e-10 * disc_scale:
        sq = math.sqrt(disc)
        u = _cbrt(-q / 2.0 + sq)
        v = _cbrt(-q / 2.0 - sq)
        roots.append(u + v - shift)
    elif p == 0.0 and q == 0.0:
        roots.extend([-shift] * 3)
    else:
        # three real roots, trigonometric form; p may sit a few ulp on the
        # wrong side of zero, and p*m can underflow for denormal inputs
        m = 2.0 * math.sqrt(max(0.0, -p) / 3.0)
        if p * m == 0.0:
            roots.extend([-shift] * 3)
        else:
            arg = 3.0 * q / (p * m)
            arg = min(1.0, max(-1.0, arg))
            theta = math.acos(arg) / 3.0
            for k in range(3):
                roots.append(
                    m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift
                )
    return roots


def _roots_quartic(c0, c1, c2, c3, c4):
    # Ferrari: depressed y^4 + p y^2 + q y + r via x = y - c3/(4 c4)
    a = c3 / c4
    b = c2 / c4
    c = c1 / c4
    d = c0 / c4
    shift = a / 4.0
    p = b - 3.0 * a * a / 8.0
    q = c - a * b / 2.0 + a**3 / 8.0
    r = d - a * c / 4.0 + a * a * b / 16.0 - 3.0 * a**4 / 256.0
    roots = []
    if abs(q) < 1e-14 * max(1.0, abs(p), abs(r)):
        # biquadratic
        for z in _roots_quadratic(r, p, 1.0):
            if z >= 0.0:
                s = math.sqrt(z)
                roots.extend([s - shift, -s - shift])
        return roots
    # resolvent cubic: m^3 + p m^2 + (p^2/4 - r) m - q^2/8 = 0, need m > 0
    res = _roots_cubic(-q * q / 8.0, p * p / 4.0 - r, p, 1.0)
    m = max(res)
    if m <= 0.0:
        return roots
    s = math.sqrt(2.0 * m)
    for sign in (1.0, -1.0):
        # y^2 +/- s y + (p/2 + m -/+ q/(2s)) = 0
        cc = p / 2.0 + m - sign * q / (2.0 * s)
        for y in _roots_quadratic(cc, sign * s, 1.0):
            roots.append(y - shift)
    return roots


def _bisection_roots(p: Poly1, lo: float, hi: float, n: int = 4096):
    """Sign-change scan plus bisection refinement; degenerate-case fallback
    and the independent oracle used by the tests."""
    xs = np.linspace(lo, hi, n + 1)
    vals = np.array([p(x) for x in xs])
    roots = []
    for i in range(n):
        va, vb = vals[i], vals[i + 1]
        if va == 0.0:
            roots.append(xs[i])
            continue
        if va * vb < 0.0:
            a_, b_ = xs[i], xs[i + 1]
            fa = va
            for _ in range(200):
                mid = 0.5 * (a_ + b_)
                fm = p(mid)
                if fm == 0.0 or (b_ - a_) < 1e-15 * max(1.0, abs(mid)):
                    a_ = b_ = mid
                    break
                if fa * fm < 0.0:
                    b_ = mid
                else:
                    a_, fa = mid, fm
            roots.append(0.5 * (a_ + b_))
    if vals[-1] == 0.0:
        roots.append(xs[-1])
    return roots


def _cluster(roots, tol):
    roots = sorted(roots)
    out = []
    i = 0
    while i < len(roots):
        j = i
        while j + 1 < len(roots) and roots[j + 1] - roots[j] < tol:
            j += 1
        group = roots[i : j + 1]
        out.append((sum(group) / len(group), len(group)))
        i = j + 1
    return out


def solve_poly_real(p: Poly1, tol: float = 1e-9, cluster_tol: float | None = None):
    """All real roots of ``p`` with multiplicities.

    Closed forms (quadratic/Cardano/Ferrari) with a Newton polish; roots
    closer than the clustering tolerance are merged into one root with
    multiplicity.  Near-vanishing discriminants fall back to a bracketed
    sign-change scan, which is slower but does not suffer the cancellation
    of the closed forms.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if cluster_tol is None:
        cluster_tol = DEFAULT_CLUSTER_TOL
    deg = p.degree
    c = p.coeffs
    if deg == 0:
        return []
    if deg == 1:
        raw = [-c[0] / c[1]]
    elif deg == 2:
        raw = _roots_quadratic(c[0], c[1], c[2])
    elif deg == 3:
        raw = _roots_cubic(c[0], c[1], c[2], c[3])
    else:
        raw = _roots_quartic(c[0], c[1], c[2], c[3], c[4])

    scale = p.scale()
    polished = [_newton_polish(p, x) for x in raw]
    bad = any(abs(p(x)) > tol * scale * 1e3 for x in polished)
    if bad or _near_degenerate(p):
        span = 2.0 + 2.0 * max(abs(x) for x in polished) if polished else 10.0
        scan = _bisection_roots(p, -span, span)
        distinct = {round(x, 6) for x in polished}
        # the scan cannot see even-multiplicity roots, so it only wins when
        # the closed forms left bad residuals or missed a sign change
        if scan and (bad or len(scan) > len(distinct)):
            polished = [_newton_polish(p, x) for x in scan]
    return _cluster(polished, cluster_tol)


def _near_degenerate(p: Poly1) -> bool:
    # normalised discriminant test for quadratics/cubics; quartics rely on
    # the residual check in solve_poly_real
    c = p.coeffs
    if p.degree == 2:
        disc = c[1] * c[1] - 4.0 * c[2] * c[0]
        return abs(disc) < _DEGENERATE_DISC * max(1.0, p.scale() ** 2)
    if p.degree == 3:
        a, b, cc, d = c[3], c[2], c[1], c[0]
        disc = (
            18.0 * a * b * cc * d
            - 4.0 * b**3 * d
            + b * b * cc * cc
            - 4.0 * a * cc**3
            - 27.0 * a * a * d * d
        )
        return abs(disc) < _DEGENERATE_DISC * max(1.0, p.scale() ** 4)
    return False


@dataclass(frozen=True)
class Eigen2:
    trace: float
    det: float
    values: tuple  # pair of complex numbers
    is_real: bool


def eigen2(m) -> Eigen2:
    """Eigenvalues of a real 2x2 matrix from trace and determinant."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1]
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    disc = tr * tr / 4.0 - det
    if disc >= 0.0:
        sq = math.sqrt(disc)
        lam1 = tr / 2.0 + sq
        lam2 = tr / 2.0 - sq
        return Eigen2(tr, det, (complex(lam1), complex(lam2)), True)
    sq = math.sqrt(-disc)
    return Eigen2(tr, det, (complex(tr / 2.0, sq), complex(tr / 2.0, -sq)), False)


# ---------------------------------------------------------------------------
# truncated multivariate polynomials


class TruncMultiPoly:
    """Polynomial in up to 4 variables truncated at a total-degree cap.

    Coefficients are exact binary floats; products whose total degree
    exceeds the cap are discarded, so the ring closes under the cap.
    """

    __slots__ = ("nvars", "cap", "coef")

    def __init__(self, nvars: int, cap: int, coef=None):
        if not (1 <= nvars <= 4):
            raise ValueError("nvars must be in 1..4")
        if not (0 <= cap <= 6):
            raise ValueError("cap must be in 0..6")
        self.nvars = nvars
        self.cap = cap
        self.coef = {}
        if coef:
            for k, v in coef.items():
                k = tuple(int(e) for e in k)
                if len(k) != nvars:
                    raise ValueError("exponent length mismatch")
                if sum(k) <= cap and v != 0.0:
                    self.coef[k] = float(v)

    @classmethod
    def const(cls, value, nvars, cap):
        return cls(nvars, cap, {(0,) * nvars: value})

    @classmethod
    def var(cls, index, nvars, cap):
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, cap, {tuple(e): 1.0})

    def _check(self, other):
        if self.nvars != other.nvars or self.cap != other.cap:
            raise ValueError("variable count / cap mismatch")

    def _as_poly(self, other):
        if isinstance(other, TruncMultiPoly):
            self._check(other)
            return other
        return TruncMultiPoly.const(float(other), self.nvars, self.cap)

    def __add__(self, other):
        other = self._as_poly(other)
        out = dict(self.coef)
        for k, v in other.coef.items():
            out[k] = out.get(k, 0.0) + v
        return TruncMultiPoly(self.nvars, self.cap, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncMultiPoly(
            self.nvars, self.cap, {k: -v for k, v in self.coef.items()}
        )

    def __sub__(self, other):
        return self + (-self._as_poly(other))

    def __rsub__(self, other):
        return self._as_poly(other) - self

    def __mul__(self, other):
        if not isinstance(other, TruncMultiPoly):
            s = float(other)
            return TruncMultiPoly(
                self.nvars, self.cap, {k: v * s for k, v in self.coef.items()}
            )
        self._check(other)
        out = {}
        for ka, va in self.coef.items():
            for kb, vb in other.coef.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                if sum(k) > self.cap:
                    continue
                out[k] = out.get(k, 0.0) + va * vb
        return TruncMultiPoly(self.nvars, self.cap, out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = TruncMultiPoly.const(1.0, self.nvars, self.cap)
        for _ in range(int(n)):
            out = out * self
        return out

    def diff(self, index):
        """Partial derivative with respect to variable ``index``."""
        out = {}
        for k, v in self.coef.items():
            e = k[index]
            if e == 0:
                continue
            kk = list(k)
            kk[index] = e - 1
            out[tuple(kk)] = v * e
        return TruncMultiPoly(self.nvars, self.cap, out)

    def compose(self, subs):
        """Substitute ``subs[i]`` for variable i; truncation at the cap."""
        subs = [self._as_poly(s) for s in subs]
        if len(subs) != self.nvars:
            raise ValueError("need one substitution per variable")
        out = TruncMultiPoly(self.nvars, self.cap)
        for k, v in self.coef.items():
            term = TruncMultiPoly.const(v, self.nvars, self.cap)
            for i, e in enumerate(k):
                for _ in range(e):
                    term = term * subs[i]
            out = out + term
        return out

    def coeff(self, exponents):
        return self.coef.get(tuple(int(e) for e in exponents), 0.0)

    def max_abs(self):
        return max((abs(v) for v in self.coef.values()), default=0.0)

    def terms_up_to(self, degree):
        return {k: v for k, v in self.coef.items() if sum(k) <= degree}

    def evaluate(self, point):
        acc = 0.0
        for k, v in self.coef.items():
            t = v
            for x, e in zip(point, k):
                t *= x**e
            acc += t
        return acc

    def is_zero(self, tol=0.0):
        return all(abs(v) <= tol for v in self.coef.values())

    def __eq__(self, other):
        if not isinstance(other, TruncMultiPoly):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.cap == other.cap
            and self.coef == other.coef
        )

    def __repr__(self):
        items = sorted(self.coef.items())
        body = " + ".join(f"{v!r}*x^{k}" for k, v in items) or "0"
        return f"TruncMultiPoly[{self.nvars} vars, cap {self.cap}]({body})"

    @classmethod
    def random(cls, rng, nvars, cap, density=0.5, scale=2.0):
        coef = {}
        for k in product(range(cap + 1), repeat=nvars):
            if sum(k) <= cap and rng.random() < density:
                coef[k] = rng.uniform(-scale, scale)
        return cls(nvars, cap, coef)


def tp_add(p, q):
    return p + q


def tp_mul(p, q):
    return p * q


def tp_diff(p, index):
    return p.diff(index)


def tp_compose(p, subs):
    return p.compose(subs)
