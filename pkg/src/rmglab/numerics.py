"""Shared numerical kernel.

Adaptive Gauss-Kronrod quadrature (finite and semi-infinite), an embedded
Dormand-Prince 5(4) integrator with FSAL and dense output, Richardson-refined
central differences, and a bracketed root finder.  Everything here is pure:
no global state, safe to call concurrently.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureSpec",
    "OdeSpec",
    "NonConvergence",
    "StepSizeCollapse",
    "BudgetExceeded",
    "InvalidBracket",
    "quad_finite",
    "quad_semi_infinite",
    "ode_solve",
    "Dopri5",
    "finite_diff",
    "find_root",
    "CubicSpline1D",
]


class NonConvergence(RuntimeError):
    """Quadrature subdivision budget exhausted with error above tolerance."""


class StepSizeCollapse(RuntimeError):
    """ODE step size fell below the machine-representable threshold.

    This is the numerical signature of a trajectory approaching a
    singularity or domain boundary in finite time.
    """


class BudgetExceeded(RuntimeError):
    """ODE step budget exhausted before reaching the end of the time span."""


class InvalidBracket(ValueError):
    """Root bracket endpoints do not straddle a sign change."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budget for adaptive quadrature."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 1000

    def __post_init__(self):
        if self.abs_tol < 0:
            raise ValueError("abs_tol must be >= 0")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OdeSpec:
    """Tolerances and budget for adaptive ODE integration."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_step: float = math.inf
    max_steps: int = 10_000_000

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0 or self.max_step <= 0:
            raise ValueError("tolerances and max_step must be > 0")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


# ----------------------------------------------------------------------
# Gauss-Kronrod 15(7) adaptive quadrature
# ----------------------------------------------------------------------

# K15 abscissae on [-1, 1] (positive half) and weights; G7 weights sit on
# the odd-indexed abscissae.  QUADPACK dqk15 constants.
_XGK = (
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
)
_WGK = (
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
)
_WG = (
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
)


def _kronrod_panel(f: Callable[[float], float], a: float, b: float):
    """One K15/G7 evaluation on [a, b]; returns (I15, err_estimate)."""
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fv = [0.0] * 15
    fc = f(c)
    fv[7] = fc
    resg = _WG[3] * fc
    resk = _WGK[7] * fc
    for j in range(7):
        x = h * _XGK[j]
        f1 = f(c - x)
        f2 = f(c + x)
        fv[j] = f1
        fv[14 - j] = f2
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    resk *= h
    resg *= h
    # QUADPACK-style scaled error estimate
    mean = resk / (b - a)
    resasc = 0.0
    for j in range(8):
        resasc += _WGK[j] * abs(fv[j] - mean)
    for j in range(8, 15):
        resasc += _WGK[14 - j] * abs(fv[j] - mean)
    resasc *= abs(h)
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    return resk, err


def _adaptive_gk(f, panels, spec: QuadratureSpec) -> float:
    """Adaptive bisection over an initial panel list."""
    heap = []
    total = 0.0
    toterr = 0.0
    tag = 0
    for a, b in panels:
        val, err = _kronrod_panel(f, a, b)
        total += val
        toterr += err
        heapq.heappush(heap, (-err, tag, a, b, val, err))
        tag += 1
    splits = 0
    while toterr > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if splits >= spec.max_subdivisions:
            raise NonConvergence(
                f"quadrature error {toterr:.3e} above tolerance after "
                f"{splits} subdivisions"
            )
        _, _, a, b, val, err = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            # interval at float resolution; accept its error as-is
            heapq.heappush(heap, (0.0, tag, a, b, val, 0.0))
            tag += 1
            toterr -= err
            continue
        vl, el = _kronrod_panel(f, a, m)
        vr, er = _kronrod_panel(f, m, b)
        total += vl + vr - val
        toterr += el + er - err
        heapq.heappush(heap, (-el, tag, a, m, vl, el))
        heapq.heappush(heap, (-er, tag + 1, m, b, vr, er))
        tag += 2
        splits += 1
    return total


def quad_finite(f: Callable[[float], float], a: float, b: float,
                spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Adaptive integral of f over the finite interval [a, b]."""
    if a == b:
        return 0.0
    n0 = 4
    edges = np.linspace(a, b, n0 + 1)
    return _adaptive_gk(f, list(zip(edges[:-1], edges[1:])), spec)


# Seed panels for the transformed half line: uniform panels plus a geometric
# cascade toward t=1 so integrands with mass at very large s are detected
# before any adaptive refinement happens.
_SEMI_INF_EDGES = tuple(
    sorted(
        set([i / 8 for i in range(9)])
        | {1.0 - 10.0 ** (-m) for m in range(1, 13)}
    )
)


def quad_semi_infinite(f: Callable[[float], float],
                       spec: QuadratureSpec = QuadratureSpec()) -> float:
    """Adaptive integral of f over [0, inf).

    The half line is mapped to [0, 1) by s = t/(1-t); the Jacobian
    1/(1-t)^2 keeps algebraically decaying integrands bounded.  f must
    decay at least like s^-2.
    """

    def g(t: float) -> float:
        w = 1.0 - t
        return f(t / w) / (w * w)

    panels = list(zip(_SEMI_INF_EDGES[:-1], _SEMI_INF_EDGES[1:]))
    return _adaptive_gk(g, panels, spec)


# ----------------------------------------------------------------------
# Dormand-Prince 5(4)
# ----------------------------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# local error coefficients, b5 - b4
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# dense-output coefficients of the 4th-order continuous extension
_D = (
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
)


class Dopri5:
    """Stepwise Dormand-Prince 5(4) integrator with FSAL and dense output.

    Drive it with repeated calls to step(); after each accepted step the
    previous interval [t_old, t] can be interpolated with dense().
    """

    def __init__(self, rhs, t0: float, y0, spec: OdeSpec, t_end: float):
        self.rhs = rhs
        self.spec = spec
        self.t = float(t0)
        self.t_end = float(t_end)
        self.y = np.asarray(y0, dtype=float).copy()
        self.f = np.asarray(rhs(self.t, self.y), dtype=float)
        self.n_steps = 0
        self.n_rejected = 0
        self.t_old = self.t
        self.y_old = self.y.copy()
        self._cont = None
        self.h = self._initial_step()

    def _error_norm(self, err, y0, y1):
        sc = self.spec.abs_tol + self.spec.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
        return float(np.sqrt(np.mean((err / sc) ** 2)))

    def _initial_step(self) -> float:
        # Hairer's starting-step heuristic, order 5
        spec = self.spec
        span = abs(self.t_end - self.t)
        if span == 0.0:
            return spec.max_step
        sc = spec.abs_tol + spec.rel_tol * np.abs(self.y)
        d0 = float(np.sqrt(np.mean((self.y / sc) ** 2)))
        d1 = float(np.sqrt(np.mean((self.f / sc) ** 2)))
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h0 = min(h0, span)
        y1 = self.y + h0 * self.f
        f1 = np.asarray(self.rhs(self.t + h0, y1), dtype=float)
        d2 = float(np.sqrt(np.mean(((f1 - self.f) / sc) ** 2))) / h0
        dm = max(d1, d2)
        h1 = max(1e-6, h0 * 1e-3) if dm <= 1e-15 else (0.01 / dm) ** 0.2
        return min(100 * h0, h1, span, spec.max_step)

    @property
    def finished(self) -> bool:
        return self.t >= self.t_end

    def reset_state(self, y_new) -> None:
        """Replace the current state (e.g. after reprojection); drops FSAL."""
        self.y = np.asarray(y_new, dtype=float).copy()
        self.f = np.asarray(self.rhs(self.t, self.y), dtype=float)
        self._cont = None

    def step(self) -> None:
        """Advance one accepted step (may internally retry rejected ones)."""
        spec = self.spec
        n = self.y.size
        while True:
            if self.n_steps + self.n_rejected >= spec.max_steps:
                raise BudgetExceeded(
                    f"exceeded {spec.max_steps} steps at t={self.t:.6g}")
            h = min(self.h, spec.max_step, self.t_end - self.t)
            if h <= 16 * np.finfo(float).eps * max(abs(self.t), 1.0):
                raise StepSizeCollapse(
                    f"step size {h:.3e} collapsed at t={self.t:.6g}")
            k = np.empty((7, n))
            k[0] = self.f
            for i in range(1, 7):
                yi = self.y + h * sum(_A[i][j] * k[j] for j in range(i))
                k[i] = self.rhs(self.t + _C[i] * h, yi)
            y1 = self.y + h * sum(_A[6][j] * k[j] for j in range(6))
            # stage 7 is f(t+h, y1); with FSAL it seeds the next step
            err = h * sum(_E[j] * k[j] for j in range(7))
            enorm = self._error_norm(err, self.y, y1)
            if enorm <= 1.0:
                fac = 0.9 * (enorm ** -0.2) if enorm > 0 else 5.0
                self.h = h * min(5.0, max(0.2, fac))
                ydiff = y1 - self.y
                bspl = h * k[0] - ydiff
                cont5 = h * (
                    _D[0] * k[0] + _D[2] * k[2] + _D[3] * k[3]
                    + _D[4] * k[4] + _D[5] * k[5] + _D[6] * k[6]
                )
                self._cont = (
                    self.y.copy(), ydiff, bspl,
                    ydiff - h * k[6] - bspl, cont5, h,
                )
                self.t_old = self.t
                self.y_old = self.y.copy()
                self.t = self.t + h
                self.y = y1
                self.f = k[6]
                self.n_steps += 1
                return
            self.n_rejected += 1
            self.h = h * min(1.0, max(0.2, 0.9 * (enorm ** -0.2)))

    def dense(self, t: float):
        """4th-order interpolant on the last accepted step."""
        if self._cont is None:
            raise RuntimeError("no accepted step to interpolate")
        c1, c2, c3, c4, c5, h = self._cont
        th = (t - self.t_old) / h
        th1 = 1.0 - th
        return c1 + th * (c2 + th1 * (c3 + th * (c4 + th1 * c5)))


def ode_solve(rhs, y0, t_span: Sequence[float], spec: OdeSpec = OdeSpec(),
              output_times: Sequence[float] | None = None):
    """Integrate y' = rhs(t, y) over t_span, sampling at output_times.

    Returns a list of (t, y) pairs, one per requested output time (or the
    endpoint alone if output_times is None).  Raises StepSizeCollapse or
    BudgetExceeded on failure; those carry the failure time in their
    message.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("backward integration not supported; reverse rhs")
    if output_times is None:
        output_times = [t1]
    ts = [float(t) for t in output_times]
    if any(t < t0 or t > t1 for t in ts):
        raise ValueError("output_times must lie within t_span")
    if sorted(ts) != ts:
        raise ValueError("output_times must be nondecreasing")
    stepper = Dopri5(rhs, t0, y0, spec, t1)
    out = []
    i = 0
    while i < len(ts) and ts[i] <= t0:
        out.append((ts[i], stepper.y.copy()))
        i += 1
    while i < len(ts):
        stepper.step()
        while i < len(ts) and ts[i] <= stepper.t:
            out.append((ts[i], stepper.dense(ts[i])))
            i += 1
    return out


# ----------------------------------------------------------------------
# finite differences and root finding
# ----------------------------------------------------------------------

def finite_diff(f: Callable[[float], float], x: float, order: int,
                h: float) -> float:
    """Central-difference derivative estimate of the given order.

    Orders 1 and 2 are Richardson-extrapolated to O(h^4); order 3 is the
    plain O(h^2) five-point stencil.  The caller owns the step choice.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if order == 1:
        def d(hh):
            return (f(x + hh) - f(x - hh)) / (2 * hh)
        return (4 * d(h / 2) - d(h)) / 3
    if order == 2:
        def d(hh):
            return (f(x + hh) - 2 * f(x) + f(x - hh)) / (hh * hh)
        return (4 * d(h / 2) - d(h)) / 3
    if order == 3:
        return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (
            2 * h ** 3)
    raise ValueError("order must be 1, 2 or 3")


def find_root(f: Callable[[float], float], bracket: Sequence[float],
              tol: float = 1e-12) -> float:
    """Bracketed root via bisection with secant acceleration.

    Derivative-free.  Stops when |f| drops below tol or the bracket width
    does.  Raises InvalidBracket when f(lo) and f(hi) share a sign.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise InvalidBracket(f"f({lo})={flo:.3e} and f({hi})={fhi:.3e} "
                             "have the same sign")
    for _ in range(200):
        if abs(hi - lo) < tol:
            break
        # secant candidate, guarded to the strict interior
        x = hi - fhi * (hi - lo) / (fhi - flo)
        margin = 0.05 * (hi - lo)
        if not (lo + margin < x < hi - margin):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if abs(fx) < tol:
            return x
        if flo * fx < 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# natural cubic spline (for tabulated geometry coefficients)
# ----------------------------------------------------------------------

class CubicSpline1D:
    """Natural cubic spline through (x_i, y_i) with analytic derivative."""

    def __init__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
            raise ValueError("x must be strictly increasing, size >= 3")
        n = x.size
        h = np.diff(x)
        rhs = np.zeros(n)
        rhs[1:-1] = 6 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
        m = np.zeros((n, n))
        m[0, 0] = m[-1, -1] = 1.0
        for i in range(1, n - 1):
            m[i, i - 1] = h[i - 1]
            m[i, i] = 2 * (h[i - 1] + h[i])
            m[i, i + 1] = h[i]
        sec = np.linalg.solve(m, rhs)
        self.x = x
        self.y = y
        self.h = h
        self.sec = sec

    def _locate(self, t: float) -> int:
        i = int(np.searchsorted(self.x, t) - 1)
        return min(max(i, 0), self.x.size - 2)

    def __call__(self, t: float) -> float:
        i = self._locate(t)
        h = self.h[i]
        a = (self.x[i + 1] - t) / h
        b = (t - self.x[i]) / h
        return (a * self.y[i] + b * self.y[i + 1]
                + ((a ** 3 - a) * self.sec[i] + (b ** 3 - b) * self.sec[i + 1])
                * h * h / 6)

    def derivative(self, t: float) -> float:
        i = self._locate(t)
        h = self.h[i]
        a = (self.x[i + 1] - t) / h
        b = (t - self.x[i]) / h
        return ((self.y[i + 1] - self.y[i]) / h
                + ((3 * b * b - 1) * self.sec[i + 1]
                   - (3 * a * a - 1) * self.sec[i]) * h / 6)
