"""Reduced magnetic geodesic flow on rotationally symmetric Kahler surfaces.

The configuration space is a surface with metric A1(s) ds^2 + A3(s) dpsi^2
and a rotationally invariant magnetic two-form F(s) ds ^ dpsi.  The flow of
a unit-mass particle with charge q is

    s''   = -[A1'(s) s'^2 - A3'(s) psi'^2 + 2 q F(s) psi'] / (2 A1(s))
    psi'' = -[A3'(s) s' psi' - q F(s) s'] / A3(s)

which conserves the speed sqrt(A1 s'^2 + A3 psi'^2) and the angular
momentum A3(s) psi' - q alpha(s) with alpha' = F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import Dopri5, OdeSpec, StepSizeCollapse

__all__ = [
    "RadialKahlerSurface",
    "MagneticCoefficient",
    "ReducedState",
    "Trajectory",
    "DomainExit",
    "DegenerateOrbit",
    "rmg_rhs",
    "evolve",
    "orbit_frequency",
    "speed",
    "sech_surface",
    "sech_gauss_curvature",
    "flat_disc",
]


class DomainExit(RuntimeError):
    """Orbit parameter left the open domain of the surface."""


class DegenerateOrbit(ZeroDivisionError):
    """Circular-orbit frequency undefined where A3'(s) vanishes."""


@dataclass(frozen=True)
class RadialKahlerSurface:
    """Rotationally symmetric surface A1(s) ds^2 + A3(s) dpsi^2 on (s_min, s_max)."""

    name: str
    A1: Callable[[float], float]
    A3: Callable[[float], float]
    A1_prime: Callable[[float], float]
    A3_prime: Callable[[float], float]
    s_min: float = 0.0
    s_max: float = math.inf

    def contains(self, s: float) -> bool:
        return self.s_min < s < self.s_max


@dataclass(frozen=True)
class MagneticCoefficient:
    """Coefficient of the magnetic two-form F(s) ds ^ dpsi, scaled by charge."""

    name: str
    F: Callable[[float], float]
    charge: float = 1.0

    def value(self, s: float) -> float:
        return self.charge * self.F(s)

    def with_charge(self, charge: float) -> "MagneticCoefficient":
        return MagneticCoefficient(self.name, self.F, charge)


ZERO_FIELD = MagneticCoefficient("zero", lambda s: 0.0, 0.0)


@dataclass(frozen=True)
class ReducedState:
    s: float
    psi: float
    s_dot: float
    psi_dot: float

    def as_array(self) -> np.ndarray:
        return np.array([self.s, self.psi, self.s_dot, self.psi_dot])


@dataclass
class Trajectory:
    """Time-stamped reduced states with per-sample speed and run metadata."""

    t: np.ndarray
    states: np.ndarray          # shape (n, 4): s, psi, s_dot, psi_dot
    speed: np.ndarray
    termination: str            # "completed" | "domain_exit" | "step_collapse"
    metadata: dict = field(default_factory=dict)

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def psi(self) -> np.ndarray:
        return self.states[:, 1]

    def speed_drift(self) -> float:
        v0 = self.speed[0]
        if v0 == 0.0:
            return float(np.max(np.abs(self.speed)))
        return float(np.max(np.abs(self.speed - v0)) / abs(v0))

    def write_csv(self, path, extra_metadata: dict | None = None) -> None:
        meta = dict(self.metadata)
        if extra_metadata:
            meta.update(extra_metadata)
        with open(path, "w") as fh:
            for k in sorted(meta):
                fh.write(f"# {k}={meta[k]}\n")
            fh.write(f"# termination={self.termination}\n")
            fh.write(f"# speed_drift={self.speed_drift():.3e}\n")
            fh.write("t,s,psi,s_dot,psi_dot,speed\n")
            for i in range(self.t.size):
                row = [self.t[i], *self.states[i], self.speed[i]]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def speed(surface: RadialKahlerSurface, state: ReducedState) -> float:
    """Metric speed sqrt(A1 s'^2 + A3 psi'^2)."""
    return math.sqrt(surface.A1(state.s) * state.s_dot ** 2
                     + surface.A3(state.s) * state.psi_dot ** 2)


def rmg_rhs(surface: RadialKahlerSurface, fieldcoef: MagneticCoefficient,
            state: ReducedState):
    """Right-hand side (s', psi', s'', psi'') of the reduced flow."""
    s = state.s
    if not surface.contains(s):
        raise DomainExit(f"s={s:.6g} outside ({surface.s_min}, {surface.s_max})")
    a1 = surface.A1(s)
    a3 = surface.A3(s)
    a1p = surface.A1_prime(s)
    a3p = surface.A3_prime(s)
    f = fieldcoef.value(s)
    sd, pd = state.s_dot, state.psi_dot
    s_dd = -(a1p * sd * sd - a3p * pd * pd + 2.0 * f * pd) / (2.0 * a1)
    psi_dd = -(a3p * sd * pd - f * sd) / a3
    return sd, pd, s_dd, psi_dd


def orbit_frequency(surface: RadialKahlerSurface,
                    fieldcoef: MagneticCoefficient, s: float) -> float:
    """Angular velocity nu(s) = 2 q F(s) / A3'(s) of the circular orbit at s.

    The circle s = const traversed at psi' = nu(s) solves the reduced flow
    exactly.
    """
    a3p = surface.A3_prime(s)
    if a3p == 0.0:
        raise DegenerateOrbit(f"A3'({s}) = 0")
    return 2.0 * fieldcoef.value(s) / a3p


def evolve(surface: RadialKahlerSurface, fieldcoef: MagneticCoefficient,
           state0: ReducedState, t_span: Sequence[float],
           spec: OdeSpec = OdeSpec(), n_samples: int = 1001) -> Trajectory:
    """Integrate the reduced flow, sampling n_samples points over t_span.

    Terminates early, with the reason recorded on the trajectory, when the
    orbit parameter exits the surface domain or the step size collapses
    (the numerical signature of incompleteness).
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not surface.contains(state0.s):
        raise DomainExit(f"initial s={state0.s} outside domain")

    def rhs(t, y):
        st = ReducedState(*y)
        return np.array(rmg_rhs(surface, fieldcoef, st))

    out_t = np.linspace(t0, t1, n_samples)
    stepper = Dopri5(rhs, t0, state0.as_array(), spec, t1)
    ts = [t0]
    ys = [state0.as_array()]
    termination = "completed"
    i = 1
    while not stepper.finished:
        try:
            stepper.step()
        except StepSizeCollapse:
            termination = "step_collapse"
            break
        except (DomainExit, ZeroDivisionError, FloatingPointError,
                OverflowError, ValueError):
            # a stage evaluation left the coordinate chart
            termination = "domain_exit"
            break
        eps = 1e-12 * (abs(stepper.t) + 1.0)
        while i < n_samples and out_t[i] <= stepper.t + eps:
            ts.append(min(out_t[i], stepper.t))
            ys.append(stepper.dense(min(out_t[i], stepper.t)))
            i += 1
        if not surface.contains(stepper.y[0]):
            termination = "domain_exit"
            break
    t_arr = np.array(ts)
    y_arr = np.vstack(ys)
    v = np.array([speed(surface, ReducedState(*row)) for row in y_arr])
    meta = {
        "surface": surface.name,
        "field": fieldcoef.name,
        "charge": fieldcoef.charge,
        "rel_tol": spec.rel_tol,
        "abs_tol": spec.abs_tol,
        "t_final": t_arr[-1],
        "s_min_reached": float(np.min(y_arr[:, 0])),
        "s_max_reached": float(np.max(y_arr[:, 0])),
    }
    return Trajectory(t_arr, y_arr, v, termination, meta)


# ----------------------------------------------------------------------
# example surfaces
# ----------------------------------------------------------------------

def flat_disc() -> RadialKahlerSurface:
    """Euclidean plane in polar coordinates, for oracle tests."""
    return RadialKahlerSurface(
        "flat-disc",
        A1=lambda s: 1.0,
        A3=lambda s: s * s,
        A1_prime=lambda s: 0.0,
        A3_prime=lambda s: 2.0 * s,
    )


def sech_gauss_curvature(r: float) -> float:
    """Gauss curvature of the conformal metric sech(r) |dz|^2.

    For a conformal factor Phi, K = -laplacian(log Phi) / (2 Phi) with the
    flat Laplacian; here Phi = sech r gives K = (sech r + sinh(r)/r) / 2.
    """
    if r == 0.0:
        return 1.0  # limit: (1 + 1)/2
    return 0.5 * (1.0 / math.cosh(r) + math.sinh(r) / r)


def sech_surface(charge: float = 1.0):
    """Surface of revolution with metric sech|z| |dz|^2 and its Ricci field.

    Geodesically incomplete (finite radial length) yet with curvature that
    grows fast enough toward the end to confine charged orbits.  The
    magnetic two-form is half the scalar curvature times the volume form,
    so its ds ^ dpsi coefficient is K(r) sqrt(A1 A3) = K(r) r sech(r).
    """
    surface = RadialKahlerSurface(
        "sech-plane",
        A1=lambda r: 1.0 / math.cosh(r),
        A3=lambda r: r * r / math.cosh(r),
        A1_prime=lambda r: -math.tanh(r) / math.cosh(r),
        A3_prime=lambda r: (2.0 * r - r * r * math.tanh(r)) / math.cosh(r),
        s_min=0.0,
        s_max=math.inf,
    )
    fieldcoef = MagneticCoefficient(
        "sech-ricci",
        F=lambda r: sech_gauss_curvature(r) * r / math.cosh(r),
        charge=charge,
    )
    return surface, fieldcoef
