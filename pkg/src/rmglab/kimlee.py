"""Reduced magnetic field of the Kim-Lee two-vortex flow on the plane.

The field on the relative moduli space is rotationally invariant and
determined by the interaction profile b(sigma) and its derivative through

    a1(sigma) = 2 pi kappa (1 - sigma b),        (dtheta component)
    a2(sigma) = (pi/2) kappa sigma^2 b',         (dtheta component)
    f(sigma)  = (pi kappa / sigma) d/dsigma(-2 sigma b + sigma^2 b' / 2),

and in the global coordinate w = zeta^2 the two-form coefficient is
f(sqrt|w|)/|w| times (i/8) dw ^ dw-bar.  For the small-separation profile
b = 1/sigma - sigma/2 the coefficient scales exactly as 1/|w|, so the
field has no continuous extension to the coincidence set: this flow is
not globally defined, unlike the Ricci magnetic flow.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .numerics import finite_diff

__all__ = [
    "NonpositiveSeparation",
    "NonpositiveModulus",
    "ProfileKind",
    "BProfile",
    "truncated_profile",
    "table_profile",
    "load_profile_csv",
    "one_form_coefficients",
    "effective_field_f",
    "singular_coefficient",
    "dump_field_csv",
]


class NonpositiveSeparation(ValueError):
    pass


class NonpositiveModulus(ValueError):
    pass


class ProfileKind(enum.Enum):
    TRUNCATED_ASYMPTOTIC = "truncated_asymptotic"
    USER_TABLE = "user_table"


@dataclass(frozen=True)
class BProfile:
    """Interaction profile b(sigma) with its derivative."""

    kind: ProfileKind
    b: Callable[[float], float]
    b_prime: Callable[[float], float]


def truncated_profile() -> BProfile:
    """Leading small-separation profile b = 1/sigma - sigma/2."""
    return BProfile(
        ProfileKind.TRUNCATED_ASYMPTOTIC,
        b=lambda sg: 1.0 / sg - 0.5 * sg,
        b_prime=lambda sg: -1.0 / (sg * sg) - 0.5,
    )


def table_profile(sigma: Sequence[float], b: Sequence[float]) -> BProfile:
    """Profile from tabulated (sigma, b) samples.

    Values interpolate with a local Lagrange cubic; the derivative is a
    finite difference of the interpolant, per the numerics kernel.
    """
    sg = np.asarray(sigma, dtype=float)
    bv = np.asarray(b, dtype=float)
    if sg.size < 4 or np.any(np.diff(sg) <= 0):
        raise ValueError("need at least 4 strictly increasing sigma samples")

    def interp(x: float) -> float:
        i = int(np.searchsorted(sg, x))
        lo = min(max(i - 2, 0), sg.size - 4)
        xs, ys = sg[lo:lo + 4], bv[lo:lo + 4]
        out = 0.0
        for j in range(4):
            term = ys[j]
            for k in range(4):
                if k != j:
                    term *= (x - xs[k]) / (xs[j] - xs[k])
            out += term
        return out

    hmin = float(np.min(np.diff(sg)))

    def deriv(x: float) -> float:
        return finite_diff(interp, x, 1, 0.5 * hmin)

    return BProfile(ProfileKind.USER_TABLE, interp, deriv)


def load_profile_csv(path) -> BProfile:
    """Read a two-column sigma,b table (header optional)."""
    sigmas, bs = [], []
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                sigmas.append(float(row[0]))
                bs.append(float(row[1]))
            except ValueError:
                continue  # header line
    return table_profile(sigmas, bs)


def one_form_coefficients(profile: BProfile, kappa: float, sigma: float):
    """dtheta components (a1, a2) of the two reduced one-forms."""
    if sigma <= 0:
        raise NonpositiveSeparation(f"sigma={sigma} <= 0")
    bv = profile.b(sigma)
    bp = profile.b_prime(sigma)
    a1 = 2.0 * math.pi * kappa * (1.0 - sigma * bv)
    a2 = 0.5 * math.pi * kappa * sigma * sigma * bp
    return a1, a2


def _potential(profile: BProfile, sigma: float) -> float:
    # -2 sigma b + sigma^2 b' / 2, whose sigma-derivative drives f
    return -2.0 * sigma * profile.b(sigma) \
        + 0.5 * sigma * sigma * profile.b_prime(sigma)


def effective_field_f(profile: BProfile, kappa: float, sigma: float) -> float:
    """Reduced magnetic field coefficient f(sigma).

    Analytic for the truncated profile (where it is identically
    3 pi kappa / 2); a finite difference of the tabulated potential
    otherwise.
    """
    if sigma <= 0:
        raise NonpositiveSeparation(f"sigma={sigma} <= 0")
    if kappa == 0.0:
        return 0.0
    if profile.kind is ProfileKind.TRUNCATED_ASYMPTOTIC:
        # d/dsigma(-2 sigma b + sigma^2 b'/2) = d/dsigma(-5/2 + 3 sigma^2/4)
        return 1.5 * math.pi * kappa
    dpot = finite_diff(lambda x: _potential(profile, x), sigma, 1,
                       min(1e-3, 0.25 * sigma))
    return math.pi * kappa / sigma * dpot


def singular_coefficient(profile: BProfile, kappa: float, w_abs: float) -> float:
    """Two-form coefficient f(sqrt|w|)/|w| in the global coordinate w.

    For the truncated profile this equals (3 pi kappa / 2) / |w| exactly:
    the field diverges on the coincidence set w = 0.
    """
    if w_abs <= 0:
        raise NonpositiveModulus(f"|w|={w_abs} <= 0")
    return effective_field_f(profile, kappa, math.sqrt(w_abs)) / w_abs


def dump_field_csv(path, profile: BProfile, kappa: float,
                   sigmas: Sequence[float], metadata: dict | None = None) -> None:
    with open(path, "w") as fh:
        meta = dict(metadata or {})
        meta.setdefault("kappa", kappa)
        meta.setdefault("profile", profile.kind.value)
        for k in sorted(meta):
            fh.write(f"# {k}={meta[k]}\n")
        fh.write("sigma,f,a1_coef,a2_coef\n")
        for sg in sigmas:
            f = effective_field_f(profile, kappa, sg)
            a1, a2 = one_form_coefficients(profile, kappa, sg)
            fh.write(",".join(f"{v:.17g}" for v in (sg, f, a1, a2)) + "\n")
