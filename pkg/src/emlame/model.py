"""Effective-mass model: ordering parameters, mass, potential, constants.

Units with hbar^2 = 2.  Inside |x| <= x0 = 1/sqrt(k')

    m(x) = 1 / ((1 + x^2)(1 + k'^2 x^2))
    V(x) = A k^2/(1 + x^2) + B k^2/(1 + k'^2 x^2) + C k'^2 x^2 + D

and both are frozen at their junction values m0, V0 outside.

Energy conventions
------------------
The change of variables x = sn z / cn z, chi = m^(1/4) psi / sqrt(m) maps
the interior equation onto the associated Lame equation *at the same
energy* only when the constant term of the potential is

    D_lame = 1 + 2 beta + k^2 (3/2 - beta).

The published constant D differs from it by

    lame_shift = -k^2 (4 alpha (alpha + beta + 1) + 9/4),

which vanishes at k = 0.  The published spectra are those of the Lame
equation at energy E joined to exterior tails with kappa^2 = m0 (V0 - E)
and V0 = f_V(x0) built from the published D.  ``ModelParams.continuous``
selects between:

* ``False`` (default): that published boundary-value problem.  The
  interior potential it actually solves is f_V - lame_shift, so V steps
  by lame_shift at the junctions.
* ``True``: V = f_V continuous everywhere; the Lame energy is then
  E - lame_shift.

``energy_offset`` is the amount subtracted from the physical energy to get
the Lame energy (0 or lame_shift).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    k2: float
    mu: int = 1
    nu: int = 1
    continuous: bool = False
    gamma: float = field(init=False)

    def __post_init__(self):
        if not 0.0 <= self.k2 < 1.0:
            raise ValueError(f"k2 must lie in [0, 1), got {self.k2!r}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("ordering parameters must be finite")
        if int(self.mu) != self.mu or int(self.nu) != self.nu or self.mu < 1 or self.nu < 1:
            raise ValueError("Lame parameters must be positive integers")
        object.__setattr__(self, "gamma", -1.0 - self.alpha - self.beta)

    @classmethod
    def alpha_eq_gamma(cls, beta: float, k2: float, **kw) -> "ModelParams":
        """The one-parameter family alpha = gamma = -(1 + beta)/2."""
        return cls(alpha=-0.5 * (1.0 + beta), beta=beta, k2=k2, **kw)


@dataclass(frozen=True)
class DerivedConstants:
    params: ModelParams
    eta: float
    A: float
    B: float
    C: float
    D: float
    D_lame: float
    lame_shift: float
    energy_offset: float
    kprime: float
    x0: float
    m0: float
    V0: float
    Vmin_interior: float

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def k2(self) -> float:
        return self.params.k2


def _f_V(x, k2, kp, A, B, C, D):
    x2 = np.asarray(x, dtype=float) ** 2
    return A * k2 / (1.0 + x2) + B * k2 / (1.0 + kp * kp * x2) + C * kp * kp * x2 + D


def _minimise(f, lo: float, hi: float, npts: int = 10_000) -> float:
    xs = np.linspace(lo, hi, npts)
    vals = f(xs)
    i = int(np.argmin(vals))
    if i == 0 or i == npts - 1:
        return float(vals[i])
    res = minimize_scalar(f, bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                          options={"xatol": 1e-10})
    return float(min(res.fun, vals[i]))


def derive(params: ModelParams) -> DerivedConstants:
    a, b, k2 = params.alpha, params.beta, params.k2
    mu, nu = params.mu, params.nu
    eta = 1.0 + b + a * (a + b + 1.0)
    A = 4.0 * (1.0 + b - eta) - (mu + 0.5) ** 2
    B = (nu + 0.5) ** 2 - 4.0 * (1.0 + b - eta)
    C = 2.0 * (8.0 * eta - 5.0 * b - 6.0)
    D = (1.0 + b) * (3.0 * k2 + 2.0) - 4.0 * eta * k2 + 0.25 * k2 - 1.0
    D_lame = 1.0 + 2.0 * b + k2 * (1.5 - b)
    shift = D - D_lame
    kp = math.sqrt(1.0 - k2)
    x0 = 1.0 / math.sqrt(kp)
    m0 = kp / (1.0 + kp) ** 2
    V0 = float(_f_V(x0, k2, kp, A, B, C, D))
    vmin = _minimise(lambda x: _f_V(x, k2, kp, A, B, C, D), -x0, x0)
    return DerivedConstants(
        params=params, eta=eta, A=A, B=B, C=C, D=D, D_lame=D_lame, lame_shift=shift,
        energy_offset=shift if params.continuous else 0.0,
        kprime=kp, x0=x0, m0=m0, V0=V0, Vmin_interior=vmin,
    )


def f_m(x, dc: DerivedConstants):
    x2 = np.asarray(x, dtype=float) ** 2
    return 1.0 / ((1.0 + x2) * (1.0 + dc.kprime**2 * x2))


def f_V(x, dc: DerivedConstants):
    return _f_V(x, dc.k2, dc.kprime, dc.A, dc.B, dc.C, dc.D)


def mass(x, dc: DerivedConstants):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= dc.x0, f_m(np.clip(x, -dc.x0, dc.x0), dc), dc.m0)


def potential(x, dc: DerivedConstants):
    """The continuous potential f_V / V0 with the published constants."""
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= dc.x0, f_V(np.clip(x, -dc.x0, dc.x0), dc), dc.V0)


def interior_potential(x, dc: DerivedConstants):
    """Potential on |x| <= x0 of the boundary-value problem actually solved.

    Equals f_V when ``continuous`` is set, otherwise f_V - lame_shift.
    """
    return f_V(x, dc) - dc.lame_shift + dc.energy_offset


def mass_log_derivatives(x, dc: DerivedConstants):
    """f_m'/f_m and f_m''/f_m in closed form."""
    x = np.asarray(x, dtype=float)
    kp2 = dc.kprime**2
    p1 = 1.0 + x * x
    p2 = 1.0 + kp2 * x * x
    L = -2.0 * x / p1 - 2.0 * kp2 * x / p2
    dL = -2.0 * (1.0 - x * x) / p1**2 - 2.0 * kp2 * (1.0 - kp2 * x * x) / p2**2
    return L, dL + L * L
