"""Shooting solver for the same bound-state problem, free of elliptic functions.

With phi = psi / sqrt(m) the interior equation has no first-derivative term:

    phi'' = [f_m (U - E) + (beta/2) f_m''/f_m + (3/4 - eta) (f_m'/f_m)^2] phi,

U being ``model.interior_potential``.  Outside, phi = exp(-kappa |x|) up to
a constant, and phi' jumps by -+(beta/2)(f_m'/f_m) phi at x = +-x0.  We
start from the exact left tail, integrate across the well with fixed-step
RK4 and test the right-hand tail condition.  Everything is vectorised over
the trial energies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import DerivedConstants, ModelParams, derive, f_m, interior_potential, mass_log_derivatives


@dataclass(frozen=True)
class ShootingConfig:
    steps: int = 4000          # RK4 steps across [-x0, x0]
    e_grid: int = 600          # bracketing grid over the energy window
    lambda_depth: float = 60.0  # window floor is V0 - lambda_depth
    tol: float = 1e-12

    def __post_init__(self):
        if self.steps < 2 or self.e_grid < 2:
            raise ValueError("steps and e_grid must be at least 2")


def _coefficients(dc: DerivedConstants, x):
    g = f_m(x, dc)
    L, R2 = mass_log_derivatives(x, dc)
    w = g * interior_potential(x, dc) + 0.5 * dc.beta * R2 + (0.75 - dc.eta) * L * L
    return w, g


def shoot_determinant(E, dc: DerivedConstants, steps: int = 4000):
    """Normalised tail mismatch (phi' + kappa phi) / |(phi, phi')| at x0+.

    Continuous in E below V0; its zeros are the bound states.
    """
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if np.any(E >= dc.V0):
        raise ValueError("E must lie below V0")
    kap = np.sqrt(dc.m0 * (dc.V0 - E))
    x0 = dc.x0
    h = 2.0 * x0 / steps
    xs = np.linspace(-x0, x0, 2 * steps + 1)  # nodes and midpoints
    w, g = _coefficients(dc, xs)
    L_end, _ = mass_log_derivatives(np.array([-x0, x0]), dc)

    phi = np.ones_like(E)
    dphi = kap + 0.5 * dc.beta * L_end[0] * phi
    for i in range(steps):
        q0 = w[2 * i] - E * g[2 * i]
        qm = w[2 * i + 1] - E * g[2 * i + 1]
        q1 = w[2 * i + 2] - E * g[2 * i + 2]
        k1p, k1d = dphi, q0 * phi
        p2 = phi + 0.5 * h * k1p
        d2 = dphi + 0.5 * h * k1d
        k2p, k2d = d2, qm * p2
        p3 = phi + 0.5 * h * k2p
        d3 = dphi + 0.5 * h * k2d
        k3p, k3d = d3, qm * p3
        p4 = phi + h * k3p
        d4 = dphi + h * k3d
        k4p, k4d = d4, q1 * p4
        phi = phi + h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        dphi = dphi + h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        if i % 32 == 31:
            nrm = np.hypot(phi, dphi)
            phi, dphi = phi / nrm, dphi / nrm
    dphi = dphi - 0.5 * dc.beta * L_end[1] * phi
    return (dphi + kap * phi) / np.hypot(phi, dphi)


def _illinois(f, a, b, fa, fb, tol, maxiter=200):
    """Vectorised Illinois (modified regula falsi) on sign-change brackets.

    ``b`` is the latest iterate and [a, b] always brackets the root.
    """
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    active = np.ones(a.shape, dtype=bool)
    for _ in range(maxiter):
        c = b - fb * (b - a) / (fb - fa)
        c = np.where(np.isfinite(c), c, 0.5 * (a + b))
        fc = np.where(active, f(np.where(active, c, b)), fb)
        flip = np.sign(fc) != np.sign(fb)
        a_new = np.where(flip, b, a)
        fa_new = np.where(flip, fb, 0.5 * fa)
        step = np.abs(c - b)
        a = np.where(active, a_new, a)
        fa = np.where(active, fa_new, fa)
        b = np.where(active, c, b)
        fb = np.where(active, fc, fb)
        active &= (fc != 0) & (step > tol) & (np.abs(b - a) > tol)
        if not active.any():
            break
    return b


def oracle_roots(params: ModelParams, cfg: Optional[ShootingConfig] = None,
                 lower: Optional[float] = None) -> np.ndarray:
    """Bound-state energies from the shooting mismatch."""
    cfg = cfg or ShootingConfig()
    dc = derive(params)
    lo = dc.V0 - cfg.lambda_depth if lower is None else lower
    hi = dc.V0 - 1e-9
    if lo >= hi:
        return np.array([])
    grid = np.linspace(lo, hi, cfg.e_grid)

    def f(E):
        return shoot_determinant(E, dc, cfg.steps)

    vals = f(grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    roots = list(grid[:-1][vals[:-1] == 0.0])
    if idx.size:
        roots.extend(_illinois(f, grid[idx], grid[idx + 1], vals[idx], vals[idx + 1], cfg.tol))
    return np.sort(np.asarray(roots, dtype=float))


def _refine(E0: float, dc: DerivedConstants, steps: int, width: float = 0.05, tol: float = 1e-13):
    a, b = np.array([E0 - width]), np.array([min(E0 + width, dc.V0 - 1e-12)])
    f = lambda E: shoot_determinant(E, dc, steps)  # noqa: E731
    fa, fb = f(a), f(b)
    if np.sign(fa[0]) == np.sign(fb[0]):
        raise ArithmeticError(f"root near {E0} not bracketed at steps={steps}")
    return float(_illinois(f, a, b, fa, fb, tol)[0])


@dataclass(frozen=True)
class ConvergenceReport:
    steps: tuple
    roots: tuple
    shifts: tuple
    observed_order: float
    extrapolated: float
    converged: bool


def convergence_study(E_root: float, dc: DerivedConstants, base_steps: int = 64,
                      halvings: int = 3, order_tol: float = 0.5) -> ConvergenceReport:
    """Root at step h, h/2, ..., observed RK4 order and Richardson value."""
    steps = tuple(base_steps * 2**i for i in range(halvings + 1))
    roots = tuple(_refine(E_root, dc, n) for n in steps)
    shifts = tuple(roots[i] - roots[i + 1] for i in range(len(roots) - 1))
    order = math.log2(abs(shifts[-2] / shifts[-1])) if shifts[-1] != 0 else math.inf
    extrap = roots[-1] + (roots[-1] - roots[-2]) / 15.0
    ok = abs(order - 4.0) < order_tol and abs(extrap - roots[-1]) < 1e-5
    return ConvergenceReport(steps, roots, shifts, order, extrap, ok)
