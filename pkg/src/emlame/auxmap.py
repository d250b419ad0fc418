"""Constant-mass picture in the z coordinate.

With dz/dx = sqrt(m) the problem becomes -chi'' + V~(z) chi = E chi, where
V~ is the Lame potential 2k^2 [sn^2 + cn^2/dn^2] on |z| < K/2, the constant
V0 outside, and a pair of delta terms of weight (beta + 1/2)(1 + k') at
z = +-K/2.  The exterior is mapped linearly, z = sqrt(m0) x + lambda_+-.

Energies returned by ``vtilde`` and ``vtilde_min`` are physical energies,
i.e. they include ``DerivedConstants.energy_offset``.  Band edges are
Lame energies.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ellipkinc

from .elliptic import EllipticContext, jacobi, make_context
from .lame import band_edge_energies
from .model import DerivedConstants


class BetaCase(enum.Enum):
    BARRIER = "barrier"  # beta > -1/2
    NEUTRAL = "neutral"  # beta = -1/2
    WELL = "well"        # beta < -1/2


def classify_beta(beta: float, tol: float = 1e-12) -> BetaCase:
    s = beta + 0.5
    if abs(s) <= tol:
        return BetaCase.NEUTRAL
    return BetaCase.BARRIER if s > 0 else BetaCase.WELL


@dataclass(frozen=True)
class AuxiliaryPicture:
    lambda_plus: float
    lambda_minus: float
    delta_weight: float
    vtilde_min: float
    beta_case: BetaCase
    band_edges: tuple


def picture(dc: DerivedConstants) -> AuxiliaryPicture:
    ctx = make_context(dc.k2)
    lam = 0.5 * ctx.K - math.sqrt(dc.m0) * dc.x0
    return AuxiliaryPicture(
        lambda_plus=lam,
        lambda_minus=-lam,
        delta_weight=chi_jump(dc),
        vtilde_min=vtilde_min(dc),
        beta_case=classify_beta(dc.beta),
        band_edges=band_edge_energies(dc.k2),
    )


def vtilde_min(dc: DerivedConstants) -> float:
    """Minimum of the smooth interior part, attained at z = 0."""
    return 2.0 * dc.k2 + dc.energy_offset


def chi_jump(dc: DerivedConstants) -> float:
    """Coefficient w in chi'(+-K/2 outside) - chi'(+-K/2 inside) = +-w chi."""
    return (dc.beta + 0.5) * (1.0 + dc.kprime)


def delta_terms(dc: DerivedConstants):
    """(location, weight) of the two delta terms."""
    h = 0.5 * make_context(dc.k2).K
    w = chi_jump(dc)
    return [(-h, w), (h, w)]


def _lambda(dc: DerivedConstants, ctx: EllipticContext) -> float:
    return 0.5 * ctx.K - math.sqrt(dc.m0) * dc.x0


def x_of_z(z, dc: DerivedConstants):
    ctx = make_context(dc.k2)
    z = np.asarray(z, dtype=float)
    h = 0.5 * ctx.K
    zi = np.clip(z, -h, h)
    sn, cn, _ = jacobi(zi, ctx)
    inner = (sn / cn).real
    lam = _lambda(dc, ctx)
    outer = (z - np.sign(z) * lam) / math.sqrt(dc.m0)
    return np.where(np.abs(z) <= h, inner, outer)


def z_of_x(x, dc: DerivedConstants):
    """Inverse map; interior branch is F(arctan x | k^2)."""
    ctx = make_context(dc.k2)
    x = np.asarray(x, dtype=float)
    xi = np.clip(x, -dc.x0, dc.x0)
    inner = ellipkinc(np.arctan(xi), dc.k2)
    lam = _lambda(dc, ctx)
    outer = math.sqrt(dc.m0) * x + np.sign(x) * lam
    return np.where(np.abs(x) <= dc.x0, inner, outer)


def vtilde(z, dc: DerivedConstants):
    """Smooth part of the auxiliary potential (delta terms excluded)."""
    ctx = make_context(dc.k2)
    z = np.asarray(z, dtype=float)
    h = 0.5 * ctx.K
    sn, cn, dn = jacobi(np.clip(z, -h, h), ctx)
    inner = (2.0 * dc.k2 * (sn**2 + cn**2 / dn**2)).real + dc.energy_offset
    return np.where(np.abs(z) <= h, inner, dc.V0)
