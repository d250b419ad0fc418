"""Bound-state energy equations and root finding.

In the z coordinate a bound state is an interior solution chi = d1 chi_1 +
d2 chi_2 with

    2 sqrt(m0) chi'(+K/2) + B chi(+K/2) = 0,
    2 sqrt(m0) chi'(-K/2) - B chi(-K/2) = 0,     B = (2 beta + 1) sqrt(k') + 2 kappa,

and the energies are the zeros of the 2x2 determinant.  For generic E the
determinant is written with A_+- (chi_1' = A_+- chi_1 at +-K/2) and the
boundary products T1_+- = chi_1(+-K/2) chi_2(-+K/2).  That form depends on
the normalisation of chi_1, chi_2 and is complex in general, so roots are
searched for in the determinant divided by the Wronskian.  The quotient is
basis independent, real for real E, and entire in E: it takes finite values
at the band edges, where it is evaluated with the reduction-of-order pair.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .auxmap import BetaCase, classify_beta, vtilde_min
from .elliptic import EllipticContext, make_context
from .lame import (
    SecondSolution,
    _log_chi,
    band_edges,
    band_edge_energies,
    base_point,
    boundary_coefficients,
    locate_ai,
    make_pair,
)
from .model import DerivedConstants, ModelParams, derive

log = logging.getLogger(__name__)

EDGE_EPS = 1e-9
BAND_EDGE_RADIUS = 1e-6


class EmptyWindowError(ValueError):
    """The admissible energy window (lower, V0) is empty."""


@dataclass(frozen=True)
class EnergyWindow:
    lower: float
    upper: float
    beta_case: BetaCase


@dataclass(frozen=True)
class BoundState:
    n: int
    E: float
    kappa: float
    d_ratio: complex
    N_plus: complex
    N_minus: complex
    C_norm: float
    params: ModelParams = field(repr=False)
    row_mismatch: float = field(default=0.0, repr=False)


def kappa(E, dc: DerivedConstants):
    E = np.asarray(E, dtype=float)
    if np.any(E >= dc.V0):
        raise ValueError("E must lie below V0")
    return np.sqrt(dc.m0 * (dc.V0 - E))


def b_coefficient(E, dc: DerivedConstants):
    return (2.0 * dc.beta + 1.0) * math.sqrt(dc.kprime) + 2.0 * kappa(E, dc)


def _scaled_b(E, dc: DerivedConstants):
    return b_coefficient(E, dc) / (2.0 * math.sqrt(dc.m0))


def _check_away_from_edges(E_lame, k2: float, radius: float):
    for ej in band_edge_energies(k2):
        if np.any(np.abs(np.asarray(E_lame) - ej) < radius):
            raise ValueError(f"energy within {radius:g} of band edge {ej!r}")


def residual_general(E: float, dc: DerivedConstants, ctx: Optional[EllipticContext] = None) -> complex:
    """Determinant in the A_+-, T1_+- form (not normalised, complex)."""
    ctx = ctx or make_context(dc.k2)
    El = E - dc.energy_offset
    _check_away_from_edges(El, dc.k2, EDGE_EPS)
    pair = make_pair(El, ctx)
    Bc = float(b_coefficient(E, dc))
    sm = math.sqrt(dc.m0)
    Ap, Am = pair.Aplus, pair.Aminus
    h = 0.5 * ctx.K
    T1p = complex(pair.chi(h, 1) * pair.chi(-h, 2))
    T1m = complex(pair.chi(-h, 1) * pair.chi(h, 2))
    return ((4 * dc.m0 * Am**2 - 4 * Bc * sm * Am + Bc**2) * T1m
            - (4 * dc.m0 * Ap**2 + 4 * Bc * sm * Ap + Bc**2) * T1p)


def _normalized_lame(El, b, m0: float, ctx: EllipticContext):
    """Determinant / Wronskian for 0 < k2, vectorised over the Lame energy."""
    a1, a2 = locate_ai(El, ctx)
    Ap, Am = boundary_coefficients(a1, a2, ctx)
    h = 0.5 * ctx.K
    rho1 = np.exp(_log_chi(-h, a1, a2, ctx, 1.0) - _log_chi(h, a1, a2, ctx, 1.0))
    rho2 = np.exp(_log_chi(-h, a1, a2, ctx, -1.0) - _log_chi(h, a1, a2, ctx, -1.0))
    return 4.0 * m0 * ((Am - b) ** 2 * rho1 - (Ap + b) ** 2 * rho2) / (Ap + Am)


def _normalized_free(E, Bc):
    """k = 0 determinant / Wronskian; entire in E."""
    E = np.asarray(E, dtype=float)
    s = np.sqrt(np.abs(E))
    x = 0.5 * math.pi * s
    pos = E > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        S = np.where(pos, np.sin(x) / np.where(s == 0, 1, s), np.sinh(x) / np.where(s == 0, 1, s))
        C = np.where(pos, np.cos(x), np.cosh(x))
    S = np.where(s == 0, 0.5 * math.pi, S)
    return -((Bc**2 - E) * S + 2.0 * Bc * C)


def normalized_residual(E, dc: DerivedConstants, ctx: Optional[EllipticContext] = None):
    """Real energy function whose zeros are the bound states (vectorised).

    Not valid within about 1e-6 of a band edge for k2 > 0; use
    ``residual_band_edge`` there.
    """
    ctx = ctx or make_context(dc.k2)
    E = np.asarray(E, dtype=float)
    if ctx.degenerate:
        return _normalized_free(E, b_coefficient(E, dc))
    out = _normalized_lame(E - dc.energy_offset, _scaled_b(E, dc), dc.m0, ctx)
    return out


def residual_band_edge(j: int, dc: DerivedConstants, ctx: Optional[EllipticContext] = None) -> float:
    """Determinant at the j-th band edge using the closed-form solution and
    its reduction-of-order partner (Wronskian 1)."""
    ctx = ctx or make_context(dc.k2)
    Ej = band_edge_energies(dc.k2)[j] + dc.energy_offset
    if Ej >= dc.V0:
        raise ValueError("band edge lies above V0")
    if ctx.degenerate:
        return float(_normalized_free(Ej, b_coefficient(Ej, dc)))
    edge = band_edges(ctx)[j]
    second = SecondSolution(edge, base_point(j, ctx))
    h = 0.5 * ctx.K
    b = float(_scaled_b(Ej, dc))
    c1p, d1p = float(edge.chi(h)), float(edge.chi_dot(h))
    c1m, d1m = float(edge.chi(-h)), float(edge.chi_dot(-h))
    c2p, d2p = second.value_and_derivative(h)
    c2m, d2m = second.value_and_derivative(-h)
    det = (d1p + b * c1p) * (d2m - b * c2m) - (d2p + b * c2p) * (d1m - b * c1m)
    return -4.0 * dc.m0 * det


def residual_k0(E, dc: DerivedConstants):
    """(B^2 - E) sin(pi sqrt(E)/2) + 2 B sqrt(E) cos(pi sqrt(E)/2) at k = 0."""
    if dc.k2 != 0.0:
        raise ValueError("closed form only valid for k2 = 0")
    E = np.asarray(E, dtype=float)
    if np.any(E <= 0) or np.any(E >= dc.V0):
        raise ValueError("residual_k0 requires 0 < E < V0")
    Bc = b_coefficient(E, dc)
    s = np.sqrt(E)
    return (Bc**2 - E) * np.sin(0.5 * math.pi * s) + 2.0 * Bc * s * np.cos(0.5 * math.pi * s)


def zero_energy_check(dc: DerivedConstants, tol: float = 1e-9):
    """Whether E = 0 is a bound state at k = 0; returns (flag, diagnostics)."""
    if dc.k2 != 0.0:
        raise ValueError("zero-energy criterion applies to k2 = 0")
    b = dc.beta
    first = (2 * b + 1) ** 2
    second = (2 * b + 1 + 4 / math.pi) ** 2
    c1 = abs(dc.V0 - first) <= tol and b < -0.5
    c2 = abs(dc.V0 - second) <= tol and b < -(0.5 + 2 / math.pi)
    diag = {"V0": dc.V0, "branch1_target": first, "branch2_target": second,
            "branch1": c1, "branch2": c2}
    return bool(c1 or c2), diag


def energy_window(dc: DerivedConstants, lambda_depth: float = 60.0) -> EnergyWindow:
    case = classify_beta(dc.beta)
    upper = dc.V0 - EDGE_EPS
    lower = dc.V0 - lambda_depth if case is BetaCase.WELL else vtilde_min(dc)
    if lower >= upper:
        raise EmptyWindowError(f"empty window: lower={lower:.6g}, V0={dc.V0:.6g}")
    return EnergyWindow(lower, upper, case)


def _bisect(f, lo, hi, flo, tol=1e-11, maxiter=200):
    lo = lo.copy()
    hi = hi.copy()
    flo = flo.copy()
    for _ in range(maxiter):
        if np.all(hi - lo < tol):
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def scan_roots(dc: DerivedConstants, window: EnergyWindow, grid_points: int = 2000,
               ctx: Optional[EllipticContext] = None):
    """Root energies of the normalised residual in the window."""
    ctx = ctx or make_context(dc.k2)
    grid = np.linspace(window.lower, window.upper, grid_points)
    edge_nodes = {}
    if not ctx.degenerate:
        for j, ej in enumerate(band_edge_energies(dc.k2)):
            e = ej + dc.energy_offset
            grid = grid[np.abs(grid - e) >= BAND_EDGE_RADIUS]
            if window.lower < e < window.upper:
                edge_nodes[e] = j
        grid = np.union1d(grid, list(edge_nodes))
    generic = np.array([e not in edge_nodes for e in grid])

    def f(E):
        return np.real(normalized_residual(E, dc, ctx))

    vals = np.empty_like(grid)
    vals[generic] = f(grid[generic])
    for e, j in edge_nodes.items():
        v = residual_band_edge(j, dc, ctx)
        if v == 0.0:
            log.warning("band edge %d is an exact zero of the residual", j)
        vals[grid == e] = v
    roots = list(grid[(vals == 0.0) & generic])
    s = np.sign(vals)
    idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
    if idx.size:
        roots.extend(_bisect(f, grid[idx], grid[idx + 1], vals[idx]))
    return np.sort(np.asarray(roots, dtype=float))


def find_bound_states(params: ModelParams, grid_points: int = 2000,
                      lambda_depth: float = 60.0, normalize: bool = True) -> list[BoundState]:
    """All bound states in the admissible window, ascending in energy.

    An empty window (V0 not above the floor) yields an empty list.
    """
    if params.mu != 1 or params.nu != 1:
        raise NotImplementedError("solver supports mu = nu = 1 only")
    dc = derive(params)
    ctx = make_context(dc.k2)
    try:
        window = energy_window(dc, lambda_depth)
    except EmptyWindowError:
        return []
    states = []
    for n, E in enumerate(scan_roots(dc, window, grid_points, ctx)):
        states.append(_build_state(n, float(E), dc, ctx, normalize))
    return states


def mixing_ratio(pair, E: float, dc: DerivedConstants):
    """d2/d1 from the +K/2 boundary row, and the relative mismatch of the
    value implied by the -K/2 row."""
    h = 0.5 * pair.ctx.K
    b = float(_scaled_b(E, dc))
    Ap, Am = pair.Aplus, pair.Aminus
    l1p, l1m = complex(pair.log_chi(h, 1)), complex(pair.log_chi(-h, 1))
    l2p, l2m = complex(pair.log_chi(h, 2)), complex(pair.log_chi(-h, 2))
    r_plus = -(Ap + b) / (b - Am) * np.exp(l1p - l2p)
    r_minus = (Am - b) / (Ap + b) * np.exp(l1m - l2m)
    mismatch = abs(r_plus - r_minus) / max(abs(r_plus), abs(r_minus))
    return complex(r_plus), float(mismatch)


def _build_state(n: int, E: float, dc: DerivedConstants, ctx: EllipticContext,
                 normalize: bool) -> BoundState:
    pair = make_pair(E - dc.energy_offset, ctx)
    d, mismatch = mixing_ratio(pair, E, dc)
    if mismatch > 1e-8:
        log.warning("boundary rows disagree by %.2e at E=%.10g", mismatch, E)
    if not ctx.degenerate and n <= 2 and (d.real > 0) != (n < 2):
        # soft check of the sign pattern seen on all tabulated states
        log.info("d2/d1 = %.6g for level %d breaks the usual sign pattern", d.real, n)
    h = 0.5 * ctx.K
    kap = float(kappa(E, dc))
    scale = math.exp(kap * dc.x0) / dc.m0**0.25
    N_plus = complex(pair.chi(h, 1) + d * pair.chi(h, 2)) * scale
    N_minus = complex(pair.chi(-h, 1) + d * pair.chi(-h, 2)) * scale
    state = BoundState(n=n, E=E, kappa=kap, d_ratio=d, N_plus=N_plus, N_minus=N_minus,
                       C_norm=float("nan"), params=dc.params, row_mismatch=mismatch)
    if normalize:
        from .wavefunc import assemble
        state = assemble(state).bound_state
    return state
