"""Solutions of the one-period associated Lame equation (mu = nu = 1).

    chi'' = [2 k^2 sn^2 z + 2 k^2 cn^2 z / dn^2 z - E] chi,   |z| <= K/2

For a generic energy the two solutions are Hermite-type products of
Weierstrass sigma functions

    chi_{1,2}(z) = sigma(u +- a1) sigma(u +- a2) / (sigma(u + w1) sigma(u))
                   * exp(u [zeta(w1) -+ zeta(a1) -+ zeta(a2)]),   u = z - iK'

with P(a_i) = c_i the roots of a quadratic in c.  At the three band-edge
energies both collapse onto one elementary solution and the second one
comes from reduction of order.

The log-derivative g = chi'/chi is a finite sum of zeta functions, so the
ODE residual g' + g^2 - (V - E) can be evaluated exactly; it is what fixes
the relative sign of a1 and a2.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .elliptic import (
    EllipticContext,
    jacobi,
    log_sigma,
    invert_p,
    weier_p,
    weier_p_and_prime,
    weier_zeta,
)


class DegenerateSolutionError(ArithmeticError):
    """chi_1 and chi_2 are (numerically) linearly dependent: a band edge."""


def lame_potential(z, ctx: EllipticContext):
    """2 k^2 [sn^2 z + cn^2 z / dn^2 z] for real z."""
    sn, cn, dn = jacobi(np.asarray(z, dtype=float), ctx)
    return (2.0 * ctx.k2 * (sn**2 + cn**2 / dn**2)).real


def auxiliary_quadratic(E, ctx: EllipticContext):
    """Roots of c^2 + (E - 4 + e1) c + (3e1 - e2 - 2 e1 e3 - e1 E) = 0.

    Ordered by real part, then imaginary part.  Vectorised over E.
    """
    E = np.asarray(E, dtype=float)
    b = E - 4.0 + ctx.e1
    c0 = 3.0 * ctx.e1 - ctx.e2 - 2.0 * ctx.e1 * ctx.e3 - ctx.e1 * E
    disc = np.sqrt((b * b - 4.0 * c0).astype(complex))
    r1 = 0.5 * (-b - disc)
    r2 = 0.5 * (-b + disc)
    swap = (r1.real > r2.real) | ((r1.real == r2.real) & (r1.imag > r2.imag))
    return np.where(swap, r2, r1), np.where(swap, r1, r2)


def centred_cell(a, ctx: EllipticContext):
    """Lattice representative with Re in (-K, K], Im in (-K', K']."""
    a = np.asarray(a, dtype=complex)
    m = np.ceil((a.real - ctx.K) / (2.0 * ctx.K) - 1e-12)
    n = np.ceil((a.imag - ctx.Kprime) / (2.0 * ctx.Kprime) - 1e-12)
    return a - 2.0 * m * ctx.K - 2.0 * n * ctx.omega3


def _log_chi(z, a1, a2, ctx: EllipticContext, sign: float):
    u = np.asarray(z, dtype=complex) - ctx.omega3
    expo = ctx.zeta_omega1 - sign * (weier_zeta(a1, ctx) + weier_zeta(a2, ctx))
    return (log_sigma(u + sign * a1, ctx) + log_sigma(u + sign * a2, ctx)
            - log_sigma(u + ctx.K, ctx) - log_sigma(u, ctx) + u * expo)


def _dlog_chi(z, a1, a2, ctx: EllipticContext, sign: float):
    u = np.asarray(z, dtype=complex) - ctx.omega3
    return (weier_zeta(u + sign * a1, ctx) + weier_zeta(u + sign * a2, ctx)
            - weier_zeta(u + ctx.K, ctx) - weier_zeta(u, ctx)
            + ctx.zeta_omega1 - sign * (weier_zeta(a1, ctx) + weier_zeta(a2, ctx)))


def _ode_residual(z, a1, a2, E, ctx: EllipticContext, sign: float = 1.0):
    """g' + g^2 - (V - E) for chi_1 (sign=+1) or chi_2 (sign=-1); exact."""
    u = np.asarray(z, dtype=complex) - ctx.omega3
    g = _dlog_chi(z, a1, a2, ctx, sign)
    dg = (-weier_p(u + sign * a1, ctx) - weier_p(u + sign * a2, ctx)
          + weier_p(u + ctx.K, ctx) + weier_p(u, ctx))
    return dg + g * g - (lame_potential(np.real(z), ctx) - E)


# interior probe points for the sign selection, as fractions of K
_PROBES = (0.1234, -0.3771)


def locate_ai(E, ctx: EllipticContext):
    """a1, a2 with P(a_i) = c_i, signs fixed so chi_1 solves the ODE.

    Of the pairings (a1, a2) and (a1, -a2) exactly one yields a solution;
    the other gives an O(1) residual.  The overall sign is then chosen with
    Im a1 >= 0 (Re a1 >= 0 on ties), which only swaps chi_1 and chi_2.
    Values are returned in the centred period cell.  Vectorised over E.
    """
    E = np.asarray(E, dtype=float)
    c1, c2 = auxiliary_quadratic(E, ctx)
    a1 = centred_cell(invert_p(c1, ctx), ctx)
    a2 = centred_cell(invert_p(c2, ctx), ctx)
    res_same = 0.0
    res_flip = 0.0
    for frac in _PROBES:
        z = frac * ctx.K
        res_same = res_same + np.abs(_ode_residual(z, a1, a2, E, ctx))
        res_flip = res_flip + np.abs(_ode_residual(z, a1, -a2, E, ctx))
    res_same = np.nan_to_num(res_same, nan=np.inf)
    res_flip = np.nan_to_num(res_flip, nan=np.inf)
    a2 = np.where(res_flip < res_same, -a2, a2)
    flip = (a1.imag < -1e-12) | ((np.abs(a1.imag) <= 1e-12) & (a1.real < 0))
    a1 = np.where(flip, -a1, a1)
    a2 = np.where(flip, -a2, a2)
    return centred_cell(a1, ctx), centred_cell(a2, ctx)


def boundary_coefficients(a1, a2, ctx: EllipticContext):
    """A_+ and A_- from the addition-formula expression.

    A_+- = +-(1/2) [ sum_i (P'(p) -+ P'(a_i)) / (P(p) - P(a_i))
                     - P'(p) / (P(p) - e1) ],       p = w1/2 + w3
    """
    pp, dpp = weier_p_and_prime(0.5 * ctx.K + ctx.omega3, ctx)
    pa1, dpa1 = weier_p_and_prime(a1, ctx)
    pa2, dpa2 = weier_p_and_prime(a2, ctx)
    tail = dpp / (pp - ctx.e1)
    plus = 0.5 * ((dpp - dpa1) / (pp - pa1) + (dpp - dpa2) / (pp - pa2) - tail)
    minus = -0.5 * ((dpp + dpa1) / (pp - pa1) + (dpp + dpa2) / (pp - pa2) - tail)
    return plus, minus


@dataclass(frozen=True)
class LameSolutionPair:
    """The generic-energy solution pair chi_1, chi_2 at one energy E."""

    E: float
    ctx: EllipticContext
    c1: complex
    c2: complex
    a1: complex
    a2: complex

    def log_chi(self, z, which: int = 1):
        return _log_chi(z, self.a1, self.a2, self.ctx, 1.0 if which == 1 else -1.0)

    def chi(self, z, which: int = 1):
        return np.exp(self.log_chi(z, which))

    def dlog_chi(self, z, which: int = 1):
        return _dlog_chi(z, self.a1, self.a2, self.ctx, 1.0 if which == 1 else -1.0)

    def chi_dot(self, z, which: int = 1):
        return self.dlog_chi(z, which) * self.chi(z, which)

    def chi1_at(self, z):
        return self.chi(z, 1)

    def chi2_at(self, z):
        return self.chi(z, 2)

    def ode_residual(self, z, which: int = 1):
        return _ode_residual(z, self.a1, self.a2, self.E, self.ctx,
                             1.0 if which == 1 else -1.0)

    @functools.cached_property
    def _edges(self):
        h = 0.5 * self.ctx.K
        return (self.chi(h, 1), self.chi(-h, 1), self.chi(h, 2), self.chi(-h, 2))

    @property
    def chi_plus_1(self):
        return complex(self._edges[0])

    @property
    def chi_minus_1(self):
        return complex(self._edges[1])

    @property
    def chi_plus_2(self):
        return complex(self._edges[2])

    @property
    def chi_minus_2(self):
        return complex(self._edges[3])

    @functools.cached_property
    def _A(self):
        p, m = boundary_coefficients(self.a1, self.a2, self.ctx)
        return complex(p), complex(m)

    @property
    def Aplus(self) -> complex:
        return self._A[0]

    @property
    def Aminus(self) -> complex:
        return self._A[1]

    @property
    def T1_plus(self) -> complex:
        return self.chi_plus_1 * self.chi_minus_2

    @property
    def T1_minus(self) -> complex:
        return self.chi_minus_1 * self.chi_plus_2

    def wronskian(self, z=0.0):
        """chi_1 chi_2' - chi_1' chi_2; independent of z."""
        l1 = self.log_chi(z, 1)
        l2 = self.log_chi(z, 2)
        return np.exp(l1 + l2) * (self.dlog_chi(z, 2) - self.dlog_chi(z, 1))


def solution_pair(E: float, ctx: EllipticContext) -> LameSolutionPair:
    """Build the generic solution pair at energy E (0 < k2 < 1)."""
    c1, c2 = auxiliary_quadratic(E, ctx)
    a1, a2 = locate_ai(E, ctx)
    pair = LameSolutionPair(float(E), ctx, complex(c1), complex(c2), complex(a1), complex(a2))
    # |W| / |chi_1 chi_2| grows like sqrt(|E - E_j|) off an edge: about 1e-3
    # at 1e-6 away, 1e-5 or less on the edge itself
    w = pair.wronskian(0.0)
    z = np.array(_PROBES) * ctx.K
    scale = float(np.max(np.abs(pair.chi(z, 1) * pair.chi(z, 2)))) or 1.0
    if not np.isfinite(w) or abs(w) < 1e-4 * scale:
        raise DegenerateSolutionError(f"chi_1, chi_2 dependent at E={E!r} (band edge?)")
    return pair


def chi_general(E: float, z, which: int, ctx: EllipticContext):
    return solution_pair(E, ctx).chi(z, which)


# --- band edges ------------------------------------------------------------

@dataclass(frozen=True)
class BandEdge:
    j: int
    E: float
    chi: Callable
    chi_dot: Callable
    a_values: tuple
    zeros: tuple
    ctx: EllipticContext


def band_edges(ctx: EllipticContext) -> list[BandEdge]:
    """The three periodic/antiperiodic closed-form solutions and energies."""
    k2, kp = ctx.k2, ctx.kprime

    def jac(z):
        sn, cn, dn = jacobi(np.asarray(z, dtype=float), ctx)
        return sn.real, cn.real, dn.real

    def chi0(z):
        _, _, dn = jac(z)
        return dn + kp / dn

    def dchi0(z):
        sn, cn, dn = jac(z)
        return -k2 * sn * cn * (1.0 - kp / dn**2)

    snh2 = 1.0 / (1.0 + kp)
    snh_cnh = math.sqrt(kp) / (1.0 + kp)

    def chi1(z):
        # dn z - dn(K - z) by the addition theorem about K/2; no cancellation
        # near the zeros at +-K/2
        sn, cn, _ = jac(np.abs(np.asarray(z, dtype=float)) - 0.5 * ctx.K)
        return -2.0 * k2 * snh_cnh * sn * cn / (1.0 - k2 * snh2 * sn**2)

    def dchi1(z):
        sn, cn, dn = jac(z)
        return -k2 * sn * cn * (1.0 + kp / dn**2)

    def chi2(z):
        sn, cn, dn = jac(z)
        return sn * cn / dn

    def dchi2(z):
        sn, cn, dn = jac(z)
        return cn**2 - sn**2 + k2 * (sn * cn / dn) ** 2

    h = 0.5 * ctx.K
    return [
        BandEdge(0, 2.0 + k2 - 2.0 * kp, chi0, dchi0, (0.5 * ctx.omega1, -0.5 * ctx.omega1), (), ctx),
        BandEdge(1, 2.0 + k2 + 2.0 * kp, chi1, dchi1,
                 (-ctx.omega3 + 0.5 * ctx.omega1, ctx.omega3 - 0.5 * ctx.omega1), (-h, h), ctx),
        BandEdge(2, 4.0, chi2, dchi2, (ctx.omega3, ctx.omega2), (0.0,), ctx),
    ]


def band_edge_energies(k2: float) -> tuple[float, float, float]:
    kp = math.sqrt(1.0 - k2)
    return 2.0 + k2 - 2.0 * kp, 2.0 + k2 + 2.0 * kp, 4.0


# below this distance from a zero the regularised integrand is replaced by
# a two-term expansion (error O(dist^2)); closer in, rounding in chi
# dominates
_ZERO_BALL = 1e-4


class SecondSolution:
    """chi_2 = chi_1 * int^z dtau / chi_1(tau)^2 at a band edge.

    The integral is taken in the Hadamard sense: the double poles of
    1/chi_1^2 at zeros s of chi_1 are subtracted and integrated in closed
    form.  There is no simple-pole term because chi_1'' vanishes wherever
    chi_1 does, so the regularised integrand is smooth and the result is a
    single solution valid on the whole interval (including across zeros).
    The Wronskian chi_1 chi_2' - chi_1' chi_2 is exactly 1.
    """

    def __init__(self, edge: BandEdge, base: float):
        self.edge = edge
        self.base = float(base)
        self._slopes = tuple(float(edge.chi_dot(s)) for s in edge.zeros)
        # near a zero s, chi = c (t + a3 t^3 + a4 t^4 + ...) with t = z - s,
        # a3 = (V(s) - E)/6 and a4 = V'(s)/12, so the regularised integrand is
        # -(2 a3 + 2 a4 t)/c^2 + O(t^2)
        eps = 1e-5
        self._taylor = []
        for s, c in zip(edge.zeros, self._slopes):
            v = float(lame_potential(s, edge.ctx))
            dv = float(lame_potential(s + eps, edge.ctx) - lame_potential(s - eps, edge.ctx)) / (2 * eps)
            a3 = (v - edge.E) / 6.0
            a4 = dv / 12.0
            self._taylor.append((s, -2.0 * a3 / (c * c), -2.0 * a4 / (c * c)))

    def _singular(self, z):
        return sum(-1.0 / (c * c * (z - s)) for s, c in zip(self.edge.zeros, self._slopes))

    def _regular(self, t):
        for s, c0, c1 in self._taylor:
            if abs(t - s) < _ZERO_BALL:
                out = c0 + c1 * (t - s)
                for s2, c in zip(self.edge.zeros, self._slopes):
                    if s2 != s:
                        out -= 1.0 / (c * c * (t - s2) ** 2)
                return out
        chi = float(self.edge.chi(t))
        out = 1.0 / (chi * chi)
        for s, c in zip(self.edge.zeros, self._slopes):
            out -= 1.0 / (c * c * (t - s) ** 2)
        return out

    def _F_parts(self, z):
        """Regular part of F at z, excluding the pole term of a zero at z itself."""
        val, _ = quad(self._regular, self.base, z, epsabs=1e-13, epsrel=1e-13, limit=200)
        val -= self._singular(self.base)
        pole = None
        for s, c in zip(self.edge.zeros, self._slopes):
            if abs(z - s) < 1e-14:
                pole = c
            else:
                val += -1.0 / (c * c * (z - s))
        return val, pole

    def value_and_derivative(self, z: float) -> tuple[float, float]:
        reg, pole = self._F_parts(z)
        if pole is not None:
            return -1.0 / pole, pole * reg
        chi = float(self.edge.chi(z))
        dchi = float(self.edge.chi_dot(z))
        return chi * reg, dchi * reg + 1.0 / chi

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.array([self.value_and_derivative(float(t))[0] for t in z])
        return out if out.size > 1 else out[0]


def second_solution_at_band_edge(j: int, z, ctx: EllipticContext):
    edge = band_edges(ctx)[j]
    return SecondSolution(edge, base_point(j, ctx))(z)


def base_point(j: int, ctx: EllipticContext) -> float:
    # chi^(2) vanishes at the origin
    return 0.25 * ctx.K if j == 2 else 0.0


@dataclass(frozen=True)
class FreeSolutionPair:
    """k = 0 limit: chi_{1,2} = exp(+-i s z), s = sqrt(E) (imaginary for E < 0).

    Same interface as LameSolutionPair so the boundary algebra is shared.
    """

    E: float
    ctx: EllipticContext

    @property
    def s(self) -> complex:
        return np.sqrt(complex(self.E))

    def log_chi(self, z, which: int = 1):
        sign = 1.0 if which == 1 else -1.0
        return sign * 1j * self.s * np.asarray(z, dtype=complex)

    def chi(self, z, which: int = 1):
        return np.exp(self.log_chi(z, which))

    def dlog_chi(self, z, which: int = 1):
        sign = 1.0 if which == 1 else -1.0
        return sign * 1j * self.s * np.ones_like(np.asarray(z, dtype=complex))

    def chi_dot(self, z, which: int = 1):
        return self.dlog_chi(z, which) * self.chi(z, which)

    @property
    def Aplus(self) -> complex:
        return 1j * self.s

    @property
    def Aminus(self) -> complex:
        return 1j * self.s

    def wronskian(self, z=0.0):
        return -2j * self.s


def make_pair(E: float, ctx: EllipticContext):
    """Generic solution pair at E for any 0 <= k2 < 1."""
    if ctx.degenerate:
        return FreeSolutionPair(float(E), ctx)
    return solution_pair(E, ctx)
