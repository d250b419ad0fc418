"""Jacobi and Weierstrass elliptic functions for real modulus.

Everything here uses the lattice with half-periods ``omega1 = K`` and
``omega3 = iK'`` and the scale ``e1 - e3 = 1``, so that

    P(z) = e3 + 1 / sn(z)^2

holds with the *same* argument on both sides.  All evaluators accept
complex numpy arrays of any shape and are built on Jacobi theta series in
the nome ``q = exp(-pi K'/K)``.  Arguments are first reduced into the
period cell centred on the origin, where the theta series converge like
``q**(n**2)``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import elliprf

POLE_RADIUS = 1e-10
_MAX_TERMS = 64


class PoleError(ArithmeticError):
    """Evaluation requested on (or within POLE_RADIUS of) a lattice point."""


class ConvergenceError(ArithmeticError):
    pass


def agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 1e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_K(k2: float) -> float:
    """Complete elliptic integral of the first kind, K(k) with k**2 = k2.

    Computed as pi / (2 agm(1, k')).  ``complete_K(1 - k2)`` gives K'.
    """
    if not 0.0 <= k2 < 1.0:
        raise ValueError(f"k2 must lie in [0, 1), got {k2!r}")
    return math.pi / (2.0 * agm(1.0, math.sqrt(1.0 - k2)))


def _nterms(q: float) -> int:
    # worst-case term after argument reduction is about q**(n*n - n)
    if q == 0.0:
        return 1
    logq = math.log(q)
    n = 2
    while n < _MAX_TERMS and (n * n - n) * logq > math.log(1e-18):
        n += 1
    return n


@dataclass(frozen=True)
class EllipticContext:
    k2: float
    kprime: float
    K: float
    Kprime: float
    omega1: float
    omega3: complex
    omega2: complex
    g2: float
    g3: float
    e1: float
    e2: float
    e3: float
    nome_q: float
    zeta_omega1: float
    zeta_omega3: complex
    nterms: int
    # theta constants at v = 0
    th2_0: float
    th3_0: float
    th4_0: float
    th1p_0: float

    @property
    def degenerate(self) -> bool:
        return self.k2 == 0.0


@functools.lru_cache(maxsize=256)
def make_context(k2: float) -> EllipticContext:
    """Build (and cache) the elliptic context for modulus-squared ``k2``."""
    k2 = float(k2)
    if not 0.0 <= k2 < 1.0:
        raise ValueError(f"k2 must lie in [0, 1), got {k2!r}")
    kp = math.sqrt(1.0 - k2)
    K = complete_K(k2)
    e1 = (2.0 - k2) / 3.0
    e2 = (2.0 * k2 - 1.0) / 3.0
    e3 = -(1.0 + k2) / 3.0
    g2 = 4.0 / 3.0 * (k2 * k2 - k2 + 1.0)
    g3 = 4.0 / 27.0 * (k2 - 2.0) * (2.0 * k2 - 1.0) * (k2 + 1.0)
    if k2 == 0.0:
        # trigonometric limit; Weierstrass functions are not available here
        return EllipticContext(
            k2=0.0, kprime=1.0, K=K, Kprime=math.inf, omega1=K,
            omega3=complex(0.0, math.inf), omega2=complex(K, math.inf),
            g2=g2, g3=g3, e1=e1, e2=e2, e3=e3, nome_q=0.0,
            zeta_omega1=math.nan, zeta_omega3=complex(math.nan, math.nan),
            nterms=1, th2_0=math.nan, th3_0=1.0, th4_0=1.0, th1p_0=math.nan,
        )
    Kp = complete_K(1.0 - k2)
    q = math.exp(-math.pi * Kp / K)
    nt = _nterms(q)
    n = np.arange(nt, dtype=float)
    odd = 2.0 * n + 1.0
    qh = np.exp(math.log(q) * (n + 0.5) ** 2)
    sgn = (-1.0) ** n
    th2_0 = float(np.sum(2.0 * qh))
    qn = np.exp(math.log(q) * n[1:] ** 2)
    th3_0 = 1.0 + float(np.sum(2.0 * qn))
    th4_0 = 1.0 + float(np.sum(2.0 * qn * (-1.0) ** n[1:]))
    th1p_0 = float(np.sum(2.0 * sgn * qh * odd))
    th1ppp_0 = -float(np.sum(2.0 * sgn * qh * odd**3))
    eta1 = -(math.pi**2 / (12.0 * K)) * th1ppp_0 / th1p_0
    omega3 = 1j * Kp
    # Legendre relation: eta1*omega3 - eta3*omega1 = i*pi/2
    eta3 = (eta1 * omega3 - 0.5j * math.pi) / K
    return EllipticContext(
        k2=k2, kprime=kp, K=K, Kprime=Kp, omega1=K, omega3=omega3,
        omega2=K + omega3, g2=g2, g3=g3, e1=e1, e2=e2, e3=e3, nome_q=q,
        zeta_omega1=eta1, zeta_omega3=eta3, nterms=nt,
        th2_0=th2_0, th3_0=th3_0, th4_0=th4_0, th1p_0=th1p_0,
    )


def _require_lattice(ctx: EllipticContext) -> None:
    if ctx.degenerate:
        raise ValueError("Weierstrass functions need 0 < k2 < 1")


def _reduce(z, ctx: EllipticContext):
    """Split z = z0 + 2m*omega1 + 2n*omega3 with z0 in the centred cell."""
    z = np.asarray(z, dtype=complex)
    m = np.round(z.real / (2.0 * ctx.K))
    n = np.round(z.imag / (2.0 * ctx.Kprime))
    z0 = z - 2.0 * m * ctx.K - 2.0 * n * ctx.omega3
    return z0, m, n


def _thetas(v, ctx: EllipticContext, derivative: bool = False):
    """theta_1..theta_4 (and theta_1') at complex v, nome ctx.nome_q."""
    logq = math.log(ctx.nome_q)
    n = np.arange(ctx.nterms, dtype=float)
    odd = 2.0 * n + 1.0
    a = 2.0 * np.exp(logq * (n + 0.5) ** 2)
    b = 2.0 * np.exp(logq * n[1:] ** 2)
    alt = (-1.0) ** n
    vv = v[..., None]
    s_odd = np.sin(odd * vv)
    c_odd = np.cos(odd * vv)
    c_even = np.cos(2.0 * n[1:] * vv)
    th1 = np.sum(alt * a * s_odd, axis=-1)
    th2 = np.sum(a * c_odd, axis=-1)
    th3 = 1.0 + np.sum(b * c_even, axis=-1)
    th4 = 1.0 + np.sum(alt[1:] * b * c_even, axis=-1)
    if derivative:
        th1p = np.sum(alt * a * odd * c_odd, axis=-1)
        return th1, th2, th3, th4, th1p
    return th1, th2, th3, th4


def jacobi(z, ctx: EllipticContext):
    """Return (sn, cn, dn) at complex ``z`` for modulus ctx.k2."""
    z = np.asarray(z, dtype=complex)
    if ctx.degenerate:
        return np.sin(z), np.cos(z), np.ones_like(z)
    z0, m, n = _reduce(z, ctx)
    v = (0.5 * math.pi / ctx.K) * z0
    th1, th2, th3, th4 = _thetas(v, ctx)
    sn = (ctx.th3_0 / ctx.th2_0) * th1 / th4
    cn = (ctx.th4_0 / ctx.th2_0) * th2 / th4
    dn = (ctx.th4_0 / ctx.th3_0) * th3 / th4
    # sn: periods 4K, 2iK'; cn: 4K, 2K+2iK'; dn: 2K, 4iK'
    sn = np.where(m % 2 == 1, -sn, sn)
    cn = np.where((m + n) % 2 == 1, -cn, cn)
    dn = np.where(n % 2 == 1, -dn, dn)
    return sn, cn, dn


def _guard(z0) -> None:
    if np.any(np.abs(z0) < POLE_RADIUS):
        raise PoleError("argument coincides with a lattice point")


def weier_p_and_prime(z, ctx: EllipticContext):
    """P(z) and P'(z) from one theta evaluation.

    Written as theta quotients with theta_1 alone in the denominator, so
    the half-period omega3 (a pole of sn) needs no special casing.
    """
    _require_lattice(ctx)
    z0, _, _ = _reduce(z, ctx)
    _guard(z0)
    th1, th2, th3, th4 = _thetas((0.5 * math.pi / ctx.K) * z0, ctx)
    r = ctx.th2_0 / ctx.th3_0
    p = ctx.e3 + r**2 * (th4 / th1) ** 2
    dp = (-2.0 * (ctx.th4_0 * ctx.th2_0) ** 2 / ctx.th3_0**4) * th2 * th3 * th4 / th1**3
    return p, dp


def weier_p(z, ctx: EllipticContext):
    return weier_p_and_prime(z, ctx)[0]


def weier_p_prime(z, ctx: EllipticContext):
    return weier_p_and_prime(z, ctx)[1]


def weier_zeta(z, ctx: EllipticContext):
    _require_lattice(ctx)
    z0, m, n = _reduce(z, ctx)
    _guard(z0)
    scale = 0.5 * math.pi / ctx.K
    th1, _, _, _, th1p = _thetas(scale * z0, ctx, derivative=True)
    zeta0 = ctx.zeta_omega1 * z0 / ctx.K + scale * th1p / th1
    return zeta0 + 2.0 * m * ctx.zeta_omega1 + 2.0 * n * ctx.zeta_omega3


def log_sigma(z, ctx: EllipticContext):
    """A branch of log(sigma(z)); exp() of it is single valued.

    Carrying logarithms lets callers form the large products and ratios
    of sigma values that appear in Hermite-type solutions without
    overflow.  Returns -inf + 0j at lattice points.
    """
    _require_lattice(ctx)
    z0, m, n = _reduce(z, ctx)
    scale = 0.5 * math.pi / ctx.K
    th1, _, _, _ = _thetas(scale * z0, ctx)
    with np.errstate(divide="ignore"):
        ls0 = (np.log(2.0 * ctx.K / math.pi) + ctx.zeta_omega1 * z0**2 / (2.0 * ctx.K)
               + np.log(th1.astype(complex)) - math.log(ctx.th1p_0))
    # sigma(z0 + 2m w1 + 2n w3) = (-1)^(m+n+mn) sigma(z0) exp[(2m eta1 + 2n eta3)(z0 + m w1 + n w3)]
    parity = (m + n + m * n) % 2
    shift = (2.0 * m * ctx.zeta_omega1 + 2.0 * n * ctx.zeta_omega3) * (
        z0 + m * ctx.K + n * ctx.omega3)
    return ls0 + shift + 1j * math.pi * parity


def weier_sigma(z, ctx: EllipticContext):
    return np.exp(log_sigma(z, ctx))


def canonical_cell(a, ctx: EllipticContext):
    """Representative of ``a`` modulo the lattice with Re in [0, 2K), Im in [0, 2K')."""
    a = np.asarray(a, dtype=complex)
    m = np.floor(a.real / (2.0 * ctx.K))
    n = np.floor(a.imag / (2.0 * ctx.Kprime))
    out = a - 2.0 * m * ctx.K - 2.0 * n * ctx.omega3
    # fold values that rounding pushed onto the upper cell edge
    out = np.where(out.real >= 2.0 * ctx.K - 1e-13, out - 2.0 * ctx.K, out)
    out = np.where(out.imag >= 2.0 * ctx.Kprime - 1e-13, out - 2.0 * ctx.omega3, out)
    return out


def invert_p(c, ctx: EllipticContext, tol: float = 1e-13, maxiter: int = 60):
    """Solve P(a) = c for a, returned in the canonical cell.

    The seed is Carlson's closed form a = R_F(c - e1, c - e2, c - e3),
    polished by Newton iteration on P(a) - c.
    """
    _require_lattice(ctx)
    c = np.asarray(c, dtype=complex)
    a = np.atleast_1d(elliprf(c - ctx.e1, c - ctx.e2, c - ctx.e3)).astype(complex)
    cf = np.broadcast_to(c, a.shape)
    # real c < e3 puts all three arguments on the cut; take the limit from above
    bad = ~np.isfinite(a)
    if np.any(bad):
        cb = cf[bad] + 1e-12j * np.maximum(1.0, np.abs(cf[bad]))
        a[bad] = elliprf(cb - ctx.e1, cb - ctx.e2, cb - ctx.e3)
    a = np.where(np.isfinite(a), a, 0.5 * ctx.omega2).reshape(c.shape)
    scale = np.maximum(1.0, np.abs(c))
    for _ in range(maxiter):
        p, dp = weier_p_and_prime(a, ctx)
        err = p - c
        done = np.abs(err) <= tol * scale
        if np.all(done):
            break
        step = np.where(done | (dp == 0), 0.0, err / np.where(dp == 0, 1.0, dp))
        a = a - step
    else:
        p = weier_p(a, ctx)
        if np.any(np.abs(p - c) > 1e3 * tol * scale):
            raise ConvergenceError("P(a) = c Newton iteration did not converge")
    return canonical_cell(a, ctx)
