"""Bound-state wave functions.

Inside the junctions psi(x) = f_m(x)^(1/4) chi(z(x)) with
chi = chi_1 + (d2/d1) chi_2; outside psi = m0^(1/4) chi(+-K/2)
exp(kappa (x0 - |x|)).  Because dz = sqrt(f_m) dx,

    int psi^2 dx = int_{-K/2}^{K/2} chi^2 dz + (chi_+^2 + chi_-^2) / (2 sqrt(V0 - E)).

At a true eigenvalue chi is a complex constant times a real function; the
constant is removed by a global phase fitted on quadrature nodes.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .auxmap import z_of_x
from .elliptic import EllipticContext, make_context
from .lame import make_pair
from .model import DerivedConstants, derive, f_m


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"


@functools.lru_cache(maxsize=16)
def _gauss(n: int):
    return leggauss(n)


def gauss_integrate(f, a: float, b: float, tol: float = 1e-12, n0: int = 32, nmax: int = 2048):
    """Gauss-Legendre with order doubling until successive values agree."""
    prev = None
    n = n0
    while n <= nmax:
        t, w = _gauss(n)
        val = 0.5 * (b - a) * float(np.dot(w, f(0.5 * (b - a) * t + 0.5 * (a + b))))
        if prev is not None and abs(val - prev) <= tol * max(abs(val), 1e-300):
            return val
        prev = val
        n *= 2
    raise ArithmeticError("quadrature did not converge")


@dataclass(frozen=True)
class WaveFunction:
    bound_state: object
    dc: DerivedConstants
    ctx: EllipticContext
    pair: object
    phase: complex
    C_norm: float
    parity: Parity
    imag_residue: float
    amplitude: complex = 1.0

    @property
    def half(self) -> float:
        return 0.5 * self.ctx.K

    def chi_complex(self, z):
        d = self.bound_state.d_ratio
        z = np.asarray(z, dtype=float)
        return self.amplitude * (self.pair.chi(z, 1) + d * self.pair.chi(z, 2))

    def chi_real(self, z):
        """Phase-aligned real interior function (not normalised)."""
        return np.real(self.phase * self.chi_complex(z))

    def __call__(self, x):
        return evaluate(self, x)


def _phase(values: np.ndarray) -> complex:
    s = np.sum(values * values)
    return np.exp(-0.5j * np.angle(s))


def normalize(wf: WaveFunction) -> float:
    """C with int (C psi_raw)^2 dx = 1, psi_raw built from ``chi_real``."""
    h = wf.half
    E = wf.bound_state.E
    interior = gauss_integrate(lambda z: wf.chi_real(z) ** 2, -h, h)
    cp, cm = wf.chi_real(h), wf.chi_real(-h)
    tails = (cp * cp + cm * cm) / (2.0 * math.sqrt(wf.dc.V0 - E))
    return 1.0 / math.sqrt(interior + tails)


def assemble(bs, dc: Optional[DerivedConstants] = None, ctx: Optional[EllipticContext] = None,
             amplitude: complex = 1.0) -> WaveFunction:
    dc = dc or derive(bs.params)
    ctx = ctx or make_context(dc.k2)
    pair = make_pair(bs.E - dc.energy_offset, ctx)
    h = 0.5 * ctx.K
    t, _ = _gauss(64)
    zs = h * t
    d = bs.d_ratio
    raw = amplitude * (pair.chi(zs, 1) + d * pair.chi(zs, 2))
    ph = _phase(raw)
    rot = ph * raw
    # fix the overall sign: leftmost sizeable lobe positive
    big = np.nonzero(np.abs(rot.real) > 0.05 * np.max(np.abs(rot.real)))[0][0]
    if rot.real[big] < 0:
        ph = -ph
        rot = -rot
    residue = float(np.max(np.abs(rot.imag)) / np.max(np.abs(rot.real)))
    wf = WaveFunction(bs, dc, ctx, pair, complex(ph), float("nan"), Parity.NONE, residue, amplitude)
    C = normalize(wf)
    wf = replace(wf, C_norm=C)
    wf = replace(wf, parity=parity(wf))
    if amplitude == 1.0:
        wf = replace(wf, bound_state=replace(bs, C_norm=C))
    return wf


def evaluate(wf: WaveFunction, x):
    """Normalised psi(x)."""
    x = np.asarray(x, dtype=float)
    dc = wf.dc
    inside = np.abs(x) <= dc.x0
    xi = np.clip(x, -dc.x0, dc.x0)
    psi_in = f_m(xi, dc) ** 0.25 * wf.chi_real(z_of_x(xi, dc))
    h = wf.half
    edge = np.where(x > 0, wf.chi_real(h), wf.chi_real(-h))
    decay = np.exp(-wf.bound_state.kappa * np.maximum(np.abs(x) - dc.x0, 0.0))
    psi_out = dc.m0**0.25 * edge * decay
    return wf.C_norm * np.where(inside, psi_in, psi_out)


def parity(wf: WaveFunction, tol: float = 1e-6) -> Parity:
    z = np.linspace(0.0, wf.half, 101)
    a, b = wf.chi_real(z), wf.chi_real(-z)
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    if np.max(np.abs(a - b)) <= tol * scale:
        return Parity.EVEN
    if np.max(np.abs(a + b)) <= tol * scale:
        return Parity.ODD
    return Parity.NONE


def node_count(wf: WaveFunction, npts: int = 10_000) -> int:
    """Sign changes of psi on |x| <= x0 (the tails never vanish)."""
    x = np.linspace(-wf.dc.x0, wf.dc.x0, npts)
    psi = evaluate(wf, x)
    s = np.sign(psi[np.abs(psi) > 1e-12 * np.max(np.abs(psi))])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def norm_k0(E: float, n: int, V0: float) -> float:
    """1/C for the k = 0 state normalised as chi = 2 cos(sqrt(E) z) (n even)
    or 2 sin(sqrt(E) z) (n odd)."""
    th = 0.25 * math.pi * math.sqrt(E)
    sg = (-1) ** n
    return math.sqrt(math.pi + 2.0 * ((1 + sg * math.cos(2 * th)) / math.sqrt(V0 - E)
                                       + sg * math.sin(2 * th) / math.sqrt(E)))


def sample(wf: WaveFunction, npts: int = 401, span: float = 3.0):
    """(x, psi) on [-(x0 + span/kappa), x0 + span/kappa]."""
    L = wf.dc.x0 + span / wf.bound_state.kappa
    x = np.linspace(-L, L, npts)
    return x, evaluate(wf, x)
