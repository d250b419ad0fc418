import math

import numpy as np
import pytest

from emlame.elliptic import make_context, weier_p
from emlame.lame import (
    DegenerateSolutionError,
    FreeSolutionPair,
    auxiliary_quadratic,
    band_edge_energies,
    band_edges,
    base_point,
    centred_cell,
    lame_potential,
    make_pair,
    SecondSolution,
    second_solution_at_band_edge,
    solution_pair,
)
from emlame.model import ModelParams, derive
from emlame.spectrum import energy_window


def fd_residual(f, z, E, ctx, h=1e-2):
    """chi'' - (V - E) chi by a sixth-order central stencil, relative to |chi|."""
    w = np.array([2, -27, 270, -490, 270, -27, 2]) / 180.0
    vals = np.array([f(z + j * h) for j in range(-3, 4)])
    d2 = np.tensordot(w, vals, axes=1) / h**2
    return np.abs(d2 - (lame_potential(z, ctx) - E) * f(z))


def test_band_edge_energies_half_modulus():
    e = band_edge_energies(0.5)
    assert e == pytest.approx((2.5 - math.sqrt(2), 2.5 + math.sqrt(2), 4.0), abs=1e-14)


@pytest.mark.parametrize("k2", [0.1, 0.35, 0.9])
def test_auxiliary_quadratic_roots(k2):
    ctx = make_context(k2)
    E = np.linspace(-5, 15, 41)
    c1, c2 = auxiliary_quadratic(E, ctx)
    for c in (c1, c2):
        q = c**2 + (E - 4 + ctx.e1) * c + (3 * ctx.e1 - ctx.e2 - 2 * ctx.e1 * ctx.e3 - ctx.e1 * E)
        assert np.max(np.abs(q)) < 1e-12 * 100


@pytest.mark.parametrize("k2", [0.2, 0.6])
def test_quadratic_degenerates_at_band_edges(k2):
    # at E(0), E(1) both a-values are half-period combinations
    ctx = make_context(k2)
    for edge in band_edges(ctx)[:2]:
        c1, c2 = auxiliary_quadratic(edge.E, ctx)
        target = sorted(np.real(weier_p(np.array(edge.a_values), ctx)))
        # double root: rounding enters through a square root
        assert sorted([c1.real, c2.real]) == pytest.approx(target, abs=1e-7)


def test_centred_cell_range():
    ctx = make_context(0.35)
    rng = np.random.default_rng(0)
    a = rng.uniform(-20, 20, 500) + 1j * rng.uniform(-20, 20, 500)
    c = centred_cell(a, ctx)
    assert np.all((c.real > -ctx.K - 1e-12) & (c.real <= ctx.K + 1e-12))
    assert np.all((c.imag > -ctx.Kprime - 1e-12) & (c.imag <= ctx.Kprime + 1e-12))
    m = (a - c).real / (2 * ctx.K)
    n = (a - c).imag / (2 * ctx.Kprime)
    assert np.allclose(m, np.round(m)) and np.allclose(n, np.round(n))


def test_ground_state_a_structure():
    # ground state of k2 = 0.35, beta = 0
    pair = solution_pair(2.24, make_context(0.35))
    assert pair.a1 == pytest.approx(-np.conj(pair.a2), abs=1e-10)


def test_excited_state_a_structure():
    pair = solution_pair(5.86, make_context(0.35))
    assert abs(pair.a1.real) < 1e-10
    assert pair.a1.imag == pytest.approx(pair.a2.imag, abs=1e-10)


def random_configs(n=20, seed=42):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        beta = float(rng.uniform(-2, 0.4))
        k2 = float(rng.uniform(0.02, 0.9))
        dc = derive(ModelParams(-1.0, beta, k2))
        try:
            w = energy_window(dc)
        except ValueError:
            continue
        out.append((beta, k2, max(w.lower, dc.V0 - 20.0), w.upper))
    return out


@pytest.mark.parametrize("beta,k2,lo,hi", random_configs())
def test_ode_residual_across_window(beta, k2, lo, hi):
    ctx = make_context(k2)
    edges = band_edge_energies(k2)
    z = np.linspace(-0.5 * ctx.K, 0.5 * ctx.K, 9)
    worst = 0.0
    for E in np.linspace(lo, hi, 7):
        if min(abs(E - e) for e in edges) < 1e-3:
            continue
        pair = solution_pair(E, ctx)
        for which in (1, 2):
            exact = np.max(np.abs(pair.ode_residual(z, which)))
            scale = max(1.0, abs(E))
            worst = max(worst, exact / scale)
            zi = np.linspace(-0.45 * ctx.K, 0.45 * ctx.K, 5)
            fd = fd_residual(lambda t: pair.chi(t, which), zi, E, ctx)
            assert np.max(fd / np.abs(pair.chi(zi, which))) < 1e-7 * scale * 10
    assert worst < 1e-7


@pytest.mark.parametrize("k2", [0.1, 0.35, 0.9])
@pytest.mark.parametrize("E", [-3.0, 1.5, 2.9, 7.0, 20.0])
def test_wronskian_constant(k2, E):
    pair = solution_pair(E, make_context(k2))
    z = np.linspace(-0.5 * pair.ctx.K, 0.5 * pair.ctx.K, 21)
    w = pair.wronskian(z)
    assert np.max(np.abs(w - w[0])) < 1e-8 * abs(w[0])


@pytest.mark.parametrize("E", [-1.0, 2.24, 5.86])
def test_boundary_coefficients_are_log_derivatives(E):
    ctx = make_context(0.35)
    pair = solution_pair(E, ctx)
    h = 0.5 * ctx.K
    assert pair.Aplus == pytest.approx(complex(pair.dlog_chi(h, 1)), abs=1e-9)
    assert pair.Aminus == pytest.approx(complex(pair.dlog_chi(-h, 1)), abs=1e-9)
    assert pair.Aplus == pytest.approx(-complex(pair.dlog_chi(h, 2)), abs=1e-9)
    assert pair.Aminus == pytest.approx(-complex(pair.dlog_chi(-h, 2)), abs=1e-9)


@pytest.mark.parametrize("k2", [0.05, 0.35, 0.5, 0.9])
def test_degenerate_pair_raises_at_edges(k2):
    ctx = make_context(k2)
    for e in band_edge_energies(k2):
        with pytest.raises(DegenerateSolutionError):
            solution_pair(e, ctx)
        solution_pair(e + 1e-6, ctx)
        solution_pair(e - 1e-6, ctx)


@pytest.mark.parametrize("k2", [0.1, 0.35, 0.9])
def test_band_edge_solutions_solve_ode(k2):
    ctx = make_context(k2)
    z = np.linspace(-0.45 * ctx.K, 0.45 * ctx.K, 7)
    for edge in band_edges(ctx):
        assert edge.E == pytest.approx(band_edge_energies(k2)[edge.j])
        r = fd_residual(edge.chi, z, edge.E, ctx)
        assert np.max(r) < 1e-8
        h = 1e-5
        fd = (edge.chi(z + h) - edge.chi(z - h)) / (2 * h)
        assert np.max(np.abs(fd - edge.chi_dot(z))) < 1e-8


@pytest.mark.parametrize("k2", [0.1, 0.35, 0.9])
def test_band_edge_parities(k2):
    ctx = make_context(k2)
    z = np.linspace(0, 0.5 * ctx.K, 11)
    e0, e1, e2 = band_edges(ctx)
    assert np.allclose(e0.chi(z), e0.chi(-z))
    assert np.allclose(e1.chi(z), e1.chi(-z), atol=1e-14)
    assert np.allclose(e2.chi(z), -e2.chi(-z))
    assert np.all(e0.chi(z) > 0)
    assert abs(e1.chi(0.5 * ctx.K)) < 1e-14


@pytest.mark.parametrize("k2", [0.2, 0.35, 0.8])
@pytest.mark.parametrize("j", [0, 1, 2])
def test_second_solution(k2, j):
    ctx = make_context(k2)
    edge = band_edges(ctx)[j]
    sec = SecondSolution(edge, base_point(j, ctx))
    for z in (-0.5 * ctx.K, -0.2 * ctx.K, 0.13 * ctx.K, 0.5 * ctx.K):
        c2, d2 = sec.value_and_derivative(z)
        c1, d1 = float(edge.chi(z)), float(edge.chi_dot(z))
        assert c1 * d2 - d1 * c2 == pytest.approx(1.0, abs=1e-9)
    zi = np.array([-0.3, 0.1, 0.35]) * ctx.K
    r = fd_residual(lambda t: sec(t), zi, edge.E, ctx)
    assert np.max(r) < 1e-6 * max(1.0, np.max(np.abs(sec(zi))))
    assert second_solution_at_band_edge(j, 0.1, ctx) == pytest.approx(sec(0.1))


def test_free_pair_k0():
    ctx = make_context(0.0)
    pair = make_pair(2.0, ctx)
    assert isinstance(pair, FreeSolutionPair)
    z = np.linspace(-0.7, 0.7, 5)
    s = math.sqrt(2.0)
    assert np.allclose(pair.chi(z, 1), np.exp(1j * s * z))
    assert np.allclose(pair.chi(z, 2), np.exp(-1j * s * z))
    assert pair.wronskian() == pytest.approx(-2j * s)
    neg = make_pair(-2.0, ctx)
    assert np.allclose(neg.chi(z, 1), np.exp(-s * z))


def test_near_k0_continuity():
    # tiny modulus behaves like the free problem
    ctx = make_context(1e-6)
    E = 2.0
    pair = solution_pair(E, ctx)
    z = np.linspace(-0.7, 0.7, 5)
    chi = pair.chi(z, 1) / pair.chi(0.0, 1)
    s = math.sqrt(E)
    c = chi[2:]
    ok = np.allclose(c, np.exp(1j * s * z[2:]), atol=1e-4) or np.allclose(c, np.exp(-1j * s * z[2:]), atol=1e-4)
    assert ok


def test_band_edge_values_at_k0():
    assert band_edge_energies(0.0) == (0.0, 4.0, 4.0)


def test_top_edge_a_values():
    ctx = make_context(0.35)
    c1, c2 = auxiliary_quadratic(4.0, ctx)
    assert sorted([c1.real, c2.real]) == pytest.approx(sorted([ctx.e3, ctx.e2]), abs=1e-7)


def test_derivative_relations_and_band_sum():
    ctx = make_context(0.35)
    e0, e1, _ = band_edge_energies(0.35)
    h = 0.5 * ctx.K
    for E in np.linspace(e0, e1, 22)[1:-1]:
        pair = solution_pair(E, ctx)
        Ap, Am = pair.Aplus, pair.Aminus
        assert np.isfinite(Ap) and np.isfinite(Am)
        assert abs(pair.chi_dot(h, 1) - Ap * pair.chi(h, 1)) < 1e-8 * abs(pair.chi(h, 1))
        assert abs(pair.chi_dot(-h, 1) - Am * pair.chi(-h, 1)) < 1e-8 * abs(pair.chi(-h, 1))
        assert abs(pair.chi_dot(h, 2) + Am * pair.chi(h, 2)) < 1e-8 * abs(pair.chi(h, 2))
        assert abs(pair.chi_dot(-h, 2) + Ap * pair.chi(-h, 2)) < 1e-8 * abs(pair.chi(-h, 2))
        # in this representation A_+ = A_-; the band-edge degeneracy shows up as A_+ + A_- -> 0
        assert abs(Ap - Am) < 1e-10 * abs(Ap)
        assert abs(Ap + Am) > 1e-3


def test_boundary_products():
    pair = solution_pair(2.24, make_context(0.35))
    assert pair.T1_plus == pytest.approx(pair.chi_plus_1 * pair.chi_minus_2)
    assert pair.T1_minus == pytest.approx(pair.chi_minus_1 * pair.chi_plus_2)
    assert pair.chi1_at(0.1) == pytest.approx(pair.chi(0.1, 1))
