import math

import numpy as np
import pytest

from emlame.auxmap import (
    BetaCase,
    chi_jump,
    classify_beta,
    delta_terms,
    picture,
    vtilde,
    vtilde_min,
    x_of_z,
    z_of_x,
)
from emlame.elliptic import make_context
from emlame.lame import make_pair
from emlame.model import ModelParams, derive
from emlame.spectrum import find_bound_states


@pytest.mark.parametrize("beta,case", [(0.3, BetaCase.BARRIER), (-0.5, BetaCase.NEUTRAL),
                                       (-0.5 + 1e-13, BetaCase.NEUTRAL), (-1.2, BetaCase.WELL)])
def test_classify_beta(beta, case):
    assert classify_beta(beta) is case


@pytest.mark.parametrize("k2", [0.0, 0.35, 0.9])
def test_map_round_trip_and_junction(k2):
    dc = derive(ModelParams(-1.0, 0.0, k2))
    ctx = make_context(k2)
    x = np.linspace(-3 * dc.x0, 3 * dc.x0, 301)
    assert np.max(np.abs(x_of_z(z_of_x(x, dc), dc) - x)) < 1e-12
    assert float(z_of_x(dc.x0, dc)) == pytest.approx(0.5 * ctx.K, abs=1e-13)
    assert float(z_of_x(-dc.x0, dc)) == pytest.approx(-0.5 * ctx.K, abs=1e-13)


def test_map_derivative_is_root_mass():
    dc = derive(ModelParams(-1.0, 0.0, 0.6))
    x = np.linspace(-0.9 * dc.x0, 0.9 * dc.x0, 9)
    h = 1e-6
    dz = (z_of_x(x + h, dc) - z_of_x(x - h, dc)) / (2 * h)
    m = 1 / ((1 + x * x) * (1 + dc.kprime**2 * x * x))
    assert np.max(np.abs(dz - np.sqrt(m))) < 1e-8


def test_k0_map_is_arctan():
    dc = derive(ModelParams(-1.0, 0.0, 0.0))
    x = np.linspace(-1, 1, 11)
    assert np.allclose(z_of_x(x, dc), np.arctan(x), atol=1e-15)


@pytest.mark.parametrize("k2", [0.0, 0.35, 0.9])
def test_vtilde_min_and_shape(k2):
    dc = derive(ModelParams(-1.0, -0.3, k2))
    ctx = make_context(k2)
    z = np.linspace(-0.5 * ctx.K, 0.5 * ctx.K, 1001)
    v = vtilde(z, dc)
    assert np.min(v) == pytest.approx(vtilde_min(dc), abs=1e-12)
    assert v[500] == pytest.approx(2 * k2, abs=1e-12)
    assert float(vtilde(0.6 * ctx.K, dc)) == pytest.approx(dc.V0)


def test_picture_fields():
    dc = derive(ModelParams(-1.0, -1.0, 0.35))
    pic = picture(dc)
    assert pic.beta_case is BetaCase.WELL
    assert pic.lambda_plus == -pic.lambda_minus
    assert pic.delta_weight == pytest.approx(-0.5 * (1 + dc.kprime))
    (zm, wm), (zp, wp) = delta_terms(dc)
    assert zm == -zp and wm == wp == pic.delta_weight


@pytest.mark.parametrize("params", [ModelParams(-1.0, -1.4, 0.35), ModelParams(-1.0, 0.2, 0.0),
                                    ModelParams(-1.0, 0.0, 0.8)])
def test_chi_jump_on_solved_states(params):
    dc = derive(params)
    ctx = make_context(dc.k2)
    h = 0.5 * ctx.K
    w = chi_jump(dc)
    for s in find_bound_states(params, normalize=False):
        pair = make_pair(s.E, ctx)
        for sign in (1, -1):
            z = sign * h
            chi = pair.chi(z, 1) + s.d_ratio * pair.chi(z, 2)
            dchi_in = pair.chi_dot(z, 1) + s.d_ratio * pair.chi_dot(z, 2)
            # exterior chi = psi / m0^(1/4) decays like exp(-kappa |x|), dz = sqrt(m0) dx
            dchi_out = -sign * s.kappa / math.sqrt(dc.m0) * chi
            assert abs(dchi_out - dchi_in - sign * w * chi) < 1e-7 * max(1.0, abs(chi))


def test_map_examples_and_dense_round_trip():
    dc = derive(ModelParams(-1.0, 0.0, 0.35))
    ctx = make_context(0.35)
    assert float(x_of_z(0.0, dc)) == 0.0
    assert float(x_of_z(0.5 * ctx.K, dc)) == pytest.approx(1 / math.sqrt(dc.kprime), abs=1e-13)
    z = np.random.default_rng(3).uniform(-ctx.K, ctx.K, 1000)
    assert np.max(np.abs(z_of_x(x_of_z(z, dc), dc) - z)) < 1e-10


def test_k0_auxiliary_potential():
    dc = derive(ModelParams(-1.0, 0.3, 0.0))
    z = np.linspace(-math.pi / 4, math.pi / 4, 11)
    assert np.max(np.abs(vtilde(z, dc))) < 1e-15
    (zm, w), (zp, _) = delta_terms(dc)
    assert w == pytest.approx(2 * 0.3 + 1)
    assert zp == pytest.approx(math.pi / 4) and zm == pytest.approx(-math.pi / 4)


def test_auxiliary_examples():
    assert float(vtilde(0.0, derive(ModelParams(-1.0, 0.0, 0.5)))) == pytest.approx(1.0, abs=1e-14)
    assert chi_jump(derive(ModelParams(-1.0, 0.0, 0.35))) == pytest.approx(0.5 * (1 + math.sqrt(0.65)))
    assert chi_jump(derive(ModelParams(-1.0, -0.5, 0.35))) == 0.0
    for beta, sign in ((0.2, 1), (-0.5, 0), (-1.0, -1)):
        assert np.sign(picture(derive(ModelParams(-1.0, beta, 0.35))).delta_weight) == sign


def test_band_overlay_monotone():
    from emlame.lame import band_edge_energies
    k2 = np.linspace(0, 0.9, 91)
    e = np.array([band_edge_energies(k)[:2] for k in k2])
    assert np.all(np.diff(e[:, 0]) > 0) and np.all(np.diff(e[:, 1]) < 0)
