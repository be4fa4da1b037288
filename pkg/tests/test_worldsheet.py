import numpy as np
import pytest

from planarstring import (MINUS, PLUS, ExternalVariables, GridSpec, delta_e, field_from_samples,
                          forms, integral_curvature, phi, reconstruct, sech_sum_field,
                          soliton_field, tangent, zero_field)
from planarstring.errors import CuspError, GridError, QuantizationError, ValidationError
from planarstring.cusps import cusp_positions
from planarstring.worldsheet import Embedding, delta_e_from_I, minkowski_dot, pde_residual


def test_delta_e_examples():
    assert np.allclose(delta_e(zero_field(), np.linspace(-5, 5, 11), 0.3), 0.0)
    assert np.allclose(delta_e_from_I(np.pi / 2, PLUS, 0.0), [0.0, 1.0], atol=1e-16)
    f = soliton_field(0.5, 1.0)
    de = delta_e(f, f.xi, 0.4)
    assert np.linalg.norm(de, axis=-1).max() <= 1.0 + 1e-15
    assert np.linalg.norm(de[[0, -1]], axis=-1).max() < 1e-10


def test_vacuum_tangents_and_sheet():
    k, Z = 1.5, (0.3, -0.7)
    fields = (zero_field(PLUS), zero_field(MINUS))
    tp, tm = tangent(0.0, 0.0, fields, ExternalVariables(kappa=k))
    assert np.allclose(tp, [k / 2, 0.0, -k / 2]) and np.allclose(tm, [-k / 2, 0.0, -k / 2])
    ext = ExternalVariables(kappa=k, beta=0.35, Z=Z)
    ws = reconstruct(fields, ext, [-1.0, 2.0], np.linspace(-5, 5, 11))
    n = ext.n
    expect = np.stack([np.full(11, 0.0), Z[0] - k * n[0] * ws.xi1, Z[1] - k * n[1] * ws.xi1], -1)
    for i, t in enumerate(ws.xi0):
        expect[:, 0] = k * t
        assert np.allclose(ws.X[i], expect, atol=1e-14)
    assert np.allclose(ws.phi, 0.0)


def test_time_component_exact(pair_11):
    ext = ExternalVariables(kappa=2.5, beta=0.1)
    ws = reconstruct(pair_11, ext, np.linspace(-3, 3, 7), np.linspace(-10, 10, 51))
    assert np.array_equal(ws.X[..., 0], np.broadcast_to(2.5 * ws.xi0[:, None], ws.X.shape[:2]))


def test_tangent_time_component_and_light_likeness(pair_11, ext):
    T, X = np.meshgrid(np.linspace(-2, 2, 9), np.linspace(-6, 6, 25), indexing="ij")
    tp, tm = tangent(T, X, pair_11, ext)
    assert np.allclose(tp[..., 0] - tm[..., 0], ext.kappa)  # d0 X = d+X - d-X
    assert np.abs(minkowski_dot(tp, tp)).max() < 1e-14
    assert np.abs(minkowski_dot(tm, tm)).max() < 1e-14


def test_finite_differences_match_tangents(pair_11, ext):
    emb = Embedding(pair_11, ext, span=2.0)
    t, x = np.array([0.3, -1.1, 1.7]), np.array([0.4, -2.0, 1.3])
    tp, tm = emb.tangents(t, x)
    errs = []
    for h in (2e-3, 1e-3):
        d1 = (emb.X(t, x + h) - emb.X(t, x - h)) / (2 * h)
        d0 = (emb.X(t + h, x) - emb.X(t - h, x)) / (2 * h)
        errs.append(max(np.abs(0.5 * (d1 + d0) - tp).max(), np.abs(0.5 * (d1 - d0) - tm).max()))
    assert errs[1] < 1e-5
    assert errs[0] / errs[1] > 3.0  # second order


def test_asymptotic_straightness(pair_11, ext):
    emb = Embedding(pair_11, ext, span=1.0)
    for x in (-45.0, 45.0):
        dX = (emb.X(0.5, x + 1.0) - emb.X(0.5, x))[1:]
        assert np.allclose(dX, -ext.kappa * ext.n, atol=1e-10)


def test_phi_and_cusp_markers(pair_11):
    ws = reconstruct(pair_11, ExternalVariables(), [0.0], pair_11[0].xi)
    th = ws.theta[0]
    assert np.allclose(ws.phi[0][~ws.cusp_mask[0]], -2 * np.log(np.abs(np.cos(th[~ws.cusp_mask[0]]))))
    # a node placed on an exact cusp is marked
    x_c = cusp_positions(pair_11, 0.0)[0][0]
    assert np.isnan(phi(0.0, x_c, pair_11))


def test_reconstruct_threads_identical(pair_22):
    ext = ExternalVariables(beta=0.2)
    a = reconstruct(pair_22, ext, np.linspace(-2, 2, 9), threads=1)
    b = reconstruct(pair_22, ext, np.linspace(-2, 2, 9), threads=4)
    assert np.array_equal(a.X, b.X)


def test_reconstruct_refuses_unquantized():
    g = GridSpec()
    bump = field_from_samples(g.xi, np.exp(-g.xi ** 2), PLUS)
    with pytest.raises(QuantizationError):
        reconstruct((bump, zero_field(MINUS)), ExternalVariables(), [0.0])


def test_reconstruct_grid_mismatch():
    with pytest.raises(GridError):
        reconstruct((zero_field(PLUS), zero_field(MINUS, GridSpec(40.0, 2048))), ExternalVariables(), [0.0])
    with pytest.raises(ValidationError):
        reconstruct((zero_field(MINUS), zero_field(PLUS)), ExternalVariables(), [0.0])


def test_forms_first_form_and_orientation(pair_11):
    ext = ExternalVariables(kappa=0.8, beta=0.6)
    emb = Embedding(pair_11, ext, span=2.0)
    t, x = np.array([0.0, 1.0, -1.5]), np.array([3.0, -4.0, 0.2])
    F = forms(emb, t, x)
    e_phi = np.exp(-phi(t, x, pair_11))
    assert np.allclose(F.E_coeff, -0.5 * ext.kappa ** 2 * e_phi, rtol=1e-8)
    assert np.allclose(F.II_pp, ext.kappa * pair_11[0].rho_at(x + t), atol=1e-6)
    assert np.allclose(F.II_mm, -ext.kappa * pair_11[1].rho_at(x - t), atol=1e-6)
    K = F.gauss_curvature
    # det II = -kappa^2 rho_+ rho_-, det I = -E^2
    assert np.allclose(K, 4 * pair_11[0].rho_at(x + t) * pair_11[1].rho_at(x - t) / (ext.kappa * e_phi) ** 2,
                       rtol=1e-5)


def test_forms_at_cusp(pair_11):
    x_c = cusp_positions(pair_11, 0.0)[0][0]
    with pytest.raises(CuspError):
        forms(Embedding(pair_11, ExternalVariables()), 0.0, x_c)


def test_pde_residual_small_away_from_cusps(pair_closed):
    r = pde_residual(pair_closed, np.array([0.0, 1.0]), np.array([6.0, -7.0]), 1e-3)
    assert np.abs(r).max() < 1e-4


def test_integral_curvature_routes_agree():
    # n = 0 fields whose angles stay below pi/2: no cusps anywhere
    fp = sech_sum_field([(0.5, 1.0), (0.4, -1.0)], PLUS)
    fm = sech_sum_field([(0.6, -1.0), (0.3, 1.0)], MINUS)
    th_max = np.abs(fp.I).max() + np.abs(fm.I).max()
    assert th_max < np.pi / 2
    emb = Embedding((fp, fm), ExternalVariables(), span=3.0)
    win = (-2.0, 2.0, -6.0, 5.0)
    a = integral_curvature(emb, win, method="boundary")
    b = integral_curvature(emb, win, method="direct", n=1025)
    assert abs(a) > 1e-3
    assert a == pytest.approx(b, rel=1e-6)


def test_integral_curvature_refuses_cusp_boundary(pair_11):
    x_c = cusp_positions(pair_11, 0.0)[0][0]
    with pytest.raises(CuspError):
        integral_curvature(Embedding(pair_11, ExternalVariables(), span=1.0), (0.0, 1.0, x_c, x_c + 1.0))
