import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ENERGY_LINEAR, ENERGY_SIGNORINI
from signorini_orlicz import energy as en
from signorini_orlicz.errors import ShapeError
from signorini_orlicz.orlicz import make_nfunction

FAMILIES = [("power", [1]), ("power_log", [2, 1, 1]), ("double_power", [2, 3, 1, 3])]


def test_energy_examples(mesh04, linear_g):
    m = mesh04
    area_err = abs(m.area - np.pi / 2)
    assert en.energy(m, -m.vertices[:, 1], linear_g) == pytest.approx(ENERGY_LINEAR, abs=area_err)
    assert en.energy(m, np.zeros(m.n_vertices), linear_g) == 0.0
    u = en.signorini_exact(m.vertices)
    assert en.energy(m, u, linear_g) == pytest.approx(ENERGY_SIGNORINI, abs=m.h_target)


def test_signorini_exact_points():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    u = en.signorini_exact(pts)
    g = en.signorini_exact_gradient(pts)
    np.testing.assert_allclose(u, [1.0, 0.0, -np.sqrt(2) / 2], atol=1e-14)
    np.testing.assert_allclose(g[0], [1.5, 0.0], atol=1e-14)
    np.testing.assert_allclose(g[1], [0.0, -1.5], atol=1e-14)
    np.testing.assert_allclose(g[2], [1.5 * np.sqrt(2) / 2, -1.5 * np.sqrt(2) / 2], atol=1e-14)


def test_exact_is_harmonic_with_zero_trace_on_left():
    # finite-difference Laplacian at interior points
    rng = np.random.default_rng(1)
    pts = np.column_stack([rng.uniform(-0.7, 0.7, 30), rng.uniform(0.1, 0.7, 30)])
    d = 1e-3
    lap = sum(en.signorini_exact(pts + s * e) for e in (np.array([d, 0]), np.array([0, d])) for s in (1, -1))
    lap = (lap - 4 * en.signorini_exact(pts)) / d ** 2
    assert np.max(np.abs(lap)) < 1e-4
    x = np.column_stack([np.linspace(-1, 0, 11), np.zeros(11)])
    np.testing.assert_allclose(en.signorini_exact(x), 0.0, atol=1e-15)


@pytest.mark.parametrize("kind, params", FAMILIES)
def test_linear_field_residual_vanishes(mesh_coarse, kind, params):
    f = make_nfunction(kind, params)
    m = mesh_coarse
    u = 0.3 * m.vertices[:, 0] - 0.7 * m.vertices[:, 1] + 2.0
    R = en.first_variation(m, u, f)
    interior = ~m.boundary_mask
    assert np.max(np.abs(R.values[interior])) <= 1e-12


@pytest.mark.parametrize("kind, params", FAMILIES)
def test_directional_derivative(mesh_coarse, kind, params, rng):
    f = make_nfunction(kind, params)
    m = mesh_coarse
    # a field with per-triangle |grad u| >= 0.1: a steep linear part plus a bump
    u = 1.0 * m.vertices[:, 0] + 0.05 * rng.normal(size=m.n_vertices) * m.h_target
    assert en.gradient_norms(m, u).min() >= 0.1
    # direction with O(1) gradients so the O(tau^2) constant is O(1)
    w = m.h_target * rng.normal(size=m.n_vertices)
    R = en.first_variation(m, u, f).values

    def gap(tau):
        fd = (en.energy(m, u + tau * w, f) - en.energy(m, u - tau * w, f)) / (2 * tau)
        return abs(R @ w - fd)

    e1, e2 = gap(1e-4), gap(5e-5)
    assert e1 <= 1e-6
    if e1 > 1e-10:
        assert 3.0 <= e1 / e2 <= 5.0


def test_epsilon_stability(mesh_coarse, rng):
    m = mesh_coarse
    f = make_nfunction("power_log", [2, 1, 1])
    u = m.vertices[:, 0] + 0.05 * m.h_target * rng.normal(size=m.n_vertices)
    r8 = en.first_variation(m, u, f, 1e-8).values
    r10 = en.first_variation(m, u, f, 1e-10).values
    assert np.max(np.abs(r8 - r10)) <= 1e-6


def test_regularized_energy_limit(mesh_coarse, linear_g):
    u = -mesh_coarse.vertices[:, 1]
    J0 = en.energy(mesh_coarse, u, linear_g)
    assert en.regularized_energy(mesh_coarse, u, linear_g, 1e-8) == pytest.approx(J0, rel=1e-12)


def test_active_values_mask_dirichlet(mesh_coarse, linear_g, rng):
    u = rng.normal(size=mesh_coarse.n_vertices)
    R = en.first_variation(mesh_coarse, u, linear_g)
    np.testing.assert_array_equal(R.inactive, mesh_coarse.dirichlet_mask)
    assert np.all(R.active_values[mesh_coarse.dirichlet_mask] == 0.0)
    assert R.sup() == pytest.approx(float(np.max(np.abs(R.values[~mesh_coarse.dirichlet_mask]))))


def test_vertex_gradient_recovers_linear(mesh_coarse):
    v = mesh_coarse.vertices
    g = en.vertex_gradient(mesh_coarse, 2 * v[:, 0] - 3 * v[:, 1])
    np.testing.assert_allclose(g, np.tile([2.0, -3.0], (v.shape[0], 1)), atol=1e-12)


@given(st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_linearized_coefficients_elliptic(gx, gy):
    f = make_nfunction("double_power", [2, 3, 1, 3])
    p = np.array([[gx, gy]])
    A = en.linearized_coefficients(f, p)[0]
    ev = np.linalg.eigvalsh(0.5 * (A + A.T))
    lam, Lam = min(1.0, f.delta0), max(1.0, f.g0)
    assert lam * (1 - 1e-10) <= ev.min() and ev.max() <= Lam * (1 + 1e-10)


def test_field_shape_errors(mesh_coarse, linear_g):
    with pytest.raises(ShapeError):
        en.energy(mesh_coarse, np.zeros(3), linear_g)


def test_csv_roundtrip(tmp_path, mesh_coarse, rng):
    u = rng.normal(size=mesh_coarse.n_vertices)
    en.write_field_csv(u, tmp_path / "u.csv")
    np.testing.assert_array_equal(en.read_field_csv(tmp_path / "u.csv", mesh_coarse.n_vertices), u)
    g = en.gradients(mesh_coarse, u)
    en.write_gradient_csv(g, tmp_path / "g.csv")
    np.testing.assert_array_equal(en.read_gradient_csv(tmp_path / "g.csv"), g)
