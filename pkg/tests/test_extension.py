import numpy as np
import pytest

from oracles import ENERGY_LINEAR
from signorini_orlicz.extension import (energy_identity_holds, even_data, even_extension_solve,
                                        odd_reflection_residual, reflected_energy_identity)
from signorini_orlicz.orlicz import make_nfunction
from signorini_orlicz.solver import BoundaryData


def test_even_data():
    phi = BoundaryData("linear")
    x = np.array([[0.3, -0.4], [0.3, 0.4]])
    np.testing.assert_allclose(even_data(phi)(x), [-0.4, -0.4])


@pytest.mark.parametrize("phi, bound", [(BoundaryData("constant"), 1e-10), (BoundaryData("linear"), 1e-6)])
def test_trivial_benchmarks(mesh_coarse, linear_g, phi, bound):
    rep, u_half, u_full = even_extension_solve(mesh_coarse, linear_g, phi)
    assert rep.converged
    assert rep.discrepancy_sup <= bound


def test_signorini_discrepancy(mesh04, linear_g):
    rep, _, _ = even_extension_solve(mesh04, linear_g, BoundaryData("signorini_trace"))
    assert rep.discrepancy_sup <= rep.bound
    assert rep.bound == pytest.approx(2 * rep.tol_kkt + 10 * 0.04 ** 2)
    assert set(rep.to_dict()) == {"half_energy", "full_energy", "discrepancy_sup"}


def test_energy_identity_examples(mesh_coarse, linear_g):
    m = mesh_coarse
    half, full = reflected_energy_identity(m, -m.vertices[:, 1], linear_g)
    area_err = abs(m.area - np.pi / 2)
    assert half == pytest.approx(ENERGY_LINEAR, abs=area_err)
    assert full == pytest.approx(2 * ENERGY_LINEAR, abs=2 * area_err)
    assert reflected_energy_identity(m, np.zeros(m.n_vertices), linear_g) == (0.0, 0.0)


@pytest.mark.parametrize("kind, params", [("power", [1]), ("power_log", [2, 1, 1]), ("double_power", [2, 3, 1, 3])])
def test_energy_identity_random(mesh_coarse, rng, kind, params):
    f = make_nfunction(kind, params)
    u = rng.normal(size=mesh_coarse.n_vertices)
    half, full = reflected_energy_identity(mesh_coarse, u, f)
    assert abs(full / half - 2.0) <= 1e-12
    ok, _, _ = energy_identity_holds(mesh_coarse, u, f)
    assert ok


def test_odd_reflection_residual(mesh_coarse, linear_g):
    m = mesh_coarse
    # x2 x1 is harmonic and odd in x2; its reflection has zero interface flux by symmetry
    u = m.vertices[:, 0] * m.vertices[:, 1]
    assert odd_reflection_residual(m, u, linear_g) <= 1e-12
