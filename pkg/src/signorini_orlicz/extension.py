"""Reflection across the thin boundary.

Even reflection turns the thin-obstacle problem on the half disc into a
classical obstacle problem on the full disc, with the constraint ``v >= 0``
imposed on the interface vertices only.  The mirror triangles are congruent,
so the discrete energy doubles exactly.
"""

from dataclasses import dataclass

import numpy as np

from . import energy as en
from .mesh import VertexTag, reflect_to_disc
from .solver import BoundaryData, SolveOptions, solve_classical_obstacle, solve_thin_obstacle

__all__ = [
    "ExtensionReport",
    "even_data",
    "even_extension_solve",
    "reflected_energy_identity",
    "energy_identity_holds",
    "odd_reflection_residual",
]


@dataclass
class ExtensionReport:
    half_energy: float
    full_energy: float
    discrepancy_sup: float
    tol_kkt: float
    h: float
    converged: bool

    @property
    def bound(self):
        return 2.0 * self.tol_kkt + 10.0 * self.h ** 2

    def to_dict(self):
        return {"half_energy": self.half_energy, "full_energy": self.full_energy,
                "discrepancy_sup": self.discrepancy_sup}


def even_data(phi):
    """Boundary data evaluated at ``(x1, |x2|)``."""
    def data(x):
        x = np.array(x, dtype=float, copy=True)
        x[..., 1] = np.abs(x[..., 1])
        return phi(x)
    return data


def even_extension_solve(mesh, f, phi, opts=None):
    """Solve on the half disc and on its even reflection and compare.

    Returns ``(report, u_half, u_full)``; the discrepancy is the sup norm of
    the difference on the upper vertices.
    """
    opts = SolveOptions() if opts is None else opts
    u_half, rep_half = solve_thin_obstacle(mesh, f, phi, opts)
    full, _ = reflect_to_disc(mesh)
    psi = np.full(full.n_vertices, -np.inf)
    psi[full.tag_mask(VertexTag.THIN)] = 0.0
    u_full, rep_full = solve_classical_obstacle(full, f, psi, even_data(phi), opts)
    upper = ~full.mirrored
    disc = float(np.max(np.abs(u_full[upper] - u_half[full.reflection_map[upper]])))
    report = ExtensionReport(
        half_energy=rep_half.energy, full_energy=rep_full.energy, discrepancy_sup=disc,
        tol_kkt=max(rep_half.tol_kkt, rep_full.tol_kkt), h=mesh.h_target,
        converged=rep_half.converged and rep_full.converged,
    )
    return report, u_half, u_full


def reflected_energy_identity(mesh, u, f):
    """``(J(u) on the half disc, J(even extension) on the full disc)``."""
    full, ue = reflect_to_disc(mesh, u, parity="even")
    return en.energy(mesh, u, f), en.energy(full, ue, f)


def energy_identity_holds(mesh, u, f, rtol=1e-12):
    """``J(even extension) == 2 J(u)`` within ``rtol``, above a round-off floor.

    Gradients carry an absolute error of order ``eps * sup|u| / h`` from
    cancellation, so energies below ``|D| G(1e3 eps sup|u| / h)`` only
    measure round-off and are compared absolutely against that floor.
    """
    half, full = reflected_energy_identity(mesh, u, f)
    noise = 1e3 * np.finfo(float).eps * float(np.max(np.abs(u), initial=0.0)) / mesh.h_target
    floor = 2.0 * mesh.area * float(f.G(noise))
    return abs(full - 2.0 * half) <= rtol * full + floor, half, full


def odd_reflection_residual(mesh, u, f, epsilon=0.0):
    """Sup of the full-disc residual at interface vertices after odd reflection.

    Mirror contributions cancel pairwise at the interface, so the result is
    at round-off level whenever the odd reflection exists.
    """
    full, uo = reflect_to_disc(mesh, u, parity="odd")
    R = en.first_variation(full, uo, f, epsilon).values
    interface = full.tag_mask(VertexTag.THIN)
    return float(np.max(np.abs(R[interface]), initial=0.0))
