"""Discrete Orlicz energy, its first variation and the Signorini oracle.

Fields are nodal arrays of P1 values.  Gradients are per-triangle constants,
so one-point quadrature is exact for the energy of a piecewise-linear field.
Vertex reductions use ``np.bincount`` in fixed triangle order, which keeps
the assembly bit-reproducible.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

__all__ = [
    "Residual",
    "check_field",
    "gradients",
    "gradient_norms",
    "energy",
    "regularized_energy",
    "first_variation",
    "assemble",
    "vertex_gradient",
    "linearized_coefficients",
    "signorini_exact",
    "signorini_exact_gradient",
    "write_field_csv",
    "read_field_csv",
    "write_gradient_csv",
    "read_gradient_csv",
]


@dataclass(frozen=True)
class Residual:
    """First-variation coefficients, one per vertex.

    ``inactive`` flags vertices with prescribed values; their entries are
    reported but are not admissible directions.
    """

    values: np.ndarray
    epsilon: float
    inactive: np.ndarray

    @property
    def active_values(self):
        out = self.values.copy()
        out[self.inactive] = 0.0
        return out

    def sup(self):
        return float(np.max(np.abs(self.active_values), initial=0.0))


def check_field(mesh, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_vertices,):
        raise ShapeError(f"field has shape {u.shape}, mesh has {mesh.n_vertices} vertices")
    if not np.all(np.isfinite(u)):
        raise DomainError("field contains non-finite values")
    return u


def gradients(mesh, u):
    """Per-triangle gradient of the P1 interpolant, shape (M, 2).

    Written in differences against the first vertex, so constants have
    exactly zero gradient.
    """
    u = check_field(mesh, u)
    ut = u[mesh.triangles]
    du = ut[:, 1:] - ut[:, :1]
    return np.einsum("tk,tkd->td", du, mesh.basis_gradients[:, 1:])


def gradient_norms(mesh, u):
    grad = gradients(mesh, u)
    return np.hypot(grad[:, 0], grad[:, 1])


def energy(mesh, u, f):
    """``sum_T area(T) G(|grad u|_T)``."""
    return float(np.sum(mesh.areas * f.G(gradient_norms(mesh, u))))


def regularized_energy(mesh, u, f, epsilon):
    """Energy whose gradient is the epsilon-regularised residual.

    ``J_eps(u) = sum_T area G(sqrt(|grad u|^2 + eps^2))``; the constant shift
    ``G(eps)`` per unit area is kept so that ``J_0 = J``.
    """
    t = gradient_norms(mesh, u)
    if epsilon > 0:
        t = np.sqrt(t * t + epsilon * epsilon)
    return float(np.sum(mesh.areas * f.G(t)))


def assemble(mesh, tri_vectors):
    """Vertex sums ``R_i = sum_T <w_T, grad phi_i|_T>`` for per-triangle vectors ``w_T``."""
    local = np.einsum("td,tkd->tk", tri_vectors, mesh.basis_gradients)
    return np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)


def first_variation(mesh, u, f, epsilon=0.0, inactive=None):
    """g-Laplacian residual ``sum_T area h_eps(|grad u|) grad u . grad phi_i``.

    ``inactive`` defaults to the Dirichlet vertices of the mesh.
    """
    if epsilon < 0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
    grad = gradients(mesh, u)
    t = np.hypot(grad[:, 0], grad[:, 1])
    coef = mesh.areas * f.flux_coefficient(t, epsilon)
    values = assemble(mesh, coef[:, None] * grad)
    if inactive is None:
        inactive = mesh.dirichlet_mask
    return Residual(values=values, epsilon=float(epsilon), inactive=np.asarray(inactive, dtype=bool))


def vertex_gradient(mesh, u):
    """Area-weighted average of the adjacent triangle gradients, shape (N, 2)."""
    grad = gradients(mesh, u)
    w = mesh.areas
    idx = mesh.triangles.ravel()
    out = np.empty((mesh.n_vertices, 2))
    for d in range(2):
        out[:, d] = np.bincount(idx, weights=np.repeat(w * grad[:, d], 3), minlength=mesh.n_vertices)
    return out / mesh.vertex_areas[:, None]


def linearized_coefficients(f, grad):
    """Matrices ``a^{ij} = delta_ij + p_i p_j (g'(|p|)/(g(|p|)|p|) - 1/|p|^2)``.

    ``grad`` has shape (..., 2); at ``p = 0`` the identity is returned.
    The eigenvalues are 1 (across ``p``) and ``|p| g'(|p|)/g(|p|)`` (along ``p``).
    """
    p = np.asarray(grad, dtype=float)
    t = np.hypot(p[..., 0], p[..., 1])
    a = np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2)).copy()
    ok = t > 1e-300
    if np.any(ok):
        ts = t[ok]
        n = p[ok] / ts[:, None]
        a[ok] += (f.ratio(ts) - 1.0)[:, None, None] * n[:, :, None] * n[:, None, :]
    return a


def signorini_exact(x):
    """``Re((x1 + i x2)^{3/2})`` on the closed upper half plane."""
    x = np.asarray(x, dtype=float)
    z = x[..., 0] + 1j * np.maximum(x[..., 1], 0.0)
    return np.real(z ** 1.5)


def signorini_exact_gradient(x):
    z = np.asarray(x[..., 0] + 1j * np.maximum(x[..., 1], 0.0), dtype=complex)
    d = 1.5 * np.sqrt(z)
    return np.stack([d.real, -d.imag], axis=-1)


def write_field_csv(u, path):
    with open(path, "w") as fh:
        fh.write("vertex_id,value\n")
        for i, v in enumerate(np.asarray(u, dtype=float)):
            fh.write(f"{i},{float(v)!r}\n")


def read_field_csv(path, n_vertices=None):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ShapeError(f"{path}: expected vertex_id,value columns")
    ids = data[:, 0].astype(np.int64)
    n = int(ids.max()) + 1 if n_vertices is None else n_vertices
    if ids.size != n or np.any(np.sort(ids) != np.arange(n)):
        raise ShapeError(f"{path}: vertex ids do not cover 0..{n - 1}")
    u = np.empty(n)
    u[ids] = data[:, 1]
    return u


def write_gradient_csv(grad, path):
    with open(path, "w") as fh:
        fh.write("triangle_id,gx,gy\n")
        for i, (gx, gy) in enumerate(np.asarray(grad, dtype=float)):
            fh.write(f"{i},{float(gx)!r},{float(gy)!r}\n")


def read_gradient_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    out = np.empty((data.shape[0], 2))
    out[data[:, 0].astype(np.int64)] = data[:, 1:3]
    return out
