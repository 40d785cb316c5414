"""Contact set, free boundary, first-order nodal set and a PCA stratifier."""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import energy as en
from .errors import DomainError, UnsupportedOrderError

__all__ = [
    "Label",
    "PointSet",
    "contact_sets",
    "gradient_oscillation",
    "nodal_set",
    "stratify",
    "write_points_csv",
]


class Label(str, enum.Enum):
    CONTACT = "CONTACT"
    FREE_BOUNDARY = "FREE_BOUNDARY"
    NODAL_1 = "NODAL_1"
    SYNTHETIC = "SYNTHETIC"


@dataclass
class PointSet:
    points: np.ndarray
    label: Label
    vertex_ids: np.ndarray = None
    local_dim: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.points.shape[0])

    @classmethod
    def from_vertices(cls, mesh, ids, label):
        ids = np.asarray(ids, dtype=np.int64)
        return cls(points=mesh.vertices[ids].copy(), label=label, vertex_ids=ids)

    @classmethod
    def from_points(cls, points, label=Label.SYNTHETIC):
        return cls(points=np.asarray(points, dtype=float).reshape(-1, 2), label=label)

    def ids(self):
        return set() if self.vertex_ids is None else set(int(i) for i in self.vertex_ids)


def contact_sets(mesh, u, tol_c=None):
    """``(contact, free_boundary)`` on the thin boundary.

    Contact vertices have ``|u| <= tol_c`` (default ``1e-8 sup|u|``).  A
    contact vertex whose neighbour along ``x2 = 0`` has ``u > tol_c`` is a
    free-boundary vertex.
    """
    u = en.check_field(mesh, u)
    if tol_c is None:
        tol_c = 1e-8 * float(np.max(np.abs(u)))
    order = mesh.thin_order
    vals = u[order]
    touch = np.abs(vals) <= tol_c
    positive = vals > tol_c
    fb = np.zeros(order.size, dtype=bool)
    fb[:-1] |= touch[:-1] & positive[1:]
    fb[1:] |= touch[1:] & positive[:-1]
    contact = PointSet.from_vertices(mesh, order[touch], Label.CONTACT)
    free = PointSet.from_vertices(mesh, order[fb], Label.FREE_BOUNDARY)
    contact.meta["tol_c"] = free.meta["tol_c"] = float(tol_c)
    return contact, free


def gradient_oscillation(mesh, u, vertex_grad=None):
    """Largest deviation of a star triangle gradient from the recovered vertex gradient."""
    tg = en.gradients(mesh, u)
    vg = en.vertex_gradient(mesh, u) if vertex_grad is None else vertex_grad
    osc = np.zeros(mesh.n_vertices)
    for a in range(3):
        idx = mesh.triangles[:, a]
        np.maximum.at(osc, idx, np.linalg.norm(tg - vg[idx], axis=1))
    return osc


def nodal_set(mesh, u, k=1, tol=1e-8, grad_tol=None, resolution=10.0):
    """Non-Dirichlet vertices where ``u`` vanishes and the recovered gradient does not.

    A vertex qualifies when ``|u| <= tol * sup|u|``, ``|grad u| > grad_tol *
    sup|grad u|`` (``grad_tol`` defaults to ``tol``) and the gradient is
    resolved: it exceeds ``resolution`` times its oscillation over the
    vertex star.  The last test removes vertices next to singular points,
    where ``grad u -> 0`` cannot be told apart from discretisation error.
    Pass ``resolution=0`` to disable it.
    """
    if k != 1:
        raise UnsupportedOrderError(f"nodal order {k} needs derivatives beyond piecewise-linear fields")
    u = en.check_field(mesh, u)
    grad_tol = tol if grad_tol is None else grad_tol
    vg = en.vertex_gradient(mesh, u)
    gn = np.linalg.norm(vg, axis=1)
    su, sg = float(np.max(np.abs(u))), float(np.max(gn))
    # the nodal set lives in the open half disc and the open thin boundary
    mask = ~mesh.dirichlet_mask & (np.abs(u) <= tol * su) & (gn > grad_tol * sg) & (gn > 0)
    if resolution > 0:
        mask &= gn > resolution * gradient_oscillation(mesh, u, vg)
    ps = PointSet.from_vertices(mesh, np.flatnonzero(mask), Label.NODAL_1)
    ps.meta.update(tol=tol, grad_tol=grad_tol, resolution=resolution)
    return ps


def stratify(points, scale, ratio=0.1, min_neighbors=3):
    """Local PCA dimension of every point; returns a histogram and the dominant dimension.

    Neighbours are points within ``scale`` (the point itself included).  The
    local dimension is the number of covariance eigenvalues at least
    ``ratio`` times the largest; points with fewer than ``min_neighbors``
    neighbours (or a zero covariance) get dimension 0.
    """
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    pts = pts.reshape(-1, 2)
    if pts.shape[0] == 0:
        raise DomainError("stratify needs a nonempty point set")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    dims = np.zeros(pts.shape[0], dtype=np.int64)
    for i in range(pts.shape[0]):
        nb = pts[d[i] <= scale]
        if nb.shape[0] < min_neighbors:
            continue
        ev = np.linalg.eigvalsh(np.cov(nb.T, bias=True))
        top = ev[-1]
        if top <= 0:
            continue
        dims[i] = int(np.count_nonzero(ev >= ratio * top))
    counts = {j: int(np.count_nonzero(dims == j)) for j in (0, 1, 2)}
    dominant = max(counts, key=lambda j: (counts[j], -j))
    if isinstance(points, PointSet):
        points.local_dim = dims
    return {"counts": counts, "dominant": dominant, "local_dim": dims}


def write_points_csv(points, path, local_dim=None):
    dims = local_dim if local_dim is not None else points.local_dim
    with open(path, "w") as fh:
        fh.write("x,y,label,local_dim\n")
        for i, (x, y) in enumerate(points.points):
            ld = "" if dims is None else int(dims[i])
            fh.write(f"{float(x)!r},{float(y)!r},{points.label.value},{ld}\n")
