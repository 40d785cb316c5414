"""Structured triangulations of the half disc and its reflection.

The half disc ``B_R^+`` is meshed by concentric rings: ring ``k`` (radius
``kR/K``) carries ``4k`` arc segments.  The quarter ``theta in [0, pi/2]`` is
triangulated by a greedy angular merge and mirrored, so the mesh is exactly
symmetric under ``x1 -> -x1``.
"""

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import DomainError, ResolutionError, ShapeError

__all__ = [
    "VertexTag",
    "Mesh",
    "BallPatch",
    "build_half_disc",
    "reflect_to_disc",
    "restrict_to_half",
    "ball_patch",
    "vertices_in_ball",
    "mirror_permutation",
    "write_mesh_csv",
    "read_mesh_csv",
]

GEOM_TOL = 1e-12


class VertexTag(enum.IntEnum):
    INTERIOR = 0
    DIRICHLET_ARC = 1
    THIN = 2
    RIM_CORNER = 3


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangle mesh with tagged vertices.

    ``reflection_map`` is set on reflected meshes: entry ``i`` is the index of
    the half-disc vertex that full-disc vertex ``i`` was copied from, and
    ``mirrored[i]`` tells whether the copy lies in the lower half.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray
    radius: float
    h_target: float
    kind: str = "half"
    reflection_map: Optional[np.ndarray] = field(default=None, repr=False)
    mirrored: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.tags, self.reflection_map, self.mirrored):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @cached_property
    def signed_areas(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def areas(self):
        return np.abs(self.signed_areas)

    @property
    def area(self):
        return float(np.sum(self.areas))

    @cached_property
    def basis_gradients(self):
        """Per-triangle gradients of the three hat functions, shape (M, 3, 2)."""
        p = self.vertices[self.triangles]
        x, y = p[..., 0], p[..., 1]
        two_a = 2.0 * self.signed_areas
        b = np.empty(self.triangles.shape + (2,))
        # grad phi_a = rot90(x_c - x_b) / (2A) for (a, b, c) cyclic
        for a, (i, j) in enumerate(((1, 2), (2, 0), (0, 1))):
            b[:, a, 0] = (y[:, i] - y[:, j]) / two_a
            b[:, a, 1] = (x[:, j] - x[:, i]) / two_a
        return b

    @cached_property
    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def boundary_mask(self):
        """Vertices on a boundary edge (edge owned by exactly one triangle)."""
        t = self.triangles
        edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[uniq[counts == 1].ravel()] = True
        return mask

    @cached_property
    def vertex_areas(self):
        """Sum of adjacent triangle areas per vertex."""
        return np.bincount(self.triangles.ravel(), weights=np.repeat(self.areas, 3),
                           minlength=self.n_vertices)

    def tag_mask(self, *tags):
        return np.isin(self.tags, [int(t) for t in tags])

    @property
    def dirichlet_mask(self):
        """Vertices carrying prescribed values in the thin-obstacle problem."""
        return self.tag_mask(VertexTag.DIRICHLET_ARC, VertexTag.RIM_CORNER)

    @cached_property
    def thin_order(self):
        """Indices of THIN vertices sorted by ``x1``."""
        idx = np.flatnonzero(self.tags == VertexTag.THIN)
        return idx[np.argsort(self.vertices[idx, 0], kind="stable")]

    def min_max_angles(self):
        p = self.vertices[self.triangles]
        angles = []
        for a in range(3):
            u = p[:, (a + 1) % 3] - p[:, a]
            v = p[:, (a + 2) % 3] - p[:, a]
            cos = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        angles = np.concatenate(angles)
        return float(angles.min()), float(angles.max())


@dataclass(frozen=True)
class BallPatch:
    center: tuple
    radius: float
    triangle_ids: np.ndarray

    def area(self, mesh):
        return float(np.sum(mesh.areas[self.triangle_ids]))


def _quarter_strip(inner, outer, theta_in, theta_out):
    """Triangles between two ring arcs by greedy angular merge (CCW)."""
    tris = []
    i = j = 0
    I, J = len(inner) - 1, len(outer) - 1
    while i < I or j < J:
        if i == I or (j < J and theta_out[j + 1] <= theta_in[i + 1]):
            tris.append((inner[i], outer[j], outer[j + 1]))
            j += 1
        else:
            tris.append((inner[i], outer[j], inner[i + 1]))
            i += 1
    return tris


def build_half_disc(radius=1.0, h=0.1):
    """Mesh ``B_radius^+`` with ring spacing at most ``h``."""
    radius, h = float(radius), float(h)
    if not (radius > 0) or not (h > 0):
        raise ResolutionError(f"radius and h must be positive, got radius={radius}, h={h}")
    if h >= radius:
        raise ResolutionError(f"h={h} must be smaller than radius={radius}")
    K = int(np.ceil(radius / h - 1e-9))

    coords = [(0.0, 0.0)]
    tags = [VertexTag.THIN]
    rings = [np.array([0])]
    thetas = [np.array([0.0])]
    for k in range(1, K + 1):
        r = radius * k / K
        n = 4 * k
        half = 2 * k
        th = np.pi * np.arange(n + 1) / n
        x = np.empty(n + 1)
        y = np.empty(n + 1)
        x[: half + 1] = r * np.cos(th[: half + 1])
        y[: half + 1] = r * np.sin(th[: half + 1])
        x[half] = 0.0
        y[half] = r
        x[0], y[0] = r, 0.0
        x[half + 1:] = -x[half - 1::-1]
        y[half + 1:] = y[half - 1::-1]
        start = len(coords)
        coords.extend(zip(x, y))
        if k < K:
            ring_tags = [VertexTag.INTERIOR] * (n + 1)
            ring_tags[0] = ring_tags[-1] = VertexTag.THIN
        else:
            ring_tags = [VertexTag.DIRICHLET_ARC] * (n + 1)
            ring_tags[0] = ring_tags[-1] = VertexTag.RIM_CORNER
        tags.extend(ring_tags)
        rings.append(np.arange(start, start + n + 1))
        thetas.append(th)

    tris = []
    for k in range(1, K + 1):
        inner, outer = rings[k - 1], rings[k]
        if k == 1:
            q_in, t_in = inner, np.array([0.0])
            q_out, t_out = outer[: 3], thetas[1][: 3]
            quarter = [(inner[0], q_out[j], q_out[j + 1]) for j in range(2)]
        else:
            hi_in, hi_out = 2 * (k - 1), 2 * k
            quarter = _quarter_strip(inner[: hi_in + 1], outer[: hi_out + 1],
                                     thetas[k - 1][: hi_in + 1], thetas[k][: hi_out + 1])
        n_in, n_out = len(inner) - 1, len(outer) - 1
        base_in, base_out = inner[0], outer[0]

        def mirror(v):
            if base_out <= v <= outer[-1]:
                return base_out + n_out - (v - base_out)
            if k == 1:
                return v
            return base_in + n_in - (v - base_in)

        tris.extend(quarter)
        tris.extend((mirror(a), mirror(c), mirror(b)) for a, b, c in quarter)

    vertices = np.array(coords, dtype=float)
    return Mesh(vertices=vertices, triangles=np.array(tris, dtype=np.int64),
                tags=np.array(tags, dtype=np.int8), radius=radius, h_target=h)


def reflect_to_disc(mesh, field=None, parity="even"):
    """Mirror a half-disc mesh (and optionally a nodal field) across ``x2 = 0``.

    Vertices on the interface are shared, so the full mesh has ``2N - N0``
    vertices.  Returns ``(full_mesh, full_field)``; ``full_field`` is None if
    no field was given.
    """
    from .errors import ParityError

    if mesh.kind != "half":
        raise DomainError("reflect_to_disc needs a half-disc mesh")
    if parity not in ("even", "odd"):
        raise DomainError(f"parity must be 'even' or 'odd', got {parity!r}")
    on_line = mesh.tag_mask(VertexTag.THIN, VertexTag.RIM_CORNER)
    upper = np.flatnonzero(~on_line)
    N = mesh.n_vertices
    new_index = np.arange(N)
    copy_index = np.empty(N, dtype=np.int64)
    copy_index[on_line] = np.flatnonzero(on_line)
    copy_index[upper] = N + np.arange(upper.size)

    mirrored_xy = mesh.vertices[upper] * np.array([1.0, -1.0])
    vertices = np.concatenate([mesh.vertices, mirrored_xy])
    tags = np.concatenate([mesh.tags, mesh.tags[upper]])
    low = copy_index[mesh.triangles][:, [0, 2, 1]]
    triangles = np.concatenate([mesh.triangles, low])
    source = np.concatenate([new_index, upper])
    mirrored = np.concatenate([np.zeros(N, dtype=bool), np.ones(upper.size, dtype=bool)])
    full = Mesh(vertices=vertices, triangles=triangles, tags=tags, radius=mesh.radius,
                h_target=mesh.h_target, kind="disc", reflection_map=source, mirrored=mirrored)
    if field is None:
        return full, None
    u = np.asarray(field, dtype=float)
    if u.shape != (N,):
        raise ShapeError(f"field has shape {u.shape}, mesh has {N} vertices")
    if parity == "even":
        return full, u[source].copy()
    worst = float(np.max(np.abs(u[on_line]))) if on_line.any() else 0.0
    if worst > 1e-8:
        raise ParityError(f"odd reflection needs zero interface values, max |u| = {worst:.3e}")
    out = u[source].copy()
    out[mirrored] *= -1.0
    out[np.flatnonzero(on_line)] = 0.0
    return full, out


def restrict_to_half(full_mesh, field):
    """Values of a full-disc field on the upper (source) vertices."""
    if full_mesh.reflection_map is None:
        raise DomainError("mesh has no reflection map")
    field = np.asarray(field, dtype=float)
    n_half = int(np.count_nonzero(~full_mesh.mirrored))
    return field[:n_half].copy()


def ball_patch(mesh, center=(0.0, 0.0), r=1.0):
    """Triangles whose three vertices lie in the closed ball ``B_r(center)``."""
    if r < 0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    inside = vertices_in_ball(mesh, center, r)
    ids = np.flatnonzero(inside[mesh.triangles].all(axis=1)) if r > 0 else np.array([], dtype=np.int64)
    return BallPatch(center=tuple(float(c) for c in center), radius=float(r), triangle_ids=ids)


def vertices_in_ball(mesh, center=(0.0, 0.0), r=1.0):
    c = np.asarray(center, dtype=float)
    d = np.linalg.norm(mesh.vertices - c, axis=1)
    return d <= r * (1.0 + GEOM_TOL) + GEOM_TOL


def mirror_permutation(mesh):
    """Index ``j`` of the vertex at ``(-x1, x2)`` for every vertex ``i``."""
    key = np.round(mesh.vertices / max(mesh.h_target, 1e-300) * 1e6).astype(np.int64)
    lookup = {(int(a), int(b)): i for i, (a, b) in enumerate(key)}
    try:
        return np.array([lookup[(-int(a), int(b))] for a, b in key], dtype=np.int64)
    except KeyError:
        raise DomainError("mesh is not symmetric under x1 -> -x1") from None


def write_mesh_csv(mesh, path):
    with open(path, "w") as fh:
        fh.write("#vertices x,y,tag\n")
        for (x, y), t in zip(mesh.vertices, mesh.tags):
            fh.write(f"{float(x)!r},{float(y)!r},{VertexTag(int(t)).name}\n")
        fh.write("#triangles i,j,k\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i},{j},{k}\n")


def read_mesh_csv(path):
    """Read the CSV written by :func:`write_mesh_csv`.

    Radius is inferred as the largest vertex norm, ``h_target`` as the
    longest edge.  Meshes with vertices below ``x2 = 0`` are tagged ``disc``.
    """
    verts, tags, tris = [], [], []
    section = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                section = line[1:].split()[0]
                continue
            parts = [p.strip() for p in line.split(",")]
            if section == "vertices":
                if len(parts) != 3:
                    raise ShapeError(f"{path}:{lineno}: expected x,y,tag")
                verts.append((float(parts[0]), float(parts[1])))
                tags.append(VertexTag[parts[2]])
            elif section == "triangles":
                if len(parts) != 3:
                    raise ShapeError(f"{path}:{lineno}: expected i,j,k")
                tris.append(tuple(int(p) for p in parts))
            else:
                raise ShapeError(f"{path}:{lineno}: data outside a section")
    vertices = np.array(verts, dtype=float)
    triangles = np.array(tris, dtype=np.int64)
    if triangles.size and (triangles.min() < 0 or triangles.max() >= len(verts)):
        raise ShapeError(f"{path}: triangle index out of range")
    radius = float(np.max(np.linalg.norm(vertices, axis=1)))
    p = vertices[triangles]
    h = float(max(np.linalg.norm(p[:, a] - p[:, (a + 1) % 3], axis=1).max() for a in range(3)))
    kind = "disc" if np.any(vertices[:, 1] < -GEOM_TOL) else "half"
    return Mesh(vertices=vertices, triangles=triangles, tags=np.array(tags, dtype=np.int8),
                radius=radius, h_target=h, kind=kind)
