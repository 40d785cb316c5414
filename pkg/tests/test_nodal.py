import numpy as np
import pytest

from signorini_orlicz.errors import DomainError, UnsupportedOrderError
from signorini_orlicz.mesh import VertexTag
from signorini_orlicz.nodal import (Label, PointSet, contact_sets, gradient_oscillation, nodal_set,
                                    stratify, write_points_csv)


def test_contact_sets_signorini(signorini04):
    m, u, _ = signorini04
    contact, fb = contact_sets(m, u)
    h = m.h_target
    assert np.all(contact.points[:, 0] <= 2 * h)
    assert np.all(m.tags[contact.vertex_ids] == VertexTag.THIN)
    thin_left = m.tag_mask(VertexTag.THIN) & (m.vertices[:, 0] < -2 * h)
    assert set(np.flatnonzero(thin_left).tolist()) <= contact.ids()
    assert len(fb) >= 1 and np.min(np.linalg.norm(fb.points, axis=1)) <= 2 * h
    assert fb.ids() <= contact.ids()


def test_contact_sets_trivial(mesh_coarse):
    m = mesh_coarse
    c, fb = contact_sets(m, np.ones(m.n_vertices))
    assert len(c) == 0 and len(fb) == 0
    c, fb = contact_sets(m, -m.vertices[:, 1].copy())
    assert c.ids() == set(np.flatnonzero(m.tag_mask(VertexTag.THIN)).tolist())
    assert len(fb) == 0


def test_nodal_set_signorini(signorini02):
    m, u, _ = signorini02
    n1 = nodal_set(m, u)
    assert len(n1) > 0 and n1.label is Label.NODAL_1
    assert np.all(m.tags[n1.vertex_ids] == VertexTag.THIN)
    assert np.min(np.linalg.norm(n1.points, axis=1)) > 2 * m.h_target
    contact, _ = contact_sets(m, u)
    assert n1.ids() <= contact.ids()


def test_nodal_set_trivial(mesh_coarse):
    m = mesh_coarse
    assert len(nodal_set(m, np.zeros(m.n_vertices))) == 0
    n1 = nodal_set(m, -m.vertices[:, 1].copy())
    assert n1.ids() == set(np.flatnonzero(m.tag_mask(VertexTag.THIN)).tolist())
    with pytest.raises(UnsupportedOrderError):
        nodal_set(m, -m.vertices[:, 1].copy(), k=2)


def test_oscillation_zero_for_linear(mesh_coarse):
    u = 2 * mesh_coarse.vertices[:, 0] + mesh_coarse.vertices[:, 1]
    assert np.max(gradient_oscillation(mesh_coarse, u)) <= 1e-12


def test_stratify(rng):
    seg = PointSet.from_points(np.column_stack([np.linspace(-1, 0, 40), np.zeros(40)]))
    assert stratify(seg, 0.2)["dominant"] == 1
    assert seg.local_dim is not None and seg.local_dim.size == 40
    single = stratify(np.array([[0.3, 0.3]]), 0.2)
    assert single["counts"] == {0: 1, 1: 0, 2: 0}
    patch = rng.uniform(0, 1, (400, 2))
    assert stratify(patch, 0.2)["dominant"] == 2
    with pytest.raises(DomainError):
        stratify(np.zeros((0, 2)), 0.2)
    with pytest.raises(DomainError):
        stratify(patch, 0.0)


def test_stratify_signorini(signorini02):
    m, u, _ = signorini02
    assert stratify(nodal_set(m, u), 8 * m.h_target)["dominant"] == 1


def test_points_csv(tmp_path):
    ps = PointSet.from_points([[0.0, 0.0], [0.5, 0.0]], Label.CONTACT)
    stratify(ps, 1.0, min_neighbors=1)
    write_points_csv(ps, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "x,y,label,local_dim"
    assert lines[1].split(",")[2:] == ["CONTACT", "1"]
