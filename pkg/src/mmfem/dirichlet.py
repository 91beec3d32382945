"""Hierarchical embedding of Dirichlet data.

Vertices are evaluated directly; edges solve small 1D problems against
the known univariate traces; faces solve surface problems in the mixed
tangent frame T = [g1, g2, n].  Because the Bernstein basis is not
hierarchical the levels must run vertex -> edge -> face, with each level
moving the already-fixed values to the right-hand side.

The H(curl) projections realize the consistent coupling condition: the
tangential trace of the microdistortion row is matched to the tangential
part of the prescribed displacement gradient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bernstein import eval_all
from .dofmap import DofMap
from .errors import DegenerateFace, SingularEdge
from .mesh import Mesh
from .nedelec import SpaceDescriptor, build_basis, eval_vector_shapes
from .quadrature import rule_for
from .simplex import (TET_VERTICES, bezier_eval, duffy_inverse,
                      index_position, traversal_order)

_GAUSS_FLOOR = 24   # headroom for oscillatory boundary data on coarse meshes


@dataclass
class ConstraintSet:
    """Ordered dof -> value map with provenance tags."""

    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def set(self, dof, value, kind):
        self.values[int(dof)] = float(value)
        self.provenance[int(dof)] = kind

    def merge(self, other: "ConstraintSet"):
        self.values.update(other.values)
        self.provenance.update(other.provenance)
        return self

    def __len__(self):
        return len(self.values)

    def items(self):
        return self.values.items()


def _gauss01(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _edge_geometry(mesh, e):
    va, vb = mesh.edges[e]
    xa, xb = mesh.vertices[va], mesh.vertices[vb]
    t = xb - xa
    nt = np.linalg.norm(t)
    if nt < 1e-14:
        raise SingularEdge(f"edge {e} has zero length")
    return xa, xb, t, nt


def _collect_entities(mesh, facet_groups):
    """Per group: facet list plus the vertices/edges they touch, each
    entity reported once globally (first group wins)."""
    seen_v, seen_e, seen_f = set(), set(), set()
    lookup = mesh.edge_lookup() if mesh.dim == 3 else None
    out = []
    for facets, payload in facet_groups:
        verts, edgs, fcs = [], [], []
        for f in np.asarray(facets, dtype=int):
            fv = [int(v) for v in mesh.facet_vertices(f)]
            for v in fv:
                if v not in seen_v:
                    seen_v.add(v)
                    verts.append(v)
            if mesh.dim == 2:
                if f not in seen_e:
                    seen_e.add(f)
                    edgs.append(int(f))
            else:
                if f not in seen_f:
                    seen_f.add(f)
                    fcs.append(int(f))
                for pair in ((fv[0], fv[1]), (fv[0], fv[2]), (fv[1], fv[2])):
                    e = lookup[pair]
                    if e not in seen_e:
                        seen_e.add(e)
                        edgs.append(e)
        out.append((verts, edgs, fcs, payload))
    return out


# ---------------------------------------------------------------------------
# H1 field

def vertex_values(mesh: Mesh, dofmap: DofMap, verts, ufunc, cons, comp_offset=0,
                  comp=0):
    for v in verts:
        val = np.asarray(ufunc(mesh.vertices[v][None, :]), dtype=float).reshape(-1)
        cons.set(comp_offset + dofmap.vertex_dof(v), val[comp] if val.size > 1
                 else val[0], "vertex")


def edge_h1_projection(mesh: Mesh, dofmap: DofMap, e, gradfunc, cons,
                       comp_offset=0, comp=0):
    """Interior edge dofs from the 1D tangential-stiffness problem; vertex
    dofs must already be present in ``cons``."""
    q = dofmap.space.degree
    if q < 2:
        return
    xa, xb, t, nt = _edge_geometry(mesh, e)
    ng = max(q + 2, _GAUSS_FLOOR)
    a, w = _gauss01(ng)
    be = eval_all(q, a)
    dn = be.derivs                       # (ng, q+1)
    grads = np.asarray(gradfunc(xa[None, :] + a[:, None] * t[None, :]), dtype=float)
    if grads.ndim == 3:
        grads = grads[:, comp, :]
    tgrad = grads @ t                    # <t, grad u~>

    k = np.einsum("q,qa,qb->ab", w / nt, dn, dn)
    f = np.einsum("q,qa->a", w / nt, dn * tgrad[:, None])
    va, vb = mesh.edges[e]
    v0 = cons.values[comp_offset + dofmap.vertex_dof(va)]
    v1 = cons.values[comp_offset + dofmap.vertex_dof(vb)]
    rhs = f[1:q] - k[1:q, 0] * v0 - k[1:q, q] * v1
    sol = np.linalg.solve(k[1:q, 1:q], rhs)
    for ordinal, val in enumerate(sol):
        cons.set(comp_offset + dofmap.edge_dofs(e)[ordinal], val, "edge")


def _face_frame(mesh, f):
    """Chart x(xi2, eta2) = xa + xi2 (xc - xa) + eta2 (xb - xa) and the
    mixed transformation data of the face."""
    fa, fb, fc = mesh.faces[f]
    xa, xb, xc = mesh.vertices[fa], mesh.vertices[fb], mesh.vertices[fc]
    g1 = xc - xa
    g2 = xb - xa
    n = np.cross(g1, g2)
    det_t = float(n @ n)
    if det_t < 1e-28:
        raise DegenerateFace(f"face {f} has zero area")
    T = np.stack([g1, g2, n], axis=1)
    tinv_t = np.linalg.inv(T).T
    tstar = tinv_t[:, :2]                # [g^1, g^2]
    return (fa, fb, fc), xa, g1, g2, tstar, det_t


def _face_cell_context(mesh, f):
    """Owning cell of a boundary face and the face chart in its reference
    coordinates."""
    cell = int(np.flatnonzero((mesh.cell_faces == f).any(axis=1))[0])
    local = int(np.flatnonzero(mesh.cell_faces[cell] == f)[0])
    cv = mesh.cells[cell]
    loc_of = {int(g): i for i, g in enumerate(cv)}
    fa, fb, fc = mesh.faces[f]
    la, lb, lc = loc_of[int(fa)], loc_of[int(fb)], loc_of[int(fc)]
    Va, Vb, Vc = TET_VERTICES[la], TET_VERTICES[lb], TET_VERTICES[lc]
    dphi = np.stack([Vc - Va, Vb - Va], axis=1)   # (3, 2)
    return cell, (la, lb, lc), Va, dphi


def face_h1_projection(mesh: Mesh, dofmap: DofMap, f, gradfunc, cons,
                       comp_offset=0, comp=0):
    """Interior face dofs from the surface-gradient problem; vertex and
    edge dofs must already be present."""
    q = dofmap.space.degree
    if q < 3:
        return
    (fa, fb, fc), xa, g1, g2, tstar, det_t = _face_frame(mesh, f)
    rule = rule_for(2, min(max(2 * q + 2, 14), 20))
    pts2 = rule.simplex_points
    sh = bezier_eval(q, 2, rule.points)
    surf = np.einsum("de,qne->qnd", tstar, sh.grads)   # (nq, nb2, 3)

    xq = xa[None, :] + np.outer(pts2[:, 0], g1) + np.outer(pts2[:, 1], g2)
    grads = np.asarray(gradfunc(xq), dtype=float)
    if grads.ndim == 3:
        grads = grads[:, comp, :]

    w = rule.weights * np.sqrt(det_t)
    k = np.einsum("q,qnd,qmd->nm", w, surf, surf)
    rhs = np.einsum("q,qnd,qd->n", w, surf, grads)

    # columns of the 2D basis keyed by global dof (vertices, edges, interior)
    known, interior = [], []
    pos2 = index_position(q, 2)
    edge_of = _face_edge_map(mesh, f)
    for mi in traversal_order(q, 2):
        col = pos2[(mi.i, mi.j)]
        exps = mi.exponents            # (a, b, c) roles on the face
        on = tuple(v for v, e in enumerate(exps) if e > 0)
        if len(on) == 1:
            gdof = dofmap.vertex_dof((fa, fb, fc)[on[0]])
            known.append((col, cons.values[comp_offset + gdof]))
        elif len(on) == 2:
            e = edge_of[on]
            hi = on[1]
            gdof = dofmap.edge_dofs(e)[exps[hi] - 1]
            known.append((col, cons.values[comp_offset + gdof]))
        else:
            interior.append(col)
    for col, val in known:
        rhs -= k[:, col] * val
    sol = np.linalg.solve(k[np.ix_(interior, interior)], rhs[interior])
    fdofs = dofmap.face_dofs(f)
    for ordinal, val in enumerate(sol):
        cons.set(comp_offset + fdofs[ordinal], val, "face")


def _face_edge_map(mesh, f):
    """role pair (within a,b,c) -> global edge id for the face's edges."""
    fa, fb, fc = (int(v) for v in mesh.faces[f])
    lookup = mesh.edge_lookup()
    return {(0, 1): lookup[(fa, fb)], (0, 2): lookup[(fa, fc)],
            (1, 2): lookup[(fb, fc)]}


def h1_dirichlet(mesh: Mesh, dofmap: DofMap, groups, n_comps=1,
                 comp_stride=None) -> ConstraintSet:
    """Hierarchical H1 embedding.

    ``groups`` is a list of (facet_ids, ufunc, gradfunc); for vector
    fields the callbacks return (n, n_comps) values and (n, n_comps, dim)
    gradients and each component is constrained independently with
    stride ``comp_stride`` (defaults to the scalar dof count).
    """
    stride = comp_stride if comp_stride is not None else dofmap.n_dofs
    cons = ConstraintSet()
    staged = _collect_entities(mesh, [(facets, (uf, gf)) for facets, uf, gf
                                      in groups])
    for comp in range(n_comps):
        off = comp * stride
        for verts, _, _, (uf, _) in staged:
            vertex_values(mesh, dofmap, verts, uf, cons, off, comp)
    for comp in range(n_comps):
        off = comp * stride
        for _, edgs, _, (_, gf) in staged:
            for e in edgs:
                edge_h1_projection(mesh, dofmap, e, gf, cons, off, comp)
    for comp in range(n_comps):
        off = comp * stride
        for _, _, fcs, (_, gf) in staged:
            for f in fcs:
                face_h1_projection(mesh, dofmap, f, gf, cons, off, comp)
    return cons


# ---------------------------------------------------------------------------
# H(curl) field: consistent coupling projections

def _edge_trace_matrix(space: SpaceDescriptor, a):
    """Tangential traces (nq, p+1) of an edge dof block at parameters a,
    identical for every edge by the template construction."""
    p = space.degree
    if space.family == "nedelec2":
        return eval_all(p, a).values
    cols = [np.ones_like(a)]
    dn = eval_all(p + 1, a).derivs
    for m in range(1, p + 1):
        cols.append(dn[:, m])
    return np.stack(cols, axis=1)


def edge_hcurl_projection(mesh: Mesh, dofmap: DofMap, e, gradfunc, cons,
                          comp_offset=0, comp=0):
    """All dofs of one edge from the 1D consistent-coupling problem
    <p, t> = <grad u~, t>."""
    xa, xb, t, nt = _edge_geometry(mesh, e)
    p = dofmap.space.degree
    ng = max(p + 3, _GAUSS_FLOOR)
    a, w = _gauss01(ng)
    tr = _edge_trace_matrix(dofmap.space, a)
    grads = np.asarray(gradfunc(xa[None, :] + a[:, None] * t[None, :]), dtype=float)
    if grads.ndim == 3:
        grads = grads[:, comp, :]
    tgrad = grads @ t

    k = np.einsum("q,qa,qb->ab", w * nt, tr, tr)
    f = np.einsum("q,qa->a", w * nt, tr * tgrad[:, None])
    sol = np.linalg.solve(k, f)
    edofs = dofmap.edge_dofs(e)
    for ordinal, val in enumerate(sol):
        cons.set(comp_offset + edofs[ordinal], val, "edge")


def _face_trace_shapes(mesh, dofmap, f, rule):
    """Reference-face traces of every basis function supported on face f.

    Returns (trace (nq, nfn, 2), rot (nq, nfn), dof ids, is_face_dof).
    """
    space = dofmap.space
    cell, (la, lb, lc), Va, dphi = _face_cell_context(mesh, f)
    face_locals = {la, lb, lc}
    fns = build_basis(space)

    keep, gdofs, is_face = [], [], []
    edge_index = mesh.edge_lookup()
    cv = mesh.cells[cell]
    for l, fn in enumerate(fns):
        pv = set(fn.polytope.vertices)
        if not pv.issubset(face_locals):
            continue
        keep.append(l)
        if fn.polytope.kind == "edge":
            ge = edge_index[tuple(sorted(int(cv[v]) for v in fn.polytope.vertices))]
            gdofs.append(dofmap.edge_dofs(ge)[fn.ordinal])
            is_face.append(False)
        else:
            gdofs.append(dofmap.face_dofs(f)[fn.ordinal])
            is_face.append(True)

    ref3 = Va[None, :] + rule.simplex_points @ dphi.T
    vs = eval_vector_shapes(space, np.clip(duffy_inverse(ref3), 0.0, 1.0))
    vals = vs.values[:, keep]
    curls = vs.curls[:, keep]
    trace = np.einsum("de,qnd->qne", dphi, vals)
    normal = np.cross(dphi[:, 0], dphi[:, 1])
    rot = np.einsum("d,qnd->qn", normal, curls)
    return trace, rot, np.asarray(gdofs), np.asarray(is_face, dtype=bool)


def face_hcurl_projection(mesh: Mesh, dofmap: DofMap, f, gradfunc, cons,
                          comp_offset=0, comp=0):
    """Face dofs from the surface H(rot) problem; edge dofs must already
    be present and are moved to the right-hand side."""
    space = dofmap.space
    p = space.degree
    if dofmap.per_face == 0:
        return
    (fa, fb, fc), xa, g1, g2, tstar, det_t = _face_frame(mesh, f)
    rule = rule_for(2, min(max(2 * (p + 2) + 2, 14), 20))
    trace, rot, gdofs, is_face = _face_trace_shapes(mesh, dofmap, f, rule)

    phys = np.einsum("de,qne->qnd", tstar, trace)
    sq = np.sqrt(det_t)
    w = rule.weights * sq
    k = (np.einsum("q,qnd,qmd->nm", w, phys, phys)
         + np.einsum("q,qn,qm->nm", rule.weights / sq, rot, rot))

    xq = xa[None, :] + np.outer(rule.simplex_points[:, 0], g1) \
        + np.outer(rule.simplex_points[:, 1], g2)
    grads = np.asarray(gradfunc(xq), dtype=float)
    if grads.ndim == 3:
        grads = grads[:, comp, :]
    rhs = np.einsum("q,qnd,qd->n", w, phys, grads)

    known = np.flatnonzero(~is_face)
    for idx in known:
        rhs -= k[:, idx] * cons.values[comp_offset + int(gdofs[idx])]
    own = np.flatnonzero(is_face)
    sol = np.linalg.solve(k[np.ix_(own, own)], rhs[own])
    for idx, val in zip(own, sol):
        cons.set(comp_offset + int(gdofs[idx]), val, "face")


def hcurl_dirichlet(mesh: Mesh, dofmap: DofMap, groups, n_comps=1,
                    comp_stride=None, comp_offset0=0) -> ConstraintSet:
    """Consistent-coupling embedding for an H(curl) space.

    ``groups`` is a list of (facet_ids, gradfunc); gradfunc returns the
    prescribed displacement gradient rows, (n, dim) or (n, n_comps, dim).
    """
    stride = comp_stride if comp_stride is not None else dofmap.n_dofs
    cons = ConstraintSet()
    staged = _collect_entities(mesh, list(groups))
    for comp in range(n_comps):
        off = comp_offset0 + comp * stride
        for _, edgs, _, gf in staged:
            for e in edgs:
                edge_hcurl_projection(mesh, dofmap, e, gf, cons, off, comp)
    for comp in range(n_comps):
        off = comp_offset0 + comp * stride
        for _, _, fcs, gf in staged:
            for f in fcs:
                face_hcurl_projection(mesh, dofmap, f, gf, cons, off, comp)
    return cons
