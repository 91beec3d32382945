"""H(curl)-conforming Nedelec bases of first and second type.

Base functions are built from the scalar Bezier basis by attaching
constant template vectors (second type) or combinations of the
lowest-order rotational functions (first type) to the functions of each
polytope, plus gradient families and, on tetrahedra, a non-gradient cell
family.  Every function carries the polytope it attaches to and its
ordinal inside that polytope's dof block; ordinals are canonical across
elements sharing the polytope (ascending-vertex orientation), which is
what makes the tangential trace globally continuous.

Trace conventions used throughout: on an edge from lower to higher local
vertex with reference tangent t, second-type edge functions satisfy
<t, theta> = b_m^p(alpha) where m is the exponent of the higher vertex;
first-type edge blocks trace to {1, d/dalpha b_m^{p+1}}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .simplex import (TET_EDGES, TET_FACES, TRI_EDGES, Polytope,
                      bezier_eval, bezier_gradients, bezier_values,
                      duffy_forward, index_position)

E1_2D = np.array([1.0, 0.0])
E2_2D = np.array([0.0, 1.0])
E1, E2, E3 = np.eye(3)


@dataclass(frozen=True)
class SpaceDescriptor:
    """Finite element space: family, polynomial degree, simplex dimension."""

    family: str   # "nedelec1" | "nedelec2" | "h1"
    degree: int
    dim: int

    def __post_init__(self):
        if self.family not in ("nedelec1", "nedelec2", "h1"):
            raise DomainError(f"unknown family {self.family!r}")
        min_deg = {"nedelec1": 0, "nedelec2": 1, "h1": 1}[self.family]
        if self.degree < min_deg:
            raise DomainError(f"{self.family} needs degree >= {min_deg}")
        if self.dim not in (2, 3):
            raise DomainError("dim must be 2 or 3")


@dataclass(frozen=True)
class VectorShapeFn:
    """One H(curl) base function on the reference simplex.

    kind:
      "lowest"          combination of lowest-order rotational functions
      "template"        scalar function times a constant vector
      "lowest_template" scalar function times a lowest-order combination
      "gradient"        gradient of a scalar function of higher degree
      "cell_nongrad"    a*b^{p+1}*e_axis - c*grad b^{p+2} cell construction
    """

    kind: str
    polytope: Polytope
    ordinal: int
    scalar_degree: int = None
    scalar_index: tuple = None
    template: tuple = None        # constant vector
    lowest_combo: tuple = None    # coefficients over the lowest-order set
    axis: int = None              # cell_nongrad: unit vector index
    value_index: tuple = None     # cell_nongrad: degree p+1 scalar index
    grad_index: tuple = None      # cell_nongrad: degree p+2 gradient index
    value_coeff: float = None
    grad_coeff: float = None


def lowest_order_tri(pts):
    """Values (n, 3, 2) and rots (3,) of the three lowest-order functions."""
    pts = np.atleast_2d(pts)
    xi, eta = pts[:, 0], pts[:, 1]
    n = pts.shape[0]
    vals = np.empty((n, 3, 2))
    vals[:, 0, 0] = eta
    vals[:, 0, 1] = 1.0 - xi
    vals[:, 1, 0] = 1.0 - eta
    vals[:, 1, 1] = xi
    vals[:, 2, 0] = eta
    vals[:, 2, 1] = -xi
    rots = np.array([-2.0, 2.0, -2.0])
    return vals, rots


def lowest_order_tet(pts):
    """Values (n, 6, 3) and curls (6, 3) of the six lowest-order functions."""
    pts = np.atleast_2d(pts)
    xi, eta, zeta = pts[:, 0], pts[:, 1], pts[:, 2]
    n = pts.shape[0]
    z = np.zeros(n)
    vals = np.empty((n, 6, 3))
    vals[:, 0] = np.stack([zeta, zeta, 1.0 - xi - eta], axis=1)
    vals[:, 1] = np.stack([eta, 1.0 - xi - zeta, eta], axis=1)
    vals[:, 2] = np.stack([1.0 - eta - zeta, xi, xi], axis=1)
    vals[:, 3] = np.stack([z, zeta, -eta], axis=1)
    vals[:, 4] = np.stack([zeta, z, -xi], axis=1)
    vals[:, 5] = np.stack([eta, -xi, z], axis=1)
    curls = np.array([[-2.0, 2.0, 0.0],
                      [2.0, 0.0, -2.0],
                      [0.0, -2.0, 2.0],
                      [-2.0, 0.0, 0.0],
                      [0.0, 2.0, 0.0],
                      [0.0, 0.0, -2.0]])
    return vals, curls


def _combo(*pairs):
    """Coefficient tuple over the lowest-order set from (index, coeff) pairs."""
    out = [0.0] * 6
    for idx, coeff in pairs:
        out[idx] = coeff
    return tuple(out)


def _interior_1d(p):
    return range(1, p)


# ---------------------------------------------------------------------------
# triangle bases

def nedelec2_tri(p: int):
    """Second-type triangle basis; (p+1)(p+2) functions."""
    if p < 1:
        raise DomainError("nedelec2 needs p >= 1")
    fns = []
    e12, e13, e23 = (Polytope("edge", e) for e in TRI_EDGES)
    cell = Polytope("cell", (0, 1, 2))

    def tpl(poly, ordinal, index, vec):
        return VectorShapeFn("template", poly, ordinal, scalar_degree=p,
                             scalar_index=index, template=tuple(vec))

    # edge blocks: ordinal = exponent of the higher vertex, 0..p
    fns.append(tpl(e12, 0, (0, 0), E2_2D))
    for j in _interior_1d(p):
        fns.append(tpl(e12, j, (0, j), E2_2D))
    fns.append(tpl(e12, p, (0, p), E1_2D + E2_2D))

    fns.append(tpl(e13, 0, (0, 0), E1_2D))
    for i in _interior_1d(p):
        fns.append(tpl(e13, i, (i, 0), E1_2D))
    fns.append(tpl(e13, p, (p, 0), E1_2D + E2_2D))

    fns.append(tpl(e23, 0, (0, p), E1_2D))
    for i in _interior_1d(p):
        fns.append(tpl(e23, i, (i, p - i), 0.5 * (E1_2D - E2_2D)))
    fns.append(tpl(e23, p, (p, 0), -E2_2D))

    ordinal = 0
    for j in _interior_1d(p):
        fns.append(tpl(cell, ordinal, (0, j), -E1_2D)); ordinal += 1
    for i in _interior_1d(p):
        fns.append(tpl(cell, ordinal, (i, 0), E2_2D)); ordinal += 1
    for i in _interior_1d(p):
        fns.append(tpl(cell, ordinal, (i, p - i), E1_2D + E2_2D)); ordinal += 1
    for i in _interior_1d(p):
        for j in range(1, p - i):
            fns.append(tpl(cell, ordinal, (i, j), E2_2D)); ordinal += 1
    for i in _interior_1d(p):
        for j in range(1, p - i):
            fns.append(tpl(cell, ordinal, (i, j), E1_2D)); ordinal += 1
    return fns


def nedelec1_tri(p: int):
    """First-type triangle basis; (p+1)(p+3) functions."""
    if p < 0:
        raise DomainError("nedelec1 needs p >= 0")
    fns = []
    e12, e13, e23 = (Polytope("edge", e) for e in TRI_EDGES)
    cell = Polytope("cell", (0, 1, 2))

    edge_grad_idx = {e12: lambda m: (0, m), e13: lambda m: (m, 0),
                     e23: lambda m: (m, p + 1 - m)}
    for edge, lowest in ((e12, 0), (e13, 1), (e23, 2)):
        fns.append(VectorShapeFn("lowest", edge, 0,
                                 lowest_combo=_combo((lowest, 1.0))))
        for m in range(1, p + 1):
            fns.append(VectorShapeFn("gradient", edge, m, scalar_degree=p + 1,
                                     scalar_index=edge_grad_idx[edge](m)))
    if p == 0:
        return fns

    def ltpl(ordinal, index, combo):
        return VectorShapeFn("lowest_template", cell, ordinal, scalar_degree=p,
                             scalar_index=index, lowest_combo=combo)

    ordinal = 0
    fns.append(ltpl(ordinal, (0, 0), _combo((2, 1.0)))); ordinal += 1
    fns.append(ltpl(ordinal, (0, p), _combo((1, 1.0)))); ordinal += 1
    for j in _interior_1d(p):
        fns.append(ltpl(ordinal, (0, j), _combo((2, 1.0), (1, -1.0)))); ordinal += 1
    for i in _interior_1d(p):
        fns.append(ltpl(ordinal, (i, 0), _combo((0, 1.0), (2, 1.0)))); ordinal += 1
    for i in _interior_1d(p):
        fns.append(ltpl(ordinal, (i, p - i), _combo((0, 1.0), (1, -1.0)))); ordinal += 1
    for i in _interior_1d(p):
        for j in range(1, p - i):
            fns.append(ltpl(ordinal, (i, j),
                            _combo((0, 1.0), (1, -1.0), (2, 1.0)))); ordinal += 1
    for i in range(1, p + 1):
        for j in range(1, p + 1 - i):
            fns.append(VectorShapeFn("gradient", cell, ordinal, scalar_degree=p + 1,
                                     scalar_index=(i, j)))
            ordinal += 1
    return fns


# ---------------------------------------------------------------------------
# tetrahedral bases

# per-edge metadata: scalar index of a point on the edge as a function of the
# exponent m of the *higher* local vertex
_TET_EDGE_INDEX = {
    (0, 1): lambda p, m: (0, 0, m),
    (0, 2): lambda p, m: (0, m, 0),
    (0, 3): lambda p, m: (m, 0, 0),
    (1, 2): lambda p, m: (0, m, p - m),
    (1, 3): lambda p, m: (m, 0, p - m),
    (2, 3): lambda p, m: (m, p - m, 0),
}

# face scalar index from the exponents (eb, ec) of the 2nd and 3rd sorted
# vertices of the face (exponent of the 1st is p - eb - ec)
_TET_FACE_INDEX = {
    (0, 1, 2): lambda p, eb, ec: (0, ec, eb),
    (0, 1, 3): lambda p, eb, ec: (ec, 0, eb),
    (0, 2, 3): lambda p, eb, ec: (ec, eb, 0),
    (1, 2, 3): lambda p, eb, ec: (ec, eb, p - eb - ec),
}


def _face_interior(p):
    """(eb, ec) exponent pairs of face-interior scalars, canonical order."""
    return [(eb, ec) for ec in range(1, p) for eb in range(1, p - ec)]


def nedelec2_tet(p: int):
    """Second-type tetrahedral basis; (p+1)(p+2)(p+3)/2 functions."""
    if p < 1:
        raise DomainError("nedelec2 needs p >= 1")
    fns = []
    edges = {e: Polytope("edge", e) for e in TET_EDGES}
    faces = {f: Polytope("face", f) for f in TET_FACES}
    cell = Polytope("cell", (0, 1, 2, 3))
    s = E1 + E2 + E3

    def tpl(poly, ordinal, index, vec):
        return VectorShapeFn("template", poly, ordinal, scalar_degree=p,
                             scalar_index=tuple(index), template=tuple(vec))

    # edge blocks: (lower-vertex template, interior, higher-vertex template)
    edge_vecs = {
        (0, 1): (E3, E3, s), (0, 2): (E2, E2, s), (0, 3): (E1, E1, s),
        (1, 2): (E2, E2, -E3), (1, 3): (E1, E1, -E3), (2, 3): (E1, E1, -E2),
    }
    for e in TET_EDGES:
        lo, mid, hi = edge_vecs[e]
        idx = _TET_EDGE_INDEX[e]
        fns.append(tpl(edges[e], 0, idx(p, 0), lo))
        for m in _interior_1d(p):
            fns.append(tpl(edges[e], m, idx(p, m), mid))
        fns.append(tpl(edges[e], p, idx(p, p), hi))

    # face blocks: three edge-face families then two pure families
    face_vecs = {
        (0, 1, 2): (-E2, E3, s, E3, E2),
        (0, 1, 3): (-E1, E3, s, E3, E1),
        (0, 2, 3): (-E1, E2, s, E2, E1),
        (1, 2, 3): (-E1, E2, -E3, E2, E1),
    }
    for f in TET_FACES:
        vab, vac, vbc, pure1, pure2 = face_vecs[f]
        fidx = _TET_FACE_INDEX[f]
        ordinal = 0
        for m in _interior_1d(p):       # edge (a,b): eb = m, ec = 0
            fns.append(tpl(faces[f], ordinal, fidx(p, m, 0), vab)); ordinal += 1
        for m in _interior_1d(p):       # edge (a,c): ec = m
            fns.append(tpl(faces[f], ordinal, fidx(p, 0, m), vac)); ordinal += 1
        for m in _interior_1d(p):       # edge (b,c): ec = m, eb = p - m
            fns.append(tpl(faces[f], ordinal, fidx(p, p - m, m), vbc)); ordinal += 1
        for eb, ec in _face_interior(p):
            fns.append(tpl(faces[f], ordinal, fidx(p, eb, ec), pure1)); ordinal += 1
        for eb, ec in _face_interior(p):
            fns.append(tpl(faces[f], ordinal, fidx(p, eb, ec), pure2)); ordinal += 1

    # cell block: four face-cell families then three interior families
    ordinal = 0

    def ctpl(index, vec):
        nonlocal ordinal
        fns.append(tpl(cell, ordinal, index, vec))
        ordinal += 1

    for j in _interior_1d(p):
        for k in range(1, p - j):
            ctpl((0, j, k), -E1)
    for i in _interior_1d(p):
        for k in range(1, p - i):
            ctpl((i, 0, k), E2)
    for i in _interior_1d(p):
        for j in range(1, p - i):
            ctpl((i, j, 0), -E3)
    for i in _interior_1d(p):
        for j in range(1, p - i):
            ctpl((i, j, p - i - j), s)
    for vec in (E3, E2, E1):
        for i in _interior_1d(p):
            for j in range(1, p - i):
                for k in range(1, p - i - j):
                    ctpl((i, j, k), vec)
    return fns


# first-type face data: (combo of vertex-a fn, vertex-b fn, edge families...)
# expressed over the lowest-order functions (0-based indices into theta_1..6)
_N1_FACE_DATA = {
    (0, 1, 2): {"va": [(3, 1.0)], "vb": [(1, -1.0)],
                "ab": [(3, 1.0), (1, -1.0)], "ac": [(0, 1.0), (3, 1.0)],
                "bc": [(0, 1.0), (1, -1.0)],
                "pure": [(0, 1.0), (1, -1.0), (3, 1.0)]},
    (0, 1, 3): {"va": [(4, 1.0)], "vb": [(2, -1.0)],
                "ab": [(4, 1.0), (2, -1.0)], "ac": [(0, 1.0), (4, 1.0)],
                "bc": [(0, 1.0), (2, -1.0)],
                "pure": [(0, 1.0), (2, -1.0), (4, 1.0)]},
    (0, 2, 3): {"va": [(5, 1.0)], "vb": [(2, -1.0)],
                "ab": [(5, 1.0), (2, -1.0)], "ac": [(1, 1.0), (5, 1.0)],
                "bc": [(1, 1.0), (2, -1.0)],
                "pure": [(1, 1.0), (2, -1.0), (5, 1.0)]},
    (1, 2, 3): {"va": [(5, 1.0)], "vb": [(4, -1.0)],
                "ab": [(5, 1.0), (4, -1.0)], "ac": [(3, 1.0), (5, 1.0)],
                "bc": [(3, 1.0), (4, -1.0)],
                "pure": [(3, 1.0), (4, -1.0), (5, 1.0)]},
}


def nedelec1_tet(p: int):
    """First-type tetrahedral basis; (p+4)(p+3)(p+1)/2 functions."""
    if p < 0:
        raise DomainError("nedelec1 needs p >= 0")
    fns = []
    edges = {e: Polytope("edge", e) for e in TET_EDGES}
    for n, e in enumerate(TET_EDGES):
        fns.append(VectorShapeFn("lowest", edges[e], 0, lowest_combo=_combo((n, 1.0))))
        idx = _TET_EDGE_INDEX[e]
        for m in range(1, p + 1):
            fns.append(VectorShapeFn("gradient", edges[e], m, scalar_degree=p + 1,
                                     scalar_index=idx(p + 1, m)))
    if p == 0:
        return fns

    for f in TET_FACES:
        face = Polytope("face", f)
        data = _N1_FACE_DATA[f]
        fidx = _TET_FACE_INDEX[f]
        ordinal = 0

        def ltpl(index, combo_pairs):
            nonlocal ordinal
            fns.append(VectorShapeFn("lowest_template", face, ordinal,
                                     scalar_degree=p, scalar_index=tuple(index),
                                     lowest_combo=_combo(*combo_pairs)))
            ordinal += 1

        ltpl(fidx(p, 0, 0), data["va"])
        ltpl(fidx(p, p, 0), data["vb"])
        for m in _interior_1d(p):
            ltpl(fidx(p, m, 0), data["ab"])
        for m in _interior_1d(p):
            ltpl(fidx(p, 0, m), data["ac"])
        for m in _interior_1d(p):
            ltpl(fidx(p, p - m, m), data["bc"])
        for eb, ec in _face_interior(p):
            ltpl(fidx(p, eb, ec), data["pure"])
        for eb, ec in _face_interior(p + 1):
            fns.append(VectorShapeFn("gradient", face, ordinal, scalar_degree=p + 1,
                                     scalar_index=fidx(p + 1, eb, ec)))
            ordinal += 1

    cell = Polytope("cell", (0, 1, 2, 3))
    ordinal = 0

    def interior3(q):
        return [(i, j, k) for i in range(1, q) for j in range(1, q - i)
                for k in range(1, q - i - j)]

    # non-gradient cell families (restricted construction, degree p+2)
    q = p + 2
    for i, j, k in interior3(q):
        fns.append(VectorShapeFn("cell_nongrad", cell, ordinal, axis=0,
                                 value_index=(i - 1, j, k), grad_index=(i, j, k),
                                 value_coeff=float(q), grad_coeff=i / q,
                                 scalar_degree=p))
        ordinal += 1
    for i, j, k in interior3(q):
        fns.append(VectorShapeFn("cell_nongrad", cell, ordinal, axis=1,
                                 value_index=(i, j - 1, k), grad_index=(i, j, k),
                                 value_coeff=float(q), grad_coeff=j / q,
                                 scalar_degree=p))
        ordinal += 1
    for i, j, k in interior3(q):
        if k == 1:
            fns.append(VectorShapeFn("cell_nongrad", cell, ordinal, axis=2,
                                     value_index=(i, j, 0), grad_index=(i, j, 1),
                                     value_coeff=float(q), grad_coeff=1.0 / q,
                                     scalar_degree=p))
            ordinal += 1
    for idx in interior3(p + 1):
        fns.append(VectorShapeFn("gradient", cell, ordinal, scalar_degree=p + 1,
                                 scalar_index=idx))
        ordinal += 1
    return fns


@lru_cache(maxsize=None)
def build_basis(space: SpaceDescriptor):
    """Reference basis function list for an H(curl) space, cached."""
    if space.family == "nedelec2":
        return tuple(nedelec2_tri(space.degree) if space.dim == 2
                     else nedelec2_tet(space.degree))
    if space.family == "nedelec1":
        return tuple(nedelec1_tri(space.degree) if space.dim == 2
                     else nedelec1_tet(space.degree))
    raise DomainError("build_basis handles H(curl) families only")


def space_dim(space: SpaceDescriptor) -> int:
    return len(build_basis(space))


@dataclass
class VectorShapeSet:
    """Vector basis data at a batch of points: values (n, nb, dim) and
    reference curls (n, nb) in 2D (the scalar rot) or (n, nb, 3)."""

    values: np.ndarray
    curls: np.ndarray


def _scalar_data(dim, degrees, cp_pts):
    out = {}
    for q in sorted(set(degrees)):
        out[q] = bezier_eval(q, dim, cp_pts)
    return out


def eval_vector_shapes(space: SpaceDescriptor, cp_pts) -> VectorShapeSet:
    """Evaluate all base functions of ``space`` at collapsed points.

    Gradient-kind functions report exactly zero curl.  Points on the
    collapse lines raise SingularCollapse via the scalar evaluation.
    """
    fns = build_basis(space)
    cp_pts = np.atleast_2d(np.asarray(cp_pts, dtype=float))
    dim = space.dim
    n = cp_pts.shape[0]
    nb = len(fns)
    values = np.zeros((n, nb, dim))
    curls = np.zeros((n, nb)) if dim == 2 else np.zeros((n, nb, 3))

    simplex_pts = duffy_forward(cp_pts)
    if dim == 2:
        low_vals, low_rots = lowest_order_tri(simplex_pts)
    else:
        low_vals, low_rots = lowest_order_tet(simplex_pts)

    degrees = []
    for fn in fns:
        if fn.kind in ("template", "lowest_template", "gradient"):
            degrees.append(fn.scalar_degree)
        elif fn.kind == "cell_nongrad":
            degrees.extend([fn.scalar_degree + 1, fn.scalar_degree + 2])
    data = _scalar_data(dim, degrees, cp_pts)

    def pos(q, idx):
        return index_position(q, dim)[idx]

    for m, fn in enumerate(fns):
        if fn.kind == "lowest":
            combo = np.asarray(fn.lowest_combo)[: low_vals.shape[1]]
            values[:, m] = np.einsum("c,ncd->nd", combo, low_vals)
            curls[:, m] = combo @ low_rots
        elif fn.kind == "template":
            sh = data[fn.scalar_degree]
            col = pos(fn.scalar_degree, fn.scalar_index)
            b = sh.values[:, col]
            g = sh.grads[:, col]
            t = np.asarray(fn.template)
            values[:, m] = b[:, None] * t
            if dim == 2:
                curls[:, m] = g[:, 0] * t[1] - g[:, 1] * t[0]
            else:
                curls[:, m] = np.cross(g, t[None, :])
        elif fn.kind == "lowest_template":
            sh = data[fn.scalar_degree]
            col = pos(fn.scalar_degree, fn.scalar_index)
            b = sh.values[:, col]
            g = sh.grads[:, col]
            combo = np.asarray(fn.lowest_combo)[: low_vals.shape[1]]
            v = np.einsum("c,ncd->nd", combo, low_vals)
            values[:, m] = b[:, None] * v
            if dim == 2:
                curls[:, m] = (b * (combo @ low_rots)
                               + g[:, 0] * v[:, 1] - g[:, 1] * v[:, 0])
            else:
                curls[:, m] = b[:, None] * (combo @ low_rots) + np.cross(g, v)
        elif fn.kind == "gradient":
            sh = data[fn.scalar_degree]
            col = pos(fn.scalar_degree, fn.scalar_index)
            values[:, m] = sh.grads[:, col]
            # curl of a gradient is identically zero
        elif fn.kind == "cell_nongrad":
            shv = data[fn.scalar_degree + 1]
            shg = data[fn.scalar_degree + 2]
            colv = pos(fn.scalar_degree + 1, fn.value_index)
            colg = pos(fn.scalar_degree + 2, fn.grad_index)
            e_ax = np.zeros(3)
            e_ax[fn.axis] = 1.0
            values[:, m] = (fn.value_coeff * shv.values[:, colv][:, None] * e_ax
                            - fn.grad_coeff * shg.grads[:, colg])
            curls[:, m] = fn.value_coeff * np.cross(shv.grads[:, colv], e_ax)
        else:
            raise DomainError(f"unknown shape kind {fn.kind!r}")
    return VectorShapeSet(values, curls)


def eval_vector_values(space: SpaceDescriptor, simplex_pts) -> np.ndarray:
    """Base-function values (n, nb, dim) at arbitrary reference points.

    Unlike :func:`eval_vector_shapes` this path has no collapse
    singularities: scalar values use the zero-filled collapsed map and
    gradient-kind functions the degree-reduction identity.
    """
    pts = np.atleast_2d(np.asarray(simplex_pts, dtype=float))
    fns = build_basis(space)
    dim = space.dim
    n = pts.shape[0]
    values = np.zeros((n, len(fns), dim))

    if dim == 2:
        low_vals, _ = lowest_order_tri(pts)
    else:
        low_vals, _ = lowest_order_tet(pts)

    val_deg, grad_deg = set(), set()
    for fn in fns:
        if fn.kind in ("template", "lowest_template"):
            val_deg.add(fn.scalar_degree)
        elif fn.kind == "gradient":
            grad_deg.add(fn.scalar_degree)
        elif fn.kind == "cell_nongrad":
            val_deg.add(fn.scalar_degree + 1)
            grad_deg.add(fn.scalar_degree + 2)
    vals = {q: bezier_values(q, dim, pts) for q in val_deg}
    grads = {q: bezier_gradients(q, dim, pts) for q in grad_deg}

    def pos(q, idx):
        return index_position(q, dim)[idx]

    for m, fn in enumerate(fns):
        if fn.kind == "lowest":
            combo = np.asarray(fn.lowest_combo)[: low_vals.shape[1]]
            values[:, m] = np.einsum("c,ncd->nd", combo, low_vals)
        elif fn.kind == "template":
            b = vals[fn.scalar_degree][:, pos(fn.scalar_degree, fn.scalar_index)]
            values[:, m] = b[:, None] * np.asarray(fn.template)
        elif fn.kind == "lowest_template":
            b = vals[fn.scalar_degree][:, pos(fn.scalar_degree, fn.scalar_index)]
            combo = np.asarray(fn.lowest_combo)[: low_vals.shape[1]]
            v = np.einsum("c,ncd->nd", combo, low_vals)
            values[:, m] = b[:, None] * v
        elif fn.kind == "gradient":
            values[:, m] = grads[fn.scalar_degree][:, pos(fn.scalar_degree,
                                                          fn.scalar_index)]
        else:  # cell_nongrad
            qv, qg = fn.scalar_degree + 1, fn.scalar_degree + 2
            e_ax = np.zeros(3)
            e_ax[fn.axis] = 1.0
            b = vals[qv][:, pos(qv, fn.value_index)]
            g = grads[qg][:, pos(qg, fn.grad_index)]
            values[:, m] = fn.value_coeff * b[:, None] * e_ax - fn.grad_coeff * g
    return values
