"""Bezier bases on the reference triangle and tetrahedron.

Reference conventions (vertex roles match the barycentric maps used by
the mesh module):

* triangle:    v1=(0,0), v2=(0,1), v3=(1,0) in (xi, eta);
  multi-index (i, j) carries exponents  v1: p-i-j,  v2: j,  v3: i.
* tetrahedron: v1=(0,0,0), v2=(0,0,1), v3=(0,1,0), v4=(1,0,0);
  multi-index (i, j, k) carries exponents v1: p-i-j-k, v2: k, v3: j, v4: i.

Evaluation is factorized through the collapsed (Duffy) coordinates, with
dual-number sweeps supplying the univariate derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bernstein import eval_all
from .errors import DomainError, SingularCollapse

COLLAPSE_TOL = 1e-12

TRI_VERTICES = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
TET_VERTICES = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0],
                         [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])

# local vertex pairs/triples (0-based, ascending) in the paper's numbering
TRI_EDGES = ((0, 1), (0, 2), (1, 2))
TET_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
TET_FACES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


@dataclass(frozen=True)
class MultiIndex2:
    p: int
    i: int
    j: int

    def __post_init__(self):
        if min(self.i, self.j) < 0 or self.i + self.j > self.p:
            raise DomainError(f"invalid triangle multi-index {(self.i, self.j)} for p={self.p}")

    @property
    def exponents(self):
        """Barycentric exponents by local vertex (v1, v2, v3)."""
        return (self.p - self.i - self.j, self.j, self.i)


@dataclass(frozen=True)
class MultiIndex3:
    p: int
    i: int
    j: int
    k: int

    def __post_init__(self):
        if min(self.i, self.j, self.k) < 0 or self.i + self.j + self.k > self.p:
            raise DomainError(
                f"invalid tetrahedron multi-index {(self.i, self.j, self.k)} for p={self.p}")

    @property
    def exponents(self):
        """Barycentric exponents by local vertex (v1, v2, v3, v4)."""
        return (self.p - self.i - self.j - self.k, self.k, self.j, self.i)


@dataclass(frozen=True)
class Polytope:
    """A vertex, edge, face or cell of the reference simplex."""

    kind: str                 # "vertex" | "edge" | "face" | "cell"
    vertices: tuple           # ascending local vertex indices, 0-based

    @property
    def name(self) -> str:
        tag = {"vertex": "v", "edge": "e", "face": "f", "cell": "c"}[self.kind]
        return tag + "".join(str(v + 1) for v in self.vertices)


@dataclass(frozen=True)
class CollapsedPoint:
    """Point in the collapsed unit square/cube, components in [0, 1]."""

    coords: tuple

    def __post_init__(self):
        if any(c < 0.0 or c > 1.0 for c in self.coords):
            raise DomainError(f"collapsed coordinates {self.coords} outside [0,1]")


def duffy_forward(cp) -> np.ndarray:
    """Collapsed coordinates -> reference simplex coordinates.

    Accepts a CollapsedPoint or an (n, d) array; returns matching shape.
    """
    pts = np.atleast_2d(np.asarray(cp.coords if isinstance(cp, CollapsedPoint) else cp,
                                   dtype=float))
    a = pts[:, 0]
    b = pts[:, 1]
    if pts.shape[1] == 2:
        out = np.stack([a, (1.0 - a) * b], axis=1)
    else:
        g = pts[:, 2]
        out = np.stack([a, (1.0 - a) * b, (1.0 - a) * (1.0 - b) * g], axis=1)
    if isinstance(cp, CollapsedPoint) or np.asarray(cp).ndim == 1:
        return out[0]
    return out


def duffy_inverse(pt) -> np.ndarray:
    """Reference simplex coordinates -> collapsed coordinates.

    Raises SingularCollapse when a collapse denominator (1-xi, or
    1-xi-eta in 3D) falls below 1e-14.
    """
    pts = np.atleast_2d(np.asarray(pt, dtype=float))
    xi = pts[:, 0]
    eta = pts[:, 1]
    if pts.shape[1] == 2:
        den = 1.0 - xi
        if np.any(den < 1e-14):
            raise SingularCollapse("duffy inverse undefined at xi = 1")
        out = np.stack([xi, eta / den], axis=1)
    else:
        zeta = pts[:, 2]
        den1 = 1.0 - xi
        den2 = 1.0 - xi - eta
        if np.any(den1 < 1e-14) or np.any(den2 < 1e-14):
            raise SingularCollapse("duffy inverse undefined at xi = 1 or xi + eta = 1")
        out = np.stack([xi, eta / den1, zeta / den2], axis=1)
    if np.asarray(pt).ndim == 1:
        return out[0]
    return out


def collapsed_safe(simplex_pts: np.ndarray, dim: int) -> np.ndarray:
    """Inverse Duffy map with singular denominators filled by zero.

    Exact for base-function *values*: wherever a denominator vanishes the
    corresponding univariate factor is constant, so the fill value is
    irrelevant.  Out-of-range round-off is clipped.
    """
    pts = np.atleast_2d(np.asarray(simplex_pts, dtype=float))
    xi = pts[:, 0]
    eta = pts[:, 1]
    den1 = 1.0 - xi
    beta = np.where(den1 > 1e-14, eta / np.where(den1 > 1e-14, den1, 1.0), 0.0)
    if dim == 2:
        out = np.stack([xi, beta], axis=1)
    else:
        zeta = pts[:, 2]
        den2 = 1.0 - xi - eta
        gamma = np.where(den2 > 1e-14, zeta / np.where(den2 > 1e-14, den2, 1.0), 0.0)
        out = np.stack([xi, beta, gamma], axis=1)
    return np.clip(out, 0.0, 1.0)


def traversal_order(p: int, dim: int):
    """Multi-indices in the Duffy-induced traversal order.

    Outermost index first: (i, j) with i outer, and (i, j, k) with i
    outer, j middle, k inner.  On every edge the induced order runs from
    the lower to the higher vertex index.
    """
    if dim == 2:
        return [MultiIndex2(p, i, j) for i in range(p + 1) for j in range(p + 1 - i)]
    if dim == 3:
        return [MultiIndex3(p, i, j, k)
                for i in range(p + 1)
                for j in range(p + 1 - i)
                for k in range(p + 1 - i - j)]
    raise DomainError(f"dim must be 2 or 3, got {dim}")


def classify(mi) -> Polytope:
    """Polytope owning one base function: the span of its support vertices."""
    exps = mi.exponents
    support = tuple(v for v, e in enumerate(exps) if e > 0)
    kind = {1: "vertex", 2: "edge", 3: "face", 4: "cell"}[len(support)]
    if isinstance(mi, MultiIndex2) and len(support) == 3:
        kind = "cell"
    return Polytope(kind, support)


@dataclass
class H1ShapeSet:
    """Scalar basis data at a batch of points: values (n, nb), reference
    gradients (n, nb, dim), in traversal order."""

    p: int
    values: np.ndarray
    grads: np.ndarray


def n_basis(p: int, dim: int) -> int:
    return (p + 1) * (p + 2) // 2 if dim == 2 else (p + 1) * (p + 2) * (p + 3) // 6


def _rows_all_degrees(p, t):
    """BernsteinEval for every degree 0..p at the points t."""
    return [eval_all(q, t) for q in range(p + 1)]


def bezier_tri_eval(p: int, cp) -> H1ShapeSet:
    """All triangle base functions of degree ``p`` at collapsed points.

    ``cp`` is a CollapsedPoint or an (n, 2) array.  Gradients are taken
    with respect to the reference (xi, eta) coordinates via the chain
    rule of the Duffy map; points with alpha near 1 are rejected.
    """
    pts = np.atleast_2d(np.asarray(cp.coords if isinstance(cp, CollapsedPoint) else cp,
                                   dtype=float))
    if p < 1:
        raise DomainError("triangle basis needs p >= 1")
    alpha, beta = pts[:, 0], pts[:, 1]
    if np.any(alpha > 1.0 - COLLAPSE_TOL):
        raise SingularCollapse("gradient chain rule singular at alpha = 1")

    A = eval_all(p, alpha)
    B = _rows_all_degrees(p, beta)
    n = pts.shape[0]
    nb = n_basis(p, 2)
    values = np.empty((n, nb))
    grads = np.empty((n, nb, 2))
    inv1 = 1.0 / (1.0 - alpha)
    idx = 0
    for i in range(p + 1):
        bi, dbi = A.values[:, i], A.derivs[:, i]
        row = B[p - i]
        for j in range(p + 1 - i):
            bj, dbj = row.values[:, j], row.derivs[:, j]
            values[:, idx] = bi * bj
            da = dbi * bj
            db = bi * dbj
            grads[:, idx, 0] = da + beta * inv1 * db
            grads[:, idx, 1] = inv1 * db
            idx += 1
    return H1ShapeSet(p, values, grads)


def bezier_tet_eval(p: int, cp) -> H1ShapeSet:
    """All tetrahedron base functions of degree ``p`` at collapsed points."""
    pts = np.atleast_2d(np.asarray(cp.coords if isinstance(cp, CollapsedPoint) else cp,
                                   dtype=float))
    if p < 1:
        raise DomainError("tetrahedron basis needs p >= 1")
    alpha, beta, gamma = pts[:, 0], pts[:, 1], pts[:, 2]
    if np.any(alpha > 1.0 - COLLAPSE_TOL) or np.any(beta > 1.0 - COLLAPSE_TOL):
        raise SingularCollapse("gradient chain rule singular at alpha or beta = 1")

    A = eval_all(p, alpha)
    B = _rows_all_degrees(p, beta)
    G = _rows_all_degrees(p, gamma)
    n = pts.shape[0]
    nb = n_basis(p, 3)
    values = np.empty((n, nb))
    grads = np.empty((n, nb, 3))
    inv1 = 1.0 / (1.0 - alpha)
    inv2 = 1.0 / (1.0 - beta)
    idx = 0
    for i in range(p + 1):
        bi, dbi = A.values[:, i], A.derivs[:, i]
        rowB = B[p - i]
        for j in range(p + 1 - i):
            bj, dbj = rowB.values[:, j], rowB.derivs[:, j]
            rowG = G[p - i - j]
            for k in range(p + 1 - i - j):
                bk, dbk = rowG.values[:, k], rowG.derivs[:, k]
                values[:, idx] = bi * bj * bk
                da = dbi * bj * bk
                db = bi * dbj * bk
                dc = bi * bj * dbk
                # rows of (D_alpha xi)^{-T}
                grads[:, idx, 0] = da + beta * inv1 * db + gamma * inv1 * inv2 * dc
                grads[:, idx, 1] = inv1 * db + gamma * inv1 * inv2 * dc
                grads[:, idx, 2] = inv1 * inv2 * dc
                idx += 1
    return H1ShapeSet(p, values, grads)


def bezier_eval(p: int, dim: int, cp) -> H1ShapeSet:
    return bezier_tri_eval(p, cp) if dim == 2 else bezier_tet_eval(p, cp)


def bezier_values(p: int, dim: int, simplex_pts: np.ndarray) -> np.ndarray:
    """Base-function values (n, nb) at arbitrary reference points.

    Uses the zero-filled collapsed map, which is exact for values even on
    the collapse lines; valid for p = 0 as well.
    """
    cp = collapsed_safe(simplex_pts, dim)
    alpha = cp[:, 0]
    beta = cp[:, 1]
    n = cp.shape[0]
    A = eval_all(p, alpha)
    B = _rows_all_degrees(p, beta)
    values = np.empty((n, n_basis(p, dim)))
    idx = 0
    if dim == 2:
        Av = A.values if p > 0 else A.values.reshape(n, 1)
        for i in range(p + 1):
            for j in range(p + 1 - i):
                values[:, idx] = Av[:, i] * B[p - i].values[:, j]
                idx += 1
        return values
    gamma = cp[:, 2]
    G = _rows_all_degrees(p, gamma)
    for i in range(p + 1):
        for j in range(p + 1 - i):
            for k in range(p + 1 - i - j):
                values[:, idx] = (A.values[:, i] * B[p - i].values[:, j]
                                  * G[p - i - j].values[:, k])
                idx += 1
    return values


def bezier_gradients(p: int, dim: int, simplex_pts: np.ndarray) -> np.ndarray:
    """Reference gradients (n, nb, dim) at arbitrary reference points.

    Uses the degree-reduction identity (the xi-derivative of b^p_{ijk} is
    p (b^{p-1}_{i-1,j,k} - b^{p-1}_{ijk}), analogously for eta and zeta),
    so it is exact on the collapse lines where the Duffy chain rule is
    not.  Out-of-range lowered indices contribute zero.
    """
    pts = np.atleast_2d(np.asarray(simplex_pts, dtype=float))
    n = pts.shape[0]
    out = np.zeros((n, n_basis(p, dim), dim))
    if p == 0:
        return out
    low = bezier_values(p - 1, dim, pts)
    pos_low = index_position(p - 1, dim)
    for col, idx in enumerate(index_tuples(p, dim)):
        total = sum(idx)
        t2 = low[:, pos_low[idx]] if total <= p - 1 else 0.0
        for d in range(dim):
            if idx[d] >= 1:
                shifted = list(idx)
                shifted[d] -= 1
                t1 = low[:, pos_low[tuple(shifted)]]
            else:
                t1 = 0.0
            out[:, col, d] = p * (t1 - t2)
    return out


@lru_cache(maxsize=None)
def index_tuples(p: int, dim: int):
    """Traversal-ordered plain index tuples, cached."""
    if dim == 2:
        return tuple((mi.i, mi.j) for mi in traversal_order(p, 2))
    return tuple((mi.i, mi.j, mi.k) for mi in traversal_order(p, 3))


@lru_cache(maxsize=None)
def index_position(p: int, dim: int):
    """Map index tuple -> position in traversal order, cached."""
    return {t: n for n, t in enumerate(index_tuples(p, dim))}
