"""Sparse assembly of the antiplane and full 3D variational forms.

Physical-element quantities follow the affine maps: H1 gradients and
H(curl) values transform by J^{-T} (covariant Piola), the 2D rot scales
by 1/det J and the 3D curl by J/det J, with signed determinants so that
the quadratic forms are orientation-safe.  Element matrices are built as
F F^T from per-dof generalized strain columns, which keeps them exactly
symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .dofmap import DofMap, build_dofmap
from .errors import SpaceMismatch
from .materials import MaterialParams
from .mesh import Mesh
from .nedelec import SpaceDescriptor, eval_vector_shapes
from .quadrature import rule_for
from .simplex import bezier_eval

_CHUNK_NNZ = 2_000_000


@dataclass
class FieldLayout:
    """One physical field inside the global dof vector."""

    name: str
    space: SpaceDescriptor
    dofmap: DofMap
    n_comps: int          # components (vector H1) or tensor rows (H(curl))
    offset: int

    @property
    def size(self):
        return self.n_comps * self.dofmap.n_dofs

    def comp_offset(self, r):
        return self.offset + r * self.dofmap.n_dofs


@dataclass
class SparseSystem:
    """Assembled symmetric system with optional Dirichlet constraints."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    fields: dict
    mesh: Mesh
    constraints: dict = field(default_factory=dict)
    curl_matrix: sp.csr_matrix = None   # unit-coefficient curl-curl part

    @property
    def n_dofs(self):
        return self.rhs.shape[0]

    def set_constraints(self, cons: dict):
        self.constraints = dict(cons)

    def matrix_at(self, curl_coeff: float):
        if self.curl_matrix is None:
            return self.matrix
        return (self.matrix + curl_coeff * self.curl_matrix).tocsr()


class _TripletAccumulator:
    """Chunked COO accumulation to bound peak memory."""

    def __init__(self, n):
        self.n = n
        self.rows, self.cols, self.vals = [], [], []
        self.pending = 0
        self.partial = None

    def add(self, dofs_row, dofs_col, block):
        r = np.repeat(dofs_row, len(dofs_col))
        c = np.tile(dofs_col, len(dofs_row))
        self.rows.append(r)
        self.cols.append(c)
        self.vals.append(block.ravel())
        self.pending += block.size
        if self.pending > _CHUNK_NNZ:
            self._flush()

    def _flush(self):
        if not self.rows:
            return
        mat = sp.coo_matrix(
            (np.concatenate(self.vals),
             (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n)).tocsr()
        self.partial = mat if self.partial is None else self.partial + mat
        self.rows, self.cols, self.vals = [], [], []
        self.pending = 0

    def result(self):
        self._flush()
        if self.partial is None:
            return sp.csr_matrix((self.n, self.n))
        return self.partial


@lru_cache(maxsize=None)
def _h1_ref(degree, dim, quad_degree):
    rule = rule_for(dim, quad_degree)
    sh = bezier_eval(degree, dim, rule.points)
    return rule, sh.values, sh.grads


@lru_cache(maxsize=None)
def _hcurl_ref(space: SpaceDescriptor, quad_degree):
    rule = rule_for(space.dim, quad_degree)
    vs = eval_vector_shapes(space, rule.points)
    return rule, vs.values, vs.curls


def _phys_grads(inv_t, ref_grads):
    return np.einsum("ed,qnd->qne", inv_t, ref_grads)


def _default_degree(u_space, p_space=None):
    p = u_space.degree - 1
    if p_space is not None:
        p = max(p, p_space.degree)
    return 2 * p + 2


# ---------------------------------------------------------------------------
# antiplane shear

def assemble_antiplane(mesh: Mesh, params: MaterialParams,
                       u_space: SpaceDescriptor, p_space: SpaceDescriptor,
                       f=None, m=None, quad_degree=None) -> SparseSystem:
    """System for the antiplane form
    mu_e <grad u - p, grad du - dp> + mu_micro <p, dp>
    + mu_macro lc^2 rot p rot dp  -  (f, du) - (m, dp).
    """
    if mesh.dim != 2 or u_space.dim != 2 or p_space.dim != 2:
        raise SpaceMismatch("antiplane model is two-dimensional")
    if u_space.family != "h1" or p_space.family not in ("nedelec1", "nedelec2"):
        raise SpaceMismatch("need scalar H1 u-space and H(curl) p-space")
    qd = quad_degree or _default_degree(u_space, p_space)
    rule, uvals, ugrads = _h1_ref(u_space.degree, 2, qd)
    _, pvals, pcurls = _hcurl_ref(p_space, qd)

    dm_u = build_dofmap(mesh, u_space)
    dm_p = build_dofmap(mesh, p_space)
    fields = {
        "u": FieldLayout("u", u_space, dm_u, 1, 0),
        "p": FieldLayout("p", p_space, dm_p, 1, dm_u.n_dofs),
    }
    n = dm_u.n_dofs + dm_p.n_dofs
    acc = _TripletAccumulator(n)
    acc_curl = _TripletAccumulator(n)
    rhs = np.zeros(n)

    mu_e, mu_micro = params.mu_e, params.mu_micro
    for c in range(mesh.n_cells):
        det = mesh.dets[c]
        w = rule.weights * abs(det)
        gu = _phys_grads(mesh.inv_ts[c], ugrads)
        pv = _phys_grads(mesh.inv_ts[c], pvals)
        rot = pcurls / det

        kuu = mu_e * np.einsum("q,qae,qbe->ab", w, gu, gu)
        kup = -mu_e * np.einsum("q,qae,qbe->ab", w, gu, pv)
        kpp = (mu_e + mu_micro) * np.einsum("q,qae,qbe->ab", w, pv, pv)
        kpp_curl = np.einsum("q,qa,qb->ab", w, rot, rot)

        du = dm_u.cell_dofs[c]
        dp = dm_p.cell_dofs[c] + fields["p"].offset
        acc.add(du, du, kuu)
        acc.add(du, dp, kup)
        acc.add(dp, du, kup.T)
        acc.add(dp, dp, kpp)
        acc_curl.add(dp, dp, kpp_curl)

        if f is not None or m is not None:
            xq = mesh.map_points(c, rule.simplex_points)
            if f is not None:
                np.add.at(rhs, du, np.einsum("q,qa->a", w * np.asarray(f(xq)), uvals))
            if m is not None:
                mv = np.asarray(m(xq))
                np.add.at(rhs, dp, np.einsum("q,qae,qe->a", w, pv, mv))

    base = acc.result()
    curl = acc_curl.result()
    matrix = (base + params.curl_coeff * curl).tocsr()
    return SparseSystem(matrix=matrix, rhs=rhs, fields=fields, mesh=mesh)


# ---------------------------------------------------------------------------
# full three-dimensional model

def _pack_sym(e):
    """Pack symmetric parts so the euclidean product equals <sym A, sym B>."""
    s2 = np.sqrt(2.0)
    return np.stack([e[..., 0, 0], e[..., 1, 1], e[..., 2, 2],
                     s2 * 0.5 * (e[..., 0, 1] + e[..., 1, 0]),
                     s2 * 0.5 * (e[..., 0, 2] + e[..., 2, 0]),
                     s2 * 0.5 * (e[..., 1, 2] + e[..., 2, 1])], axis=-1)


def _pack_skw(e):
    s2 = np.sqrt(2.0)
    return np.stack([s2 * 0.5 * (e[..., 0, 1] - e[..., 1, 0]),
                     s2 * 0.5 * (e[..., 0, 2] - e[..., 2, 0]),
                     s2 * 0.5 * (e[..., 1, 2] - e[..., 2, 1])], axis=-1)


def _strain_columns(gu, pv, pc, params):
    """Base-form and curl-form feature columns per local dof.

    Returns (F_base, F_curl) with shapes (nq, ndof, 17) and (nq, ndof, 9);
    K = sum_q w_q F F^T reproduces the micromorphic quadratic form.
    """
    nq, nbu = gu.shape[:2]
    nbp = pv.shape[1]
    ndof = 3 * (nbu + nbp)
    E = np.zeros((nq, ndof, 3, 3))
    P = np.zeros((nq, ndof, 3, 3))
    C = np.zeros((nq, ndof, 3, 3))
    for r in range(3):
        E[:, r * nbu:(r + 1) * nbu, r, :] = gu
    for r in range(3):
        sl = slice(3 * nbu + r * nbp, 3 * nbu + (r + 1) * nbp)
        E[:, sl, r, :] = -pv
        P[:, sl, r, :] = pv
        C[:, sl, r, :] = pc

    trE = np.einsum("qnii->qn", E)
    trP = np.einsum("qnii->qn", P)
    cols = [np.sqrt(params.lam_e) * trE[..., None],
            np.sqrt(2.0 * params.mu_e) * _pack_sym(E),
            np.sqrt(2.0 * params.mu_c) * _pack_skw(E),
            np.sqrt(params.lam_micro) * trP[..., None],
            np.sqrt(2.0 * params.mu_micro) * _pack_sym(P)]
    f_base = np.concatenate(cols, axis=-1)
    f_curl = C.reshape(nq, ndof, 9)
    return f_base, f_curl


def _gram(f, w):
    fw = f * np.sqrt(w)[:, None, None]
    flat = fw.transpose(1, 0, 2).reshape(f.shape[1], -1)
    return flat @ flat.T


def assemble_full3d(mesh: Mesh, params: MaterialParams,
                    u_space: SpaceDescriptor, p_space: SpaceDescriptor,
                    f=None, M=None, quad_degree=None,
                    split_curl: bool = False) -> SparseSystem:
    """System for the relaxed micromorphic form with [H1]^3 displacement
    and one H(curl) space per microdistortion row (row-wise Curl).

    With ``split_curl`` the curl-curl part is kept as a separate matrix
    with unit coefficient so characteristic-length sweeps can recombine
    without reassembly.
    """
    if mesh.dim != 3 or u_space.dim != 3 or p_space.dim != 3:
        raise SpaceMismatch("full model is three-dimensional")
    if u_space.family != "h1" or p_space.family not in ("nedelec1", "nedelec2"):
        raise SpaceMismatch("need H1 u-space and H(curl) P-space")
    if min(params.lam_e, params.lam_micro) < 0.0:
        raise SpaceMismatch("factorized assembly needs lam_e, lam_micro >= 0")
    qd = quad_degree or _default_degree(u_space, p_space)
    rule, uvals, ugrads = _h1_ref(u_space.degree, 3, qd)
    _, pvals, pcurls = _hcurl_ref(p_space, qd)

    dm_u = build_dofmap(mesh, u_space)
    dm_p = build_dofmap(mesh, p_space)
    nu, npp = dm_u.n_dofs, dm_p.n_dofs
    fields = {
        "u": FieldLayout("u", u_space, dm_u, 3, 0),
        "p": FieldLayout("p", p_space, dm_p, 3, 3 * nu),
    }
    n = 3 * nu + 3 * npp
    acc = _TripletAccumulator(n)
    acc_curl = _TripletAccumulator(n)
    rhs = np.zeros(n)

    for c in range(mesh.n_cells):
        det = mesh.dets[c]
        w = rule.weights * abs(det)
        gu = _phys_grads(mesh.inv_ts[c], ugrads)
        pv = _phys_grads(mesh.inv_ts[c], pvals)
        pc = np.einsum("ed,qnd->qne", mesh.jacs[c] / det, pcurls)

        f_base, f_curl = _strain_columns(gu, pv, pc, params)
        k_base = _gram(f_base, w)
        k_curl = _gram(f_curl, w)

        du = dm_u.cell_dofs[c]
        dp = dm_p.cell_dofs[c]
        gdofs = np.concatenate([du + r * nu for r in range(3)]
                               + [3 * nu + dp + r * npp for r in range(3)])
        acc.add(gdofs, gdofs, k_base)
        acc_curl.add(gdofs, gdofs, k_curl)

        if f is not None or M is not None:
            xq = mesh.map_points(c, rule.simplex_points)
            if f is not None:
                fv = np.asarray(f(xq))
                for r in range(3):
                    np.add.at(rhs, du + r * nu,
                              np.einsum("q,qa->a", w * fv[:, r], uvals))
            if M is not None:
                mv = np.asarray(M(xq))
                for r in range(3):
                    np.add.at(rhs, 3 * nu + dp + r * npp,
                              np.einsum("q,qae,qe->a", w, pv, mv[:, r]))

    base = acc.result()
    curl = acc_curl.result()
    if split_curl:
        return SparseSystem(matrix=base.tocsr(), rhs=rhs, fields=fields,
                            mesh=mesh, curl_matrix=curl.tocsr())
    matrix = (base + params.curl_coeff * curl).tocsr()
    return SparseSystem(matrix=matrix, rhs=rhs, fields=fields, mesh=mesh)


def assemble_cauchy3d(mesh: Mesh, lam: float, mu: float,
                      u_space: SpaceDescriptor, f=None,
                      quad_degree=None) -> SparseSystem:
    """Classical linear elasticity <sym Du, C sym Du>, used for the
    characteristic-length energy bounds."""
    if mesh.dim != 3 or u_space.dim != 3 or u_space.family != "h1":
        raise SpaceMismatch("cauchy3d needs a 3D H1 space")
    qd = quad_degree or 2 * u_space.degree
    rule, uvals, ugrads = _h1_ref(u_space.degree, 3, qd)
    dm_u = build_dofmap(mesh, u_space)
    nu = dm_u.n_dofs
    fields = {"u": FieldLayout("u", u_space, dm_u, 3, 0)}
    acc = _TripletAccumulator(3 * nu)
    rhs = np.zeros(3 * nu)

    for c in range(mesh.n_cells):
        det = mesh.dets[c]
        w = rule.weights * abs(det)
        gu = _phys_grads(mesh.inv_ts[c], ugrads)
        nq, nbu = gu.shape[:2]
        E = np.zeros((nq, 3 * nbu, 3, 3))
        for r in range(3):
            E[:, r * nbu:(r + 1) * nbu, r, :] = gu
        F = np.concatenate([np.sqrt(lam) * np.einsum("qnii->qn", E)[..., None],
                            np.sqrt(2.0 * mu) * _pack_sym(E)], axis=-1)
        k = _gram(F, w)
        du = dm_u.cell_dofs[c]
        gdofs = np.concatenate([du + r * nu for r in range(3)])
        acc.add(gdofs, gdofs, k)
        if f is not None:
            xq = mesh.map_points(c, rule.simplex_points)
            fv = np.asarray(f(xq))
            for r in range(3):
                np.add.at(rhs, du + r * nu,
                          np.einsum("q,qa->a", w * fv[:, r], uvals))
    return SparseSystem(matrix=acc.result().tocsr(), rhs=rhs, fields=fields,
                        mesh=mesh)


# ---------------------------------------------------------------------------
# post-processing helpers

def _gather(layout: FieldLayout, x, c):
    """Local coefficient matrix (n_comps, n_local) of cell c."""
    dofs = layout.dofmap.cell_dofs[c]
    return np.stack([x[layout.comp_offset(r) + dofs]
                     for r in range(layout.n_comps)])


def compute_energy(mesh: Mesh, params: MaterialParams, system: SparseSystem,
                   x: np.ndarray, quad_degree=None) -> float:
    """Quadratic energy 1/2 a(x, x) evaluated by elementwise quadrature."""
    uf, pf = system.fields["u"], system.fields.get("p")
    qd = quad_degree or _default_degree(uf.space, pf.space if pf else None)
    rule, _, ugrads = _h1_ref(uf.space.degree, mesh.dim, qd)
    if pf is not None:
        _, pvals, pcurls = _hcurl_ref(pf.space, qd)

    total = 0.0
    for c in range(mesh.n_cells):
        det = mesh.dets[c]
        w = rule.weights * abs(det)
        gu = _phys_grads(mesh.inv_ts[c], ugrads)
        cu = _gather(uf, x, c)
        if mesh.dim == 2:
            grad_u = np.einsum("qad,a->qd", gu, cu[0])
            pvp = _phys_grads(mesh.inv_ts[c], pvals)
            cp = _gather(pf, x, c)
            pval = np.einsum("qad,a->qd", pvp, cp[0])
            rot = (pcurls / det) @ cp[0]
            diff = grad_u - pval
            integrand = (params.mu_e * np.einsum("qd,qd->q", diff, diff)
                         + params.mu_micro * np.einsum("qd,qd->q", pval, pval)
                         + params.curl_coeff * rot ** 2)
        else:
            Du = np.einsum("qad,ra->qrd", gu, cu)
            if pf is not None:
                pvp = _phys_grads(mesh.inv_ts[c], pvals)
                pcp = np.einsum("ed,qnd->qne", mesh.jacs[c] / det, pcurls)
                cp = _gather(pf, x, c)
                P = np.einsum("qad,ra->qrd", pvp, cp)
                CurlP = np.einsum("qad,ra->qrd", pcp, cp)
            else:
                P = np.zeros_like(Du)
                CurlP = np.zeros_like(Du)
            E = Du - P
            symE = 0.5 * (E + E.transpose(0, 2, 1))
            skwE = E - symE
            symP = 0.5 * (P + P.transpose(0, 2, 1))
            trE = np.einsum("qrr->q", E)
            trP = np.einsum("qrr->q", P)
            integrand = (params.lam_e * trE ** 2
                         + 2.0 * params.mu_e * np.einsum("qij,qij->q", symE, symE)
                         + 2.0 * params.mu_c * np.einsum("qij,qij->q", skwE, skwE)
                         + params.lam_micro * trP ** 2
                         + 2.0 * params.mu_micro * np.einsum("qij,qij->q", symP, symP)
                         + params.curl_coeff * np.einsum("qij,qij->q", CurlP, CurlP))
        total += 0.5 * float(w @ integrand)
    return total


def l2_error_h1(mesh: Mesh, layout: FieldLayout, x, func, quad_degree=None):
    """L2 distance between an H1 field and a callback on physical points."""
    qd = quad_degree or 2 * layout.space.degree + 2
    rule, uvals, _ = _h1_ref(layout.space.degree, mesh.dim, qd)
    err2 = 0.0
    for c in range(mesh.n_cells):
        w = rule.weights * abs(mesh.dets[c])
        cu = _gather(layout, x, c)
        vals = np.einsum("qa,ra->qr", uvals, cu)
        exact = np.asarray(func(mesh.map_points(c, rule.simplex_points)), dtype=float)
        if exact.ndim == 1:
            exact = exact[:, None]
        err2 += float(w @ np.sum((vals - exact) ** 2, axis=1))
    return np.sqrt(err2)


def l2_error_hcurl(mesh: Mesh, layout: FieldLayout, x, func, quad_degree=None):
    """L2 distance for an H(curl) field; rows stacked for tensor fields."""
    qd = quad_degree or 2 * (layout.space.degree + 1) + 2
    rule, pvals, _ = _hcurl_ref(layout.space, qd)
    err2 = 0.0
    for c in range(mesh.n_cells):
        w = rule.weights * abs(mesh.dets[c])
        pv = _phys_grads(mesh.inv_ts[c], pvals)
        cp = _gather(layout, x, c)
        vals = np.einsum("qad,ra->qrd", pv, cp)
        exact = np.asarray(func(mesh.map_points(c, rule.simplex_points)), dtype=float)
        if exact.ndim == 2:
            exact = exact[:, None, :]
        err2 += float(w @ np.sum((vals - exact) ** 2, axis=(1, 2)))
    return np.sqrt(err2)


def rot_l2_norm(mesh: Mesh, layout: FieldLayout, x, quad_degree=None):
    """L2 norm of the 2D rot of an H(curl) field."""
    qd = quad_degree or 2 * (layout.space.degree + 1)
    rule, _, pcurls = _hcurl_ref(layout.space, qd)
    total = 0.0
    for c in range(mesh.n_cells):
        w = rule.weights * abs(mesh.dets[c])
        rot = (pcurls / mesh.dets[c]) @ _gather(layout, x, c)[0]
        total += float(w @ rot ** 2)
    return np.sqrt(total)
