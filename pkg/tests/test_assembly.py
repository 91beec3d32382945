import numpy as np
import pytest

from mmfem.assembly import (assemble_antiplane, assemble_cauchy3d,
                            assemble_full3d, compute_energy, l2_error_h1,
                            l2_error_hcurl)
from mmfem.dofmap import build_dofmap
from mmfem.errors import SpaceMismatch
from mmfem.materials import MaterialParams
from mmfem.mesh import build, generate_box, generate_disk
from mmfem.nedelec import SpaceDescriptor, eval_vector_values


def unit_params(lc=1.0, mu_c=0.0):
    return MaterialParams(lam_e=1.0, mu_e=1.0, lam_micro=1.0, mu_micro=1.0,
                          mu_c=mu_c, lc=lc, mu_macro=1.0, lam_macro=1.0)


@pytest.fixture(scope="module")
def disk():
    return generate_disk(10.0, n_rings=2)


@pytest.fixture(scope="module")
def cube():
    return generate_box(((-1, 1), (-1, 1), (-1, 1)), 1)


class TestAntiplane:
    def test_matrix_symmetric(self, disk):
        sys_ = assemble_antiplane(disk, unit_params(), SpaceDescriptor("h1", 2, 2),
                                  SpaceDescriptor("nedelec2", 1, 2))
        K = sys_.matrix
        diff = abs(K - K.T).max()
        assert diff <= 1e-12 * abs(K).max()

    def test_space_mismatch(self, disk):
        with pytest.raises(SpaceMismatch):
            assemble_antiplane(disk, unit_params(),
                               SpaceDescriptor("nedelec1", 1, 2),
                               SpaceDescriptor("nedelec1", 1, 2))

    def test_zero_data_zero_solution(self, disk):
        from mmfem.solver import solve
        from mmfem.dirichlet import h1_dirichlet, hcurl_dirichlet

        sys_ = assemble_antiplane(disk, unit_params(), SpaceDescriptor("h1", 2, 2),
                                  SpaceDescriptor("nedelec1", 1, 2))
        zero = lambda x: np.zeros(len(np.atleast_2d(x)))
        gzero = lambda x: np.zeros((len(np.atleast_2d(x)), 2))
        facets = disk.tagged_facets("boundary")
        cons = h1_dirichlet(disk, sys_.fields["u"].dofmap, [(facets, zero, gzero)])
        cons.merge(hcurl_dirichlet(disk, sys_.fields["p"].dofmap,
                                   [(facets, gzero)],
                                   comp_offset0=sys_.fields["p"].offset))
        sys_.set_constraints(cons.values)
        sol = solve(sys_)
        assert np.abs(sol.x).max() < 1e-12

    def test_lc_zero_algebraic_limit(self, disk):
        # linear Dirichlet data, zero loads: p = mu_e/(mu_e+mu_micro) grad u
        from mmfem.benchmarks import solve_antiplane

        params = unit_params(lc=0.0)
        ufunc = lambda x: np.atleast_2d(x)[:, 0]
        gradfunc = lambda x: np.tile([1.0, 0.0], (len(np.atleast_2d(x)), 1))
        sol = solve_antiplane(disk, params, 1, "nedelec2", ufunc=ufunc,
                              gradfunc=gradfunc, f=None, m=None)
        pf = sol.system.fields["p"]
        target = lambda x: np.tile([0.5, 0.0], (len(np.atleast_2d(x)), 1))
        assert l2_error_hcurl(disk, pf, sol.x, target) < 1e-9


class TestTangentialContinuity:
    @pytest.mark.parametrize("family", ["nedelec1", "nedelec2"])
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_2d_edge_jump(self, family, p):
        mesh = build([[0, 0], [1, 0], [0, 1], [1, 1]], [[0, 1, 2], [1, 3, 2]])
        sp = SpaceDescriptor(family, p, 2)
        dm = build_dofmap(mesh, sp)
        rng = np.random.default_rng(p)
        x = rng.standard_normal(dm.n_dofs)
        counts = np.bincount(mesh.cell_edges.ravel(), minlength=mesh.n_edges)
        e = int(np.flatnonzero(counts == 2)[0])
        va, vb = mesh.edges[e]
        t = mesh.vertices[vb] - mesh.vertices[va]
        pts = mesh.vertices[va] + np.linspace(0.05, 0.95, 9)[:, None] * t
        traces = []
        for c in range(mesh.n_cells):
            ref = np.linalg.solve(mesh.jacs[c], (pts - mesh.origins[c]).T).T
            shp = eval_vector_values(sp, ref)
            phys = np.einsum("ed,qnd->qne", mesh.inv_ts[c], shp)
            traces.append(np.einsum("qne,n->qe", phys, x[dm.cell_dofs[c]]) @ t)
        assert np.abs(traces[0] - traces[1]).max() <= 1e-11

    @pytest.mark.parametrize("family", ["nedelec1", "nedelec2"])
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_3d_face_and_edge_jump(self, family, p):
        verts = [[0, 0, 0], [1, 0.1, 0], [0.2, 1, 0], [0.3, 0.3, 1],
                 [0.4, 0.2, -0.8]]
        mesh = build(verts, [[0, 1, 2, 3], [0, 1, 2, 4]])
        sp = SpaceDescriptor(family, p, 3)
        dm = build_dofmap(mesh, sp)
        rng = np.random.default_rng(p + 10)
        x = rng.standard_normal(dm.n_dofs)
        fverts = (0, 1, 2)
        xa, xb, xc = (mesh.vertices[v] for v in fverts)
        t1, t2 = xb - xa, xc - xa
        bary = rng.dirichlet(np.ones(3), size=10)
        pts = bary @ np.stack([xa, xb, xc])
        # include points on the shared edges as well
        for lo, hi in ((0, 1), (0, 2), (1, 2)):
            s = np.linspace(0.1, 0.9, 3)[:, None]
            pts = np.vstack([pts, mesh.vertices[fverts[lo]]
                             + s * (mesh.vertices[fverts[hi]]
                                    - mesh.vertices[fverts[lo]])])
        traces = []
        for c in range(mesh.n_cells):
            ref = np.linalg.solve(mesh.jacs[c], (pts - mesh.origins[c]).T).T
            shp = eval_vector_values(sp, ref)
            phys = np.einsum("ed,qnd->qne", mesh.inv_ts[c], shp)
            f = np.einsum("qne,n->qe", phys, x[dm.cell_dofs[c]])
            traces.append(np.stack([f @ t1, f @ t2], axis=1))
        assert np.abs(traces[0] - traces[1]).max() <= 1e-11


class TestFull3D:
    def test_element_matrix_symmetric_psd(self, cube):
        params = MaterialParams(lam_e=2.5, mu_e=1.25, lam_micro=10.0,
                                mu_micro=5.0, mu_c=1.0, lc=1.0)
        sys_ = assemble_full3d(cube, params, SpaceDescriptor("h1", 1, 3),
                               SpaceDescriptor("nedelec1", 0, 3))
        K = sys_.matrix.toarray()
        assert np.abs(K - K.T).max() <= 1e-12 * np.abs(K).max()
        ev = np.linalg.eigvalsh(K)
        assert ev[0] > -1e-10 * ev[-1]

    def test_gradient_field_has_zero_curl_energy(self, cube):
        # P rows = gradients of quadratics: curl term contributes nothing
        params = MaterialParams(lam_e=0.0, mu_e=1.0, lam_micro=0.0,
                                mu_micro=1.0, mu_c=0.0, lc=5.0,
                                mu_macro=1.0, lam_macro=0.0)
        u_space = SpaceDescriptor("h1", 2, 3)
        p_space = SpaceDescriptor("nedelec1", 1, 3)
        sys_ = assemble_full3d(cube, params, u_space, p_space, split_curl=True)
        # build P-row coefficients representing grad(x^2 + y z) etc. by
        # solving the exact-sequence interpolation on each row
        from mmfem.dirichlet import hcurl_dirichlet
        from mmfem.dofmap import build_dofmap

        def gradfunc(x):
            x = np.atleast_2d(x)
            g = np.zeros((len(x), 3, 3))
            g[:, 0, :] = np.stack([2 * x[:, 0], x[:, 2], x[:, 1]], axis=1)
            g[:, 1, :] = np.stack([x[:, 1], x[:, 0], np.zeros(len(x))], axis=1)
            g[:, 2, :] = np.stack([np.zeros(len(x)), 2 * x[:, 1], x[:, 2] * 0], axis=1)
            return g

        # interpolate the gradient field row-wise via the boundary machinery
        # on all faces of a one-cell... instead simply check the assembled
        # curl matrix annihilates discrete gradient fields
        dm_u = sys_.fields["u"].dofmap
        dm_p = sys_.fields["p"].dofmap
        rng = np.random.default_rng(0)
        v = rng.standard_normal(build_dofmap(cube, SpaceDescriptor("h1", 2, 3)).n_dofs)
        # gradient of a scalar H1 field lives in the Nedelec space; build its
        # coefficients by least squares on the curl matrix kernel property
        from mmfem.assembly import _h1_ref, _hcurl_ref, _phys_grads
        rule, _, ugrads = _h1_ref(2, 3, 6)
        _, pvals, _ = _hcurl_ref(SpaceDescriptor("nedelec1", 1, 3), 6)
        x = np.zeros(sys_.n_dofs)
        for c in range(cube.n_cells):
            gu = _phys_grads(cube.inv_ts[c], ugrads)
            pv = _phys_grads(cube.inv_ts[c], pvals)
            target = np.einsum("qad,a->qd", gu, v[dm_u.cell_dofs[c]])
            A = pv.transpose(0, 2, 1).reshape(-1, pv.shape[1])
            sol, *_ = np.linalg.lstsq(A, target.reshape(-1), rcond=None)
            off = sys_.fields["p"].offset
            x[off + dm_p.cell_dofs[c]] = sol
        curl_energy = float(x @ (sys_.curl_matrix @ x))
        assert abs(curl_energy) <= 1e-12 * (1.0 + float(x @ x))

    def test_energy_two_paths(self, cube):
        params = MaterialParams(lam_e=2.5, mu_e=1.25, lam_micro=10.0,
                                mu_micro=5.0, mu_c=1.0, lc=0.7)
        u_space = SpaceDescriptor("h1", 2, 3)
        p_space = SpaceDescriptor("nedelec2", 1, 3)
        sys_ = assemble_full3d(cube, params, u_space, p_space)
        rng = np.random.default_rng(3)
        x = rng.standard_normal(sys_.n_dofs)
        matrix_energy = 0.5 * float(x @ (sys_.matrix @ x))
        quad_energy = compute_energy(cube, params, sys_, x)
        assert abs(matrix_energy - quad_energy) <= 1e-10 * max(1.0, abs(matrix_energy))
        # quadratic scaling
        assert abs(compute_energy(cube, params, sys_, 2 * x)
                   - 4 * quad_energy) <= 1e-9 * max(1.0, abs(quad_energy))

    def test_energy_zero_solution(self, cube):
        params = unit_params()
        sys_ = assemble_full3d(cube, params, SpaceDescriptor("h1", 1, 3),
                               SpaceDescriptor("nedelec1", 0, 3))
        assert compute_energy(cube, params, sys_, np.zeros(sys_.n_dofs)) == 0.0


class TestCauchy:
    def test_rigid_translation_zero_energy(self, cube):
        sys_ = assemble_cauchy3d(cube, 2.0, 1.0, SpaceDescriptor("h1", 2, 3))
        nu = sys_.fields["u"].dofmap.n_dofs
        x = np.concatenate([np.full(nu, 0.3), np.full(nu, -0.2), np.full(nu, 1.0)])
        assert abs(x @ (sys_.matrix @ x)) < 1e-12

    def test_symmetric(self, cube):
        sys_ = assemble_cauchy3d(cube, 2.0, 1.0, SpaceDescriptor("h1", 2, 3))
        assert abs(sys_.matrix - sys_.matrix.T).max() <= 1e-12 * abs(sys_.matrix).max()


class TestL2Error:
    def test_reproduction(self, disk):
        # a polynomial inside the space evaluates to zero error
        from mmfem.assembly import FieldLayout
        u_space = SpaceDescriptor("h1", 2, 2)
        dm = build_dofmap(disk, u_space)
        layout = FieldLayout("u", u_space, dm, 1, 0)
        # interpolate x^2/50 via boundary machinery is overkill; use lstsq fit
        from mmfem.assembly import _h1_ref
        rule, uvals, _ = _h1_ref(2, 2, 6)
        rows, targets = [], []
        x = np.zeros(dm.n_dofs)
        func = lambda pts: np.atleast_2d(pts)[:, 0] ** 2 / 50.0
        big_a = np.zeros((0, dm.n_dofs))
        for c in range(disk.n_cells):
            xq = disk.map_points(c, rule.simplex_points)
            A = np.zeros((len(xq), dm.n_dofs))
            A[:, dm.cell_dofs[c]] = uvals
            rows.append(A)
            targets.append(func(xq))
        A = np.vstack(rows)
        b = np.concatenate(targets)
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        assert l2_error_h1(disk, layout, x, func) <= 1e-10

    def test_constant_field_error(self):
        mesh = generate_box(((0, 1), (0, 1)), 2)
        u_space = SpaceDescriptor("h1", 1, 2)
        from mmfem.assembly import FieldLayout
        dm = build_dofmap(mesh, u_space)
        layout = FieldLayout("u", u_space, dm, 1, 0)
        c = 0.7
        err = l2_error_h1(mesh, layout, np.zeros(dm.n_dofs),
                          lambda pts: np.full(len(np.atleast_2d(pts)), c))
        assert abs(err - c) < 1e-12  # |c| * sqrt(area), area = 1
