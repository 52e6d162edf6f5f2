import numpy as np
import pytest

from forelli_lab import (DegenerateNormalizationError, KData,
                         PencilCheckError, check_holo_along_pencil,
                         compute_H_G, disc_holo_residual, find_subpencil,
                         parse, pencil_from_exprs, sphere_directions,
                         standard_pencil, standard_subpencil_radius,
                         tilde_normalize)
from forelli_lab.pencil import wirtinger_dbar

TWIST = ["l*u1", "l*u2 + l^2*conj(u1)*u2"]


@pytest.fixture(scope="module")
def sphere150():
    return sphere_directions(2, 150, seed=7)


@pytest.fixture(scope="module")
def twisted(sphere150):
    return pencil_from_exprs(2, TWIST, sphere150)


@pytest.fixture(scope="module")
def standard(sphere150):
    return standard_pencil(2, sphere150)


class TestStandardPencil:
    def test_single_disc(self):
        P = standard_pencil(2, [(1.0, 0.0)])
        lam = np.array([0.5j, -0.25])
        pts = P.disc(lam, 0)
        assert np.allclose(pts[:, 0], lam)
        assert np.allclose(pts[:, 1], 0.0)

    def test_normalization_warning(self):
        with pytest.warns(UserWarning, match="normaliz"):
            P = standard_pencil(2, [(2.0, 0.0)])
        assert np.allclose(np.linalg.norm(P.directions, axis=1), 1.0)

    def test_empty_rejected(self):
        with pytest.raises(PencilCheckError):
            standard_pencil(2, np.zeros((0, 2)))


class TestDiscResidual:
    def test_polynomial_clean(self):
        assert disc_holo_residual(lambda lam: lam ** 3, 0.9) <= 1e-12

    def test_conjugate_is_dirty(self):
        assert disc_holo_residual(np.conj, 1.0) == pytest.approx(1.0)
        assert disc_holo_residual(np.conj, 0.9) >= 0.5

    def test_small_antiholomorphic_component(self):
        res = disc_holo_residual(lambda lam: lam ** 2 + 0.01 * np.conj(lam),
                                 1.0)
        assert res == pytest.approx(0.01, rel=1e-6)

    def test_soundness_sweep(self, rng):
        for _ in range(20):
            deg = int(rng.integers(0, 9))   # <= modes/2 with modes = 16
            coef = rng.standard_normal(deg + 1) \
                + 1j * rng.standard_normal(deg + 1)
            g = lambda lam: np.polynomial.polynomial.polyval(lam, coef)
            assert disc_holo_residual(g, 0.8, modes=16) <= 1e-10


class TestCheckAlongPencil:
    def test_entire_function_on_twisted(self, twisted):
        res = check_holo_along_pencil(parse("exp(z1+z2)"), twisted, tol=1e-9)
        assert res.passed
        assert res.worst() <= 1e-9

    def test_conjugate_fails(self, standard):
        res = check_holo_along_pencil(parse("conj(z1)"), standard, tol=1e-8)
        assert not res.passed
        assert res.worst() >= 0.5

    def test_line_holomorphic_counterexample(self, standard):
        f = parse("z1^2*z2*conj(z1)/normsq(z)")
        res = check_holo_along_pencil(f, standard, tol=1e-8)
        assert res.passed

    def test_composition_closure(self, twisted):
        f = parse("exp(z1+z2)")
        base = check_holo_along_pencil(f, twisted, tol=1e-9).worst()
        sq = check_holo_along_pencil(parse("exp(z1+z2)^2"), twisted,
                                     tol=1e-9).worst()
        aff = check_holo_along_pencil(parse("3*exp(z1+z2)+i"), twisted,
                                      tol=1e-9).worst()
        assert sq <= base + 1e-9
        assert aff <= base + 1e-9


class TestPencilValidation:
    def test_base_point_violation(self, sphere150):
        with pytest.raises(PencilCheckError, match="base point"):
            pencil_from_exprs(2, ["l*u1 + 0.1", "l*u2"], sphere150[:40])

    def test_antiholomorphic_disc_rejected(self, sphere150):
        with pytest.raises(PencilCheckError, match="residual"):
            pencil_from_exprs(2, ["l*u1", "conj(l)*u2"], sphere150[:40])

    def test_collapsed_map_rejected(self, sphere150):
        with pytest.raises(PencilCheckError, match="injectivity"):
            pencil_from_exprs(2, ["0*l*u1", "0*l*u2"], sphere150[:40])


class TestTildeNormalize:
    def test_standard_gives_product(self, standard):
        kd = tilde_normalize(standard, (1.0, 0.0), eps=0.4)
        w = 0.3 * np.exp(2j * np.pi * np.arange(16) / 16)
        for z2 in (0.1, -0.07 + 0.12j):
            assert np.abs(kd.k(w, z2) - w * z2).max() <= 1e-10

    def test_twisted_quadratic_correction(self, twisted):
        kd = tilde_normalize(twisted, (1.0, 0.0), eps=0.4)
        w = np.array([0.05 - 0.2j, 0.18, 0.1j])
        z2 = 0.11 - 0.03j
        want = w * z2 + w ** 2 * z2
        assert np.abs(kd.k(w, z2) - want).max() <= 1e-10
        assert kd.checks["max_abs_k0"] <= 1e-8
        assert kd.checks["max_slope_defect"] <= 1e-6

    def test_rotated_base_direction(self, twisted):
        # normalization must work at any chart direction, not just e1
        v0 = np.array([1.0, 0.3]) / np.linalg.norm([1.0, 0.3])
        kd = tilde_normalize(twisted, v0, eps=0.3)
        assert kd.checks["max_holo_residual"] <= 1e-8

    def test_dimension_restriction(self):
        P = standard_pencil(3, sphere_directions(3, 40, seed=1))
        with pytest.raises(ValueError, match="n = 2"):
            tilde_normalize(P, (1.0, 0.0, 0.0))

    def test_single_disc_pencil(self):
        # the map extends analytically to any direction, so a one-disc
        # pencil still normalizes (resolution is degenerate, no crash)
        P = standard_pencil(2, [(1.0, 0.0)])
        kd = tilde_normalize(P, (0.8, 0.6), eps=0.3)
        assert kd.checks["max_abs_k0"] <= 1e-8
        assert kd.checks["max_slope_defect"] <= 1e-6

    def test_far_direction_warns(self):
        from forelli_lab import cap_directions
        P = standard_pencil(2, cap_directions(2, 0.2, 100, seed=3))
        with pytest.warns(UserWarning, match="extrapolated"):
            tilde_normalize(P, (0.0, 1.0), eps=0.2)


class TestComputeHG:
    @staticmethod
    def ring(lo=0.05, hi=0.45, n_r=5, n_t=16):
        rr = np.linspace(lo, hi, n_r)
        tt = np.exp(2j * np.pi * np.arange(n_t) / n_t)
        return (rr[:, None] * tt[None, :]).ravel()

    def test_product_function_on_standard(self, standard):
        kd = tilde_normalize(standard, (1.0, 0.0))
        hg = compute_H_G(parse("z1*z2"), kd, self.ring(), tol_G=1e-8)
        assert hg.passed
        assert np.allclose(hg.H, -np.abs(self.ring()) ** 2, atol=1e-8)

    def test_antiholomorphic_fails(self, standard):
        kd = tilde_normalize(standard, (1.0, 0.0))
        hg = compute_H_G(parse("conj(z2)"), kd, self.ring(), tol_G=1e-6)
        assert not hg.passed
        # G = H * df/dwbar with df/dwbar = 1
        assert np.allclose(np.abs(hg.G), np.abs(self.ring()) ** 2, atol=1e-8)

    def test_entire_function_on_twisted(self, twisted):
        kd = tilde_normalize(twisted, (1.0, 0.0))
        hg = compute_H_G(parse("exp(z1+z2)"), kd, self.ring(), tol_G=1e-7)
        assert hg.passed
        assert hg.max_abs_G <= 1e-7
        assert hg.min_abs_H > 0

    def test_degenerate_normalization_detected(self):
        # k(w, z2) = w * re(z2) has equal Wirtinger halves, so H = 0
        kd = KData(v0=np.array([1.0, 0.0]), rotation=np.eye(2), eps=0.4,
                   k=lambda w, z2: np.asarray(w) * np.real(z2))
        with pytest.raises(DegenerateNormalizationError):
            compute_H_G(parse("z1*z2"), kd, self.ring())

    def test_agreement_with_direct_wirtinger(self, twisted):
        # whenever the H/G route passes, raw Wirtinger residuals on the
        # v0-disc are small too
        kd = tilde_normalize(twisted, (1.0, 0.0))
        tol_G = 1e-6
        hg = compute_H_G(parse("exp(z1+z2)"), kd, self.ring(), tol_G=tol_G)
        assert hg.passed
        lam = self.ring()
        pts = twisted.map_batch(lam, np.broadcast_to(
            np.array([1.0, 0.0]), lam.shape + (2,)))
        func = lambda z: np.exp(z[0] + z[1])
        dbar = np.abs(wirtinger_dbar(func, pts)).max()
        assert dbar <= 10 * tol_G


def bump_function(center, radius):
    """Smooth (C^inf) bump supported in the ball around ``center``."""
    c = np.asarray(center, dtype=complex)
    r2 = radius ** 2

    def f(z):
        d2 = sum(np.abs(np.asarray(z[k]) - c[k]) ** 2 for k in range(len(c)))
        d2 = np.minimum(np.asarray(d2, dtype=float), r2)
        out = np.zeros(np.shape(d2))
        inside = d2 < r2 * (1 - 1e-9)
        out = np.where(inside, np.exp(-d2 / np.maximum(r2 - d2, 1e-300)), 0.0)
        return out + 0j
    return f


class TestFindSubpencil:
    def test_holomorphic_full_patch(self, twisted):
        sp = find_subpencil(parse("exp(z1+z2)"), twisted, tol=1e-6, ell_max=4)
        assert sp.m == 1
        assert sp.direction_indices.size == twisted.num_directions

    def test_conjugate_empty(self, standard):
        sp = find_subpencil(parse("conj(z1)"), standard, tol=1e-6, ell_max=4)
        assert sp.empty
        assert np.all(sp.ell_star == 0)
        assert sp.residual_table.shape == (standard.num_directions, 4)

    def test_bump_fixture_recovers_clean_half(self, sphere150):
        # exp + a bump near (0, 0.5): directions with |u1| > 0.6 have cones
        # disjoint from the support, so their residuals stay clean at m = 1
        P = standard_pencil(2, sphere150)
        f_holo = parse("exp(z1+z2)")
        bump = bump_function((0.0, 0.5), 0.15)
        f = lambda z: f_holo(z) + bump(z)
        sp = find_subpencil(f, P, tol=1e-6, ell_max=8)
        assert not sp.empty
        assert sp.m == 1
        abs_u1 = np.abs(sphere150[:, 0])
        clean = set(np.nonzero(abs_u1 > 0.75)[0].tolist())
        dirty = set(np.nonzero(abs_u1 < 0.35)[0].tolist())
        got = set(sp.direction_indices.tolist())
        interior_clean = {i for i in clean
                          if all(abs_u1[j] > 0.65 for j in P.neighbors[i])}
        assert interior_clean <= got
        assert not (dirty & got)

    def test_tolerance_monotonicity(self, sphere150):
        P = standard_pencil(2, sphere150)
        f_holo = parse("exp(z1+z2)")
        bump = bump_function((0.0, 0.5), 0.15)
        f = lambda z: f_holo(z) + bump(z)
        tight = find_subpencil(f, P, tol=1e-8, ell_max=8)
        loose = find_subpencil(f, P, tol=1e-4, ell_max=8)
        assert set(tight.direction_indices) <= set(loose.direction_indices)


class TestSubpencilRadius:
    def test_standard_full_radius(self, standard):
        r = standard_subpencil_radius(standard, np.arange(25), mesh=400)
        assert r == 1.0

    def test_twisted_positive_radius(self, twisted):
        r = standard_subpencil_radius(twisted, np.arange(25), mesh=400)
        assert r >= 0.1

    def test_boundary_margin_precondition(self, sphere150):
        P = standard_pencil(2, sphere150)
        V = list(range(40))              # a strict direction subset
        with pytest.raises(PencilCheckError, match="boundary"):
            standard_subpencil_radius(P, [39], V=V, mesh=50)
