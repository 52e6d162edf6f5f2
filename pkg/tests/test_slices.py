import math

import numpy as np
import pytest

from forelli_lab import (CertificateError, Direction, FormalSeries,
                         NotHolomorphicTypeError, certify_polydisc,
                         chart_poly_family, radius_root_test, slice_series)

from conftest import geometric_product_series, random_series


class TestDirection:
    def test_chart(self):
        d = Direction.from_vector((3.0, 4.0))
        assert abs(np.linalg.norm(d.unit) - 1) <= 1e-12
        assert d.chart == pytest.approx((4.0 / 3.0,))

    def test_chart_excluded_near_zero(self):
        d = Direction.from_vector((1e-12, 1.0))
        assert d.chart is None

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            Direction.from_vector((0.0, 0.0))


class TestSlice:
    def test_linear(self):
        S = (FormalSeries.variable(1, 2, 8)
             + FormalSeries.variable(2, 2, 8))
        sl = slice_series(S, (1.0, 2.0))
        assert sl.coefficient(1, 0) == pytest.approx(3.0)
        assert sl.is_t_only()

    def test_mixed_term(self):
        S = FormalSeries.monomial((1, 0), (0, 1), 1.0, 8)   # z1 zbar2
        sl = slice_series(S, (1.0, 1.0))
        assert sl.coefficient(1, 1) == pytest.approx(1.0)
        assert not sl.is_t_only()

    def test_geometric_coefficients(self):
        # sum over i,j <= 6 of z1^i z2^j along (1, b): t^k picks sum b^j
        S = geometric_product_series(n_max=6, max_order=6)
        b = 0.7 + 0.2j
        sl = slice_series(S, (1.0, b))
        for k in range(7):
            want = sum(b ** j for j in range(k + 1))
            assert sl.coefficient(k, 0) == pytest.approx(want)

    def test_linear_in_series(self, rng):
        A = random_series(rng, 2, 6)
        B = random_series(rng, 2, 6)
        a = (0.3 - 1j, 0.5)
        sa = slice_series(A, a).coeffs + slice_series(B, a).coeffs
        sab = slice_series(A + B, a).coeffs
        assert np.allclose(sa, sab, atol=1e-14)


class TestChartFamily:
    def test_single_variable_term(self):
        S = FormalSeries.variable(1, 2, 8)
        fam = chart_poly_family(S, 8)
        assert fam.polys[1](0.0) == pytest.approx(1.0)
        for k in (0, 2, 3):
            assert not fam.polys[k].coeffs

    def test_pure_second_variable(self):
        S = FormalSeries.monomial((0, 2), (0, 0), 1.0, 8)
        fam = chart_poly_family(S, 8)
        b = 1.3 - 0.4j
        assert fam.polys[2](b) == pytest.approx(b ** 2)

    def test_geometric_regrouping_exact(self):
        # integer data: regrouping equality is exact, not approximate
        S = geometric_product_series(n_max=8, max_order=8)
        fam = chart_poly_family(S, 8)
        b = 2.0
        sl = slice_series(S, (1.0, b))
        for k in range(9):
            assert fam.polys[k](b) == sl.coefficient(k, 0)

    def test_degree_bound(self, rng):
        S = random_series(rng, 3, 8, holomorphic=True)
        fam = chart_poly_family(S, 8)
        for k, p in enumerate(fam.polys):
            assert p.degree <= k

    def test_rejects_zbar_terms(self):
        S = FormalSeries.monomial((1, 0), (0, 1), 1.0, 8)
        with pytest.raises(NotHolomorphicTypeError):
            chart_poly_family(S, 8)

    def test_three_variable_regrouping(self):
        S = FormalSeries(3, 6, {((i, j, k), (0, 0, 0)): 1.0
                                for i in range(7) for j in range(7)
                                for k in range(7) if i + j + k <= 6})
        fam = chart_poly_family(S, 6)
        b = np.array([0.5, 0.25])
        sl = slice_series(S, (1.0, 0.5, 0.25))
        for k in range(7):
            assert fam.polys[k](b) == sl.coefficient(k, 0)

    def test_phase_invariance(self):
        # chart of e^{i theta}(1, b) is the same b; slice moduli agree
        S = geometric_product_series(n_max=6, max_order=6)
        b = 0.8 + 0.1j
        sl1 = np.abs(slice_series(S, (1.0, b)).t_coefficients())
        sl2 = np.abs(slice_series(S, (1j * 1.0, 1j * b)).t_coefficients())
        assert np.max(np.abs(sl1 - sl2)) == 0.0  # multiplication by i is exact
        theta = 0.37
        w = np.exp(1j * theta)
        sl3 = np.abs(slice_series(S, (w, w * b)).t_coefficients())
        assert np.max(np.abs(sl1 - sl3)) <= 1e-12 * np.max(sl1)


class TestRootTest:
    @staticmethod
    def geometric_values(b, K):
        return [abs(sum(b ** j for j in range(k + 1))) for k in range(K + 1)]

    def test_geometric_radius(self):
        rt = radius_root_test(self.geometric_values(2.0, 200), 200)
        assert 0.475 <= rt.radius <= 0.525

    def test_all_zero_tail(self):
        vals = [1.0] + [0.0] * 200
        rt = radius_root_test(vals, 200)
        assert rt.radius == math.inf

    def test_factorial_family_matches_stirling(self):
        # |P_k| = k!; largest K whose factorial still fits a double is 170
        K = 150
        vals = [1.0] + [float(math.factorial(k)) for k in range(1, K + 1)]
        rt = radius_root_test(vals, K)
        stirling = math.exp(-math.lgamma(K + 1) / K)
        assert rt.radius < 0.05
        assert rt.radius == pytest.approx(stirling, rel=1e-9)

    def test_window_preconditions(self):
        with pytest.raises(ValueError):
            radius_root_test([1.0] * 8, 7, window=4)
        with pytest.raises(ValueError):
            radius_root_test([1.0] * 201, 200, window=3)

    def test_scaling_shifts_log_rate_boundedly(self):
        # replacing S by c S moves each (1/k) log term by log|c|/k
        K, c = 200, 10.0
        base = self.geometric_values(2.0, K)
        scaled = [c * v for v in base]
        r1 = radius_root_test(base, K)
        r2 = radius_root_test(scaled, K)
        k_min = K - r1.window + 1
        assert abs(r2.log_rate - r1.log_rate) <= math.log(c) / k_min + 1e-12


class TestCertificate:
    def test_geometric_product(self):
        S = geometric_product_series(n_max=12, max_order=12)
        cert = certify_polydisc(S, 0.5, 12)
        # sup |P_k(b)|^(1/k) over |b| <= 1 is (k+1)^(1/k), max 2 at k=1
        assert cert.M == pytest.approx(2.0, rel=1e-9)
        assert cert.r_prime[0] == pytest.approx(1.0 / (2 * cert.M))
        assert cert.r_prime[1] == pytest.approx(0.5 / (2 * cert.M))

    def test_single_term(self):
        S = FormalSeries.variable(1, 2, 8)
        cert = certify_polydisc(S, 0.5, 8)
        assert cert.M == pytest.approx(1.05)
        assert cert.r_prime == pytest.approx((1 / 2.1, 0.5 / 2.1))

    def test_rejects_zbar(self):
        S = FormalSeries.monomial((0, 0), (1, 0), 1.0, 8)
        with pytest.raises(NotHolomorphicTypeError):
            certify_polydisc(S, 0.5, 8)

    def test_refusal_on_undersampling(self):
        # (z2 - z1)^6 has its chart maximum away from the single sampled
        # boundary point, so the Cauchy check catches the understated M
        one = FormalSeries.constant(1.0, 2, 8)
        S = (FormalSeries.variable(2, 2, 8) - FormalSeries.variable(1, 2, 8)) ** 6
        with pytest.raises(CertificateError):
            certify_polydisc(S, 0.5, 8, sample_count=0, angular_grid=1,
                             margin=0.0)

    def test_tail_bound_soundness(self, rng):
        # partial sums at points of 0.9 r' obey the k^n 2^-k block bound
        S = geometric_product_series(n_max=12, max_order=12)
        cert = certify_polydisc(S, 0.5, 12)
        n = S.n
        for _ in range(20):
            rad = 0.9 * np.array(cert.r_prime) * np.sqrt(rng.random(n))
            z = rad * np.exp(2j * np.pi * rng.random(n))
            absz = np.abs(z)
            for k in range(1, 13):
                total = sum(abs(c) * float(np.prod(absz ** np.array(I)))
                            for (I, _J), c in S.terms_of_order(k).items())
                assert total < k ** n * 2.0 ** (-k)

    def test_determinism(self):
        S = geometric_product_series(n_max=10, max_order=10)
        a = certify_polydisc(S, 0.5, 10, seed=7)
        b = certify_polydisc(S, 0.5, 10, seed=7)
        assert a.M == b.M and a.r_prime == b.r_prime
