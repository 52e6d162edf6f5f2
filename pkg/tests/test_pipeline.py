import pytest

from forelli_lab import (AnalyzeConfig, FormalSeries, cap_directions,
                         forelli_analyze, parse, sphere_directions)


class TestEntireFunction:
    def test_cap_directions_full_pass(self):
        U = cap_directions(2, 0.3, 200, seed=5)
        rep = forelli_analyze(parse("exp(z1+z2)"), U)
        assert rep.passed
        assert rep.stage("jet").details["verdict"] == "FullJet"
        assert rep.stage("holomorphic_type").status == "pass"
        radii = [e["R_estimate"] for e in rep.per_direction]
        assert all(r is not None and r >= 0.9 for r in radii)
        assert rep.certificate is not None
        assert rep.certificate.r_prime[0] > 0
        assert "Hartogs" in rep.final_verdict


class TestCounterexample:
    def test_hypothesis_one_failure_reported(self):
        U = sphere_directions(2, 200, seed=6)
        cfg = AnalyzeConfig(order=4)
        rep = forelli_analyze(parse("z1^2*z2*conj(z1)/normsq(z)"), U, cfg)
        assert not rep.passed
        assert rep.stage("disc_holomorphy").status == "pass"
        assert rep.stage("jet").status == "fail"
        assert rep.stage("jet").details["verdict"] == "JetUpTo(1)"
        assert "hypothesis (1) fails" in rep.final_verdict


class TestSeriesInput:
    def test_non_holomorphic_type_halts(self):
        S = (FormalSeries.variable(1, 2, 8)
             + FormalSeries.monomial((1, 0), (0, 1), 1.0, 8))
        U = sphere_directions(2, 150, seed=8)
        rep = forelli_analyze(S, U)
        assert not rep.passed
        assert rep.stage("disc_holomorphy").status == "skipped"
        assert rep.stage("jet").status == "skipped"
        ht = rep.stage("holomorphic_type")
        assert ht.status == "fail"
        assert ht.details["witness"]["I"] == [1, 0]
        assert ht.details["witness"]["J"] == [0, 1]
        # everything downstream is skipped
        for name in ("chart_family", "directional_radii",
                     "direction_capacity", "certificate"):
            assert rep.stage(name).status == "skipped"

    def test_holomorphic_series_passes(self):
        S = FormalSeries(2, 10, {((i, j), (0, 0)): 1.0
                                 for i in range(11) for j in range(11 - i)})
        U = cap_directions(2, 0.4, 200, seed=9)
        rep = forelli_analyze(S, U)
        assert rep.passed
        assert rep.certificate.M == pytest.approx(2.0, rel=1e-6)


class TestReportShape:
    def test_to_dict_is_json_ready(self):
        import json
        from forelli_lab.report import sanitize
        U = cap_directions(2, 0.3, 120, seed=5)
        rep = forelli_analyze(parse("exp(z1+z2)"), U,
                              AnalyzeConfig(order=8))
        payload = sanitize(rep.to_dict())
        text = json.dumps(payload, sort_keys=True, allow_nan=False)
        assert "stages" in json.loads(text)
