import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grovlab import conjlab as cj
from grovlab import groverian as gv
from grovlab.protocols import teleport_feasible

from conftest import SQ2, ket

# ---------------------------------------------------------------- families


class TestFamilies:
    def test_ghz(self):
        s = cj.family_state(cj.FamilySpec("ghz"))
        assert np.allclose(s.amplitudes, (ket("000") + ket("111")) / SQ2)

    def test_w1(self):
        s = cj.family_state(cj.FamilySpec("W1"))
        assert np.allclose(s.amplitudes, (ket("100") + ket("010") + SQ2 * ket("001")) / 2)

    def test_four_term_limit_is_w1(self):
        a = cj.family_state(cj.FamilySpec("four-term", {"a": 1 / SQ2, "b": 0.5})).amplitudes
        b = cj.family_state(cj.FamilySpec("w1")).amplitudes
        assert np.abs(a - b).max() <= 1e-15

    def test_ghz_like_limit_is_ghz(self):
        a = cj.family_state(cj.FamilySpec("ghz_like", {"a": 1 / SQ2, "b": 0})).amplitudes
        b = cj.family_state(cj.FamilySpec("ghz")).amplitudes
        assert np.abs(a - b).max() <= 1e-15

    def test_phi_default_is_ghz(self):
        a = cj.family_state(cj.FamilySpec("phi")).amplitudes
        assert np.allclose(a, (ket("000") + ket("111")) / SQ2)

    @pytest.mark.parametrize(
        "family,params",
        [
            ("four_term", {"a": 0.8, "b": 0.1}),
            ("ghz_like", {"a": 0.6, "b": 0.5}),
            ("gw", {"a": 0.5, "b": 0.5, "c": 0.5}),
            ("gw", {"a": -0.6, "b": 0.8, "c": 0.0}),
        ],
    )
    def test_out_of_domain(self, family, params):
        with pytest.raises(ValueError):
            cj.family_state(cj.FamilySpec(family, params))

    def test_bad_params(self):
        with pytest.raises(ValueError):
            cj.FamilySpec("four_term", {"a": 0.1})
        with pytest.raises(ValueError):
            cj.FamilySpec("ghz", {"a": 0.1})
        with pytest.raises(ValueError):
            cj.FamilySpec("nope")


class TestAnalytic:
    def test_values(self):
        assert cj.analytic_pmax(cj.FamilySpec("w"))[0] == pytest.approx(4 / 9, abs=1e-15)
        assert cj.analytic_pmax(cj.FamilySpec("w1"))[0] == pytest.approx(0.5, abs=1e-15)
        assert cj.analytic_pmax(cj.FamilySpec("four_term", {"a": 0.3, "b": 0.4})) == (pytest.approx(0.5), "quadrangle")
        assert cj.analytic_pmax(cj.FamilySpec("four_term", {"a": 0.0, "b": 0.0})) == (None, "degenerate")
        assert cj.analytic_pmax(cj.FamilySpec("ghz_like", {"a": 0.5, "b": 0.3}))[0] == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------- scans


class TestScan:
    def test_grid_sizes(self):
        assert len(cj.family_grid("four_term", 21)) == 441
        assert len(cj.family_grid("phi", 3)) == 27
        assert len(cj.family_grid("ghz", 21)) == 1
        with pytest.raises(ValueError):
            cj.family_grid("gw", 0)

    def test_endpoints_kept(self):
        pts = cj.family_grid("four_term", 3)
        assert pts[0].params == {"a": 0.0, "b": 0.0}
        assert pts[-1].params["a"] == pytest.approx(1 / SQ2)

    def test_gw_corners(self):
        recs = cj.scan_family("gw", 2)
        assert len(recs) == 4
        for r in recs:
            assert r.branch == "vertex"
            assert r.pmax_numeric == pytest.approx(max(r.params.values()) ** 2, abs=1e-12)

    def test_explicit_grid(self):
        recs = cj.scan_family("four_term", [{"a": 0.2, "b": 0.3}, {"a": 0.5, "b": 0.1}])
        assert [r.params["a"] for r in recs] == [0.2, 0.5]

    def test_empty(self):
        with pytest.raises(ValueError):
            cj.scan_family("four_term", [])

    def test_deterministic(self):
        a = [r.flat() for r in cj.scan_family("ghz_like", 4, seed=3)]
        b = [r.flat() for r in cj.scan_family("ghz_like", 4, seed=3)]
        assert a == b

    def test_four_term_scan(self):
        recs = cj.scan_family("four_term", 11)
        for r in recs:
            assert abs(r.pmax_numeric - 0.5) < 1e-7
            assert r.any_teleport
            if r.pmax_analytic is not None:
                assert abs(r.pmax_analytic - r.pmax_numeric) < 1e-7

    def test_ghz_like_scan(self):
        for r in cj.scan_family("ghz_like", 11):
            assert abs(r.pmax_numeric - 0.5) < 1e-7 and r.any_teleport
            if r.pmax_analytic is not None:
                assert abs(r.pmax_analytic - r.pmax_numeric) < 1e-7

    def test_gw_necessary_direction(self):
        for r in cj.scan_family("gw", 11):
            if abs(r.pmax_numeric - 0.5) >= 1e-6:
                assert not r.any_teleport
            assert abs(r.pmax_analytic - r.pmax_numeric) < 1e-7

    def test_phi_records_overlap(self):
        recs = cj.scan_family("phi", 3)
        for r in recs:
            assert "q_overlap" in r.extra
            assert abs(r.pmax_numeric - 0.5) < 1e-7
            assert r.teleport[0] and r.teleport[1]
            assert r.teleport[2] == (r.extra["q_overlap"] < 1e-9)


class TestRandomSearch:
    def test_feasible_sampler(self, rng):
        for _ in range(20):
            s, bob = cj.random_feasible_state(rng)
            assert teleport_feasible(s, bob)

    def test_search(self):
        recs = cj.counterexample_search(200, seed=1)
        rep = cj.conjecture_report(recs)
        assert rep["necessary_violations"] == 0
        assert rep["teleport_feasible"] >= 100
        assert rep["max_feasible_deviation_from_half"] < 1e-7


# ---------------------------------------------------------------- singular states


class TestSingular:
    def test_classes(self):
        s = 1 / math.sqrt(3)
        c = cj.classify_singular(s, s, s)
        assert c.cls == "inside" and c.p_max == pytest.approx(4 / 9)
        c = cj.classify_singular(1 / SQ2, 0.5, 0.5)
        assert c.cls == "on-circle" and c.p_max == pytest.approx(0.5)
        b = math.sqrt(0.19 / 2)
        c = cj.classify_singular(0.9, b, b)
        assert c.cls == "outside" and c.p_max == pytest.approx(0.81)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, math.pi / 2), st.floats(0, math.pi / 2))
    def test_class_tracks_branch(self, th, ph):
        a, b, c = math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)
        n = math.sqrt(a * a + b * b + c * c)
        a, b, c = a / n, b / n, c / n
        cls = cj.classify_singular(a, b, c)
        _, branch = gv.pmax_generalized_w(a, b, c)
        assert (cls.cls == "outside") == (branch == "vertex")
        assert cls.branch == branch
        if cls.cls == "inside":
            assert cls.p_max <= 0.5 + 1e-12
        if cls.cls == "outside":
            assert cls.p_max >= 0.5 - 1e-12


class TestKappa:
    def test_crossings(self):
        sw = cj.kappa_sweep(0.5, 1.3, 161)
        ks = sorted(c.kappa for c in sw.crossings)
        assert ks[0] == pytest.approx(cj.KAPPA_STAR, abs=1e-12)
        assert ks[0] ** 4 + ks[0] ** 2 == pytest.approx(1, abs=1e-12)
        assert ks[1] == pytest.approx(math.sqrt((1 + math.sqrt(5)) / 2), abs=1e-12)
        assert len(sw.points) == 161

    def test_continuity_and_curvature(self):
        c = cj.analyse_crossing(cj.KAPPA_STAR)
        assert c.continuous and c.p_at == pytest.approx(0.5, abs=1e-12)
        # first derivative matches across the cone; the second does not
        assert c.deriv_left == pytest.approx(-0.878943961, abs=1e-5)
        assert c.second_jump > 10

    def test_errors(self):
        with pytest.raises(ValueError):
            cj.kappa_sweep(0, 1, 10)
        with pytest.raises(ValueError):
            cj.kappa_sweep(0.5, 1, 2)


# ---------------------------------------------------------------- report


class TestReport:
    def test_single_ghz(self):
        rep = cj.conjecture_report(cj.scan_family("ghz", 21))
        assert rep["summary"] == "1 point, 0 violations"

    def test_violation_listing(self):
        rec = cj.ScanRecord("x", {"p": 1.0}, 0.4, None, "", (True, False, False), (True, False, False), False, True)
        rep = cj.conjecture_report([rec])
        assert rep["necessary_violations"] == 1
        assert rep["necessary_violation_params"] == [{"family": "x", "p": 1.0, "pmax": 0.4}]

    def test_empty(self):
        with pytest.raises(ValueError):
            cj.conjecture_report([])
