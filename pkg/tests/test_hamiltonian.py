from __future__ import annotations

import numpy as np
import pytest

from hjnet import hamiltonian as ham
from hjnet.errors import H4Violated, LevelBelowMin, NotCoercive, QuasiconvexityRequired, ValidationError
from hjnet.hamiltonian import eikonal_power, tabulated, tilted_quadratic

S = np.linspace(0, 1, 100)
P = np.linspace(-5, 5, 100)


class TestEvaluate:
    def test_examples(self):
        assert eikonal_power(1, 1.0)(0.3, 2.0) == pytest.approx(1.0)
        assert tilted_quadratic(1.0, 0.0)(0.5, 1.0) == pytest.approx(0.0)
        assert eikonal_power(2, [0.0, 1.0])(1.0, -2.0) == pytest.approx(3.0)

    def test_interpolated_potential(self):
        h = eikonal_power(1, [0.0, 1.0, 0.0])
        assert h(0.25, 0.0) == pytest.approx(-0.5)
        assert h(0.5, 0.0) == pytest.approx(-1.0)

    def test_tabulated_extrapolates_with_slope(self):
        t = tabulated(np.full((3, 5), -5.0), p_max=2.0, slope=1.0)
        assert t(0.5, 0.0) == pytest.approx(-5.0)
        assert t(0.5, 4.0) == pytest.approx(-3.0)
        assert t(0.5, -6.0) == pytest.approx(-1.0)

    def test_bilinear(self):
        vals = np.array([[0.0, 1.0], [2.0, 3.0]])
        t = tabulated(vals, p_max=1.0)
        assert t(0.5, 0.0) == pytest.approx(1.5)

    @pytest.mark.parametrize("bad", [dict(m=0.5), dict(m=-1)])
    def test_bad_exponent(self, bad):
        with pytest.raises(ValidationError):
            eikonal_power(**bad)


SPECS = [
    eikonal_power(1, [0.5, 2.0]),
    eikonal_power(2.5, [1.0, 0.2, 0.7]),
    tilted_quadratic([0.5, -0.3, 0.2], [0.5, 1.0, 0.2]),
    tabulated(np.add.outer(np.linspace(0, 1, 4), np.linspace(-2, 2, 7) ** 2), p_max=2.0, slope=3.0),
]


class TestReverse:
    @pytest.mark.parametrize("spec", SPECS)
    def test_compatibility(self, spec):
        R = ham.reverse(spec)
        assert np.allclose(R(S[:, None], P[None, :]), spec(1 - S[:, None], -P[None, :]), atol=1e-12, rtol=0)

    @pytest.mark.parametrize("spec", SPECS)
    def test_involution(self, spec):
        RR = ham.reverse(ham.reverse(spec))
        assert np.array_equal(RR(S[:, None], P[None, :]), spec(S[:, None], P[None, :]))

    def test_symbolic_rewrite(self):
        r = ham.reverse(eikonal_power(3, [1.0, 2.0]))
        assert r.family == "eikonal_power" and r.m == 3 and list(r.f) == [2.0, 1.0]
        r = ham.reverse(tilted_quadratic([1.0, 2.0], [0.0, 3.0]))
        assert list(r.b) == [-2.0, -1.0] and list(r.f) == [3.0, 0.0]


class TestCoercivity:
    def test_eikonal(self):
        P = ham.coercivity_radius(eikonal_power(1, 1.0), 0.0)
        assert 1.0 < P <= 2.0

    def test_quadratic(self):
        P = ham.coercivity_radius(tilted_quadratic(0.0, 0.0), 2.0)
        assert P > 2.0 and 0.5 * P**2 > 2.0

    def test_tabulated_flat(self):
        t = tabulated(np.full((3, 5), -5.0), p_max=2.0, slope=1.0)
        P = ham.coercivity_radius(t, 0.0)
        assert t(np.linspace(0, 1, 7), P) .min() > 0
        assert P <= 2 * (0.0 + 5.0 + 2.0)

    def test_not_coercive(self):
        t = tabulated(np.full((3, 5), -5.0), p_max=2.0, slope=1e-9)
        with pytest.raises(NotCoercive):
            ham.coercivity_radius(t, 1.0)

    @pytest.mark.parametrize("spec", SPECS)
    @pytest.mark.parametrize("level", [-1.0, 0.0, 3.0])
    def test_radius_property(self, spec, level):
        P = ham.coercivity_radius(spec, level)
        pp = np.concatenate([np.linspace(P, 4 * P, 50), -np.linspace(P, 4 * P, 50)])
        assert spec(S[:, None], pp[None, :]).min() > level


class TestMinimum:
    def test_power(self):
        p, v = ham.min_in_p(eikonal_power(2, 1.0), 0.3)
        # p**2 is below rounding of the constant for |p| < 1e-8
        assert p == pytest.approx(0.0, abs=1e-7) and v == pytest.approx(-1.0, abs=1e-15)

    def test_tilted(self):
        p, v = ham.min_in_p(tilted_quadratic([0.0, 1.0], 0.0), 0.5)
        assert p == pytest.approx(0.5, abs=1e-9) and v == pytest.approx(0.0, abs=1e-15)

    def test_a_gamma(self):
        assert ham.a_gamma(eikonal_power(1, [1.0, 2.0])) == pytest.approx(-1.0, abs=1e-12)

    def test_tabulated_needs_flag(self):
        t = tabulated(np.full((2, 3), 1.0), p_max=1.0)
        with pytest.raises(QuasiconvexityRequired):
            ham.min_in_p(t, 0.5)
        flagged = tabulated(np.array([[1.0, 0.0, 1.0]] * 2), p_max=1.0, quasiconvex=True)
        assert ham.min_in_p(flagged, 0.5)[1] == pytest.approx(0.0, abs=1e-9)

    def test_constant_minimum(self):
        assert ham.check_constant_minimum(eikonal_power(1, 1.0)) == pytest.approx(-1.0)
        with pytest.raises(H4Violated):
            ham.check_constant_minimum(eikonal_power(1, [1.0, 2.0]))


class TestRoots:
    def test_eikonal(self):
        h = eikonal_power(1, 1.0)
        assert ham.upper_root(h, 0.2, 0.0) == pytest.approx(1.0, abs=1e-10)
        assert ham.lower_root(h, 0.2, 0.0) == pytest.approx(-1.0, abs=1e-10)

    def test_tilted(self):
        h = tilted_quadratic(1.0, 0.0)
        assert ham.upper_root(h, 0.7, 0.5) == pytest.approx(2.0, abs=1e-10)
        assert ham.lower_root(h, 0.7, 0.5) == pytest.approx(0.0, abs=1e-10)

    def test_below_min(self):
        with pytest.raises(LevelBelowMin):
            ham.upper_root(eikonal_power(1, 1.0), 0.5, -2.0)

    @pytest.mark.parametrize("spec", SPECS[:3])
    def test_root_properties(self, spec):
        s = np.linspace(0, 1, 11)
        a = ham.min_in_p(spec, s)[1].max() + 0.7
        up, lo = ham.upper_root(spec, s, a), ham.lower_root(spec, s, a)
        assert np.allclose(spec(s, up), a, atol=1e-9)
        assert np.allclose(spec(s, lo), a, atol=1e-9)
        inner = lo[:, None] + (up - lo)[:, None] * np.linspace(0.01, 0.99, 25)[None, :]
        assert np.all(spec(s[:, None], inner) <= a + 1e-12)

    @pytest.mark.parametrize("spec", SPECS[:3])
    def test_monotone_in_level(self, spec):
        base = ham.min_in_p(spec, 0.4)[1]
        levels = base + np.linspace(0.0, 3.0, 12)
        ups = [ham.upper_root(spec, 0.4, a) for a in levels]
        los = [ham.lower_root(spec, 0.4, a) for a in levels]
        assert np.all(np.diff(ups) >= -1e-12) and np.all(np.diff(los) <= 1e-12)


def test_dict_round_trip():
    for spec in SPECS:
        back = ham.from_dict(spec.to_dict())
        assert np.array_equal(back(S[:, None], P[None, :]), spec(S[:, None], P[None, :]))
