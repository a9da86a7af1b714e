import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from todalab.initial_data import (
    NAMES,
    SOLITON_DIRECTION,
    InitialDataKind,
    calibrate_direction,
    exact_soliton,
    make_id,
    soliton_profile,
    soliton_speed,
)
from todalab.integrators import evolve
from todalab.lattice import IndexWindow, LatticeStateAB, rhs_ab
from todalab.metrics import relative_error, soliton_region
from todalab.spectral import id_spectrum

W = IndexWindow.symmetric(60)


def at(state, n):
    i = state.window.offset(n)
    return state.a[i], state.b[i]


def hand_soliton(n, kappa=0.4):
    """Direct transcription of the closed form with plain math calls."""
    X = lambda m: math.exp(-2 * kappa * m)  # noqa: E731
    ratio = math.sqrt((1 + X(n - 1)) * (1 + X(n + 1))) / (1 + X(n))
    b = (math.exp(-kappa) - math.exp(kappa)) / 2 * (X(n) / (1 + X(n)) - X(n - 1) / (1 + X(n - 1)))
    return ratio, b


class TestKind:
    def test_parse(self):
        assert InitialDataKind.parse("pures:0.3") == InitialDataKind("PureS", 0.3)
        assert InitialDataKind.parse("double").kappa == 0.4
        assert str(InitialDataKind("PureS", 0.3)) == "PureS:0.3"
        assert str(InitialDataKind("PureS")) == "PureS"

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            InitialDataKind("triple")
        with pytest.raises(ValueError):
            InitialDataKind("PureS", 0.0)


class TestValuesAtOrigin:
    def test_nos(self):
        assert at(make_id("NoS", W), 0) == (0.25, 0.1)

    def test_quad(self):
        assert at(make_id("quad", W), 0) == (0.5, 0.0)

    def test_double(self):
        a, b = at(make_id("double", W), 1)
        assert a == pytest.approx(0.5 + 0.8 * math.exp(-1), rel=1e-15)
        assert b == pytest.approx(0.1 / math.cosh(1), rel=1e-15)

    def test_quad_kink(self):
        a, b = at(make_id("quad", W), 1)
        assert a == pytest.approx(0.5, rel=1e-15)
        a2, _ = at(make_id("quad", W), 2)
        assert a2 == pytest.approx(0.5 - 2 * math.exp(-2), rel=1e-14)
        assert b == pytest.approx(1 / math.cosh(1), rel=1e-15)

    def test_dirac(self):
        s = make_id("dirac", W)
        assert np.all(s.a == 0.5)
        assert at(s, 0)[1] == 4.0
        assert np.count_nonzero(s.b) == 1

    def test_pures_travelling_form(self):
        a, b = at(make_id("PureS", W), 0)
        ratio, b_hand = hand_soliton(0)
        assert a == pytest.approx(ratio / 2, rel=1e-15)
        assert a == pytest.approx(0.5405362, abs=1e-7)
        assert b == pytest.approx(b_hand, rel=1e-14)
        assert b == pytest.approx(0.0780325, abs=1e-7)

    def test_pures_printed_form(self):
        a, b = soliton_profile(0.0, verbatim=True)
        assert a == pytest.approx(1 - hand_soliton(0)[0] / 2, rel=1e-15)
        assert a == pytest.approx(0.4594631, abs=1e-6)

    @pytest.mark.parametrize("n", [-7, -2, 1, 3, 9])
    def test_pures_matches_hand_formula(self, n):
        a, b = at(make_id("PureS", W), n)
        ratio, b_hand = hand_soliton(n)
        assert a == pytest.approx(ratio / 2, rel=1e-14)
        assert b == pytest.approx(b_hand, rel=1e-12, abs=1e-17)

    def test_printed_form_has_no_bound_state(self):
        n = W.sites.astype(float)
        a, b = soliton_profile(n, verbatim=True)
        from todalab.spectral import build_jacobi, eigenvalues_outside_band
        state = LatticeStateAB(W, a, b)
        assert eigenvalues_outside_band(build_jacobi(state, 60)) == []

    def test_time_is_zero(self):
        assert make_id("quad", W).time == 0.0


class TestShape:
    @pytest.mark.parametrize("name", NAMES)
    def test_decay(self, name):
        s = make_id(name, IndexWindow.symmetric(200))
        far = np.abs(s.window.sites) >= 40
        assert np.all(np.abs(s.a[far] - 0.5) + np.abs(s.b[far]) <= 1e-13)

    @pytest.mark.parametrize("name", NAMES)
    def test_finite_on_wide_window(self, name):
        s = make_id(name, IndexWindow.symmetric(3000))
        assert np.all(np.isfinite(s.flat()))

    def test_pures_profile(self):
        s = make_id("PureS", W)
        assert np.all(s.a >= 0.5 - 1e-14)
        assert s.window.sites[np.argmax(s.a)] == 0

    @pytest.mark.parametrize("name", NAMES)
    def test_positive_a(self, name):
        assert np.all(make_id(name, W).a > 0)


class TestExactSoliton:
    def test_agrees_with_id_at_zero(self):
        a, b = exact_soliton(0.4, W.sites, 0.0)
        s = make_id("PureS", W)
        assert np.array_equal(a, s.a) and np.array_equal(b, s.b)

    def test_scalar(self):
        a, b = exact_soliton(0.4, 0, 0.0)
        assert isinstance(a, float)

    def test_speed(self):
        assert soliton_speed(0.4) == pytest.approx(math.sinh(0.4) / 0.4, rel=1e-15)
        assert soliton_speed(0.4) == pytest.approx(1.0268808, abs=1e-7)

    @settings(max_examples=40, deadline=None)
    @given(t=st.floats(0.0, 500.0))
    def test_background_far_from_centre(self, t):
        centre = SOLITON_DIRECTION * soliton_speed(0.4) * t
        n = np.concatenate([np.arange(-60, -39), np.arange(40, 61)]) + math.floor(centre)
        a, b = exact_soliton(0.4, n, t)
        assert np.all(np.abs(a - 0.5) <= 1e-13) and np.all(np.abs(b) <= 1e-13)

    @settings(max_examples=40, deadline=None)
    @given(t=st.floats(0.0, 100.0), kappa=st.floats(0.1, 2.0))
    def test_travelling_identity(self, t, kappa):
        n = np.arange(-30, 31)
        s = soliton_speed(kappa)
        later = exact_soliton(kappa, n, t + 1.0 / s)
        shifted = exact_soliton(kappa, n - SOLITON_DIRECTION, t)
        np.testing.assert_allclose(later[0], shifted[0], rtol=0, atol=1e-12)
        np.testing.assert_allclose(later[1], shifted[1], rtol=0, atol=1e-12)

    @pytest.mark.parametrize("t", [0.0, 3.7, 25.0])
    def test_solves_lattice_equations(self, t):
        # centred difference in time against the right-hand side
        w = IndexWindow.symmetric(80)
        n = w.sites
        dt = 1e-4
        a_p, b_p = exact_soliton(0.4, n, t + dt)
        a_m, b_m = exact_soliton(0.4, n, t - dt)
        da, db = rhs_ab(LatticeStateAB(w, *exact_soliton(0.4, n, t)))
        np.testing.assert_allclose((a_p - a_m) / (2 * dt), da, rtol=0, atol=1e-8)
        np.testing.assert_allclose((b_p - b_m) / (2 * dt), db, rtol=0, atol=1e-8)

    def test_direction_calibration(self):
        assert calibrate_direction() == SOLITON_DIRECTION == -1

    @pytest.mark.slow
    def test_long_run_against_rk4(self):
        t = 50.0
        window = IndexWindow.symmetric(200)
        end = evolve(make_id("PureS", window), "rk4", 1e-3, t)
        region = soliton_region(t, id_spectrum("PureS").s_max)
        a_ref, b_ref = exact_soliton(0.4, region.indices, t)
        sub = end.restrict(region.window)
        assert relative_error(sub.a, a_ref, 0.5) <= 1e-5

    def test_rejects_nonpositive_kappa(self):
        with pytest.raises(ValueError):
            exact_soliton(-0.4, 0, 0.0)
