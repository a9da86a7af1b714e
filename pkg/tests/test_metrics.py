import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from todalab.lattice import IndexWindow
from todalab.metrics import (
    DegenerateReferenceError,
    ErrorReport,
    RegionSpec,
    absolute_error,
    dispersive_region,
    region_for,
    relative_error,
    soliton_region,
    sorted_norm,
)

finite = st.floats(-1e6, 1e6)
vectors = arrays(float, st.integers(1, 60), elements=finite)
fractions = st.floats(0.01, 0.99)


def oracle_sorted_norm(x, d):
    """Plain-Python reference: sort, take the head, overflow-safe hypot."""
    mags = sorted((abs(float(v)) for v in x), reverse=True)
    k = math.ceil(round(d * len(mags), 9))
    return math.hypot(*mags[:k])


class TestSortedNorm:
    def test_top_entry(self):
        x = np.random.default_rng(3).permutation(np.arange(1.0, 11.0))
        assert sorted_norm(x, 0.1) == 10.0

    def test_top_three(self):
        assert sorted_norm(np.arange(1.0, 11.0), 0.3) == pytest.approx(math.sqrt(245), rel=1e-15)
        assert sorted_norm(np.arange(1.0, 11.0), 0.3) == pytest.approx(15.6524758, abs=1e-7)

    def test_zero(self):
        assert sorted_norm(np.zeros(17), 0.4) == 0.0

    def test_region_head_count(self):
        # 101 sites at d = 0.1 keep 11 entries
        x = np.arange(101.0)
        assert sorted_norm(x) == pytest.approx(math.sqrt(sum(v * v for v in range(90, 101))))

    def test_rejects(self):
        with pytest.raises(ValueError):
            sorted_norm([])
        with pytest.raises(ValueError):
            sorted_norm([1.0], 1.0)

    @settings(max_examples=100)
    @given(x=vectors, d=fractions)
    def test_matches_oracle(self, x, d):
        assert sorted_norm(x, d) == pytest.approx(oracle_sorted_norm(x, d), rel=1e-12, abs=1e-300)

    @settings(max_examples=100)
    @given(x=vectors, d=fractions, seed=st.integers(0, 1000))
    def test_permutation_invariant(self, x, d, seed):
        assert sorted_norm(np.random.default_rng(seed).permutation(x), d) == sorted_norm(x, d)

    @settings(max_examples=100)
    @given(x=vectors, d=fractions, alpha=st.floats(-1e3, 1e3))
    def test_homogeneous(self, x, d, alpha):
        assert sorted_norm(alpha * x, d) == pytest.approx(abs(alpha) * sorted_norm(x, d),
                                                          rel=1e-12, abs=1e-300)

    @settings(max_examples=100)
    @given(x=vectors, d=fractions, i=st.integers(0, 10_000), bump=st.floats(0.0, 1e3))
    def test_monotone(self, x, d, i, bump):
        y = x.copy()
        j = i % len(y)
        y[j] = np.sign(y[j] or 1.0) * (abs(y[j]) + bump)
        assert sorted_norm(y, d) >= sorted_norm(x, d)

    @settings(max_examples=100)
    @given(x=vectors, d=fractions)
    def test_between_max_and_l2(self, x, d):
        s = sorted_norm(x, d)
        assert np.max(np.abs(x)) <= s * (1 + 1e-14)
        assert s <= math.hypot(*map(float, x)) * (1 + 1e-14)


class TestErrors:
    def test_relative_zero(self):
        y = np.linspace(0.4, 0.6, 10)
        assert relative_error(y, y, 0.5) == 0.0

    def test_relative_background_is_one(self):
        y = np.linspace(0.4, 0.7, 10)
        assert relative_error(np.full(10, 0.5), y, 0.5) == 1.0

    def test_relative_single_entry(self):
        y = np.full(10, 0.5)
        y[0] = 0.6
        x = y.copy()
        x[0] = 0.55
        assert relative_error(x, y, 0.5) == pytest.approx(0.5, rel=1e-14)

    def test_degenerate(self):
        with pytest.raises(DegenerateReferenceError):
            relative_error(np.ones(5), np.zeros(5), 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            relative_error(np.ones(5), np.ones(4), 0.0)
        with pytest.raises(ValueError):
            absolute_error(np.ones(5), np.ones(4))

    def test_absolute(self):
        y = np.random.default_rng(0).normal(size=10)
        assert absolute_error(y, y) == 0.0
        assert absolute_error(y + np.arange(1.0, 11.0), y) == pytest.approx(10.0, rel=1e-14)

    def test_absolute_ties(self):
        eps = 1e-3
        assert absolute_error(np.full(100, eps), np.zeros(100)) == pytest.approx(eps * math.sqrt(10))

    @settings(max_examples=100)
    @given(
        x=arrays(float, 20, elements=st.floats(-10, 10)),
        y=arrays(float, 20, elements=st.floats(-10, 10)),
        c=st.floats(-5, 5),
        shift=st.floats(-5, 5),
    )
    def test_relative_shift_invariant(self, x, y, c, shift):
        assume(sorted_norm(c - y) > 1e-6)
        base = relative_error(x, y, c)
        moved = relative_error(x + shift, y + shift, c + shift)
        assert moved == pytest.approx(base, rel=1e-9, abs=1e-9)


class TestRegions:
    @pytest.mark.parametrize("t, s, expected", [
        (1000, math.sinh(0.4) / 0.4, (-1127, -1000)),
        (1000, 4 / math.acosh(math.sqrt(17)), (-2010, -1000)),
        (100, 1.0, (-200, -100)),
    ])
    def test_soliton(self, t, s, expected):
        w = soliton_region(t, s).window
        assert (w.k_min, w.k_max) == expected

    @pytest.mark.parametrize("t, expected", [
        (1000, (-550, -450)),
        (2000, (-1050, -950)),
        (100, (-100, 0)),
        (200, (-150, -50)),
    ])
    def test_dispersive(self, t, expected):
        w = dispersive_region(t).window
        assert (w.k_min, w.k_max) == expected
        assert len(w) == 101

    def test_integer_product_has_no_spurious_ceiling(self):
        assert soliton_region(100, 1.1).window.k_min == -210

    @settings(max_examples=200)
    @given(t=st.floats(300, 1e5), s=st.floats(1.0, 3.0))
    def test_disjoint(self, t, s):
        sol = soliton_region(t, s).window
        disp = dispersive_region(t).window
        assert sol.k_max < disp.k_min or disp.k_max < sol.k_min

    @settings(max_examples=100)
    @given(t=st.floats(0.01, 1e5), s=st.floats(1.0, 3.0))
    def test_left_half_line(self, t, s):
        assert soliton_region(t, s).window.k_max < 0
        assert dispersive_region(t).window.k_max <= 0

    @settings(max_examples=100)
    @given(t=st.floats(0.01, 100.0))
    def test_short_times_clipped_at_origin(self, t):
        w = dispersive_region(t).window
        assert w.k_max == 0
        assert w.k_min == -math.floor(t / 2) - 50

    def test_region_for(self):
        assert region_for("dispersive", 400, 1.2) == dispersive_region(400)
        with pytest.raises(ValueError):
            region_for("middle", 400, 1.2)

    def test_positive_sites_only_for_full(self):
        with pytest.raises(ValueError):
            RegionSpec("soliton", IndexWindow(-5, 3))
        assert RegionSpec("full", IndexWindow(-5, 3)).indices[-1] == 3

    def test_rejects(self):
        with pytest.raises(ValueError):
            soliton_region(0, 1.2)
        with pytest.raises(ValueError):
            soliton_region(10, 0.5)


class TestErrorReport:
    def test_ok_needs_nonnegative(self):
        r = dispersive_region(100)
        with pytest.raises(ValueError):
            ErrorReport("rk4", "NoS", 0.01, 100, r, -1.0, 0.0, "relative")
        ErrorReport("rk4", "NoS", 0.01, 100, r, math.inf, math.inf, "relative", "diverged")

    def test_status_values(self):
        with pytest.raises(ValueError):
            ErrorReport("rk4", "NoS", 0.01, 100, dispersive_region(100), 0, 0, "relative", "odd")
