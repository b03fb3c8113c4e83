import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multisr.bounds import (bound_report, error_constant, location_error_bound, noise_ratio,
                            threshold_1d_euclidean, threshold_1d_wrapped, threshold_2d,
                            verify_combinatorial_lemmas)
from multisr.errors import DomainError
from multisr.incoherence import sigma_inf_min

PI = math.pi

# values below come from 30-digit mpmath evaluations of the printed formulas


def test_example_threshold():
    s_inf = sigma_inf_min([[1, 0.7], [0.7, 1]]).value
    thr = threshold_1d_wrapped(2, PI, 1e-3, 1.0, s_inf)
    assert thr == pytest.approx(0.345268163986701536, rel=1e-13)
    assert abs(thr - 0.34) <= 0.01


def test_threshold_examples():
    assert threshold_1d_wrapped(1, 2.0, 1.0, 1.0, 1.0) == pytest.approx(2.2 * math.e * PI / 2.0)
    assert threshold_1d_wrapped(3, PI, 1e-3, 1.0, 1.0) == pytest.approx(2.2 * math.e * 0.1)
    assert threshold_1d_euclidean(2, PI, 0.01, 1.0, 0.3) == pytest.approx(2.183667603484997656, rel=1e-13)
    assert threshold_1d_euclidean(1, PI, 1.0, 1.0, 1.0, c0=2.0) == pytest.approx(8.8 * math.e)
    assert threshold_2d(3, PI, 1e-3, 1.0, 1.0) == pytest.approx(11.96044004521979904, rel=1e-13)


def test_threshold_ratios():
    args = (3, 1.7, 2e-3, 0.8, 0.6)
    assert threshold_1d_euclidean(*args) == pytest.approx(2 * threshold_1d_wrapped(*args))
    assert threshold_2d(2, 1.7, 2e-3, 0.8, 0.6) == pytest.approx(12 * threshold_1d_wrapped(2, 1.7, 2e-3, 0.8, 0.6))
    assert threshold_2d(3, 1.7, 2e-3, 0.8, 0.6, c0=1.5) == pytest.approx(
        1.5 * 20 * threshold_1d_wrapped(3, 1.7, 2e-3, 0.8, 0.6))


def test_threshold_errors():
    with pytest.raises(DomainError):
        threshold_2d(1, PI, 1e-3, 1, 1)
    with pytest.raises(DomainError):
        threshold_1d_wrapped(2, 0.0, 1e-3, 1, 1)
    with pytest.raises(DomainError):
        threshold_1d_euclidean(2, PI, 1e-3, 1, 1, c0=0.5)


def test_error_constants():
    assert error_constant("1d-wrapped", 2) == pytest.approx(74.08646776165682854, rel=1e-13)
    assert error_constant("2d", 3, c0=2.0) == pytest.approx(4833309.577229487173, rel=1e-12)
    assert error_constant("1d-euclidean", 4, c0=1.5) == pytest.approx(29561.16958897496693, rel=1e-12)
    # log-domain evaluation stays finite far beyond float factorial range
    assert math.isfinite(math.log(error_constant("1d-wrapped", 500)))


def test_location_error_bound_value():
    b = location_error_bound("1d-wrapped", 3, 2.0, 1.5, 1e-4, 1.0, 0.5)
    assert b == pytest.approx(0.03312698158003575963, rel=1e-12)


def test_location_error_bound_limits():
    assert location_error_bound("1d-wrapped", 2, PI, 1.0, 0.0, 1.0, 1.0) == 0.0
    # below the threshold the bound is vacuous
    assert math.isinf(location_error_bound("1d-wrapped", 2, PI, 0.01, 1e-3, 1.0, 1.0))
    b1 = location_error_bound("1d-wrapped", 3, PI, 1.0, 1e-3, 1.0, 1.0)
    b2 = location_error_bound("1d-wrapped", 3, PI, 2.0, 1e-3, 1.0, 1.0)
    assert b1 / b2 == pytest.approx(4)


def test_report_flags():
    rep = bound_report("1d-wrapped", 2, PI, 2.0, 1.0, 1.0)
    assert rep.vacuous
    rep = bound_report("1d-wrapped", 2, PI, 1e-3, 1.0, 0.3, d_min=0.5)
    assert not rep.vacuous and rep.srf == pytest.approx(2.0)
    assert "threshold" in rep.table()
    assert rep.to_dict()["constant_C"] == pytest.approx(74.0864677616568)
    assert noise_ratio(1e-3, 0.5, 0.2) == pytest.approx(1e-2)


positive = st.floats(1e-3, 1.0)


@given(st.integers(1, 8), st.floats(0.5, 10), st.floats(1e-6, 1e-2), st.floats(0.5, 2), positive, positive)
def test_monotone(n, omega, sigma, m_min, s1, s2):
    lo, hi = sorted((s1, s2))
    if hi - lo < 1e-9:
        return
    for f in (threshold_1d_wrapped, threshold_1d_euclidean):
        if sigma / (m_min * lo) > 1:
            continue
        assert f(n, omega, sigma, m_min, hi) < f(n, omega, sigma, m_min, lo)
        assert f(n, omega, sigma, m_min, hi) < f(n, omega, 2 * sigma, m_min, hi)


@given(st.integers(2, 6), st.floats(1e-6, 1e-3), st.floats(0.1, 10))
def test_bound_scale_invariant(n, sigma, c):
    d = 2 * threshold_1d_wrapped(n, PI, sigma, 1.0, 1.0)
    a = location_error_bound("1d-wrapped", n, PI, d, sigma, 1.0, 1.0)
    b = location_error_bound("1d-wrapped", n, PI, d, c * sigma, c * 1.0, 1.0)
    assert b == pytest.approx(a, rel=1e-12)


class TestCombinatorial:
    def test_number_root_and_stirling_hold(self):
        rep = verify_combinatorial_lemmas(50)
        assert rep["number_root"] == []
        assert rep["stirling_lower"] == [] and rep["stirling_upper"] == []

    def test_support_root_fails_only_at_six(self):
        # the support-root inequality is violated at n = 6 (and nowhere else up to 50)
        assert verify_combinatorial_lemmas(50)["support_root"] == [6]
        lhs = (8 * math.sqrt(6) * 6**6 / 0.25) ** (1 / 6)
        assert lhs > 4.4 * math.e
        assert (8 * math.sqrt(7) * 7**7 / 0.5) ** (1 / 7) < 4.4 * math.e

    def test_small_cases_by_hand(self):
        assert 8 * math.sqrt(2) == pytest.approx(11.3137, abs=1e-4) and 8 * math.sqrt(2) < 4.4 * math.e
        # n = 1 Stirling: upper bound is an equality
        assert math.sqrt(2 * PI) / math.e <= 1 <= math.e / math.e

    def test_bad_n(self):
        with pytest.raises(DomainError):
            verify_combinatorial_lemmas(1)
