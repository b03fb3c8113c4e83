import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multisr.errors import DomainError, PreconditionError, RankDeficiencyError
from multisr.vandermonde import (approx_residual, eta, eta_certificate, eta_lower_bound_check, lam,
                                 pair_perturbation_decreases, phi, projection_distance, stability_inversion,
                                 worst_case_approx_lower_bound, xi, zeta)


def test_phi_examples():
    np.testing.assert_array_equal(phi(2, 1), [1, 1, 1])
    np.testing.assert_allclose(phi(3, 1j), [1, 1j, -1, -1j], atol=1e-15)
    z = mpmath.expj(mpmath.mpf("0.3"))
    ref = [complex(z ** p) for p in range(6)]
    np.testing.assert_allclose(phi(5, complex(z)), ref, rtol=1e-14)


def test_eta_examples(rng):
    z = np.exp(1j * rng.uniform(0, 6, 3))
    np.testing.assert_allclose(eta(z, z), 0, atol=1e-15)
    np.testing.assert_allclose(eta([2], [0, 1]), [2])
    zh = np.exp(1j * rng.uniform(0, 6, 2))
    manual = [abs(zj - zh[0]) * abs(zj - zh[1]) for zj in z]
    np.testing.assert_allclose(eta(z, zh), manual, rtol=1e-15)


@given(st.lists(st.floats(0, 6.28), min_size=1, max_size=4), st.lists(st.floats(0, 6.28), min_size=1, max_size=4),
       st.floats(-10, 10))
def test_eta_rotation_invariant(th, thh, c):
    a = eta(np.exp(1j * np.array(th)), np.exp(1j * np.array(thh)))
    b = eta(np.exp(1j * (np.array(th) + c)), np.exp(1j * (np.array(thh) + c)))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_constants():
    assert [xi(k) for k in (1, 2, 3, 4)] == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)]
    assert zeta(1) == 1 and zeta(4) == 2
    assert lam(2) == 1 and lam(3) == Fraction(1, 2)
    with pytest.raises(DomainError):
        lam(1)
    with pytest.raises(DomainError):
        xi(0)


class TestProjectionDistance:
    def test_target_in_span(self):
        assert projection_distance([0.3, 1.7], 1.7) == pytest.approx(0, abs=1e-12)

    def test_single_node_closed_form(self):
        assert projection_distance([0.0], math.pi) == pytest.approx(math.sqrt(2))

    def test_duplicate_nodes(self):
        with pytest.raises(RankDeficiencyError):
            projection_distance([0.5, 0.5], 1.0)

    def test_matches_least_squares(self, rng):
        for k in range(1, 6):
            th = rng.uniform(0, 2 * np.pi, k)
            t = rng.uniform(0, 2 * np.pi)
            A = np.exp(1j * np.outer(np.arange(k + 1), th))
            b = phi(k, np.exp(1j * t))
            x = np.linalg.lstsq(A, b, rcond=None)[0]
            assert projection_distance(th, t) == pytest.approx(np.linalg.norm(A @ x - b), rel=1e-8, abs=1e-12)

    @given(st.integers(0, 2**31 - 1))
    def test_permutation_invariant_and_lower_bound(self, seed):
        r = np.random.default_rng(seed)
        k = int(r.integers(1, 7))
        th = r.uniform(0, 2 * np.pi, k)
        if k > 1 and np.min(np.diff(np.sort(th))) < 1e-3:
            return
        t = r.uniform(0, 2 * np.pi)
        d = projection_distance(th, t)
        assert projection_distance(th[::-1], t) == pytest.approx(d, rel=1e-8, abs=1e-12)
        assert d >= abs(np.prod(np.exp(1j * t) - np.exp(1j * th))) / 2 ** k * (1 - 1e-9)


class TestWorstCase:
    def test_formula_example(self):
        assert worst_case_approx_lower_bound([0, math.pi], np.eye(2)) == pytest.approx(0.5)

    def test_homogeneous(self, rng):
        th = [0.1, 1.5, 3.0]
        B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        a = worst_case_approx_lower_bound(th, B)
        assert worst_case_approx_lower_bound(th, (2 - 1j) * B) == pytest.approx(abs(2 - 1j) * a, rel=1e-5)

    def test_below_direct_minimisation(self, rng):
        from scipy.optimize import minimize
        for k in (1, 2):
            th = np.sort(rng.uniform(0, 2 * np.pi, k + 1))
            B = np.eye(k + 1)
            bound = worst_case_approx_lower_bound(th, B, sigma_inf=1.0)
            best = min(minimize(lambda x: approx_residual(x, th, B), rng.uniform(0, 2 * np.pi, k),
                                method="Nelder-Mead").fun for _ in range(30))
            assert best >= bound

    def test_duplicate_theta(self):
        with pytest.raises(DomainError):
            worst_case_approx_lower_bound([1.0, 1.0], np.eye(2))


class TestEtaLowerBound:
    def test_two_nodes_opposite(self):
        rep = eta_lower_bound_check([0, math.pi], trials=30)
        assert rep.min_found == pytest.approx(math.sqrt(2), abs=1e-6)
        assert rep.bound == pytest.approx(1.0)
        assert rep.passed

    def test_equispaced(self):
        for k in (2, 3):
            rep = eta_lower_bound_check(2 * np.pi * np.arange(k + 1) / (k + 1), trials=60, seed=k)
            assert rep.violations == 0

    def test_subset_is_positive(self):
        th = np.array([0.2, 1.9, 4.0])
        assert np.max(eta(np.exp(1j * th), np.exp(1j * th[:2]))) > 0


class TestStabilityInversion:
    def test_exact(self):
        th = [0.0, 2.0, 4.0]
        rep = stability_inversion(th, th, 1e-3)
        assert list(rep.permutation) == [0, 1, 2]
        assert np.all(rep.deviations == 0)

    def test_jitter_within_bound(self):
        th = 2 * np.pi * np.arange(3) / 3
        jitter = np.array([1e-5, -2e-5, 1.5e-5])
        thh = (th + jitter)[[2, 0, 1]]
        rep = stability_inversion(th, thh, 1e-3)
        assert list(rep.permutation) == [1, 2, 0]
        np.testing.assert_allclose(rep.deviations, np.abs(jitter), rtol=1e-6)
        assert np.all(rep.deviations < rep.fine_bound)

    def test_preconditions_are_named(self):
        with pytest.raises(PreconditionError, match="eta norm"):
            stability_inversion([0, 2, 4], [0.5, 2, 4], 1e-3)
        with pytest.raises(PreconditionError, match="theta_min"):
            stability_inversion([0, 1e-3], [0, 1e-3], 1.0)

    def test_k2_has_no_fine_bound(self):
        rep = stability_inversion([0, math.pi], [1e-4, math.pi], 1e-2)
        assert rep.fine_bound is None


class TestPairPerturbation:
    def test_examples(self):
        assert pair_perturbation_decreases(math.pi / 2, math.pi / 2, 1e-3)
        assert pair_perturbation_decreases(0.3, 0.9, 1e-4)
        assert not pair_perturbation_decreases(0.3, 0.9, 0.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            pair_perturbation_decreases(1.0, 4.5, 1e-3)


def test_eta_certificate_holds_on_random_instances(rng):
    for k in (2, 3, 4):
        for _ in range(10):
            th = np.sort(rng.uniform(0, 2 * np.pi, k))
            B = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
            thh = th + rng.normal(0, 1e-3, k)
            sigma = approx_residual(thh, th, B) * 1.01 + 1e-15
            cert = eta_certificate(th, thh, B, sigma)
            assert cert["hypothesis"] and cert["holds"]
