import math

import numpy as np
import pytest

from multisr.adversarial import build_instance
from multisr.bounds import threshold_1d_wrapped
from multisr.errors import DomainError, InterpolationError
from multisr.experiments import run_recovery_trial, simulate_1d
from multisr.forward import MeasurementSet, add_noise, fourier_transform, nudft, polar_grid, uniform_grid
from multisr.measure import DiscreteMeasure, IlluminationSet, build_illumination_matrix, matched_sinusoids
from multisr.recovery import (RecoveryProblem, certify_against_theorem, fit_support, match_supports,
                              project_problem_1d, solve_l0)

PI = math.pi


def test_noiseless_single_atom():
    mu = DiscreteMeasure([0.3137], [1.5 - 0.5j])
    one = IlluminationSet.constant(1)
    ms = fourier_transform(mu, one, uniform_grid(PI, 16))
    res = solve_l0(RecoveryProblem(ms, "known", (-1, 1), 0.05, illumination=one, sigma=1e-6))
    assert res.feasible and res.sparsity == 1
    assert abs(res.measure.locations[0] - 0.3137) < 1e-8
    assert np.all(res.per_frame_residuals < 1e-6)


def test_two_atoms_above_threshold():
    n, sep_ratio = 2, 1e-3
    d = threshold_1d_wrapped(n, PI, sep_ratio, 1.0, 1.0) * 1.2
    inst = simulate_1d(n, n, d, sep_ratio, seed=12)
    out = run_recovery_trial(inst, "unknown", certify_mode="1d-wrapped")
    assert out["sparsity"] == 2 and out["success"] and out["certified"]


def test_zero_sparsity_and_infeasible_sentinel():
    ms = add_noise(fourier_transform(DiscreteMeasure([0.0], [1e-4]), IlluminationSet.constant(1),
                                     uniform_grid(PI, 8)), 1e-3, seed=0)
    assert solve_l0(RecoveryProblem(ms, "unknown", (-1, 1), 0.1)).sparsity == 0
    ms = fourier_transform(DiscreteMeasure([-0.5, 0.5], [1, 1]), IlluminationSet.constant(1), uniform_grid(PI, 8))
    res = solve_l0(RecoveryProblem(ms, "unknown", (-1, 1), 0.1, sigma=1e-6, max_sparsity=1))
    assert not res.feasible and res.sparsity == 2


def test_adversarial_measurements_fit_with_at_most_n():
    n = 3
    inst = build_instance(n, 1.0, 1e-2, 1.0, IlluminationSet.constant(2))
    ms = add_noise(fourier_transform(inst.mu, IlluminationSet.constant(2), uniform_grid(1.0, 32)), 1e-2,
                   seed=1, scale=1e-3)
    res = solve_l0(RecoveryProblem(ms, "unknown", (-(n + 1) * inst.tau, n * inst.tau), inst.tau / 4,
                                   max_sparsity=n))
    assert res.feasible and res.sparsity <= n
    # the rho supports alone (disjoint from mu) already explain the data
    r, *_ = fit_support(RecoveryProblem(ms, "unknown", (-1, 1), 0.1), inst.rho.locations)
    assert np.all(r < 1e-2)


def test_problem_validation():
    ms = fourier_transform(DiscreteMeasure([0.0], [1]), IlluminationSet.constant(1), uniform_grid(PI, 4))
    with pytest.raises(DomainError):
        RecoveryProblem(ms, "known", (-1, 1), 0.1)
    with pytest.raises(DomainError):
        RecoveryProblem(ms, "unknown", (-1, 1), 0.1, max_sparsity=7)
    with pytest.raises(DomainError):
        RecoveryProblem(ms, "unknown", (1, -1), 0.1, sigma=1.0)
    assert RecoveryProblem.default_disk(3, PI, 2.0)[2] == pytest.approx(6.0)


class TestMatching:
    def test_identity_and_swap(self):
        mu = DiscreteMeasure([0.0, 1.0, 2.5], [1, 2, 3])
        perm, dev = match_supports(mu, mu)
        assert list(perm) == [0, 1, 2] and np.all(dev == 0)
        perm, dev = match_supports(mu, mu.permuted([1, 0, 2]))
        assert list(perm) == [1, 0, 2] and np.all(dev == 0)

    def test_jitter(self):
        mu = DiscreteMeasure([0.0, 1.0, 2.5], [1, 2, 3])
        jit = np.array([0.01, -0.02, 0.005])
        perm, dev = match_supports(mu, mu.shifted(jit))
        np.testing.assert_allclose(dev, np.abs(jit))

    def test_counts(self):
        with pytest.raises(DomainError):
            match_supports(DiscreteMeasure([0.0], [1]), DiscreteMeasure([0.0, 1.0], [1, 1]))


class TestCertificate:
    def _setup(self, d):
        mu = DiscreteMeasure([0.0, d], [1.0, 1.0])
        I = build_illumination_matrix(matched_sinusoids(2, d), mu)
        return mu, I

    def test_exact_recovery(self):
        mu, I = self._setup(1.5)
        cert = certify_against_theorem(mu, mu, I, 1e-3, PI, sigma_inf=1.0)
        assert cert.holds and not cert.vacuous
        assert cert.slack == pytest.approx(min(cert.d_min / 2, cert.error_bound))
        assert "HOLDS" in cert.report()

    def test_sub_threshold_is_vacuous(self):
        mu, I = self._setup(0.01)
        cert = certify_against_theorem(mu, mu, I, 1e-3, PI, sigma_inf=1.0)
        assert cert.vacuous and not cert.holds

    def test_wrong_count_fails(self):
        mu, I = self._setup(1.5)
        cert = certify_against_theorem(mu, DiscreteMeasure([0.0], [1.0]), I, 1e-3, PI, sigma_inf=1.0)
        assert not cert.holds and not cert.vacuous


class TestProjection:
    def _problem(self, mu):
        ms = fourier_transform(mu, IlluminationSet.constant(1), polar_grid(PI, 6, 8))
        return RecoveryProblem(ms, "unknown", (0.0, 0.0, 2.0), 0.1, sigma=1e-3)

    def test_x_axis(self):
        mu = DiscreteMeasure([[-0.5, 0.0], [0.7, 0.0]], [1, 2j], dim=2)
        pb = project_problem_1d(self._problem(mu), np.array([1.0, 0.0]))
        ref = nudft(np.array([-0.5, 0.7]), np.array([[1, 2j]]), pb.measurements.grid.nodes)
        np.testing.assert_allclose(pb.measurements.frames, ref, atol=1e-12)
        assert pb.domain == (-2.0, 2.0)

    def test_orthogonal_direction_collapses(self):
        mu = DiscreteMeasure([[-0.5, 0.0], [0.7, 0.0]], [1, 2j], dim=2)
        pb = project_problem_1d(self._problem(mu), np.array([0.0, 1.0]))
        # both atoms project to 0: the samples are constant
        np.testing.assert_allclose(pb.measurements.frames, 1 + 2j, atol=1e-12)

    def test_random_identity(self, rng):
        pts = rng.uniform(-1, 1, (3, 2))
        amps = rng.standard_normal(3) + 1j
        mu = DiscreteMeasure(pts, amps, dim=2)
        pb = self._problem(mu)
        a = 2 * PI * 3 / 8
        v = np.array([math.cos(a), math.sin(a)])
        sub = project_problem_1d(pb, v)
        ref = nudft(pts @ v, amps[None, :], sub.measurements.grid.nodes)
        np.testing.assert_allclose(sub.measurements.frames, ref, atol=1e-12)

    def test_missing_direction(self):
        mu = DiscreteMeasure([[0.1, 0.2]], [1], dim=2)
        pb = self._problem(mu)
        v = np.array([math.cos(0.1), math.sin(0.1)])
        with pytest.raises(InterpolationError):
            project_problem_1d(pb, v)
        src = lambda nodes: nudft(mu.locations, mu.amplitudes[None, :], nodes)  # noqa: E731
        sub = project_problem_1d(pb, v, source=src, count=12)
        assert len(sub.measurements.grid) == 12


def _noisy_instance(seed, sigma_ratio=1e-2):
    return simulate_1d(2, 2, 0.9, sigma_ratio, seed=seed)


def test_sparsity_monotone_in_sigma():
    inst = _noisy_instance(4)
    ks = []
    for s in (0.5, 1, 5, 50, 500):
        pb = RecoveryProblem(inst.measurements, "unknown", inst.domain, inst.pitch,
                             sigma=inst.sigma * s, max_sparsity=3)
        ks.append(solve_l0(pb).sparsity)
    assert ks == sorted(ks, reverse=True)


def test_known_residual_not_below_unknown(rng):
    inst = _noisy_instance(7)
    known = RecoveryProblem(inst.measurements, "known", inst.domain, inst.pitch, illumination=inst.illumination)
    unknown = RecoveryProblem(inst.measurements, "unknown", inst.domain, inst.pitch)
    for _ in range(30):
        locs = np.sort(rng.uniform(*inst.domain, int(rng.integers(1, 4))))
        rk, *_ = fit_support(known, locs)
        ru, *_ = fit_support(unknown, locs)
        assert np.all(rk >= ru * (1 - 1e-10) - 1e-14)


def test_refinement_never_worsens():
    inst = _noisy_instance(9)
    res = solve_l0(RecoveryProblem(inst.measurements, "unknown", inst.domain, inst.pitch, max_sparsity=3))
    for level in res.refinement_trace[1:]:
        for r in level["refined"]:
            assert r["refined_residual"] <= r["grid_residual"] * (1 + 1e-12)


def test_no_fewer_atoms_than_truth():
    for n in (2, 3):
        for seed in range(5):
            d = threshold_1d_wrapped(n, PI, 1e-3, 1.0, 1.0)
            inst = simulate_1d(n, n, d, 1e-3, seed=seed)
            out = run_recovery_trial(inst, "unknown", max_sparsity=n - 1)
            assert not out["feasible"]


def test_2d_measurements_are_sup_normed():
    mu = DiscreteMeasure([[0.0, 0.0]], [1], dim=2)
    ms = fourier_transform(mu, IlluminationSet.constant(1), polar_grid(PI, 3, 4))
    assert isinstance(ms, MeasurementSet) and ms.norm_mode == "sup"
