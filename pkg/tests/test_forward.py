import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multisr.errors import DomainError
from multisr.forward import (add_noise, fourier_transform, frame_norm, polar_grid, residual, theorem_grid,
                             uniform_grid)
from multisr.io import measurements_from_dict, measurements_to_dict
from multisr.measure import DiscreteMeasure, IlluminationSet, SinusoidPattern

ONE = IlluminationSet.constant(1)


def test_single_atom_at_origin_is_constant():
    ms = fourier_transform(DiscreteMeasure([0.0], [2 - 1j]), ONE, uniform_grid(math.pi, 16))
    assert np.all(ms.frames == 2 - 1j)
    assert ms.sigma == 0


def test_unit_atom_has_unit_modulus():
    ms = fourier_transform(DiscreteMeasure([0.77], [1.0]), ONE, uniform_grid(math.pi, 16))
    np.testing.assert_allclose(np.abs(ms.frames), 1, rtol=1e-15)


def test_matches_extended_precision_sum():
    rng = np.random.default_rng(5)
    locs = rng.uniform(-2, 2, 3)
    amps = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    pats = (SinusoidPattern(1.1, 0.4), SinusoidPattern(-0.6, 2.0))
    grid = uniform_grid(math.pi, 11)
    ms = fourier_transform(DiscreteMeasure(locs, amps), IlluminationSet(pats), grid)
    mpmath.mp.dps = 40
    for t, (k, ph) in enumerate([(1.1, 0.4), (-0.6, 2.0)]):
        for m, w in enumerate(grid.nodes):
            ref = mpmath.fsum(mpmath.expj(mpmath.mpf(k) * y + ph) * mpmath.mpc(a.real, a.imag)
                              * mpmath.expj(mpmath.mpf(y) * mpmath.mpf(w)) for y, a in zip(locs, amps))
            assert abs(complex(ref) - ms.frames[t, m]) < 1e-13


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        fourier_transform(DiscreteMeasure([[0, 0]], [1], dim=2), ONE, uniform_grid(1.0, 4))


def test_frame_norm_examples():
    assert frame_norm([3, 4j]) == pytest.approx(math.sqrt(12.5))
    assert frame_norm(np.full(7, -2j)) == pytest.approx(2)
    assert frame_norm(np.full(7, -2j), "sup") == pytest.approx(2)
    with pytest.raises(DomainError):
        frame_norm([])


def test_theorem_grid_nodes():
    g = theorem_grid(2.0, 4, offset=0.25)
    np.testing.assert_allclose(g.nodes, 0.25 + np.arange(4) * 1.0 - 2.0)
    assert len(theorem_grid(2.0, 4, count=3)) == 3
    e = theorem_grid(2.0, 4, setting="euclidean", c0=2.0)
    assert e.params["h"] == pytest.approx(0.25)
    with pytest.raises(DomainError):
        theorem_grid(2.0, 4, offset=1.5)


def test_grids_stay_in_band():
    assert np.all(np.abs(uniform_grid(3.0, 40).nodes) <= 3.0)
    assert np.all(np.hypot(*polar_grid(3.0, 5, 12).nodes.T) <= 3.0 + 1e-12)


@given(st.integers(0, 10_000))
def test_noise_respects_rms_bound(seed):
    ms = fourier_transform(DiscreteMeasure([0.1], [1.0]), IlluminationSet.constant(2), uniform_grid(1.0, 5))
    noisy = add_noise(ms, 1e-2, seed=seed, scale=1.0)
    norms = [frame_norm(f) for f in noisy.frames - ms.frames]
    assert max(norms) < 1e-2


def test_noise_sup_uniform_disk():
    ms = fourier_transform(DiscreteMeasure([[0.1, 0.2]], [1.0], dim=2), ONE, polar_grid(1.0, 4, 8))
    for seed in range(50):
        w = add_noise(ms, 0.3, "uniform-disk", seed=seed, scale=1.0).frames - ms.frames
        assert np.max(np.abs(w)) <= 0.3 * (1 - 1e-9)


def test_noise_is_deterministic_and_vanishes():
    ms = fourier_transform(DiscreteMeasure([0.1], [1.0]), ONE, uniform_grid(1.0, 9))
    a = add_noise(ms, 1e-3, seed=4)
    assert np.array_equal(a.frames, add_noise(ms, 1e-3, seed=4).frames)
    np.testing.assert_allclose(add_noise(ms, 1e-14, seed=1).frames, ms.frames, atol=1e-12)
    with pytest.raises(DomainError):
        add_noise(ms, 0.0)


def test_residual_examples():
    grid = uniform_grid(math.pi, 12)
    mu = DiscreteMeasure([0.0], [1.0])
    ms = fourier_transform(mu, ONE, grid)
    assert residual(mu, ms, ONE).max() < 1e-10
    np.testing.assert_allclose(residual(DiscreteMeasure.empty(), ms), [1.0])
    cand = DiscreteMeasure([0.05], [1.0])
    direct = frame_norm(fourier_transform(cand, ONE, grid).frames[0] - ms.frames[0])
    assert residual(cand, ms, ONE)[0] == pytest.approx(direct, rel=1e-14)


locs_strategy = st.lists(st.integers(-300, 300).map(lambda k: k / 100), min_size=1, max_size=4, unique=True)


@given(locs_strategy, locs_strategy, st.complex_numbers(max_magnitude=5), st.complex_numbers(max_magnitude=5))
def test_linearity(l1, l2, alpha, beta):
    grid = uniform_grid(2.0, 9)
    m1 = DiscreteMeasure(l1, np.arange(1, len(l1) + 1))
    m2 = DiscreteMeasure(l2, 1j * np.arange(1, len(l2) + 1))
    f1 = fourier_transform(m1, ONE, grid).frames
    f2 = fourier_transform(m2, ONE, grid).frames
    # combined measure via concatenated atoms; shared locations add up
    locs = np.concatenate([l1, l2])
    amps = np.concatenate([alpha * m1.amplitudes, beta * m2.amplitudes])
    uniq, inv = np.unique(locs, return_inverse=True)
    summed = np.zeros(uniq.size, complex)
    np.add.at(summed, inv, amps)
    keep = summed != 0
    if not keep.any():
        return
    comb = fourier_transform(DiscreteMeasure(uniq[keep], summed[keep]), ONE, grid).frames
    np.testing.assert_allclose(comb, alpha * f1 + beta * f2, atol=1e-10 * (1 + abs(alpha) + abs(beta)) * 20)


@given(locs_strategy, st.floats(-5, 5, allow_nan=False))
def test_translation_is_a_phase(locs, s):
    grid = uniform_grid(2.0, 9)
    mu = DiscreteMeasure(locs, np.ones(len(locs)))
    f = fourier_transform(mu, ONE, grid).frames
    g = fourier_transform(mu.shifted(s), ONE, grid).frames
    np.testing.assert_allclose(g, f * np.exp(1j * s * grid.nodes), rtol=1e-12, atol=1e-12)


def test_measurements_json_round_trip():
    ms = add_noise(fourier_transform(DiscreteMeasure([0.3, -1.0], [1, 2j]), IlluminationSet.constant(2),
                                     uniform_grid(1.3, 7)), 0.01, seed=3)
    import json
    back = measurements_from_dict(json.loads(json.dumps(measurements_to_dict(ms))))
    assert back.frames.tobytes() == ms.frames.tobytes()
    assert back.grid.nodes.tobytes() == ms.grid.nodes.tobytes()
    assert back.sigma == ms.sigma
