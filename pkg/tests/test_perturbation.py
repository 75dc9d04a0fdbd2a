import math

import numpy as np
import pytest

from formbeam.geometry import euler_zyx
from formbeam.perturbation import (
    PerturbationSpec,
    RejectionStall,
    SeedSpec,
    sample_formation,
    sample_perturbation,
    sample_truncated_vec,
)


def draws(sigma, bound, n, seed=0):
    rng = SeedSpec(seed).rng()
    return np.array([sample_truncated_vec(sigma, bound, rng) for _ in range(n)])


def test_zero_sigma_gives_zero():
    assert np.array_equal(draws((0, 0, 0), 0.5, 3), np.zeros((3, 3)))


def test_translation_truncation_and_mean():
    sigma = 0.06
    v = draws((sigma,) * 3, 1.2, 100_000)
    assert np.linalg.norm(v, axis=1).max() <= 1.2
    assert np.all(np.abs(v.mean(axis=0)) <= 3 * sigma / math.sqrt(len(v)))


def test_variance_within_five_percent():
    sigma = np.array([0.06, 0.02, 0.1])
    v = draws(sigma, 6 * sigma.max(), 100_000, seed=7)
    np.testing.assert_allclose(v.var(axis=0), sigma ** 2, rtol=0.05)


def test_tight_bound_respected():
    v = draws((1, 1, 1), 0.1, 10_000)
    assert np.linalg.norm(v, axis=1).max() <= 0.1


class CornerRng:
    """Always lands on a cube corner, which lies outside the ball."""

    def random(self, n):
        return np.zeros(n)


def test_rejection_stall():
    with pytest.raises(RejectionStall):
        sample_truncated_vec((1, 1, 1), 0.1, CornerRng())


def test_heavy_truncation_matches_conditioned_normal():
    # bound << sigma: the law tends to uniform in the ball, E|v|^2 = 3/5 bound^2
    v = draws((1, 1, 1), 0.1, 20_000, seed=5)
    assert np.mean(np.sum(v * v, axis=1)) == pytest.approx(0.6 * 0.01, rel=0.03)


def test_matches_plain_rejection_statistics():
    # moderate truncation, compared against brute-force rejection of the raw normal
    sigma, bound = np.array([0.5, 0.2, 0.8]), 0.6
    raw = np.random.default_rng(9).standard_normal((400_000, 3)) * sigma
    ref = raw[np.linalg.norm(raw, axis=1) <= bound][:50_000]
    v = draws(sigma, bound, 50_000, seed=4)
    np.testing.assert_allclose(v.var(axis=0), ref.var(axis=0), rtol=0.04)


def test_identity_sample():
    s = sample_perturbation(PerturbationSpec(), SeedSpec().rng())
    assert not s.delta_t.any() and not s.delta_eps.any()
    assert np.array_equal(s.delta_r, np.eye(3))


def test_rotation_truncation():
    spec = PerturbationSpec(sigma_r=(math.radians(5),) * 3, eps_max=math.pi / 4)
    rng = SeedSpec(3).rng()
    for _ in range(10_000):
        s = sample_perturbation(spec, rng)
        assert np.linalg.norm(s.delta_eps) <= math.pi / 4
    assert np.array_equal(s.delta_r, euler_zyx(*s.delta_eps))


def test_same_seed_bit_identical():
    spec = PerturbationSpec(sigma_t=(0.06,) * 3, sigma_r=(0.1,) * 3)
    a = sample_formation(spec, 8, SeedSpec(11, 2, 5))
    b = sample_formation(spec, 8, SeedSpec(11, 2, 5))
    for x, y in zip(a, b):
        assert x.delta_t.tobytes() == y.delta_t.tobytes()
        assert x.delta_r.tobytes() == y.delta_r.tobytes()


def test_streams_differ_across_indices():
    spec = PerturbationSpec(sigma_t=(0.06,) * 3)
    sats = sample_formation(spec, 4, SeedSpec(1))
    assert len({s.delta_t.tobytes() for s in sats}) == 4
    other = sample_formation(spec, 4, SeedSpec(1, realization_index=1))
    assert sats[0].delta_t.tobytes() != other[0].delta_t.tobytes()


@pytest.mark.parametrize("kwargs", [
    {"sigma_t": (-1, 0, 0)},
    {"t_max": 0.0},
    {"eps_max": math.pi / 2},
    {"sigma_r": (0, 0)},
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        PerturbationSpec(**kwargs)
