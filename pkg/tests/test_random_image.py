import math

import numpy as np
import pytest
from scipy.stats import chisquare

from blockentropy.entropy import mu_H, sigma_H
from blockentropy.errors import DegenerateMomentsError, DomainError
from blockentropy.random_image import (
    estimate_rho_ratio,
    gen_true_random,
    random_block_entropies,
    simulate_entropies,
)


@pytest.fixture(scope="module")
def rho_100k():
    return estimate_rho_ratio(256, 256, 100_000, seed=2024)


def test_gen_shape_and_levels():
    img = gen_true_random(64, 48, 256, seed=1)
    assert img.shape == (64, 48)
    assert img.levels == 256
    assert img.pixels.max() <= 255


def test_gen_deterministic():
    assert gen_true_random(32, 32, 256, 9) == gen_true_random(32, 32, 256, 9)
    assert gen_true_random(32, 32, 256, 9) != gen_true_random(32, 32, 256, 10)


def test_binary_fraction():
    fractions = [gen_true_random(64, 64, 2, seed).pixels.mean() for seed in range(100)]
    assert abs(np.mean(fractions) - 0.5) < 0.005


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_level_uniformity(seed):
    img = gen_true_random(256, 256, 256, seed)
    assert chisquare(img.histogram()).pvalue > 1e-3


@pytest.mark.parametrize("args", [(0, 4, 2), (4, 0, 2), (4, 4, 1), (2.5, 4, 2)])
def test_gen_bad_args(args):
    with pytest.raises(DomainError):
        gen_true_random(*args, seed=0)


def test_trial_keying_is_positional():
    full = random_block_entropies(64, 16, 0, 100, seed=4)
    part = random_block_entropies(64, 16, 40, 70, seed=4)
    np.testing.assert_array_equal(full[40:70], part)


def test_parallel_matches_serial():
    serial = simulate_entropies(256, 256, 5000, seed=8, workers=1)
    parallel = simulate_entropies(256, 256, 5000, seed=8, workers=3)
    assert serial.tobytes() == parallel.tobytes()


def test_rho_parallel_matches_serial():
    a = estimate_rho_ratio(64, 4, 2000, seed=1, workers=1)
    b = estimate_rho_ratio(64, 4, 2000, seed=1, workers=2)
    assert a == b


def test_rho_estimate(rho_100k):
    assert 1.55 <= rho_100k.ratio <= 1.65
    assert 0 < rho_100k.stderr < 0.05
    assert float(rho_100k) == rho_100k.ratio
    assert rho_100k.trials == 100_000


def test_empirical_mean_and_std(rho_100k):
    mu, sigma = mu_H(256, 256), sigma_H(256, 256)
    assert abs(rho_100k.sample_mean - mu) <= 4 * sigma / math.sqrt(100_000)
    assert abs(rho_100k.sample_std / sigma - 1) <= 0.03


def test_rho_standard_error_shrinks(rho_100k):
    small = estimate_rho_ratio(256, 256, 1000, seed=2024)
    assert small.stderr > rho_100k.stderr


def test_rho_rejects_single_pixel():
    with pytest.raises(DegenerateMomentsError):
        estimate_rho_ratio(1, 256, 1000, seed=0)


def test_rho_needs_enough_trials():
    with pytest.raises(DomainError):
        estimate_rho_ratio(256, 256, 999, seed=0)
