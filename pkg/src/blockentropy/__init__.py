"""Block Shannon entropy randomness test for encrypted images."""

__version__ = "0.1.0"

from .entropy import (
    EntropyMoments,
    Histogram,
    SampleMeanMoments,
    block_entropy,
    brute_force_moments,
    entropy_moments,
    mu_H,
    sample_mean_moments,
    sigma_H,
)
from .grid import ImageGrid
from .random_image import estimate_rho_ratio, gen_true_random
from .sampler import BlockSpec, extract_block, sample_blocks
from .shuffle import ShuffleKey, ShuffleMode, shuffle, unshuffle
from .ztest import Decision, TestConfig, TestReport, critical_value, run_test, type1_upper_bound

__all__ = [
    "BlockSpec",
    "Decision",
    "EntropyMoments",
    "Histogram",
    "ImageGrid",
    "SampleMeanMoments",
    "ShuffleKey",
    "ShuffleMode",
    "TestConfig",
    "TestReport",
    "block_entropy",
    "brute_force_moments",
    "critical_value",
    "entropy_moments",
    "estimate_rho_ratio",
    "extract_block",
    "gen_true_random",
    "mu_H",
    "run_test",
    "sample_blocks",
    "sample_mean_moments",
    "shuffle",
    "sigma_H",
    "type1_upper_bound",
    "unshuffle",
]
