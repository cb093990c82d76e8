"""One-sided Z-test on the mean block entropy.

H0: the image is ideally encrypted (its mean block entropy equals the
true-random value). H1: the mean block entropy is lower. Small sample means
reject; a mean at or above the critical value accepts.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .entropy import entropies_from_counts, sample_mean_moments
from .errors import ConfigError, DegenerateMomentsError, DomainError
from .sampler import BlockSpec, sample_blocks, tile_histograms

# Berry-Esseen constant (Korolev & Shevtsova upper bound) and the Monte Carlo
# third-moment ratio for 16x16 gray blocks.
BERRY_ESSEEN_C = 0.4784
DEFAULT_RHO_RATIO = 1.6


class Decision(str, enum.Enum):
    IDEALLY_ENCRYPTED = "IdeallyEncrypted"
    NOT_IDEALLY_ENCRYPTED = "NotIdeallyEncrypted"

    def __str__(self):
        return self.value


# Acklam's rational approximation to the normal quantile; relative error
# about 1.15e-9 before the refinement step in inv_norm_cdf.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_cdf(z):
    """Standard normal CDF via erfc (accurate in both tails)."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _acklam(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    if p > 1.0 - _P_LOW:
        return -_acklam(1.0 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    )


def inv_norm_cdf(p):
    """Standard normal quantile: the ``z`` with ``norm_cdf(z) == p``.

    Acklam's approximation followed by one Halley step against the erfc-based
    CDF, which brings the absolute error to the 1e-15 level.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie strictly between 0 and 1, got {p}")
    if p == 0.5:
        return 0.0
    z = _acklam(p)
    # Refine on the smaller tail so 1 - p does not lose digits.
    if p > 0.5:
        return -_halley(1.0 - p, -z)
    return _halley(p, z)


def _halley(p, z):
    err = norm_cdf(z) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * z * z)
    return z - u / (1.0 + 0.5 * z * u)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def critical_value(moments, alpha):
    """Mean block entropy below which H0 is rejected at level ``alpha``."""
    _check_alpha(alpha)
    return moments.mu - inv_norm_cdf(1.0 - alpha) * moments.sigma


def z_statistic(h_bar, moments):
    if not moments.sigma > 0:
        raise DegenerateMomentsError("the null standard deviation is zero; Z is undefined")
    return (h_bar - moments.mu) / moments.sigma


def decide(h_bar, h_c):
    if h_bar < h_c:
        return Decision.NOT_IDEALLY_ENCRYPTED
    return Decision.IDEALLY_ENCRYPTED


def type1_upper_bound(k, alpha, rho_ratio=DEFAULT_RHO_RATIO):
    """Worst-case Type I error when the normal approximation is not yet exact.

    Berry-Esseen bounds the CDF gap by ``C * rho_ratio / sqrt(k)``; adding it
    to ``alpha`` gives the bound.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    _check_alpha(alpha)
    if not rho_ratio > 0:
        raise DomainError(f"rho_ratio must be positive, got {rho_ratio}")
    return BERRY_ESSEEN_C * rho_ratio / math.sqrt(k) + alpha


@dataclass(frozen=True)
class TestConfig:
    spec: BlockSpec = field(default_factory=lambda: BlockSpec(16, 16))
    levels: int = 256
    k: int = 100
    alpha: float = 0.01
    seed: int = 0
    rho_ratio: float = DEFAULT_RHO_RATIO

    __test__ = False  # not a pytest class

    def __post_init__(self):
        _check_alpha(self.alpha)
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise DomainError(f"levels must be an integer >= 2, got {self.levels}")
        if not self.rho_ratio > 0:
            raise DomainError(f"rho_ratio must be positive, got {self.rho_ratio}")
        _rng.check_seed(self.seed)


@dataclass(frozen=True)
class TestReport:
    h_bar: float
    z: float
    h_c: float
    decision: Decision
    gamma_bound: float
    block_entropies: tuple
    positions: tuple
    mu: float
    sigma: float
    config: TestConfig
    image: str = ""

    __test__ = False

    @property
    def rejected(self):
        return self.decision is Decision.NOT_IDEALLY_ENCRYPTED


def run_test(image, config, image_id=""):
    """Sample blocks, average their entropies and run the Z-test."""
    if image.levels != config.levels:
        raise ConfigError(
            f"image has {image.levels} levels but the test is configured for {config.levels}"
        )
    spec = config.spec
    sample = sample_blocks(image.rows, image.cols, spec, config.k, config.seed)
    # Ascending anchor order fixes the summation order of the mean.
    positions = tuple(sorted(sample.positions))
    hists = tile_histograms(image, spec)
    counts = np.stack([hists[r // spec.rows, c // spec.cols] for r, c in positions])
    entropies = entropies_from_counts(counts)
    h_bar = math.fsum(entropies.tolist()) / len(entropies)
    moments = sample_mean_moments(spec.pixels, config.levels, config.k)
    h_c = critical_value(moments, config.alpha)
    return TestReport(
        h_bar=h_bar,
        z=z_statistic(h_bar, moments),
        h_c=h_c,
        decision=decide(h_bar, h_c),
        gamma_bound=type1_upper_bound(config.k, config.alpha, config.rho_ratio),
        block_entropies=tuple(float(e) for e in entropies),
        positions=positions,
        mu=moments.mu,
        sigma=moments.sigma,
        config=config,
        image=image_id,
    )
