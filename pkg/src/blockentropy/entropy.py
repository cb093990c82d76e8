"""Shannon entropy of image blocks and its exact moments for true-random blocks.

For a block of ``MN`` pixels drawn i.i.d. uniformly from ``L`` levels, the
count of any single level is Binomial(MN, 1/L) and the counts of any two
distinct levels are jointly trinomial. The block entropy is the sum of the
per-level terms ``h(P_l) = -P_l log2 P_l``, so its mean and variance follow
from three one- and two-dimensional sums over those count laws:

* ``e_h``       -- E[h(P_l)]
* ``e_h2``      -- E[h(P_l)^2]
* ``e_h_cross`` -- E[h(P_l1) h(P_l2)], l1 != l2

``mu_H = L * e_h`` and ``sigma_H^2 = L e_h2 + L(L-1) e_h_cross - L^2 e_h^2``.

All factorial ratios are evaluated with log-gamma and exponentiated once per
term, so block sizes of a few thousand pixels do not overflow.
"""

import functools
import itertools
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, EmptyBlockError, InternalConsistencyError, SizeError

BRUTE_FORCE_LIMIT = 10**7
_NEGATIVE_VARIANCE_TOLERANCE = 1e-12
_CROSS_CHUNK = 256


@dataclass(frozen=True, eq=False)
class Histogram:
    """Pixel counts per intensity level of one block."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 1:
            raise DomainError("histogram counts must be a non-empty 1-D array")
        if not np.issubdtype(counts.dtype, np.integer):
            if not np.all(np.mod(counts, 1) == 0):
                raise DomainError("histogram counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise DomainError("histogram counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def levels(self):
        return int(self.counts.size)

    @classmethod
    def from_pixels(cls, pixels, levels):
        px = np.asarray(pixels).ravel()
        if px.size and (px.min() < 0 or px.max() >= levels):
            raise DomainError(f"pixel values must lie in [0, {levels - 1}]")
        return cls(np.bincount(px, minlength=levels))

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.counts, other.counts)


@dataclass(frozen=True)
class EntropyMoments:
    """Mean and standard deviation (bits) of one random block's entropy."""

    mu_h: float
    sigma_h: float
    block_pixels: int
    levels: int


@dataclass(frozen=True)
class SampleMeanMoments:
    """Null-model mean and standard deviation of the average of ``k`` block entropies."""

    mu: float
    sigma: float
    k: int
    block_pixels: int
    levels: int


def block_entropy(hist):
    """Shannon entropy in bits of a block histogram; empty levels contribute 0."""
    if not isinstance(hist, Histogram):
        hist = Histogram(hist)
    total = hist.total
    if total == 0:
        raise EmptyBlockError("cannot take the entropy of an empty block")
    nz = hist.counts[hist.counts > 0]
    p = nz / total
    h = float(-np.sum(p * np.log2(p)))
    # -0.0 and round-off just below zero for constant blocks
    return max(h, 0.0)


def entropies_from_counts(counts):
    """Row-wise entropy (bits) of a 2-D array of block histograms."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    if np.any(totals == 0):
        raise EmptyBlockError("cannot take the entropy of an empty block")
    p = counts / totals
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return np.maximum(-terms.sum(axis=1), 0.0)


def _check_size(block_pixels, levels):
    if int(block_pixels) != block_pixels or block_pixels < 1:
        raise DomainError(f"block_pixels must be a positive integer, got {block_pixels}")
    if int(levels) != levels or levels < 1:
        raise DomainError(f"levels must be a positive integer, got {levels}")
    return int(block_pixels), int(levels)


def _log_binomial_pmf(n, trials, levels):
    n = np.asarray(n)
    rest = trials - n
    if levels == 1:
        return np.where(rest == 0, 0.0, -np.inf)
    return (
        gammaln(trials + 1)
        - gammaln(n + 1)
        - gammaln(rest + 1)
        + rest * math.log(levels - 1)
        - trials * math.log(levels)
    )


def binomial_log_pmf(n, trials, levels):
    """Natural log of Pr(a given level occupies exactly ``n`` of ``trials`` pixels)."""
    trials, levels = _check_size(trials, levels)
    if int(n) != n or not 0 <= n <= trials:
        raise DomainError(f"n must be an integer in [0, {trials}], got {n}")
    return float(_log_binomial_pmf(int(n), trials, levels))


def _level_terms(block_pixels):
    """h(n / MN) for n = 0..MN, with exact zeros at both ends."""
    h = np.zeros(block_pixels + 1)
    n = np.arange(1, block_pixels)
    h[1:block_pixels] = n / block_pixels * np.log2(block_pixels / n)
    return h


def _binomial_weights(block_pixels, levels):
    w = np.exp(_log_binomial_pmf(np.arange(block_pixels + 1), block_pixels, levels))
    # The weights sum to 1 exactly; renormalising removes the common-mode
    # error that log-gamma contributes at large MN.
    return w / math.fsum(w)


def _trinomial_rows(block_pixels, levels, n1):
    """Joint pmf of two distinct level counts for a chunk of ``n1`` values.

    Returns an array of shape ``(len(n1), MN + 1)`` indexed by ``n2``, zero
    where ``n1 + n2 > MN``.
    """
    n1 = n1[:, None]
    n2 = np.arange(block_pixels + 1)[None, :]
    rest = block_pixels - n1 - n2
    valid = rest >= 0
    rest_c = np.where(valid, rest, 0)
    logw = (
        gammaln(block_pixels + 1)
        - gammaln(n1 + 1)
        - gammaln(n2 + 1)
        - gammaln(rest_c + 1)
        - block_pixels * math.log(levels)
    )
    if levels > 2:
        logw = logw + rest_c * math.log(levels - 2)
    else:
        valid = valid & (rest_c == 0)
    return np.where(valid, np.exp(np.where(valid, logw, 0.0)), 0.0)


def _cross_sum(block_pixels, levels, f):
    """sum over (n1, n2) of w(n1, n2) f[n1] f[n2] divided by sum of w."""
    parts = []
    norms = []
    for start in range(0, block_pixels + 1, _CROSS_CHUNK):
        n1 = np.arange(start, min(start + _CROSS_CHUNK, block_pixels + 1))
        w = _trinomial_rows(block_pixels, levels, n1)
        norms.append(w.sum())
        parts.extend((w * f[n1][:, None] * f[None, :]).ravel().tolist())
    return math.fsum(parts) / math.fsum(norms)


def e_h(block_pixels, levels):
    """E[h(P_l)] for one level of a true-random block."""
    block_pixels, levels = _check_size(block_pixels, levels)
    w = _binomial_weights(block_pixels, levels)
    return math.fsum(w * _level_terms(block_pixels))


def e_h2(block_pixels, levels):
    """E[h(P_l)^2] for one level of a true-random block."""
    block_pixels, levels = _check_size(block_pixels, levels)
    w = _binomial_weights(block_pixels, levels)
    h = _level_terms(block_pixels)
    return math.fsum(w * h * h)


def e_h_cross(block_pixels, levels):
    """E[h(P_l1) h(P_l2)] for two distinct levels of a true-random block."""
    block_pixels, levels = _check_size(block_pixels, levels)
    if levels < 2:
        raise DomainError("the cross term needs at least two levels")
    return _cross_sum(block_pixels, levels, _level_terms(block_pixels))


def mu_H(block_pixels, levels):
    """Expected entropy (bits) of an ``MN``-pixel true-random block."""
    block_pixels, levels = _check_size(block_pixels, levels)
    return entropy_moments(block_pixels, levels).mu_h


def sigma_H(block_pixels, levels):
    """Standard deviation (bits) of the entropy of an ``MN``-pixel true-random block."""
    block_pixels, levels = _check_size(block_pixels, levels)
    return entropy_moments(block_pixels, levels).sigma_h


@functools.lru_cache(maxsize=64)
def _moments(block_pixels, levels):
    mean_h = e_h(block_pixels, levels)
    mu = levels * mean_h
    if levels == 1 or block_pixels == 1:
        return EntropyMoments(mu, 0.0, block_pixels, levels)
    # sigma_H^2 = L e_h2 + L(L-1) e_h_cross - L^2 e_h^2, regrouped around the
    # level mean so the sums no longer cancel to O(mu^2).
    h = _level_terms(block_pixels)
    dev = h - mean_h
    w = _binomial_weights(block_pixels, levels)
    var_level = math.fsum(w * dev * dev)
    cov_levels = _cross_sum(block_pixels, levels, dev)
    var = levels * var_level + levels * (levels - 1) * cov_levels
    if var < 0:
        if var < -_NEGATIVE_VARIANCE_TOLERANCE:
            raise InternalConsistencyError(
                f"negative entropy variance {var!r} for MN={block_pixels}, L={levels}"
            )
        var = 0.0
    return EntropyMoments(mu, math.sqrt(var), block_pixels, levels)


def entropy_moments(block_pixels, levels):
    """Exact (mu_H, sigma_H) of block entropy under the true-random model."""
    block_pixels, levels = _check_size(block_pixels, levels)
    return _moments(block_pixels, levels)


def sample_mean_moments(block_pixels, levels, k):
    """Null distribution moments of the mean entropy over ``k`` independent blocks."""
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    m = entropy_moments(block_pixels, levels)
    return SampleMeanMoments(m.mu_h, m.sigma_h / math.sqrt(k), int(k), m.block_pixels, m.levels)


def brute_force_moments(block_pixels, levels):
    """Mean and std of block entropy by enumerating every multinomial count vector.

    Each multiset of ``MN`` levels is visited once and weighted by the number
    of images producing it, ``MN! / prod(n_l!)``, out of ``L**MN``. Intended as
    an independent check of the closed forms on small blocks.
    """
    block_pixels, levels = _check_size(block_pixels, levels)
    if levels**block_pixels > BRUTE_FORCE_LIMIT:
        raise SizeError(
            f"L**MN = {levels}**{block_pixels} exceeds the enumeration limit of {BRUTE_FORCE_LIMIT}"
        )
    total = levels**block_pixels
    mn_fact = math.factorial(block_pixels)
    weights = []
    values = []
    for combo in itertools.combinations_with_replacement(range(levels), block_pixels):
        counts = Counter(combo).values()
        weight = mn_fact
        for c in counts:
            weight //= math.factorial(c)
        h = 0.0
        for c in counts:
            if c != block_pixels:
                h += c / block_pixels * math.log2(block_pixels / c)
        weights.append(weight)
        values.append(h)
    assert sum(weights) == total
    mean = math.fsum(w * v for w, v in zip(weights, values)) / total
    var = math.fsum(w * (v - mean) ** 2 for w, v in zip(weights, values)) / total
    return EntropyMoments(mean, math.sqrt(var), block_pixels, levels)
