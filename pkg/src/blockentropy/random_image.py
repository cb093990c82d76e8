"""True-random images and the Monte Carlo third-moment ratio of block entropy."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _rng
from .entropy import entropies_from_counts, entropy_moments
from .errors import DegenerateMomentsError, DomainError
from .grid import ImageGrid

BOOTSTRAP_RESAMPLES = 200
_CHUNK = 4096


def gen_true_random(rows, cols, levels, seed):
    """Image whose pixels are i.i.d. uniform on ``0..levels-1``."""
    if int(rows) != rows or int(cols) != cols or rows < 1 or cols < 1:
        raise DomainError(f"image dimensions must be positive integers, got {rows}x{cols}")
    if int(levels) != levels or levels < 2:
        raise DomainError(f"levels must be an integer >= 2, got {levels}")
    rng = _rng.generator(seed, _rng.IMAGE)
    return ImageGrid(rng.integers(0, levels, size=(int(rows), int(cols))), int(levels))


def random_block_entropies(block_pixels, levels, start, stop, seed):
    """Entropies of random blocks ``start..stop-1``; block ``i`` depends only on ``(seed, i)``."""
    out = np.empty(stop - start)
    for lo in range(start, stop, _CHUNK):
        hi = min(lo + _CHUNK, stop)
        pixels = np.stack(
            [_rng.generator(seed, _rng.TRIAL, i).integers(0, levels, size=block_pixels) for i in range(lo, hi)]
        )
        rows = np.arange(hi - lo, dtype=np.int64)[:, None] * levels
        counts = np.bincount((pixels + rows).ravel(), minlength=(hi - lo) * levels)
        out[lo - start : hi - start] = entropies_from_counts(counts.reshape(hi - lo, levels))
    return out


def _worker(args):
    return random_block_entropies(*args)


def simulate_entropies(block_pixels, levels, trials, seed, workers=1):
    """Entropies of ``trials`` random blocks in trial-index order, optionally in parallel."""
    seed = _rng.check_seed(seed)
    if workers <= 1:
        return random_block_entropies(block_pixels, levels, 0, trials, seed)
    bounds = np.linspace(0, trials, workers + 1).astype(int)
    jobs = [(block_pixels, levels, int(a), int(b), seed) for a, b in zip(bounds[:-1], bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_worker, jobs))
    return np.concatenate(parts)


@dataclass(frozen=True)
class RhoEstimate:
    """Estimated ``E|H - mu_H|^3 / sigma_H^3`` with its bootstrap standard error."""

    ratio: float
    stderr: float
    trials: int
    block_pixels: int
    levels: int
    seed: int
    sample_mean: float
    sample_std: float

    def __float__(self):
        return self.ratio


def estimate_rho_ratio(block_pixels, levels, trials, seed, workers=1):
    """Monte Carlo estimate of the normalised third absolute central moment.

    The moment is centred on, and normalised by, the closed-form ``mu_H`` and
    ``sigma_H`` rather than sample statistics.
    """
    if int(trials) != trials or trials < 1000:
        raise DomainError(f"trials must be an integer >= 1000, got {trials}")
    trials = int(trials)
    m = entropy_moments(block_pixels, levels)
    if m.sigma_h == 0:
        raise DegenerateMomentsError(
            f"sigma_H is zero for MN={block_pixels}, L={levels}; the ratio is undefined"
        )
    h = simulate_entropies(m.block_pixels, m.levels, trials, seed, workers)
    cubes = np.abs(h - m.mu_h) ** 3
    scale = m.sigma_h**3
    ratio = math.fsum(cubes.tolist()) / trials / scale

    boot_rng = _rng.generator(seed, _rng.BOOTSTRAP)
    boot = np.empty(BOOTSTRAP_RESAMPLES)
    for b in range(BOOTSTRAP_RESAMPLES):
        boot[b] = cubes[boot_rng.integers(0, trials, size=trials)].mean() / scale
    return RhoEstimate(
        ratio=ratio,
        stderr=float(boot.std(ddof=1)),
        trials=trials,
        block_pixels=m.block_pixels,
        levels=m.levels,
        seed=_rng.check_seed(seed),
        sample_mean=math.fsum(h.tolist()) / trials,
        sample_std=float(h.std(ddof=1)),
    )
