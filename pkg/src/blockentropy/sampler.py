"""Random non-overlapping block selection on the aligned tile grid.

The image is cut into a grid of full ``M x N`` tiles anchored at multiples of
the block size; any remainder strip on the bottom or right edge is never
used. ``k`` tiles are drawn uniformly without replacement, so the selected
blocks are disjoint by construction.
"""

from dataclasses import dataclass

import numpy as np

from . import _rng
from .entropy import Histogram
from .errors import BoundsError, DomainError, InsufficientTilesError


@dataclass(frozen=True)
class BlockSpec:
    rows: int
    cols: int

    def __post_init__(self):
        for name in ("rows", "cols"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise DomainError(f"block {name} must be a positive integer, got {v}")
            object.__setattr__(self, name, int(v))

    @property
    def pixels(self):
        return self.rows * self.cols

    def __str__(self):
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True)
class BlockSample:
    positions: tuple
    spec: BlockSpec
    seed: int


def tile_grid(image_rows, image_cols, spec):
    """Number of full tiles along each axis."""
    return image_rows // spec.rows, image_cols // spec.cols


def sample_blocks(image_rows, image_cols, spec, k, seed):
    """Pick ``k`` distinct aligned tiles; positions are ``(row, col)`` top-left anchors.

    Positions are returned in draw order. Reproducible for equal arguments.
    """
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    k = int(k)
    seed = _rng.check_seed(seed)
    tr, tc = tile_grid(image_rows, image_cols, spec)
    available = tr * tc
    if k > available:
        raise InsufficientTilesError(k, available)
    rng = _rng.generator(seed, _rng.BLOCKS)
    picks = rng.choice(available, size=k, replace=False)
    positions = tuple((int(t // tc) * spec.rows, int(t % tc) * spec.cols) for t in picks)
    return BlockSample(positions, spec, seed)


def extract_block(image, anchor, spec):
    """Histogram of the ``spec``-sized block whose top-left pixel is ``anchor``."""
    r, c = anchor
    if r < 0 or c < 0 or r + spec.rows > image.rows or c + spec.cols > image.cols:
        raise BoundsError(
            f"block {spec} at {anchor} does not fit in a {image.rows}x{image.cols} image"
        )
    block = image.pixels[r : r + spec.rows, c : c + spec.cols]
    return Histogram(np.bincount(block.ravel(), minlength=image.levels))


def tile_histograms(image, spec):
    """Histograms of every aligned tile, shape ``(tile_rows, tile_cols, L)``."""
    tr, tc = tile_grid(image.rows, image.cols, spec)
    if tr == 0 or tc == 0:
        return np.zeros((tr, tc, image.levels), dtype=np.int64)
    px = image.pixels[: tr * spec.rows, : tc * spec.cols].astype(np.int64)
    tiles = px.reshape(tr, spec.rows, tc, spec.cols).transpose(0, 2, 1, 3).reshape(tr * tc, -1)
    offsets = (np.arange(tr * tc, dtype=np.int64) * image.levels)[:, None]
    counts = np.bincount((tiles + offsets).ravel(), minlength=tr * tc * image.levels)
    return counts.reshape(tr, tc, image.levels)
