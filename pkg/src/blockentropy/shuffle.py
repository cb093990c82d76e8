"""Block-local permutation ciphers.

``PIXEL_WISE`` applies an arbitrary permutation of the ``M*N`` positions inside
each aligned block. ``ROW_COLUMN_WISE`` restricts it to a separable one: a
permutation of the block's rows followed by a permutation of its columns.
A block equal to the whole image gives a global shuffle.
"""

import enum
from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import ShapeError
from .grid import ImageGrid
from .sampler import BlockSpec


class ShuffleMode(str, enum.Enum):
    PIXEL_WISE = "pixel"
    ROW_COLUMN_WISE = "rowcol"


@dataclass(frozen=True)
class ShuffleKey:
    seed: int
    mode: ShuffleMode
    block: BlockSpec

    def __post_init__(self):
        _rng.check_seed(self.seed)
        object.__setattr__(self, "mode", ShuffleMode(self.mode))


def _blocks(image, key):
    m, n = key.block.rows, key.block.cols
    if image.rows % m or image.cols % n:
        raise ShapeError(
            f"image {image.rows}x{image.cols} is not divisible into {key.block} shuffle blocks"
        )
    for br in range(image.rows // m):
        for bc in range(image.cols // n):
            rng = _rng.generator(key.seed, _rng.SHUFFLE, br, bc)
            yield rng, slice(br * m, (br + 1) * m), slice(bc * n, (bc + 1) * n)


def _apply(image, key, inverse):
    out = np.empty_like(image.pixels)
    m, n = key.block.rows, key.block.cols
    for rng, rs, cs in _blocks(image, key):
        src = image.pixels[rs, cs]
        if key.mode is ShuffleMode.PIXEL_WISE:
            perm = rng.permutation(m * n)
            if inverse:
                dst = np.empty(m * n, dtype=src.dtype)
                dst[perm] = src.ravel()
                out[rs, cs] = dst.reshape(m, n)
            else:
                out[rs, cs] = src.ravel()[perm].reshape(m, n)
        else:
            rperm = rng.permutation(m)
            cperm = rng.permutation(n)
            if inverse:
                block = np.empty_like(src)
                block[np.ix_(rperm, cperm)] = src
                out[rs, cs] = block
            else:
                out[rs, cs] = src[np.ix_(rperm, cperm)]
    return ImageGrid(out, image.levels)


def shuffle(image, key):
    """Permute pixels within every ``key.block`` tile; the histogram is unchanged."""
    return _apply(image, key, inverse=False)


def unshuffle(image, key):
    """Inverse of :func:`shuffle` for the same key."""
    return _apply(image, key, inverse=True)
