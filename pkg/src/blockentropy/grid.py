from dataclasses import dataclass

import numpy as np

from .errors import LevelError, ShapeError


@dataclass(frozen=True, eq=False)
class ImageGrid:
    """A rectangular raster of intensity levels in ``[0, levels - 1]``.

    ``pixels`` is stored as a read-only 2-D integer array (row-major).
    """

    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ShapeError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        if not np.issubdtype(px.dtype, np.integer):
            if not np.all(np.mod(px, 1) == 0):
                raise LevelError("pixel values must be integers")
        levels = int(self.levels)
        if levels < 2:
            raise LevelError(f"an image needs at least 2 levels, got {levels}")
        dtype = np.uint8 if levels <= 256 else np.uint16 if levels <= 65536 else np.int64
        if px.size and (px.min() < 0 or px.max() > levels - 1):
            raise LevelError(
                f"pixel values must lie in [0, {levels - 1}], found range [{px.min()}, {px.max()}]"
            )
        px = np.array(px, dtype=dtype, copy=True, order="C")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "levels", levels)

    @property
    def rows(self):
        return self.pixels.shape[0]

    @property
    def cols(self):
        return self.pixels.shape[1]

    @property
    def shape(self):
        return self.pixels.shape

    def histogram(self):
        return np.bincount(self.pixels.ravel(), minlength=self.levels).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.levels == other.levels and np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"ImageGrid(rows={self.rows}, cols={self.cols}, levels={self.levels})"
