import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import properties
from blockentropy import ImageGrid
from blockentropy.errors import DomainError, ShapeError
from blockentropy.sampler import BlockSpec
from blockentropy.shuffle import ShuffleKey, ShuffleMode, shuffle, unshuffle
from synthetic import binary_logo, constant

MODES = list(ShuffleMode)


def test_mode_values():
    assert ShuffleMode("pixel") is ShuffleMode.PIXEL_WISE
    assert ShuffleMode("rowcol") is ShuffleMode.ROW_COLUMN_WISE


def test_key_validation():
    with pytest.raises(ValueError):
        ShuffleKey(0, "diagonal", BlockSpec(2, 2))
    with pytest.raises(DomainError):
        ShuffleKey(-1, "pixel", BlockSpec(2, 2))


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("size", [1, 2, 16, 32, 64, 128, 256])
def test_round_trip_all_sizes(mode, size):
    # one generator per block makes tiny blocks on a full image slow
    img = binary_logo(256) if size >= 16 else ImageGrid(binary_logo(256).pixels[96:160, 96:160], 2)
    for seed in range(3):
        key = ShuffleKey(seed, mode, BlockSpec(size, size))
        out = shuffle(img, key)
        assert unshuffle(out, key) == img
        assert out.histogram().tolist() == img.histogram().tolist()


@pytest.mark.parametrize("mode", MODES)
def test_round_trip_hundred_seeds(mode):
    img = ImageGrid(np.random.default_rng(3).integers(0, 256, size=(32, 48)), 256)
    for seed in range(100):
        key = ShuffleKey(seed, mode, BlockSpec(8, 16))
        assert unshuffle(shuffle(img, key), key) == img


@given(
    properties.seeds, st.sampled_from(["pixel", "rowcol"]), st.integers(1, 6), st.integers(1, 6),
    st.integers(1, 4), st.integers(1, 4), st.integers(2, 256),
)
def test_round_trip_property(seed, mode, br, bc, nr, nc, levels):
    properties.check_shuffle_roundtrip(seed, mode, br, bc, nr, nc, levels)


def test_pixels_stay_in_their_block():
    # label every pixel by its block; the labels must not move
    img = ImageGrid(np.kron(np.arange(16).reshape(4, 4), np.ones((8, 8), dtype=int)), 16)
    for mode in MODES:
        assert shuffle(img, ShuffleKey(5, mode, BlockSpec(8, 8))) == img


def test_rowcol_is_separable():
    # distinct values expose the permutation; the result must be P_r X P_c
    px = np.arange(64).reshape(8, 8)
    out = shuffle(ImageGrid(px, 64), ShuffleKey(2, "rowcol", BlockSpec(8, 8))).pixels
    rows = out[:, 0] // 8
    cols = out[0] % 8
    assert np.array_equal(out, px[np.ix_(rows, cols)])


def test_rowcol_2x2_arrangements():
    px = np.array([[0, 1], [2, 3]])
    img = ImageGrid(px, 4)
    seen = {shuffle(img, ShuffleKey(s, "rowcol", BlockSpec(2, 2))).pixels.tobytes() for s in range(200)}
    separable = {px[np.ix_(r, c)].astype(np.uint8).tobytes()
                 for r in itertools.permutations(range(2)) for c in itertools.permutations(range(2))}
    assert seen == separable
    assert len(seen) == 4


def test_pixel_2x2_reaches_all_arrangements():
    img = ImageGrid(np.array([[0, 1], [2, 3]]), 4)
    seen = {shuffle(img, ShuffleKey(s, "pixel", BlockSpec(2, 2))).pixels.tobytes() for s in range(2000)}
    assert len(seen) == 24


def test_mismatched_key_does_not_invert():
    img = ImageGrid(np.random.default_rng(0).integers(0, 256, size=(32, 32)), 256)
    failures = 0
    for seed in range(100):
        out = shuffle(img, ShuffleKey(seed, "pixel", BlockSpec(16, 16)))
        if unshuffle(out, ShuffleKey(seed + 1, "pixel", BlockSpec(16, 16))) != img:
            failures += 1
    assert failures == 100


def test_constant_image_unchanged():
    img = constant(64, 64, 9, 256)
    for mode in MODES:
        assert shuffle(img, ShuffleKey(1, mode, BlockSpec(16, 16))) == img


def test_seed_determinism():
    img = binary_logo(256)
    key = ShuffleKey(12, "pixel", BlockSpec(32, 32))
    assert shuffle(img, key) == shuffle(img, key)
    assert shuffle(img, key) != shuffle(img, ShuffleKey(13, "pixel", BlockSpec(32, 32)))


def test_indivisible_image():
    with pytest.raises(ShapeError):
        shuffle(constant(30, 32, 0, 2), ShuffleKey(0, "pixel", BlockSpec(16, 16)))
