"""Lossless grayscale image files: PGM (P2 ascii, P5 binary) and PNG.

Only what the test needs is supported: PGM with maxval <= 255, and
non-interlaced PNG with 8-bit samples (gray, RGB, palette, with or without
alpha) or 1/2/4-bit gray. Colour inputs must name a channel to analyse.

Binary images are held internally with ``levels == 2`` and values {0, 1}
whatever their on-disk encoding ({0, 1} or {0, 255}).
"""

import enum
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import ImageFormatError, ImageParseError, LevelError, UsageError
from .grid import ImageGrid

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_LEVELS_KEY = b"blockentropy-levels"


class Channel(str, enum.Enum):
    R = "R"
    G = "G"
    B = "B"
    LUMA = "Luma"


class ImageFormat(str, enum.Enum):
    PGM_ASCII = "pgm-ascii"
    PGM_BINARY = "pgm"
    PNG = "png"


def _format_for(path, fmt):
    if fmt is not None:
        try:
            return ImageFormat(fmt)
        except ValueError:
            raise ImageFormatError(f"unknown image format {fmt!r}") from None
    suffix = Path(path).suffix.lower()
    if suffix == ".png":
        return ImageFormat.PNG
    if suffix in (".pgm", ".pnm"):
        return ImageFormat.PGM_BINARY
    raise ImageFormatError(f"cannot infer image format from file name {path}")


# -- PGM ---------------------------------------------------------------------


def _pgm_tokens(data, start, count):
    """Read ``count`` whitespace separated header tokens, skipping comments."""
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i : i + 1] == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        if i >= n:
            raise ImageParseError("truncated PGM header", i)
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
            j += 1
        tok = data[i:j]
        if not tok.isdigit():
            raise ImageParseError(f"expected a decimal number, found {tok[:16]!r}", i)
        tokens.append((int(tok), i))
        i = j
    return tokens, i


def decode_pgm(data):
    """Return ``(pixels, maxval)`` for P2/P5 data."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageParseError(f"not a PGM file (magic {magic!r})", 0)
    header, end = _pgm_tokens(data, 2, 3)
    (w, w_at), (h, h_at), (maxval, m_at) = header
    if w < 1 or h < 1:
        raise ImageParseError(f"invalid PGM size {w}x{h}", w_at)
    if not 1 <= maxval <= 255:
        if maxval > 255:
            raise ImageFormatError(f"PGM maxval {maxval} (16-bit) is not supported")
        raise ImageParseError(f"invalid PGM maxval {maxval}", m_at)
    if magic == b"P2":
        values, _ = _pgm_tokens(data, end, w * h)
        px = np.array([v for v, _ in values], dtype=np.int64)
        for v, at in values:
            if v > maxval:
                raise ImageParseError(f"pixel value {v} exceeds maxval {maxval}", at)
    else:
        if end >= len(data) or not data[end : end + 1].isspace():
            raise ImageParseError("expected a single whitespace byte before the raster", end)
        start = end + 1
        raw = data[start : start + w * h]
        if len(raw) < w * h:
            raise ImageParseError(f"raster truncated: need {w * h} bytes, found {len(raw)}", start + len(raw))
        px = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
        bad = np.flatnonzero(px > maxval)
        if bad.size:
            raise ImageParseError(f"pixel value {px[bad[0]]} exceeds maxval {maxval}", start + int(bad[0]))
    return px.reshape(h, w), maxval


def encode_pgm(pixels, maxval, ascii_=False):
    h, w = pixels.shape
    if ascii_:
        lines = [f"P2\n{w} {h}\n{maxval}\n".encode()]
        for row in pixels:
            lines.append((" ".join(str(int(v)) for v in row) + "\n").encode())
        return b"".join(lines)
    return f"P5\n{w} {h}\n{maxval}\n".encode() + pixels.astype(np.uint8).tobytes()


# -- PNG ---------------------------------------------------------------------


def _chunk(tag, payload):
    body = tag + payload
    return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)


def _paeth_row(line, prev, bpp):
    out = bytearray(line)
    for i in range(len(out)):
        a = out[i - bpp] if i >= bpp else 0
        b = prev[i]
        c = prev[i - bpp] if i >= bpp else 0
        p = a + b - c
        pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
        if pa <= pb and pa <= pc:
            pred = a
        elif pb <= pc:
            pred = b
        else:
            pred = c
        out[i] = (out[i] + pred) & 0xFF
    return out


def _unfilter(raw, height, stride, bpp, offset):
    rows = []
    prev = bytearray(stride)
    pos = 0
    for y in range(height):
        if pos + 1 + stride > len(raw):
            raise ImageParseError(f"image data truncated at scanline {y}", offset)
        ftype = raw[pos]
        line = bytearray(raw[pos + 1 : pos + 1 + stride])
        pos += 1 + stride
        if ftype == 0:
            cur = line
        elif ftype == 1:
            cur = line
            for i in range(bpp, stride):
                cur[i] = (cur[i] + cur[i - bpp]) & 0xFF
        elif ftype == 2:
            cur = bytearray(((np.frombuffer(line, np.uint8).astype(np.int32)
                              + np.frombuffer(bytes(prev), np.uint8)) & 0xFF).astype(np.uint8).tobytes())
        elif ftype == 3:
            cur = line
            for i in range(stride):
                a = cur[i - bpp] if i >= bpp else 0
                cur[i] = (cur[i] + ((a + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:
            cur = _paeth_row(line, prev, bpp)
        else:
            raise ImageParseError(f"unknown PNG filter type {ftype} on scanline {y}", offset)
        rows.append(bytes(cur))
        prev = cur
    return b"".join(rows)


_CHANNELS = {0: 1, 2: 3, 3: 1, 4: 2, 6: 4}


def decode_png(data):
    """Return ``(samples, info)``; samples have shape (h, w, channels) for colour input."""
    if data[:8] != PNG_SIGNATURE:
        raise ImageParseError("not a PNG file (bad signature)", 0)
    pos = 8
    ihdr = None
    idat = []
    idat_offset = None
    palette = None
    text = {}
    while True:
        if pos + 8 > len(data):
            raise ImageParseError("truncated PNG chunk header", pos)
        length, tag = struct.unpack(">I4s", data[pos : pos + 8])
        end = pos + 12 + length
        if end > len(data):
            raise ImageParseError(f"truncated {tag!r} chunk", pos)
        payload = data[pos + 8 : pos + 8 + length]
        (crc,) = struct.unpack(">I", data[end - 4 : end])
        if zlib.crc32(tag + payload) & 0xFFFFFFFF != crc:
            raise ImageParseError(f"CRC mismatch in {tag.decode('latin-1')} chunk", pos)
        if tag == b"IHDR":
            if length != 13:
                raise ImageParseError("bad IHDR length", pos)
            ihdr = struct.unpack(">IIBBBBB", payload)
        elif tag == b"PLTE":
            palette = np.frombuffer(payload, np.uint8).reshape(-1, 3)
        elif tag == b"IDAT":
            if idat_offset is None:
                idat_offset = pos
            idat.append(payload)
        elif tag == b"tEXt":
            key, _, value = payload.partition(b"\0")
            text[key] = value
        elif tag == b"IEND":
            break
        pos = end
    if ihdr is None:
        raise ImageParseError("missing IHDR chunk", 8)
    width, height, depth, ctype, _, _, interlace = ihdr
    if ctype not in _CHANNELS:
        raise ImageParseError(f"invalid PNG colour type {ctype}", 8)
    if interlace:
        raise ImageFormatError("interlaced PNG is not supported")
    if depth == 16:
        raise ImageFormatError("16-bit PNG is not supported")
    if depth != 8 and ctype != 0 and ctype != 3:
        raise ImageFormatError(f"unsupported PNG bit depth {depth} for colour type {ctype}")
    if depth not in (1, 2, 4, 8):
        raise ImageFormatError(f"unsupported PNG bit depth {depth}")
    if not idat:
        raise ImageParseError("missing IDAT chunk", pos)
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise ImageParseError(f"corrupt image data: {exc}", idat_offset) from None
    channels = _CHANNELS[ctype]
    bits_pp = depth * channels
    stride = (width * bits_pp + 7) // 8
    flat = _unfilter(raw, height, stride, max(1, bits_pp // 8), idat_offset)
    buf = np.frombuffer(flat, np.uint8).reshape(height, stride)
    if depth < 8:
        bits = np.unpackbits(buf, axis=1)
        per = bits.reshape(height, -1, depth)[:, :width, :]
        weights = 1 << np.arange(depth - 1, -1, -1)
        samples = (per * weights).sum(axis=2).astype(np.int64)
    else:
        samples = buf.reshape(height, width, channels).astype(np.int64)
    if ctype == 3:
        if palette is None:
            raise ImageParseError("palette image without PLTE chunk", 8)
        idx = samples[..., 0] if samples.ndim == 3 else samples
        if idx.max() >= len(palette):
            raise ImageParseError("palette index out of range", idat_offset)
        samples = palette[idx].astype(np.int64)
        ctype = 2
    elif samples.ndim == 3 and channels == 1:
        samples = samples[..., 0]
    if ctype in (4, 6):
        samples = samples[..., :-1]  # alpha is not analysed
        if ctype == 4:
            samples = samples[..., 0]
    levels = text.get(_LEVELS_KEY)
    return samples, {"depth": depth, "color": ctype in (2, 6), "levels": int(levels) if levels else None}


def encode_png(pixels, levels):
    h, w = pixels.shape
    depth = next((d for d in (1, 2, 4) if levels == 1 << d), 8)
    if depth < 8:
        per = ((pixels[..., None].astype(np.uint8) >> np.arange(depth - 1, -1, -1, dtype=np.uint8)) & 1)
        rows = np.packbits(per.reshape(h, -1), axis=1)
    else:
        rows = pixels.astype(np.uint8)
    raw = b"".join(b"\0" + r.tobytes() for r in rows)
    out = [PNG_SIGNATURE, _chunk(b"IHDR", struct.pack(">IIBBBBB", w, h, depth, 0, 0, 0, 0))]
    if depth == 8 and levels != 256:
        out.append(_chunk(b"tEXt", _LEVELS_KEY + b"\0" + str(levels).encode()))
    out.append(_chunk(b"IDAT", zlib.compress(raw, 9)))
    out.append(_chunk(b"IEND", b""))
    return b"".join(out)


# -- public API --------------------------------------------------------------


def _select_channel(samples, channel):
    if channel is None:
        raise UsageError("colour image: choose a channel (R, G, B or Luma) to analyse")
    channel = Channel(channel)
    if channel is Channel.LUMA:
        r, g, b = (samples[..., i] for i in range(3))
        # ITU-R BT.601 weights in integer arithmetic, rounded half up.
        return (299 * r + 587 * g + 114 * b + 500) // 1000
    return samples[..., "RGB".index(channel.value)]


def _apply_levels(pixels, levels, levels_override, maxval):
    if levels_override is None:
        return ImageGrid(pixels, levels)
    levels_override = int(levels_override)
    if levels_override == 2:
        values = set(np.unique(pixels).tolist())
        if values <= {0, 1}:
            return ImageGrid(pixels, 2)
        if values <= {0, maxval}:
            return ImageGrid((pixels == maxval).astype(np.uint8), 2)
        raise LevelError(
            f"cannot read as binary: pixel values {sorted(values)[:8]} are not a subset of {{0, {maxval}}}"
        )
    if pixels.max() >= levels_override:
        raise LevelError(f"pixel value {pixels.max()} does not fit in {levels_override} levels")
    return ImageGrid(pixels, levels_override)


def load(path, levels_override=None, channel=None):
    """Read an image file as an :class:`ImageGrid` with ``L = maxval + 1``."""
    data = Path(path).read_bytes()
    if data[:8] == PNG_SIGNATURE:
        samples, info = decode_png(data)
        if info["color"]:
            samples = _select_channel(samples, channel)
            maxval = 255
        else:
            maxval = (1 << info["depth"]) - 1
        levels = info["levels"] or maxval + 1
        return _apply_levels(samples, levels, levels_override, maxval)
    if data[:2] in (b"P2", b"P5"):
        pixels, maxval = decode_pgm(data)
        return _apply_levels(pixels, maxval + 1, levels_override, maxval)
    raise ImageParseError("unrecognised image file (expected PGM P2/P5 or PNG)", 0)


def save(image, path, fmt=None):
    """Write ``image`` losslessly; the format follows ``fmt`` or the file suffix."""
    fmt = _format_for(path, fmt)
    if image.levels > 256:
        raise ImageFormatError(f"cannot store {image.levels} levels in an 8-bit format")
    if fmt is ImageFormat.PNG:
        data = encode_png(image.pixels, image.levels)
    else:
        data = encode_pgm(image.pixels, image.levels - 1, ascii_=fmt is ImageFormat.PGM_ASCII)
    Path(path).write_bytes(data)
