"""FIPS 140-2 style monobit, poker, runs and long-run tests on 20,000 bits.

Thresholds are data. Two presets ship: ``REFERENCE`` reproduces the intervals
quoted alongside the block entropy comparison experiment (monobit upper bound
10725), and ``FIPS_140_2`` uses the published standard (upper bound 10275).
The two differ only in the monobit interval.
"""

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import BoundsError, ConfigError, LevelError, ShapeError

SEQUENCE_LENGTH = 20_000
RUN_BUCKETS = 6  # lengths 1..5 and >= 6


def _default_runs():
    return {1: (2315, 2685), 2: (1114, 1386), 3: (527, 723), 4: (240, 384), 5: (103, 209), 6: (103, 209)}


@dataclass(frozen=True)
class FipsThresholds:
    monobit: tuple = (9725, 10725)
    poker: tuple = (2.16, 46.17)
    runs: dict = field(default_factory=_default_runs)
    long_run: int = 26

    def __post_init__(self):
        intervals = [("monobit", self.monobit), ("poker", self.poker)]
        intervals += [(f"run{k}", v) for k, v in self.runs.items()]
        for name, (lo, hi) in intervals:
            if not lo < hi:
                raise ConfigError(f"{name} interval must have lower < upper, got {lo}-{hi}")
        if sorted(self.runs) != list(range(1, RUN_BUCKETS + 1)):
            raise ConfigError("run intervals must be given for lengths 1..6")
        if int(self.long_run) != self.long_run or self.long_run < 1:
            raise ConfigError(f"long_run limit must be a positive integer, got {self.long_run}")


REFERENCE = FipsThresholds()
FIPS_140_2 = FipsThresholds(monobit=(9725, 10275))
PRESETS = {"reference": REFERENCE, "fips140-2": FIPS_140_2}


def _pair(text, cast):
    parts = [p for p in text.replace("-", " ").replace(",", " ").split() if p]
    if len(parts) != 2:
        raise ConfigError(f"expected 'lower, upper', got {text!r}")
    return cast(parts[0]), cast(parts[1])


def load_thresholds(path, section="fips"):
    """Read thresholds from an INI-style key-value file.

    Recognised keys in ``[fips]`` (all optional; missing keys fall back to the
    ``preset`` key, itself defaulting to ``reference``)::

        preset   = reference | fips140-2
        monobit  = 9725, 10725
        poker    = 2.16, 46.17
        run1 .. run6 = lower, upper
        long_run = 26
    """
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section(section):
        raise ConfigError(f"config file {path} has no [{section}] section")
    sec = cp[section]
    preset = sec.get("preset", "reference")
    if preset not in PRESETS:
        raise ConfigError(f"unknown threshold preset {preset!r}; choose from {sorted(PRESETS)}")
    base = PRESETS[preset]
    runs = dict(base.runs)
    for k in range(1, RUN_BUCKETS + 1):
        if f"run{k}" in sec:
            runs[k] = _pair(sec[f"run{k}"], int)
    try:
        return FipsThresholds(
            monobit=_pair(sec["monobit"], int) if "monobit" in sec else base.monobit,
            poker=_pair(sec["poker"], float) if "poker" in sec else base.poker,
            runs=runs,
            long_run=sec.getint("long_run", base.long_run),
        )
    except ValueError as exc:
        raise ConfigError(f"bad threshold value in {path}: {exc}") from None


@dataclass(frozen=True, eq=False)
class BitSequence:
    bits: np.ndarray
    source: str = ""

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or bits.size != SEQUENCE_LENGTH:
            raise ShapeError(f"FIPS tests need exactly {SEQUENCE_LENGTH} bits, got shape {bits.shape}")
        if not np.all((bits == 0) | (bits == 1)):
            raise LevelError("bit sequences may only contain 0 and 1")
        bits = bits.astype(np.uint8)
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)


def _bits(seq):
    return seq.bits if isinstance(seq, BitSequence) else BitSequence(seq).bits


def monobit(seq, thr=REFERENCE):
    ones = int(_bits(seq).sum())
    lo, hi = thr.monobit
    return ones, lo < ones < hi


def poker(seq, thr=REFERENCE):
    bits = _bits(seq).reshape(-1, 4).astype(np.int64)
    nibbles = bits @ np.array([8, 4, 2, 1])
    f = np.bincount(nibbles, minlength=16)
    m = len(nibbles)
    x = 16.0 / m * float(np.sum(f * f)) - m
    lo, hi = thr.poker
    return x, lo < x < hi


def run_lengths(bits):
    """Maximal runs as ``(values, lengths)`` arrays in sequence order."""
    bits = np.asarray(bits)
    if bits.size == 0:
        return np.array([], dtype=np.uint8), np.array([], dtype=np.int64)
    edges = np.flatnonzero(np.diff(bits)) + 1
    starts = np.concatenate(([0], edges))
    lengths = np.diff(np.concatenate((starts, [bits.size])))
    return bits[starts], lengths


def run_table(bits):
    """Counts of runs by bit value (row) and length bucket 1..5, >=6 (column)."""
    values, lengths = run_lengths(bits)
    table = np.zeros((2, RUN_BUCKETS), dtype=np.int64)
    np.add.at(table, (values.astype(np.int64), np.minimum(lengths, RUN_BUCKETS) - 1), 1)
    return table


def runs(seq, thr=REFERENCE):
    table = run_table(_bits(seq))
    ok = True
    for length in range(1, RUN_BUCKETS + 1):
        lo, hi = thr.runs[length]
        col = table[:, length - 1]
        ok &= bool(np.all((col >= lo) & (col <= hi)))
    return table, ok


def long_run(seq, limit=26):
    _, lengths = run_lengths(_bits(seq))
    count = int(np.sum(lengths >= limit))
    return count, count == 0


@dataclass(frozen=True)
class FipsReport:
    ones: int
    monobit_pass: bool
    poker_x: float
    poker_pass: bool
    run_table: np.ndarray
    runs_pass: bool
    long_runs: int
    long_run_pass: bool

    @property
    def all_pass(self):
        return self.monobit_pass and self.poker_pass and self.runs_pass and self.long_run_pass

    def as_dict(self):
        return {
            "monobit": {"ones": self.ones, "zeros": SEQUENCE_LENGTH - self.ones, "pass": self.monobit_pass},
            "poker": {"x": self.poker_x, "pass": self.poker_pass},
            "runs": {
                "zeros": self.run_table[0].tolist(),
                "ones": self.run_table[1].tolist(),
                "pass": self.runs_pass,
            },
            "long_run": {"count": self.long_runs, "pass": self.long_run_pass},
            "all_pass": self.all_pass,
        }


def run_all(seq, thr=REFERENCE):
    seq = seq if isinstance(seq, BitSequence) else BitSequence(seq)
    ones, mp = monobit(seq, thr)
    x, pp = poker(seq, thr)
    table, rp = runs(seq, thr)
    lr, lp = long_run(seq, thr.long_run)
    return FipsReport(ones, mp, x, pp, table, rp, lr, lp)


def extract_bits(image, roi_rows=100, roi_cols=200, seed=0):
    """Read a randomly placed ROI of a binary image row by row as 20,000 bits."""
    if image.levels != 2:
        raise LevelError(f"bit extraction needs a binary (L=2) image, got L={image.levels}")
    if roi_rows * roi_cols != SEQUENCE_LENGTH:
        raise ShapeError(f"ROI must hold {SEQUENCE_LENGTH} pixels, got {roi_rows}x{roi_cols}")
    if roi_rows > image.rows or roi_cols > image.cols:
        raise BoundsError(f"a {roi_rows}x{roi_cols} ROI does not fit in a {image.rows}x{image.cols} image")
    rng = _rng.generator(seed, _rng.ROI)
    r = int(rng.integers(0, image.rows - roi_rows + 1))
    c = int(rng.integers(0, image.cols - roi_cols + 1))
    roi = image.pixels[r : r + roi_rows, c : c + roi_cols]
    return BitSequence(roi.ravel(), source=f"roi {roi_rows}x{roi_cols} at ({r}, {c})")
