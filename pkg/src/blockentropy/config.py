"""Key-value settings file shared by the CLI commands.

INI syntax, two optional sections::

    [test]
    rho_ratio = 1.6

    [fips]
    preset = reference
    monobit = 9725, 10725
"""

import configparser
from pathlib import Path

from .errors import ConfigError
from .ztest import DEFAULT_RHO_RATIO


def read_rho_ratio(path):
    if path is None:
        return DEFAULT_RHO_RATIO
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    try:
        value = cp.getfloat("test", "rho_ratio", fallback=DEFAULT_RHO_RATIO)
    except ValueError as exc:
        raise ConfigError(f"bad rho_ratio in {path}: {exc}") from None
    if not value > 0:
        raise ConfigError(f"rho_ratio must be positive, got {value}")
    return value


def write_rho_ratio(path, value):
    """Set ``[test] rho_ratio`` in ``path``, keeping any other settings."""
    cp = configparser.ConfigParser()
    if Path(path).exists():
        cp.read(path)
    if not cp.has_section("test"):
        cp.add_section("test")
    cp.set("test", "rho_ratio", repr(float(value)))
    with open(path, "w") as fh:
        cp.write(fh)
