"""Download public test images listed in a dataset manifest.

A manifest is JSON::

    {"name": "...", "base_url": "https://host/path/",
     "files": [{"name": "a.tiff", "url": "optional absolute url", "sha256": "hex or null"}]}

File URLs default to ``base_url + name``. ``BLOCKENTROPY_MIRROR`` replaces
``base_url``; ``BLOCKENTROPY_OFFLINE=1`` skips all downloads.
"""

import hashlib
import json
import os
import urllib.error
import urllib.request
from importlib import resources
from pathlib import Path

from .errors import DigestMismatchError, FetchError, UsageError

MIRROR_ENV = "BLOCKENTROPY_MIRROR"
OFFLINE_ENV = "BLOCKENTROPY_OFFLINE"


def builtin_datasets():
    root = resources.files("blockentropy") / "datasets"
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_manifest(dataset):
    """Resolve ``dataset`` as a built-in dataset id or a path to a manifest file."""
    path = Path(dataset)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        res = resources.files("blockentropy") / "datasets" / f"{dataset}.json"
        if not res.is_file():
            raise UsageError(f"unknown dataset {dataset!r}; built-in datasets: {builtin_datasets()}")
        text = res.read_text()
    try:
        manifest = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FetchError(f"malformed dataset manifest {dataset}: {exc}") from None
    if not isinstance(manifest.get("files"), list):
        raise FetchError(f"dataset manifest {dataset} has no 'files' list")
    return manifest


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def offline():
    return os.environ.get(OFFLINE_ENV, "").strip().lower() not in ("", "0", "false", "no")


def fetch(dataset, dest, timeout=60, log=print):
    """Download every file of ``dataset`` into ``dest``; returns ``[(path, sha256, verified)]``.

    A file whose digest does not match the manifest is deleted and raises
    :class:`DigestMismatchError`. Entries without a pinned digest are kept but
    reported as unverified.
    """
    manifest = load_manifest(dataset)
    if offline():
        log(f"offline mode ({OFFLINE_ENV} set): skipping download of {manifest.get('name', dataset)}")
        return []
    base = os.environ.get(MIRROR_ENV) or manifest.get("base_url", "")
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    done = []
    for entry in manifest["files"]:
        name = entry["name"]
        url = entry.get("url") or base + name
        if os.environ.get(MIRROR_ENV):
            url = base + name
        target = dest / name
        tmp = target.with_name(target.name + ".part")
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp, open(tmp, "wb") as out:
                for block in iter(lambda: resp.read(1 << 16), b""):
                    out.write(block)
        except (urllib.error.URLError, OSError) as exc:
            tmp.unlink(missing_ok=True)
            raise FetchError(f"failed to download {url}: {exc}") from None
        digest = sha256_file(tmp)
        expected = entry.get("sha256")
        if expected and digest != expected.lower():
            tmp.unlink()
            raise DigestMismatchError(f"{name}: expected sha256 {expected}, got {digest}")
        tmp.replace(target)
        verified = bool(expected)
        log(f"{target}  sha256={digest}  {'verified' if verified else 'UNVERIFIED (no pinned digest)'}")
        done.append((target, digest, verified))
    return done
