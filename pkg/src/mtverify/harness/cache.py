"""Content-addressed result store for expensive subject runs.

Keys are sha256 digests over the full content that determines a run:
subject configuration, dataset bytes, and seed. Values are JSON
documents (plus an optional sidecar file for model parameters) written
atomically, so an interrupted suite can resume without recomputing or
ever observing a half-written entry.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np


def digest_array(a):
    a = np.ascontiguousarray(a)
    h = hashlib.sha256()
    h.update(str(a.dtype).encode())
    h.update(str(a.shape).encode())
    h.update(a.tobytes())
    return h.hexdigest()


def digest_dataset(dset):
    """Digest of a labeled set: payload arrays plus the class budget."""
    payload = dset.features if hasattr(dset, "features") else dset.images
    h = hashlib.sha256()
    h.update(digest_array(payload).encode())
    h.update(digest_array(dset.labels).encode())
    h.update(str(dset.class_count).encode())
    return h.hexdigest()


def cache_key(*parts):
    """Digest of the canonical JSON encoding of the given parts."""
    text = json.dumps(parts, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def atomic_write_bytes(data, path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_json(doc, path):
    atomic_write_bytes(json.dumps(doc, sort_keys=True).encode(), path)


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class ResultCache:
    """Directory of cache entries; a None directory disables caching."""

    def __init__(self, directory):
        self.directory = directory

    @property
    def enabled(self):
        return self.directory is not None

    def path(self, key, suffix=".json"):
        return os.path.join(self.directory, key + suffix)

    def load(self, key):
        if not self.enabled:
            return None
        path = self.path(key)
        if not os.path.exists(path):
            return None
        return read_json(path)

    def store(self, key, doc):
        if self.enabled:
            atomic_write_json(doc, self.path(key))

    def sidecar(self, key, suffix):
        """Path for a non-JSON companion file, or None when disabled."""
        if not self.enabled:
            return None
        os.makedirs(self.directory, exist_ok=True)
        return self.path(key, suffix)
