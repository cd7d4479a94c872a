"""Binary on-disk cache of Floquet eigensystems keyed by (j, kappa, alpha).

Eigendecomposition dominates runtime for parameter scans, so the CLI
caches each eigensystem the first time it is computed.  File layout
(all fields little-endian, in order):

    offset  size            field
    0       8               magic  b"KTEIGSYS"
    8       u4              format version (currently 1)
    12      f8              j
    20      f8              kappa
    28      f8              alpha
    36      u4              dim (= 2j + 1)
    40      dim * f8        quasienergies, ascending
    ...     dim * i1        parities (+1 even, -1 odd)
    ...     dim*dim * c16   eigenvectors, C (row-major) order;
                            column i pairs with quasienergy i

Files are named by the first 16 hex digits of the SHA-256 of the
parameter triple, so a parameter mismatch simply misses the cache.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .floquet import FloquetEigensystem, KickedTopParams, build_floquet, diagonalize, parity_operator

__all__ = ["cache_path", "save_eigensystem", "load_eigensystem", "cached_eigensystem"]

MAGIC = b"KTEIGSYS"
VERSION = 1


class CacheFormatError(RuntimeError):
    """Unreadable or incompatible cache file."""


def cache_key(params: KickedTopParams) -> str:
    blob = f"{params.j:.17g}|{params.kappa:.17g}|{params.alpha:.17g}".encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def cache_path(cache_dir, params: KickedTopParams) -> Path:
    return Path(cache_dir) / f"eig_{cache_key(params)}.ktc"


def save_eigensystem(path, eig: FloquetEigensystem) -> None:
    if eig.params is None:
        raise ValueError("cannot cache an eigensystem without params")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    p = eig.params
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        np.array([VERSION], dtype="<u4").tofile(fh)
        np.array([p.j, p.kappa, p.alpha], dtype="<f8").tofile(fh)
        np.array([eig.dim], dtype="<u4").tofile(fh)
        eig.quasienergies.astype("<f8").tofile(fh)
        eig.parities.astype("<i1").tofile(fh)
        np.ascontiguousarray(eig.eigenvectors).astype("<c16").tofile(fh)


def load_eigensystem(path) -> FloquetEigensystem:
    """Read a cached eigensystem; raises CacheFormatError on any mismatch."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise CacheFormatError(f"{path}: bad magic {magic!r}")
        version = int(np.fromfile(fh, dtype="<u4", count=1)[0])
        if version != VERSION:
            raise CacheFormatError(f"{path}: version {version}, expected {VERSION}")
        j, kappa, alpha = np.fromfile(fh, dtype="<f8", count=3)
        dim = int(np.fromfile(fh, dtype="<u4", count=1)[0])
        if dim != round(2 * j) + 1:
            raise CacheFormatError(f"{path}: dim {dim} inconsistent with j={j}")
        nu = np.fromfile(fh, dtype="<f8", count=dim)
        parities = np.fromfile(fh, dtype="<i1", count=dim)
        vecs = np.fromfile(fh, dtype="<c16", count=dim * dim)
        if nu.size != dim or parities.size != dim or vecs.size != dim * dim:
            raise CacheFormatError(f"{path}: truncated file")
    return FloquetEigensystem(
        quasienergies=nu.astype(float),
        eigenvectors=vecs.astype(complex).reshape(dim, dim),
        parities=parities.astype(np.int8),
        params=KickedTopParams(alpha=float(alpha), kappa=float(kappa), j=int(round(j))),
    )


def cached_eigensystem(params: KickedTopParams, cache_dir=None) -> FloquetEigensystem:
    """Compute (or fetch) the full parity-resolved eigensystem of F.

    With ``cache_dir`` set, a valid cache file for these exact parameters
    is used when present, and new results are written back.  Unreadable
    or mismatched files are silently recomputed and overwritten.
    """
    if cache_dir is not None:
        path = cache_path(cache_dir, params)
        if path.exists():
            try:
                eig = load_eigensystem(path)
                if eig.params == params:
                    return eig
            except (CacheFormatError, OSError):
                pass
    eig = diagonalize(build_floquet(params), parity_operator(params.basis))
    if cache_dir is not None:
        save_eigensystem(cache_path(cache_dir, params), eig)
    return eig
