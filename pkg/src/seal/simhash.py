"""SimHash patch keys and seeded Gaussian patch noise.

Byte layouts (all hashes are SHA-256, integers 64-bit big-endian):

* projection seed  ``H(enc(i) || enc(j) || salt)`` with patch ``i`` in
  ``[0, n)`` and bit ``j`` in ``[1, b]``
* patch seed       ``H(bits || enc(i) || salt)`` with one byte per bit,
  ``0x01`` for +1 and ``0x00`` for -1

Projection vectors and patch noise are the first ``d`` (resp. ``p``) normals
of the DRBG stream of their seed.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .drbg import SEED_BYTES, encode_u64, normals, normals_many, sha256
from .semantic import as_vector

DEFAULT_BITS = 7
MAX_SEARCH_BITS = 20


def check_salt(salt) -> bytes:
    if not isinstance(salt, (bytes, bytearray)) or len(salt) != SEED_BYTES:
        raise ValueError(f"salt must be exactly {SEED_BYTES} bytes")
    return bytes(salt)


def salt_from_hex(text: str) -> bytes:
    try:
        raw = bytes.fromhex(text.strip())
    except ValueError as exc:
        raise ValueError(f"salt is not valid hex: {exc}") from None
    return check_salt(raw)


def projection_seed(i: int, j: int, salt: bytes) -> bytes:
    return sha256(encode_u64(i), encode_u64(j), salt)


def projection_vector(i: int, j: int, salt: bytes, d: int) -> np.ndarray:
    """Random hyperplane normal for bit ``j`` (1-based) of patch ``i``."""
    if i < 0:
        raise ValueError("patch index must be non-negative")
    if j < 1:
        raise ValueError("bit index is 1-based")
    return normals(projection_seed(i, j, check_salt(salt)), d)


@lru_cache(maxsize=4)
def _projection_tensor(salt: bytes, n: int, b: int, d: int) -> np.ndarray:
    seeds = [projection_seed(i, j, salt) for i in range(n) for j in range(1, b + 1)]
    out = normals_many(seeds, d).reshape(n, b, d)
    out.flags.writeable = False
    return out


def projection_tensor(salt: bytes, n: int, b: int, d: int) -> np.ndarray:
    """All projection vectors for ``n`` patches as an ``(n, b, d)`` array (cached)."""
    return _projection_tensor(check_salt(salt), n, b, d)


def _signs(dots: np.ndarray) -> np.ndarray:
    # sign(0) is +1
    return np.where(dots >= 0.0, 1, -1).astype(np.int8)


def key_bits(v, i: int, salt: bytes, b: int = DEFAULT_BITS) -> np.ndarray:
    """The ``b`` sign bits of patch ``i`` as an int8 array of +1/-1."""
    v = as_vector(v)
    salt = check_salt(salt)
    r = np.stack([projection_vector(i, j, salt, v.size) for j in range(1, b + 1)])
    return _signs(r @ v)


def key_bits_all(v, salt: bytes, n: int, b: int = DEFAULT_BITS) -> np.ndarray:
    """Key bits for every patch at once.

    ``v`` may be a single vector (result ``(n, b)``) or a stack of vectors
    ``(m, d)`` (result ``(m, n, b)``).
    """
    v = np.asarray(v, dtype=np.float64)
    single = v.ndim == 1
    if single:
        v = as_vector(v)[None, :]
    proj = projection_tensor(salt, n, b, v.shape[1])
    dots = np.einsum("mk,nbk->mnb", v, proj, optimize=True)
    bits = _signs(dots)
    return bits[0] if single else bits


def encode_bits(bits) -> bytes:
    bits = np.asarray(bits)
    if bits.ndim != 1 or not np.all(np.abs(bits) == 1):
        raise ValueError("bits must be a 1-D sequence of +1/-1")
    return (bits > 0).astype(np.uint8).tobytes()


def patch_seed(bits, i: int, salt: bytes) -> bytes:
    return sha256(encode_bits(bits), encode_u64(i), check_salt(salt))


def patch_noise(seed: bytes, p: int) -> np.ndarray:
    if p < 1:
        raise ValueError("patch size must be positive")
    return normals(seed, p)


def simhash_patch(v, i: int, salt: bytes, b: int, p: int) -> np.ndarray:
    return patch_noise(patch_seed(key_bits(v, i, salt, b), i, salt), p)


def bits_to_index(bits) -> int | np.ndarray:
    """Codebook index of a bit string: +1 is 1, first bit most significant."""
    bits = np.asarray(bits)
    b = bits.shape[-1]
    weights = 1 << np.arange(b - 1, -1, -1, dtype=np.int64)
    return ((bits > 0).astype(np.int64) * weights).sum(axis=-1)


def index_to_bits(index, b: int) -> np.ndarray:
    index = np.asarray(index, dtype=np.int64)
    shifts = np.arange(b - 1, -1, -1, dtype=np.int64)
    ones = (index[..., None] >> shifts) & 1
    return np.where(ones == 1, 1, -1).astype(np.int8)


def all_bit_strings(b: int) -> np.ndarray:
    """Every +1/-1 string of length ``b`` ordered by codebook index."""
    return index_to_bits(np.arange(1 << b), b)


def patch_seeds(bits: np.ndarray, salt: bytes) -> list[bytes]:
    """Seeds for an ``(n, b)`` array of bits, patch ``i`` taking row ``i``."""
    raw = (bits > 0).astype(np.uint8)
    return [sha256(raw[i].tobytes(), encode_u64(i), salt) for i in range(raw.shape[0])]


@lru_cache(maxsize=2)
def _codebook(salt: bytes, n: int, b: int, p: int) -> np.ndarray:
    strings = (all_bit_strings(b) > 0).astype(np.uint8)
    encoded = [s.tobytes() for s in strings]
    seeds = [sha256(e, encode_u64(i), salt) for i in range(n) for e in encoded]
    out = normals_many(seeds, p).reshape(n, 1 << b, p)
    out.flags.writeable = False
    return out


def patch_codebook(salt: bytes, n: int, b: int, p: int) -> np.ndarray:
    """Every candidate patch: entry ``[i, k]`` is the noise for bits ``index_to_bits(k)``.

    Costs ``n * 2**b`` patch regenerations once per (salt, n, b, p); cached.
    """
    if b > MAX_SEARCH_BITS:
        raise ValueError(f"b={b} exceeds the search guard of {MAX_SEARCH_BITS}")
    return _codebook(check_salt(salt), n, b, p)
