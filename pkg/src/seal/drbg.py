"""Counter-mode SHA-256 bit generator with portable uniform and normal streams.

Block ``k`` of the stream for a 32-byte seed ``s`` is ``SHA256(s || k)`` with
``k`` encoded as a 64-bit big-endian integer. Every block is read as four
big-endian 64-bit words; each word keeps its top 53 bits as the mantissa of a
uniform double in ``[0, 1)``. A uniform equal to zero is remapped to ``2**-53``.
Normals come from Box-Muller on consecutive uniform pairs ``(u1, u2)``::

    r = sqrt(-2 ln u1)
    z[2m]   = r cos(2 pi u2)
    z[2m+1] = r sin(2 pi u2)

The logarithm goes through the platform libm (``math.log``) rather than
numpy's SIMD kernels, whose results depend on the CPU features available.
"""
from __future__ import annotations

import hashlib
import math
import struct
from typing import Iterable, Sequence

import numpy as np

SEED_BYTES = 32
WORDS_PER_BLOCK = 4
MIN_UNIFORM = 2.0 ** -53

_U64 = struct.Struct(">Q")


def sha256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
    return h.digest()


def encode_u64(x: int) -> bytes:
    """64-bit big-endian encoding used in every hash input."""
    return _U64.pack(x)


def as_seed(value) -> bytes:
    """Coerce ``value`` into a 32-byte seed.

    Bytes of length 32 pass through unchanged, non-negative integers below
    ``2**256`` are written big-endian, strings are hashed.
    """
    if isinstance(value, (bytes, bytearray)):
        if len(value) != SEED_BYTES:
            raise ValueError(f"seed must be {SEED_BYTES} bytes, got {len(value)}")
        return bytes(value)
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        value = int(value)
        if not 0 <= value < 2 ** 256:
            raise ValueError("integer seed must lie in [0, 2**256)")
        return value.to_bytes(SEED_BYTES, "big")
    if isinstance(value, str):
        return sha256(value.encode("utf-8"))
    raise TypeError(f"cannot build a seed from {type(value).__name__}")


def derive_seed(seed: bytes, *labels) -> bytes:
    """Child seed for a labelled substream (e.g. ``derive_seed(s, "trial", 7)``)."""
    parts = [b"seal-derive", as_seed(seed)]
    for label in labels:
        if isinstance(label, str):
            raw = label.encode("utf-8")
            parts.append(b"s" + encode_u64(len(raw)) + raw)
        elif isinstance(label, (int, np.integer)):
            parts.append(b"i" + encode_u64(int(label)))
        elif isinstance(label, (bytes, bytearray)):
            parts.append(b"b" + encode_u64(len(label)) + bytes(label))
        else:
            raise TypeError(f"unsupported label type {type(label).__name__}")
    return sha256(*parts)


def _blocks_needed(n_uniforms: int) -> int:
    return -(-n_uniforms // WORDS_PER_BLOCK)


def _stream_bytes(seeds: Iterable[bytes], n_blocks: int) -> bytes:
    counters = [encode_u64(k) for k in range(n_blocks)]
    new = hashlib.sha256
    return b"".join(new(s + c).digest() for s in seeds for c in counters)


def _words_to_uniforms(buf: bytes) -> np.ndarray:
    words = np.frombuffer(buf, dtype=">u8")
    u = (words >> np.uint64(11)).astype(np.float64) * MIN_UNIFORM
    u[u == 0.0] = MIN_UNIFORM
    return u


def _box_muller(u: np.ndarray) -> np.ndarray:
    # u has shape (..., 2m); pairs are (u[2k], u[2k+1])
    u1 = u[..., 0::2]
    u2 = u[..., 1::2]
    log_u1 = np.fromiter(map(math.log, u1.ravel().tolist()), dtype=np.float64,
                         count=u1.size).reshape(u1.shape)
    r = np.sqrt(-2.0 * log_u1)
    angle = (2.0 * math.pi) * u2
    z = np.empty(u.shape, dtype=np.float64)
    z[..., 0::2] = r * np.cos(angle)
    z[..., 1::2] = r * np.sin(angle)
    return z


def uniforms(seed: bytes, count: int) -> np.ndarray:
    """First ``count`` uniforms in ``(0, 1)`` of the stream for ``seed``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    buf = _stream_bytes([as_seed(seed)], _blocks_needed(count))
    return _words_to_uniforms(buf)[:count]


def normals(seed: bytes, count: int) -> np.ndarray:
    """First ``count`` standard normals of the stream for ``seed``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    n_uniform = 2 * (-(-count // 2))
    buf = _stream_bytes([as_seed(seed)], _blocks_needed(n_uniform))
    u = _words_to_uniforms(buf)[:n_uniform]
    return _box_muller(u)[:count]


def normals_many(seeds: Sequence[bytes], count: int) -> np.ndarray:
    """Row ``k`` holds the first ``count`` normals of the stream for ``seeds[k]``.

    Equivalent to stacking :func:`normals` per seed, but hashes in one pass.
    """
    seeds = list(seeds)
    n_uniform = 2 * (-(-count // 2))
    n_blocks = _blocks_needed(n_uniform)
    if not seeds or count == 0:
        return np.zeros((len(seeds), count))
    buf = _stream_bytes(seeds, n_blocks)
    u = _words_to_uniforms(buf).reshape(len(seeds), n_blocks * WORDS_PER_BLOCK)
    return _box_muller(u[:, :n_uniform])[:, :count]
