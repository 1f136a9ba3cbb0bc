"""Initial-noise fields: patch layout, watermarked generation and ``.nf`` I/O.

A field is a ``c x h x w`` latent stored flat in channel-major, row-major
order. The spatial plane is cut into a ``patch_rows x patch_cols`` grid;
patch ``i`` is grid cell ``divmod(i, patch_cols)`` taken across all
channels, flattened channel-major within the patch.
"""
from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .drbg import as_seed, normals, normals_many
from .simhash import (
    DEFAULT_BITS,
    bits_to_index,
    check_salt,
    key_bits_all,
    patch_codebook,
    patch_seeds,
)

MAGIC = b"SEALNF01"
_HEADER = struct.Struct("<8s5II")
HEADER_SIZE = _HEADER.size  # 32


class NoiseFieldFormatError(ValueError):
    """Raised for malformed, truncated or corrupted ``.nf`` files."""


@dataclass(frozen=True)
class Layout:
    channels: int = 4
    height: int = 64
    width: int = 64
    patch_rows: int = 32
    patch_cols: int = 32

    def __post_init__(self):
        for name in ("channels", "height", "width", "patch_rows", "patch_cols"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.height % self.patch_rows or self.width % self.patch_cols:
            raise ValueError(
                f"{self.height}x{self.width} latent is not divisible into a "
                f"{self.patch_rows}x{self.patch_cols} patch grid"
            )

    @property
    def n(self) -> int:
        return self.patch_rows * self.patch_cols

    @property
    def patch_height(self) -> int:
        return self.height // self.patch_rows

    @property
    def patch_width(self) -> int:
        return self.width // self.patch_cols

    @property
    def p(self) -> int:
        return self.channels * self.patch_height * self.patch_width

    @property
    def size(self) -> int:
        return self.channels * self.height * self.width

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.channels, self.height, self.width)

    @property
    def grid(self) -> tuple[int, int]:
        return (self.patch_rows, self.patch_cols)

    @classmethod
    def square(cls, n: int, channels: int = 4, side: int = 64) -> "Layout":
        """Square patch grid with ``n`` patches on a ``channels x side x side`` latent."""
        rows = int(round(n ** 0.5))
        if rows * rows != n:
            raise ValueError(f"n={n} is not a perfect square")
        return cls(channels, side, side, rows, rows)

    def to_dict(self) -> dict:
        return {
            "channels": self.channels,
            "height": self.height,
            "width": self.width,
            "patch_rows": self.patch_rows,
            "patch_cols": self.patch_cols,
        }


@dataclass(frozen=True, eq=False)
class NoiseField:
    layout: Layout
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size != self.layout.size:
            raise ValueError(
                f"field has {values.size} values, layout needs {self.layout.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field has non-finite entries")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def as_array(self) -> np.ndarray:
        return self.values.reshape(self.layout.shape)

    def patches(self) -> np.ndarray:
        """All patches as an ``(n, p)`` array."""
        return to_patches(self.values, self.layout)

    def patch(self, i: int) -> np.ndarray:
        return patch_slice(self, i)

    @classmethod
    def from_patches(cls, layout: Layout, patches) -> "NoiseField":
        return cls(layout, from_patches(np.asarray(patches, dtype=np.float64), layout))


def to_patches(values: np.ndarray, layout: Layout) -> np.ndarray:
    """Gather patch vectors; ``values`` may carry leading batch axes."""
    c, R, C = layout.channels, layout.patch_rows, layout.patch_cols
    ph, pw = layout.patch_height, layout.patch_width
    lead = values.shape[:-1]
    a = values.reshape(*lead, c, R, ph, C, pw)
    k = len(lead)
    order = list(range(k)) + [k + 1, k + 3, k, k + 2, k + 4]
    return a.transpose(order).reshape(*lead, layout.n, layout.p)


def from_patches(patches: np.ndarray, layout: Layout) -> np.ndarray:
    """Inverse of :func:`to_patches`."""
    c, R, C = layout.channels, layout.patch_rows, layout.patch_cols
    ph, pw = layout.patch_height, layout.patch_width
    lead = patches.shape[:-2]
    a = patches.reshape(*lead, R, C, c, ph, pw)
    k = len(lead)
    order = list(range(k)) + [k + 2, k, k + 3, k + 1, k + 4]
    return a.transpose(order).reshape(*lead, layout.size)


def patch_slice(field: NoiseField, i: int) -> np.ndarray:
    layout = field.layout
    if not 0 <= i < layout.n:
        raise IndexError(f"patch index {i} out of range [0, {layout.n})")
    r, col = divmod(i, layout.patch_cols)
    ph, pw = layout.patch_height, layout.patch_width
    block = field.as_array()[:, r * ph:(r + 1) * ph, col * pw:(col + 1) * pw]
    return block.reshape(-1).copy()


def scatter_patch(field: NoiseField, i: int, patch) -> NoiseField:
    """Copy of ``field`` with patch ``i`` replaced."""
    layout = field.layout
    if not 0 <= i < layout.n:
        raise IndexError(f"patch index {i} out of range [0, {layout.n})")
    patch = np.asarray(patch, dtype=np.float64)
    if patch.size != layout.p:
        raise ValueError(f"patch must have {layout.p} values")
    r, col = divmod(i, layout.patch_cols)
    ph, pw = layout.patch_height, layout.patch_width
    arr = field.as_array().copy()
    arr[:, r * ph:(r + 1) * ph, col * pw:(col + 1) * pw] = patch.reshape(
        layout.channels, ph, pw
    )
    return NoiseField(layout, arr)


def generate_watermarked_noise(v, salt: bytes, layout: Layout = Layout(),
                               b: int = DEFAULT_BITS) -> NoiseField:
    """Watermarked initial noise: patch ``i`` is ``simhash_patch(v, i, salt, b, p)``."""
    salt = check_salt(salt)
    bits = key_bits_all(v, salt, layout.n, b)
    patches = normals_many(patch_seeds(bits, salt), layout.p)
    return NoiseField.from_patches(layout, patches)


def watermarked_patches(vectors, salt: bytes, layout: Layout = Layout(),
                        b: int = DEFAULT_BITS) -> np.ndarray:
    """Batch generation through the cached codebook.

    Returns ``(m, n, p)`` patches for ``m`` stacked vectors; identical to
    calling :func:`generate_watermarked_noise` per vector.
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.float64))
    bits = key_bits_all(vectors, salt, layout.n, b)
    book = patch_codebook(salt, layout.n, b, layout.p)
    idx = bits_to_index(bits)
    return book[np.arange(layout.n)[None, :], idx]


def random_noise(layout: Layout, rng_seed) -> NoiseField:
    """Non-watermarked standard normal field from the DRBG."""
    return NoiseField(layout, normals(as_seed(rng_seed), layout.size))


def checksum(field: NoiseField) -> str:
    """SHA-256 hex digest of the field's float32 little-endian payload."""
    return hashlib.sha256(field.values.astype("<f4").tobytes()).hexdigest()


def to_bytes(field: NoiseField) -> bytes:
    lay = field.layout
    payload = field.values.astype("<f4").tobytes()
    header = _HEADER.pack(MAGIC, lay.channels, lay.height, lay.width,
                          lay.patch_rows, lay.patch_cols, zlib.crc32(payload))
    return header + payload


def from_bytes(data: bytes) -> NoiseField:
    if len(data) < HEADER_SIZE:
        raise NoiseFieldFormatError("file shorter than the 32-byte header")
    magic, c, h, w, rows, cols, crc = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise NoiseFieldFormatError(f"bad magic {magic!r}")
    try:
        layout = Layout(c, h, w, rows, cols)
    except ValueError as exc:
        raise NoiseFieldFormatError(f"invalid layout in header: {exc}") from None
    payload = data[HEADER_SIZE:]
    if len(payload) != 4 * layout.size:
        raise NoiseFieldFormatError(
            f"payload has {len(payload)} bytes, expected {4 * layout.size}"
        )
    if zlib.crc32(payload) != crc:
        raise NoiseFieldFormatError("payload checksum mismatch")
    values = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    try:
        return NoiseField(layout, values)
    except ValueError as exc:
        raise NoiseFieldFormatError(str(exc)) from None


def save(field: NoiseField, path) -> None:
    Path(path).write_bytes(to_bytes(field))


def load(path) -> NoiseField:
    return from_bytes(Path(path).read_bytes())
