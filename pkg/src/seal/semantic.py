"""Semantic vectors: providers, angles and controlled perturbation.

A semantic vector is a plain 1-D float64 numpy array. Real captioning and
sentence embedding live outside this package; a JSON file provider is the
bridge to such a pipeline and a bag-of-tokens mock stands in for tests.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .drbg import as_seed, normals, sha256

DEFAULT_DIM = 768


class DimensionMismatch(ValueError):
    pass


def as_vector(v, d: int | None = None) -> np.ndarray:
    """Validate ``v`` as a semantic vector and return it as float64."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("semantic vector must be a non-empty 1-D array")
    if d is not None and arr.size != d:
        raise DimensionMismatch(f"expected dimension {d}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("semantic vector has non-finite entries")
    if not np.any(arr):
        raise ValueError("semantic vector must be nonzero")
    return arr


@dataclass(frozen=True)
class ProviderSpec:
    """Where semantic vectors come from.

    ``kind="mock"`` hashes whitespace tokens into Gaussian token vectors;
    ``kind="file"`` reads a vector JSON document from ``path``.
    """

    kind: str = "mock"
    mock_seed_salt: bytes = b"seal-mock-embedder"
    dim: int = DEFAULT_DIM
    path: str | None = None

    def __post_init__(self):
        if self.kind not in ("mock", "file"):
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.kind == "file" and not self.path:
            raise ValueError("file provider needs a path")


def token_vector(token: str, salt: bytes, d: int = DEFAULT_DIM) -> np.ndarray:
    seed = sha256(salt, b"\x00", token.encode("utf-8"))
    return normals(seed, d)


def embed_text(text: str, spec: ProviderSpec = ProviderSpec()) -> np.ndarray:
    """Map ``text`` to a unit-norm semantic vector using ``spec``."""
    if not text or not text.strip():
        raise ValueError("text must be non-empty")
    if spec.kind == "file":
        return load_vector(spec.path, spec.dim)
    tokens = text.lower().split()
    total = np.zeros(spec.dim)
    for tok in tokens:
        total += token_vector(tok, spec.mock_seed_salt, spec.dim)
    return total / np.linalg.norm(total)


def load_vector(path, d: int | None = None) -> np.ndarray:
    """Read ``{"dim": d, "values": [...]}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or "values" not in doc or "dim" not in doc:
        raise ValueError(f"{path}: expected an object with 'dim' and 'values'")
    values = as_vector(doc["values"])
    if values.size != int(doc["dim"]):
        raise DimensionMismatch(f"{path}: dim={doc['dim']} but {values.size} values")
    if d is not None and values.size != d:
        raise DimensionMismatch(f"{path}: expected dimension {d}, got {values.size}")
    return values


def save_vector(path, v) -> None:
    v = as_vector(v)
    doc = {"dim": int(v.size), "values": [float(x) for x in v]}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def angle(v, w) -> float:
    """Angle between two vectors in degrees, in [0, 180]."""
    v = as_vector(v)
    w = as_vector(w, v.size)
    cos = float(np.dot(v, w) / (np.linalg.norm(v) * np.linalg.norm(w)))
    return math.degrees(math.acos(min(1.0, max(-1.0, cos))))


def random_unit_vector(rng_seed, d: int = DEFAULT_DIM) -> np.ndarray:
    z = normals(as_seed(rng_seed), d)
    return z / np.linalg.norm(z)


def perturb_by_angle(v, theta: float, rng_seed) -> np.ndarray:
    """Unit vector at exactly ``theta`` degrees from ``v``.

    The rotation plane is spanned by ``v`` and a seeded random direction
    orthogonalised against it.
    """
    if not 0.0 <= theta <= 180.0:
        raise ValueError(f"theta must lie in [0, 180], got {theta}")
    v = as_vector(v)
    if v.size < 2:
        raise ValueError("perturbation needs at least two dimensions")
    vhat = v / np.linalg.norm(v)
    u = normals(as_seed(rng_seed), v.size)
    # two Gram-Schmidt passes keep u orthogonal to machine precision
    for _ in range(2):
        u = u - np.dot(u, vhat) * vhat
    u /= np.linalg.norm(u)
    t = math.radians(theta)
    w = math.cos(t) * vhat + math.sin(t) * u
    return w / np.linalg.norm(w)
