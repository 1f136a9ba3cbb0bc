"""Per-patch key recovery and the connected-component spatial test.

Recovery tries all ``2**b`` bit strings for a patch and keeps the candidate
closest to the inverted noise, so a field costs ``n * 2**b`` regenerations.
Tampered regions invert to foreign noise that no candidate explains; the
resulting distance heatmap is thresholded at its 80th percentile and the
super-threshold cells are grouped into connected components. Few large
components point to a contiguous edit, many small ones to channel noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .noisefield import NoiseField
from .simhash import (
    DEFAULT_BITS,
    MAX_SEARCH_BITS,
    all_bit_strings,
    check_salt,
    index_to_bits,
    patch_codebook,
    patch_noise,
    patch_seed,
)

DEFAULT_PERCENTILE = 80.0
DEFAULT_CONNECTIVITY = 4
# 1% false-positive cutoff from calibrate_cluster_threshold() on 500 clean
# fields under the default channel and layout.
DEFAULT_MAX_CLUSTERS = 109

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True, eq=False)
class Heatmap:
    grid: np.ndarray
    bits: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        if grid.ndim != 2:
            raise ValueError("heatmap grid must be 2-D")
        if np.any(grid < 0) or not np.all(np.isfinite(grid)):
            raise ValueError("heatmap entries must be finite and non-negative")
        object.__setattr__(self, "grid", grid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape

    def render(self) -> str:
        """Integer-rounded text grid."""
        width = max(1, len(str(int(np.rint(self.grid.max())))))
        return "\n".join(
            " ".join(f"{int(x):>{width}d}" for x in np.rint(row)) for row in self.grid
        )

    def to_dict(self) -> dict:
        return {"rows": self.grid.shape[0], "cols": self.grid.shape[1],
                "grid": self.grid.tolist()}


@dataclass(frozen=True)
class TamperReport:
    cluster_count: int
    largest_cluster_area: int
    threshold_value: float
    tampered: bool | None
    max_clusters: int | None = None

    def to_dict(self) -> dict:
        return {
            "cluster_count": self.cluster_count,
            "largest_cluster_area": self.largest_cluster_area,
            "threshold_value": self.threshold_value,
            "tampered": self.tampered,
            "max_clusters": self.max_clusters,
        }


def recover_patch_bits(z_inv_patch, i: int, salt: bytes, b: int = DEFAULT_BITS):
    """Exhaustive search over the ``2**b`` keys of patch ``i``.

    Returns ``(bits, distance)`` for the candidate closest to ``z_inv_patch``;
    ties go to the lowest codebook index.
    """
    if b > MAX_SEARCH_BITS:
        raise ValueError(f"b={b} exceeds the search guard of {MAX_SEARCH_BITS}")
    salt = check_salt(salt)
    z = np.asarray(z_inv_patch, dtype=np.float64)
    best_bits, best = None, math.inf
    for bits in all_bit_strings(b):
        cand = patch_noise(patch_seed(bits, i, salt), z.size)
        dist = float(np.linalg.norm(cand - z))
        if dist < best:
            best_bits, best = bits, dist
    return best_bits, best


def heatmap(z_inv: NoiseField, salt: bytes, b: int = DEFAULT_BITS) -> Heatmap:
    """Best-recovery distance of every patch, arranged on the patch grid."""
    layout = z_inv.layout
    book = patch_codebook(salt, layout.n, b, layout.p)
    return heatmap_from_codebook(z_inv.patches(), book, layout.grid, b)


def heatmap_from_codebook(patches: np.ndarray, book: np.ndarray,
                          grid: tuple[int, int], b: int) -> Heatmap:
    # ||c - z||^2 = ||c||^2 - 2 c.z + ||z||^2, vectorised over candidates
    sq = (np.einsum("nkp,nkp->nk", book, book)
          - 2.0 * np.einsum("nkp,np->nk", book, patches)
          + np.einsum("np,np->n", patches, patches)[:, None])
    best = np.argmin(sq, axis=1)
    d = np.sqrt(np.maximum(sq[np.arange(sq.shape[0]), best], 0.0))
    return Heatmap(d.reshape(grid), index_to_bits(best, b))


def nearest_rank_percentile(values, q: float) -> float:
    """Smallest value with at least ``q`` percent of the data at or below it."""
    if not 0.0 < q <= 100.0:
        raise ValueError("percentile must lie in (0, 100]")
    x = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("no values")
    rank = max(1, math.ceil(q / 100.0 * x.size))
    return float(x[rank - 1])


def label_components(mask, connectivity: int = DEFAULT_CONNECTIVITY):
    """Label connected ``True`` cells; returns ``(labels, count)``."""
    if connectivity not in _STRUCTURES:
        raise ValueError("connectivity must be 4 or 8")
    labels, count = ndimage.label(np.asarray(mask, dtype=bool), structure=_STRUCTURES[connectivity])
    return labels, int(count)


def _clusters(h: Heatmap, percentile: float, connectivity: int):
    cut = nearest_rank_percentile(h.grid, percentile)
    labels, count = label_components(h.grid > cut, connectivity)
    largest = int(np.bincount(labels.ravel())[1:].max()) if count else 0
    return cut, count, largest


def spatial_test(h: Heatmap, max_clusters: int | None = DEFAULT_MAX_CLUSTERS,
                 percentile: float = DEFAULT_PERCENTILE,
                 connectivity: int = DEFAULT_CONNECTIVITY) -> TamperReport:
    """Cluster the hottest cells of ``h`` and flag contiguous structure.

    ``tampered`` is ``cluster_count <= max_clusters``; it is ``None`` when no
    cell exceeds the cutoff (flat heatmap) or when ``max_clusters`` is None.
    """
    cut, count, largest = _clusters(h, percentile, connectivity)
    if count == 0 or max_clusters is None:
        tampered = None
    else:
        tampered = count <= max_clusters
    return TamperReport(count, largest, cut, tampered, max_clusters)


def tamper_score(h: Heatmap, percentile: float = DEFAULT_PERCENTILE,
                 connectivity: int = DEFAULT_CONNECTIVITY) -> float:
    """Higher means more tamper-like: fewer clusters, then a larger biggest cluster."""
    _, count, largest = _clusters(h, percentile, connectivity)
    n = h.grid.size
    if count == 0:
        return -float(n + 1)
    return -float(count) + largest / (n + 1.0)


def clean_cluster_counts(salt: bytes, layout=None, b: int = DEFAULT_BITS, cfg=None,
                         trials: int = 500, d: int = 768) -> np.ndarray:
    """Cluster counts of untampered watermarked fields pushed through the channel."""
    from .channel import ChannelConfig, invert_patches
    from .drbg import derive_seed
    from .noisefield import Layout, watermarked_patches
    from .semantic import random_unit_vector

    layout = layout or Layout()
    cfg = cfg or ChannelConfig()
    book = patch_codebook(salt, layout.n, b, layout.p)
    counts = np.empty(trials, dtype=np.int64)
    for k in range(trials):
        v = random_unit_vector(derive_seed(cfg.rng_seed, "clean-v", k), d)
        z = watermarked_patches(v, salt, layout, b)[0]
        z_inv = invert_patches(z, cfg.with_seed(derive_seed(cfg.rng_seed, "clean-eps", k)))
        h = heatmap_from_codebook(z_inv, book, layout.grid, b)
        counts[k] = _clusters(h, DEFAULT_PERCENTILE, DEFAULT_CONNECTIVITY)[1]
    return counts


def calibrate_cluster_threshold(clean_counts, fpr: float = 0.01) -> int:
    """Largest cutoff flagging at most ``fpr`` of the clean cluster counts."""
    s = np.sort(np.asarray(clean_counts, dtype=np.int64))
    if s.size == 0 or not 0.0 <= fpr < 1.0:
        raise ValueError("need clean counts and fpr in [0, 1)")
    return int(s[int(math.floor(fpr * s.size))] - 1)
