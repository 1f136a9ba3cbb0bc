"""Simulated generate-then-invert round trip.

The diffusion/inversion pair is replaced by an additive Gaussian channel,
``z_inv = z + sigma * eps``. With the default ``sigma = 0.4`` and 16-value
patches, a patch pushed through the channel lands about 1.6 from its source
while an unrelated patch sits about 5.9 away, so ``tau = 2.3`` separates them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .drbg import as_seed, derive_seed, normals, normals_many
from .metrics import roc_auc
from .noisefield import Layout, NoiseField

DEFAULT_SIGMA = 0.4
DEFAULT_TAU = 2.3


@dataclass(frozen=True)
class ChannelConfig:
    sigma: float = DEFAULT_SIGMA
    rng_seed: bytes = field(default=bytes(32))

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "rng_seed", as_seed(self.rng_seed))

    def with_seed(self, rng_seed) -> "ChannelConfig":
        return ChannelConfig(self.sigma, as_seed(rng_seed))

    def to_dict(self) -> dict:
        return {"sigma": self.sigma, "rng_seed": self.rng_seed.hex()}

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelConfig":
        seed = doc.get("rng_seed", bytes(32).hex())
        return cls(float(doc.get("sigma", DEFAULT_SIGMA)), bytes.fromhex(seed))


def invert(field: NoiseField, cfg: ChannelConfig = ChannelConfig()) -> NoiseField:
    """Noisy recovery of ``field``; deterministic in ``cfg.rng_seed``."""
    if cfg.sigma == 0.0:
        return field
    eps = normals(cfg.rng_seed, field.layout.size)
    return NoiseField(field.layout, field.values + cfg.sigma * eps)


def invert_patches(patches: np.ndarray, cfg: ChannelConfig) -> np.ndarray:
    """Channel applied to a raw patch array of any shape."""
    if cfg.sigma == 0.0:
        return patches
    eps = normals(cfg.rng_seed, patches.size).reshape(patches.shape)
    return patches + cfg.sigma * eps


def _patch_batch(seed: bytes, label: str, trials: int, p: int) -> np.ndarray:
    seeds = [derive_seed(seed, label, k) for k in range(trials)]
    return normals_many(seeds, p)


def same_seed_distances(cfg: ChannelConfig, layout: Layout, trials: int) -> np.ndarray:
    """Distances between patches and their own channel output."""
    z = _patch_batch(cfg.rng_seed, "same-source", trials, layout.p)
    z_inv = invert_patches(z, cfg.with_seed(derive_seed(cfg.rng_seed, "same-eps")))
    return np.linalg.norm(z - z_inv, axis=1)


def different_seed_distances(cfg: ChannelConfig, layout: Layout, trials: int) -> np.ndarray:
    """Distances between patches and the channel output of unrelated patches."""
    z = _patch_batch(cfg.rng_seed, "diff-source", trials, layout.p)
    other = _patch_batch(cfg.rng_seed, "diff-other", trials, layout.p)
    other_inv = invert_patches(other, cfg.with_seed(derive_seed(cfg.rng_seed, "diff-eps")))
    return np.linalg.norm(z - other_inv, axis=1)


def patch_separation_auc(cfg: ChannelConfig = ChannelConfig(), layout: Layout = Layout(),
                         trials: int = 10_000) -> float:
    """ROC-AUC of patch distance as a same-seed vs different-seed classifier."""
    if trials < 1000:
        raise ValueError("patch_separation_auc needs at least 1000 trials")
    same = same_seed_distances(cfg, layout, trials)
    diff = different_seed_distances(cfg, layout, trials)
    # smaller distance means "same seed", so negate
    return roc_auc(-same, -diff)


def match_probabilities(cfg: ChannelConfig = ChannelConfig(), layout: Layout = Layout(),
                        tau: float = DEFAULT_TAU, passes: int = 1) -> tuple[float, float]:
    """Closed-form per-patch match rates ``(same_seed, different_seed)``.

    After ``passes`` channel passes the same-seed difference is
    ``N(0, passes * sigma**2)`` per value, the different-seed difference
    ``N(0, 2 + passes * sigma**2)``, so squared distances are scaled
    chi-square variables with ``p`` degrees of freedom.
    """
    if passes < 0 or tau <= 0:
        raise ValueError("need passes >= 0 and tau > 0")
    var = passes * cfg.sigma ** 2
    same = 1.0 if var == 0.0 else float(chi2.cdf(tau ** 2 / var, layout.p))
    diff = float(chi2.cdf(tau ** 2 / (2.0 + var), layout.p))
    return same, diff


class UnreachableTarget(ValueError):
    pass


def calibrate_tau(cfg: ChannelConfig = ChannelConfig(), layout: Layout = Layout(),
                  target_fpr: float = 1e-4, trials: int = 200_000) -> float:
    """Largest threshold whose different-seed match rate stays within ``target_fpr``.

    Matching is strict (``distance < tau``), so the returned value is the
    ``floor(target_fpr * trials)``-th smallest simulated unrelated distance.
    """
    if not 0.0 < target_fpr < 1.0:
        raise ValueError("target_fpr must lie in (0, 1)")
    allowed = int(np.floor(target_fpr * trials))
    if allowed < 1:
        raise UnreachableTarget(
            f"target_fpr={target_fpr} is below the resolution 1/{trials} of the simulation"
        )
    diff = np.sort(different_seed_distances(cfg, layout, trials))
    return float(diff[allowed])
