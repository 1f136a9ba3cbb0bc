"""Noise-domain adversaries: object pasting, watermark reuse, averaging, erasure."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelConfig, invert, invert_patches
from .drbg import as_seed, derive_seed, normals, uniforms
from .noisefield import Layout, NoiseField

ATTACK_KINDS = ("cat", "forgery_reuse", "steg_average", "erase_fraction")


@dataclass(frozen=True)
class AttackSpec:
    kind: str = "cat"
    scale_range: tuple[float, float] = (0.30, 0.60)
    passes: int = 2
    n_average: int = 5
    strength: float = 1.0
    erase_frac: float = 0.25
    rng_seed: bytes = field(default=bytes(32))

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}; expected one of {ATTACK_KINDS}")
        lo, hi = (float(x) for x in self.scale_range)
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValueError(f"scale_range must satisfy 0 <= lo <= hi <= 1, got {self.scale_range}")
        if self.passes not in (1, 2):
            raise ValueError("passes must be 1 or 2")
        if self.n_average < 1:
            raise ValueError("n_average must be at least 1")
        if not 0.0 <= self.erase_frac <= 1.0:
            raise ValueError("erase_frac must lie in [0, 1]")
        object.__setattr__(self, "scale_range", (lo, hi))
        object.__setattr__(self, "rng_seed", as_seed(self.rng_seed))

    def with_seed(self, rng_seed) -> "AttackSpec":
        return AttackSpec(self.kind, self.scale_range, self.passes, self.n_average,
                          self.strength, self.erase_frac, as_seed(rng_seed))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "scale_range": list(self.scale_range),
            "passes": self.passes,
            "n_average": self.n_average,
            "strength": self.strength,
            "erase_frac": self.erase_frac,
            "rng_seed": self.rng_seed.hex(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "AttackSpec":
        doc = dict(doc)
        if "scale_range" in doc:
            doc["scale_range"] = tuple(doc["scale_range"])
        if "rng_seed" in doc:
            doc["rng_seed"] = bytes.fromhex(doc["rng_seed"])
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown attack fields: {sorted(unknown)}")
        return cls(**doc)


def cat_region(layout: Layout, spec: AttackSpec) -> np.ndarray:
    """Boolean patch-grid mask of the pasted rectangle.

    One scale ``s`` is drawn uniformly from ``spec.scale_range`` and both
    sides become ``round(s * grid side)`` patches, placed uniformly at random.
    """
    rows, cols = layout.grid
    lo, hi = spec.scale_range
    s, y, x = uniforms(derive_seed(spec.rng_seed, "cat-rect"), 3)
    scale = lo + (hi - lo) * s
    h = int(round(scale * rows))
    w = int(round(scale * cols))
    mask = np.zeros(layout.grid, dtype=bool)
    if h == 0 or w == 0:
        return mask
    top = min(int(math.floor(y * (rows - h + 1))), rows - h)
    left = min(int(math.floor(x * (cols - w + 1))), cols - w)
    mask[top:top + h, left:left + w] = True
    return mask


def replace_patches(z_inv: NoiseField, which: np.ndarray, rng_seed,
                    cfg: ChannelConfig | None = None) -> NoiseField:
    """Overwrite the flagged patches with fresh noise, optionally sent through ``cfg``."""
    which = np.asarray(which, dtype=bool).ravel()
    count = int(which.sum())
    if count == 0:
        return z_inv
    layout = z_inv.layout
    fresh = normals(derive_seed(rng_seed, "fresh"), count * layout.p).reshape(count, layout.p)
    if cfg is not None:
        fresh = invert_patches(fresh, cfg.with_seed(derive_seed(rng_seed, "fresh-eps")))
    patches = z_inv.patches().copy()
    patches[which] = fresh
    return NoiseField.from_patches(layout, patches)


def cat_attack(z_inv: NoiseField, spec: AttackSpec = AttackSpec(),
               cfg: ChannelConfig = ChannelConfig()) -> NoiseField:
    """Paste a foreign object: patches under a random rectangle invert to unrelated noise."""
    mask = cat_region(z_inv.layout, spec)
    return replace_patches(z_inv, mask, spec.rng_seed, cfg)


def forgery_reuse(z: NoiseField, cfg: ChannelConfig, v_attack, passes: int = 2):
    """Attacker re-uses inverted watermark noise to render unrelated content.

    The attacker's inversion and the detector's inversion are two channel
    passes. Returns the field the detector sees and the semantics it will
    extract from the forged image.
    """
    if passes not in (1, 2):
        raise ValueError("passes must be 1 or 2")
    out = invert(z, cfg.with_seed(derive_seed(cfg.rng_seed, "forgery", 0)))
    if passes == 2:
        out = invert(out, cfg.with_seed(derive_seed(cfg.rng_seed, "forgery", 1)))
    return out, np.asarray(v_attack, dtype=np.float64)


def steg_average(fields) -> NoiseField:
    """Mean of a collection of watermarked fields, the attacker's watermark estimate."""
    fields = list(fields)
    if not fields:
        raise ValueError("need at least one field")
    layout = fields[0].layout
    if any(f.layout != layout for f in fields):
        raise ValueError("fields have different layouts")
    return NoiseField(layout, np.mean([f.values for f in fields], axis=0))


def apply_subtraction(z_inv: NoiseField, estimate: NoiseField, strength: float = 1.0) -> NoiseField:
    if estimate.layout != z_inv.layout:
        raise ValueError("estimate and field have different layouts")
    return NoiseField(z_inv.layout, z_inv.values - strength * estimate.values)


def erase_fraction(z_inv: NoiseField, frac: float, rng_seed) -> NoiseField:
    """Replace ``round(frac * n)`` uniformly chosen patches with fresh noise."""
    if not 0.0 <= frac <= 1.0:
        raise ValueError("frac must lie in [0, 1]")
    n = z_inv.layout.n
    count = int(round(frac * n))
    order = np.argsort(uniforms(derive_seed(rng_seed, "erase-order"), n), kind="stable")
    which = np.zeros(n, dtype=bool)
    which[order[:count]] = True
    return replace_patches(z_inv, which, rng_seed)
