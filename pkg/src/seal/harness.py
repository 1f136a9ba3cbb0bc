"""Monte-Carlo experiment runner, fixed-key baseline and JSON reports.

Every trial draws its randomness from ``derive_seed(config.rng_seed, ...)``
so a report is a pure function of its config; wall-clock data is confined to
the ``runtime`` block.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .attacks import AttackSpec, cat_region, replace_patches
from .channel import (
    DEFAULT_TAU,
    ChannelConfig,
    different_seed_distances,
    invert_patches,
    match_probabilities,
    patch_separation_auc,
    same_seed_distances,
)
from .detection import (
    DEFAULT_MATCH_COUNT,
    DEFAULT_THETA_MID,
    DetectionDecision,
    MatchMap,
    binomial_table_comparison,
    channel_detection_probability,
    default_match_threshold,
    detection_probability,
    rho,
)
from .drbg import as_seed, derive_seed, normals, normals_many, uniforms
from .metrics import rate, roc_auc
from .noisefield import (
    Layout,
    NoiseField,
    random_noise,
    to_patches,
    watermarked_patches,
)
from .semantic import DEFAULT_DIM, perturb_by_angle
from .simhash import DEFAULT_BITS, check_salt, key_bits_all, patch_codebook, patch_seeds
from .tamper import (
    DEFAULT_MAX_CLUSTERS,
    heatmap_from_codebook,
    spatial_test,
    tamper_score,
)

SCHEMA_VERSION = 1
EXPERIMENTS = ("separation", "detection_curve", "cat", "forgery", "steg", "erase", "ablation")
THRESHOLD_MODES = ("analytic", "fixed")
# angle shift caused by pasting a cat, mean and std in degrees
CAT_RECAPTION_ANGLE = (71.2, 13.8)
_CHUNK = 250

__all__ = [
    "roc_auc", "FixedKeyBaseline", "ExperimentConfig", "ConfigError",
    "detection_curve", "run_experiment", "write_report", "EXPERIMENTS",
]


class ConfigError(ValueError):
    """Invalid experiment config; ``problems`` lists every violation."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid experiment config:\n  " + "\n  ".join(self.problems))


# -- building blocks ---------------------------------------------------------

def unit_vectors(seed: bytes, label: str, count: int, d: int = DEFAULT_DIM) -> np.ndarray:
    """``count`` seeded random unit vectors, row ``k`` from substream ``(label, k)``."""
    z = normals_many([derive_seed(seed, label, k) for k in range(count)], d)
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _direct_patches(vectors: np.ndarray, salt: bytes, layout: Layout, b: int) -> np.ndarray:
    bits = key_bits_all(vectors, salt, layout.n, b)
    return np.stack([normals_many(patch_seeds(row, salt), layout.p) for row in bits])


def simulated_match_counts(gen_vectors: np.ndarray, det_vectors: np.ndarray, salt: bytes,
                           layout: Layout, b: int, tau: float, cfg: ChannelConfig,
                           seeds: Sequence[bytes],
                           transform: Callable[[int, np.ndarray], np.ndarray] | None = None,
                           use_codebook: bool = True) -> np.ndarray:
    """Generate with ``gen_vectors[k]``, invert, optionally attack, detect with ``det_vectors[k]``.

    ``transform(k, patches)`` receives the inverted ``(n, p)`` patches of trial
    ``k`` and returns the patches the detector sees.
    """
    make = watermarked_patches if use_codebook else _direct_patches
    counts = np.empty(len(seeds), dtype=np.int64)
    for start in range(0, len(seeds), _CHUNK):
        stop = min(start + _CHUNK, len(seeds))
        gen = make(gen_vectors[start:stop], salt, layout, b)
        det = make(det_vectors[start:stop], salt, layout, b)
        for k in range(start, stop):
            z_inv = invert_patches(gen[k - start], cfg.with_seed(derive_seed(seeds[k], "channel")))
            if transform is not None:
                z_inv = transform(k, z_inv)
            counts[k] = int((np.linalg.norm(det[k - start] - z_inv, axis=1) < tau).sum())
    return counts


def perturbed(vectors: np.ndarray, angles, seeds: Sequence[bytes]) -> np.ndarray:
    angles = np.broadcast_to(np.asarray(angles, dtype=np.float64), (len(vectors),))
    return np.stack([
        perturb_by_angle(v, float(t), derive_seed(s, "perturb"))
        for v, t, s in zip(vectors, angles, seeds)
    ])


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / trials)


# -- fixed-key baseline -----------------------------------------------------

@dataclass(frozen=True)
class FixedKeyBaseline:
    """Semantics-free scheme: one secret noise field watermarks every image."""

    salt: bytes
    layout: Layout = Layout()

    def __post_init__(self):
        object.__setattr__(self, "salt", check_salt(self.salt))

    @property
    def key_field(self) -> NoiseField:
        return random_noise(self.layout, derive_seed(self.salt, "fixed-key"))

    def generate(self, v=None) -> NoiseField:
        return self.key_field

    def match_map(self, z_inv: NoiseField, tau: float = DEFAULT_TAU) -> MatchMap:
        d = np.linalg.norm(self.key_field.patches() - z_inv.patches(), axis=1)
        return MatchMap(d, d < tau, float(tau))

    def detect(self, z_inv: NoiseField, tau: float = DEFAULT_TAU,
               m_match: int = DEFAULT_MATCH_COUNT) -> DetectionDecision:
        m = self.match_map(z_inv, tau).match_count
        return DetectionDecision(m, int(m_match), m >= m_match)


def fixed_key_baseline(salt: bytes, layout: Layout = Layout()) -> FixedKeyBaseline:
    return FixedKeyBaseline(salt, layout)


# -- config ------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    salt: bytes = field(default=bytes(range(32)))
    experiments: tuple[str, ...] = ("detection_curve",)
    layout: Layout = Layout()
    b: int = DEFAULT_BITS
    dim: int = DEFAULT_DIM
    tau: float = DEFAULT_TAU
    threshold_mode: str = "analytic"
    theta_mid: float = DEFAULT_THETA_MID
    n_match: int = DEFAULT_MATCH_COUNT
    channel: ChannelConfig = ChannelConfig()
    attacks: tuple[AttackSpec, ...] = ()
    trials: int = 200
    rng_seed: bytes = field(default=bytes(32))
    angles: tuple[float, ...] = (0.0, 40.0, 50.0, 55.0, 60.0, 70.0, 90.0)
    forgery_angles: tuple[float, ...] = (0.0, 30.0, 55.0, 70.0, 90.0)
    steg_sizes: tuple[int, ...] = (5, 50, 500, 5000)
    erase_fracs: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)
    ablation_n: tuple[int, ...] = (256, 1024, 4096)
    ablation_b: tuple[int, ...] = (4, 7, 10)
    report_path: str | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    def problems(self) -> list[str]:
        out = []
        if self.schema_version != SCHEMA_VERSION:
            out.append(f"schema_version must be {SCHEMA_VERSION}")
        if not isinstance(self.salt, (bytes, bytearray)) or len(self.salt) != 32:
            out.append("salt must be 32 bytes (64 hex characters)")
        for name in self.experiments:
            if name not in EXPERIMENTS:
                out.append(f"unknown experiment {name!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            out.append("trials must be a positive integer")
        if self.b < 1:
            out.append("b must be positive")
        if self.dim < 2:
            out.append("dim must be at least 2")
        if not self.tau > 0:
            out.append("tau must be positive")
        if self.threshold_mode not in THRESHOLD_MODES:
            out.append(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if not 0.0 <= self.theta_mid <= 180.0:
            out.append("theta_mid must lie in [0, 180]")
        if self.n_match < 0:
            out.append("n_match must be non-negative")
        for a in tuple(self.angles) + tuple(self.forgery_angles):
            if not 0.0 <= a <= 180.0:
                out.append(f"angle {a} outside [0, 180]")
        if any(s < 1 for s in self.steg_sizes):
            out.append("steg_sizes must be positive")
        if any(not 0.0 <= f <= 1.0 for f in self.erase_fracs):
            out.append("erase_fracs must lie in [0, 1]")
        for n in self.ablation_n:
            r = int(round(n ** 0.5))
            if r * r != n or 64 % r:
                out.append(f"ablation n={n} must be a square grid dividing the 64x64 latent")
        return out

    @property
    def analytic_threshold(self) -> int:
        return default_match_threshold(self.layout.n, self.b, self.theta_mid)

    @property
    def m_match(self) -> int:
        return self.analytic_threshold if self.threshold_mode == "analytic" else self.n_match

    def thresholds(self) -> dict:
        return {"analytic": self.analytic_threshold, "fixed": self.n_match}

    def attack(self, kind: str) -> AttackSpec:
        for spec in self.attacks:
            if spec.kind == kind:
                return spec
        return AttackSpec(kind)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "salt": bytes(self.salt).hex(),
            "experiments": list(self.experiments),
            "layout": self.layout.to_dict(),
            "b": self.b,
            "dim": self.dim,
            "tau": self.tau,
            "threshold_mode": self.threshold_mode,
            "theta_mid": self.theta_mid,
            "n_match": self.n_match,
            "channel": self.channel.to_dict(),
            "attacks": [a.to_dict() for a in self.attacks],
            "trials": self.trials,
            "rng_seed": self.rng_seed.hex(),
            "angles": list(self.angles),
            "forgery_angles": list(self.forgery_angles),
            "steg_sizes": list(self.steg_sizes),
            "erase_fracs": list(self.erase_fracs),
            "ablation_n": list(self.ablation_n),
            "ablation_b": list(self.ablation_b),
            "report_path": self.report_path,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError(["config must be a JSON object"])
        problems = []
        if "schema_version" not in doc:
            problems.append("missing mandatory field 'schema_version'")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            problems.append(f"unknown fields: {sorted(unknown)}")
        kwargs = {}
        try:
            for key, value in doc.items():
                if key in unknown:
                    continue
                if key in ("salt", "rng_seed"):
                    kwargs[key] = bytes.fromhex(value)
                elif key == "layout":
                    kwargs[key] = Layout(**value)
                elif key == "channel":
                    kwargs[key] = ChannelConfig.from_dict(value)
                elif key == "attacks":
                    kwargs[key] = tuple(AttackSpec.from_dict(a) for a in value)
                elif key in ("experiments", "angles", "forgery_angles", "steg_sizes",
                             "erase_fracs", "ablation_n", "ablation_b"):
                    kwargs[key] = tuple(value)
                else:
                    kwargs[key] = value
        except (TypeError, ValueError) as exc:
            problems.append(str(exc))
        if problems:
            raise ConfigError(problems)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- experiments -------------------------------------------------------------

def detection_curve(angles, trials: int, salt: bytes, layout: Layout = Layout(),
                    b: int = DEFAULT_BITS, tau: float = DEFAULT_TAU,
                    theta_mid: float = DEFAULT_THETA_MID,
                    cfg: ChannelConfig = ChannelConfig(), rng_seed=bytes(32),
                    d: int = DEFAULT_DIM, extra_thresholds: dict | None = None) -> list[dict]:
    """Analytic and simulated detection probability at each angle.

    The simulation perturbs a random vector by ``theta``, watermarks with the
    original, inverts through ``cfg`` and detects with the perturbed vector
    against the threshold ``floor(n * rho(theta_mid))``. ``extra_thresholds``
    maps names to further match thresholds evaluated on the same trials.
    """
    seed = as_seed(rng_seed)
    m = default_match_threshold(layout.n, b, theta_mid)
    q_same, q_diff = match_probabilities(cfg, layout, tau)
    rows = []
    for theta in angles:
        theta = float(theta)
        label = f"curve:{theta!r}"
        seeds = [derive_seed(seed, label, k) for k in range(trials)]
        v = unit_vectors(seed, label + ":v", trials, d)
        w = perturbed(v, theta, seeds)
        counts = simulated_match_counts(v, w, salt, layout, b, tau, cfg, seeds)
        mc = float(np.mean(counts >= m))
        analytic = detection_probability(theta, theta_mid, layout.n, b)
        se = binomial_stderr(analytic, trials)
        row = {
            "theta": theta,
            "analytic": analytic,
            "monte_carlo": mc,
            "trials": trials,
            "m_match": m,
            "stderr": se,
            "abs_diff": abs(mc - analytic),
            "within_3se": abs(mc - analytic) <= 3.0 * se if se > 0 else mc == analytic,
            "mean_match_fraction": float(np.mean(counts) / layout.n),
            "rho": rho(theta, b),
            "channel_adjusted": channel_detection_probability(
                theta, q_same, q_diff, theta_mid, layout.n, b),
        }
        if extra_thresholds:
            row["monte_carlo_at"] = {
                name: float(np.mean(counts >= t)) for name, t in extra_thresholds.items()}
        rows.append(row)
    return rows


def _separation(config: ExperimentConfig) -> dict:
    trials = max(config.trials, 1000)
    cfg = config.channel.with_seed(derive_seed(config.rng_seed, "separation"))
    same = same_seed_distances(cfg, config.layout, trials)
    diff = different_seed_distances(cfg, config.layout, trials)
    return {
        "trials": trials,
        "auc": patch_separation_auc(cfg, config.layout, trials),
        "same_seed_match_rate": float(np.mean(same < config.tau)),
        "different_seed_match_rate": float(np.mean(diff < config.tau)),
        "same_seed_mean_distance": float(same.mean()),
        "different_seed_mean_distance": float(diff.mean()),
    }


def _detection_curve(config: ExperimentConfig) -> dict:
    seed = derive_seed(config.rng_seed, "detection_curve")
    rows = detection_curve(config.angles, config.trials, config.salt, config.layout,
                           config.b, config.tau, config.theta_mid, config.channel,
                           seed, config.dim, extra_thresholds={"fixed": config.n_match})
    return {
        "rows": rows,
        "published_table": binomial_table_comparison(config.layout.n, config.b,
                                                     config.theta_mid),
    }


def _clipped_normal_angles(seed: bytes, count: int, mean: float, std: float) -> np.ndarray:
    z = normals(seed, count)
    return np.clip(mean + std * z, 0.0, 180.0)


def _cat(config: ExperimentConfig) -> dict:
    lay, salt, b = config.layout, config.salt, config.b
    spec = config.attack("cat")
    root = derive_seed(config.rng_seed, "cat")
    book = patch_codebook(salt, lay.n, b, lay.p)
    t = config.trials
    v = unit_vectors(root, "v", t, config.dim)
    recap_angles = _clipped_normal_angles(derive_seed(root, "recaption"), t, *CAT_RECAPTION_ANGLE)
    seeds = [derive_seed(root, "trial", k) for k in range(t)]
    v_recap = perturbed(v, recap_angles, seeds)

    gen = watermarked_patches(v, salt, lay, b)
    det_recap = watermarked_patches(v_recap, salt, lay, b)
    clean_scores, attacked_scores = [], []
    clean_counts, attacked_counts, recap_counts = [], [], []
    attacked_tampered, clean_tampered = [], []
    areas = []
    for k in range(t):
        clean = invert_patches(gen[k], config.channel.with_seed(derive_seed(seeds[k], "clean")))
        attacked_base = invert_patches(gen[k], config.channel.with_seed(derive_seed(seeds[k], "attacked")))
        field_ = NoiseField.from_patches(lay, attacked_base)
        k_spec = spec.with_seed(derive_seed(seeds[k], "cat"))
        mask = cat_region(lay, k_spec)
        attacked = replace_patches(field_, mask, k_spec.rng_seed,
                                   config.channel.with_seed(derive_seed(seeds[k], "paste"))).patches()
        areas.append(float(mask.mean()))
        h_clean = heatmap_from_codebook(clean, book, lay.grid, b)
        h_att = heatmap_from_codebook(attacked, book, lay.grid, b)
        clean_scores.append(tamper_score(h_clean))
        attacked_scores.append(tamper_score(h_att))
        clean_tampered.append(bool(spatial_test(h_clean).tampered))
        attacked_tampered.append(bool(spatial_test(h_att).tampered))
        clean_counts.append(int((np.linalg.norm(gen[k] - clean, axis=1) < config.tau).sum()))
        attacked_counts.append(int((np.linalg.norm(gen[k] - attacked, axis=1) < config.tau).sum()))
        recap_counts.append(int((np.linalg.norm(det_recap[k] - attacked, axis=1) < config.tau).sum()))

    clean_counts = np.array(clean_counts)
    attacked_counts = np.array(attacked_counts)
    recap_counts = np.array(recap_counts)
    baseline = FixedKeyBaseline(salt, lay)
    key = baseline.key_field
    base_detected = []
    for k in range(min(t, 50)):
        inv = invert_patches(key.patches(), config.channel.with_seed(derive_seed(seeds[k], "base")))
        f = replace_patches(NoiseField.from_patches(lay, inv),
                            cat_region(lay, spec.with_seed(derive_seed(seeds[k], "cat"))),
                            derive_seed(seeds[k], "base-paste"), config.channel)
        base_detected.append(baseline.detect(f, config.tau, config.m_match).watermarked)

    thresholds = config.thresholds()
    return {
        "trials": t,
        "scale_range": list(spec.scale_range),
        "mean_area_fraction": float(np.mean(areas)),
        "spatial_test_auc": roc_auc(attacked_scores, clean_scores),
        "spatial_test_max_clusters": DEFAULT_MAX_CLUSTERS,
        "spatial_test_tpr": rate(attacked_tampered),
        "spatial_test_fpr": rate(clean_tampered),
        "match_count_auc_semantics_unchanged": roc_auc(-attacked_counts, -clean_counts),
        "match_count_auc_recaptioned": roc_auc(-recap_counts, -clean_counts),
        "recaption_angle": {"mean": CAT_RECAPTION_ANGLE[0], "std": CAT_RECAPTION_ANGLE[1]},
        "detected_semantics_unchanged": {
            mode: rate(attacked_counts >= m) for mode, m in thresholds.items()},
        "detected_recaptioned": {
            mode: rate(recap_counts >= m) for mode, m in thresholds.items()},
        "baseline_detected_rate": rate(base_detected),
        "baseline_tamper_flag_rate": 0.0,
    }


def _forgery(config: ExperimentConfig) -> dict:
    lay, salt, b = config.layout, config.salt, config.b
    spec = config.attack("forgery_reuse")
    root = derive_seed(config.rng_seed, "forgery")
    thresholds = config.thresholds()
    q_same, q_diff = match_probabilities(config.channel, lay, config.tau, spec.passes)
    rows = []
    for theta in config.forgery_angles:
        theta = float(theta)
        label = f"forgery:{theta!r}"
        seeds = [derive_seed(root, label, k) for k in range(config.trials)]
        v = unit_vectors(root, label + ":v", config.trials, config.dim)
        v_attack = perturbed(v, theta, seeds)

        def second_pass(k, patches, seeds=seeds):
            if spec.passes == 1:
                return patches
            return invert_patches(patches, config.channel.with_seed(derive_seed(seeds[k], "detector")))

        counts = simulated_match_counts(v, v_attack, salt, lay, b, config.tau,
                                        config.channel, seeds, transform=second_pass)
        detected = {mode: rate(counts >= m) for mode, m in thresholds.items()}
        rows.append({
            "theta": theta,
            "detected": detected,
            "evasion": {mode: 1.0 - r for mode, r in detected.items()},
            "analytic_detection_probability": detection_probability(
                theta, config.theta_mid, lay.n, b),
            "channel_adjusted_detection_probability": channel_detection_probability(
                theta, q_same, q_diff, config.theta_mid, lay.n, b),
            "mean_match_count": float(counts.mean()),
        })

    baseline = FixedKeyBaseline(salt, lay)
    key = baseline.key_field.patches()
    base_counts = []
    for k in range(config.trials):
        s = derive_seed(root, "baseline", k)
        z = invert_patches(key, config.channel.with_seed(derive_seed(s, "channel")))
        if spec.passes == 2:
            z = invert_patches(z, config.channel.with_seed(derive_seed(s, "detector")))
        base_counts.append(int((np.linalg.norm(key - z, axis=1) < config.tau).sum()))
    base_counts = np.array(base_counts)
    base_detected = {mode: rate(base_counts >= m) for mode, m in thresholds.items()}
    return {
        "trials": config.trials,
        "passes": spec.passes,
        "patch_match_rates": {"same_seed": q_same, "different_seed": q_diff},
        "seal": rows,
        "baseline": {
            "detected": base_detected,
            "evasion": {mode: 1.0 - r for mode, r in base_detected.items()},
        },
    }


def _steg(config: ExperimentConfig) -> dict:
    lay, salt, b = config.layout, config.salt, config.b
    spec = config.attack("steg_average")
    root = derive_seed(config.rng_seed, "steg")
    t = config.trials
    rows = []
    for n_avg in config.steg_sizes:
        label = f"steg:{n_avg}"
        total = np.zeros((lay.n, lay.p))
        for start in range(0, n_avg, _CHUNK):
            stop = min(start + _CHUNK, n_avg)
            seeds_avg = [derive_seed(root, label + ":avg", k) for k in range(start, stop)]
            vecs = normals_many(seeds_avg, config.dim)
            total += watermarked_patches(vecs, salt, lay, b).sum(axis=0)
        estimate = total / n_avg

        seeds = [derive_seed(root, label + ":trial", k) for k in range(t)]
        v = unit_vectors(root, label + ":v", t, config.dim)
        subtract = (lambda k, p: p - spec.strength * estimate)
        pos = simulated_match_counts(v, v, salt, lay, b, config.tau, config.channel,
                                     seeds, transform=subtract)
        det = watermarked_patches(unit_vectors(root, label + ":neg-v", t, config.dim), salt, lay, b)
        neg = []
        for k in range(t):
            z = normals(derive_seed(seeds[k], "null"), lay.size)
            z = invert_patches(to_patches(z, lay), config.channel.with_seed(
                derive_seed(seeds[k], "null-channel")))
            z = z - spec.strength * estimate
            neg.append(int((np.linalg.norm(det[k] - z, axis=1) < config.tau).sum()))
        rows.append({
            "n_average": n_avg,
            "estimate_rms": float(np.sqrt(np.mean(estimate ** 2))),
            "auc": roc_auc(pos, neg),
            "mean_positive_matches": float(np.mean(pos)),
            "mean_negative_matches": float(np.mean(neg)),
        })
    return {"trials": t, "strength": spec.strength, "rows": rows}


def _erase(config: ExperimentConfig) -> dict:
    lay, salt, b = config.layout, config.salt, config.b
    root = derive_seed(config.rng_seed, "erase")
    thresholds = config.thresholds()
    rows = []
    for frac in config.erase_fracs:
        label = f"erase:{float(frac)!r}"
        seeds = [derive_seed(root, label, k) for k in range(config.trials)]
        v = unit_vectors(root, label + ":v", config.trials, config.dim)
        count = int(round(frac * lay.n))

        def erase(k, patches, seeds=seeds, count=count):
            order = np.argsort(uniforms(derive_seed(seeds[k], "erase-order"), lay.n), kind="stable")
            out = patches.copy()
            out[order[:count]] = normals(derive_seed(seeds[k], "fresh"), count * lay.p).reshape(count, lay.p)
            return out

        counts = simulated_match_counts(v, v, salt, lay, b, config.tau, config.channel,
                                        seeds, transform=erase)
        rows.append({
            "frac": float(frac),
            "detected": {mode: rate(counts >= m) for mode, m in thresholds.items()},
            "mean_match_count": float(counts.mean()),
        })
    return {"trials": config.trials, "rows": rows}


def ablation_cell(n: int, b: int, config: ExperimentConfig) -> dict:
    """Related-vs-unrelated detection AUC for one (patches, bits) setting.

    Related pairs sit at angles uniform in [20, 60] degrees, unrelated ones in
    [50, 90]; tau scales with the square root of the patch size.
    """
    lay = Layout.square(n, config.layout.channels, config.layout.height)
    tau = config.tau * math.sqrt(lay.p / 16.0)
    root = derive_seed(config.rng_seed, "ablation", n, b)
    t = config.trials
    scores = {}
    for group, (lo, hi) in (("related", (20.0, 60.0)), ("unrelated", (50.0, 90.0))):
        seeds = [derive_seed(root, group, k) for k in range(t)]
        angles = lo + (hi - lo) * uniforms(derive_seed(root, group + ":angles"), t)
        v = unit_vectors(root, group + ":v", t, config.dim)
        w = perturbed(v, angles, seeds)
        scores[group] = simulated_match_counts(v, w, config.salt, lay, b, tau, config.channel,
                                               seeds, use_codebook=False)
    m = default_match_threshold(n, b, config.theta_mid)
    return {
        "n": n,
        "b": b,
        "p": lay.p,
        "tau": tau,
        "auc": roc_auc(scores["related"], scores["unrelated"]),
        "tpr": rate(scores["related"] >= m),
        "fpr": rate(scores["unrelated"] >= m),
    }


def _ablation(config: ExperimentConfig) -> dict:
    cells = [ablation_cell(n, b, config) for n in config.ablation_n for b in config.ablation_b]
    return {"trials": config.trials, "cells": cells}


_RUNNERS = {
    "separation": _separation,
    "detection_curve": _detection_curve,
    "cat": _cat,
    "forgery": _forgery,
    "steg": _steg,
    "erase": _erase,
    "ablation": _ablation,
}


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every experiment named in ``config`` and return the report dict."""
    started = time.time()
    results = {}
    timings = {}
    for name in config.experiments:
        t0 = time.perf_counter()
        results[name] = _RUNNERS[name](config)
        timings[name] = time.perf_counter() - t0
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict(),
        "thresholds": config.thresholds(),
        "results": results,
        "runtime": {
            "package_version": __version__,
            "started_unix": started,
            "seconds": timings,
        },
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False)


def deterministic_part(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "runtime"}


def write_report(report: dict, path) -> None:
    Path(path).write_text(report_json(report) + "\n", encoding="utf-8")
