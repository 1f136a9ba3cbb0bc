"""Semantic-aware initial-noise watermarking with simulated inversion."""

__version__ = "0.1.0"

from .channel import (
    ChannelConfig,
    calibrate_tau,
    invert,
    match_probabilities,
    patch_separation_auc,
)
from .detection import (
    DetectionDecision,
    MatchMap,
    channel_detection_probability,
    default_match_threshold,
    detect,
    detection_probability,
    match_map,
    rho,
)
from .noisefield import Layout, NoiseField, generate_watermarked_noise, random_noise
from .semantic import ProviderSpec, angle, embed_text, perturb_by_angle
from .simhash import key_bits, patch_noise, patch_seed, projection_vector, simhash_patch
from .tamper import Heatmap, TamperReport, heatmap, recover_patch_bits, spatial_test, tamper_score
