"""
Watermark a noise field and detect it again
===========================================

A caption is turned into a semantic vector, the vector picks a SimHash key for
every patch, and each key seeds that patch's Gaussian noise. Detection
regenerates the noise from a (possibly different) caption and counts patches
that land within tau of the inverted field.
"""
import numpy as np

from seal import ChannelConfig, Layout, angle, detect, embed_text, generate_watermarked_noise, invert

salt = bytes(range(32))  # the owner's secret
layout = Layout()        # 4x64x64 latent, 32x32 grid of 16-value patches

v = embed_text("a red fox curled up in fresh snow")
z = generate_watermarked_noise(v, salt, layout)
print("field shape", z.as_array().shape, "mean %.3f std %.3f" % (z.values.mean(), z.values.std()))

# the diffusion model and its inversion are replaced by additive noise
z_inv = invert(z, ChannelConfig(sigma=0.4, rng_seed=bytes(32)))

captions = [
    "a red fox curled up in fresh snow",
    "a red fox curled up in deep snow",
    "a fox sleeping in snow",
    "quarterly revenue spreadsheet with totals",
]
for caption in captions:
    w = embed_text(caption)
    d = detect(w, z_inv, salt, m_match=79)
    print("%-45s angle %5.1f  matches %4d  watermarked %s"
          % (caption, angle(v, w), d.match_count, d.watermarked))

# an unwatermarked field almost never matches
from seal import random_noise
print("random field:", detect(v, random_noise(layout, "other"), salt).match_count, "matches")
