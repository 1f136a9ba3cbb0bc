"""
Localising a pasted object
==========================

Pasting an object into a watermarked image only changes the inverted noise
under the object. Recovering the best key for every patch gives a distance
heatmap, and the hot cells of a tampered field clump into one block.
"""
from seal import ChannelConfig, Layout, embed_text, generate_watermarked_noise, invert
from seal.attacks import AttackSpec, cat_attack, cat_region
from seal.tamper import heatmap, spatial_test, tamper_score

salt = bytes(range(32))
cfg = ChannelConfig(0.4, bytes(32))
v = embed_text("an empty park bench at dawn")
z_inv = invert(generate_watermarked_noise(v, salt), cfg)

spec = AttackSpec("cat", scale_range=(0.3, 0.6), rng_seed=bytes(range(1, 33)))
attacked = cat_attack(z_inv, spec, cfg)
print("pasted rectangle covers %d of 1024 patches" % cat_region(Layout(), spec).sum())

for name, field in (("clean", z_inv), ("attacked", attacked)):
    h = heatmap(field, salt)  # searches 2**7 keys per patch
    report = spatial_test(h)
    print("%-8s clusters %3d  largest %3d  tampered %s  score %.2f"
          % (name, report.cluster_count, report.largest_cluster_area, report.tampered, tamper_score(h)))

# coarse view of the attacked heatmap: '#' marks a patch no key explains
h = heatmap(attacked, salt)
for row in h.grid:
    print("".join("#" if x > 3.0 else "." for x in row))
