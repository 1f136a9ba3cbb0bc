"""
Averaging many watermarked fields
=================================

An attacker averages N watermarked fields hoping to recover a shared pattern
to subtract. Each patch only has 2**b possible noise vectors, so the average
settles at their mean rather than at zero, yet subtracting it leaves the
watermark fully detectable.
"""
import numpy as np

from seal.harness import ExperimentConfig, run_experiment

cfg = ExperimentConfig(experiments=("steg",), trials=100, steg_sizes=(5, 50, 500, 5000))
rows = run_experiment(cfg)["results"]["steg"]["rows"]

b = cfg.b
for r in rows:
    n = r["n_average"]
    floor = np.sqrt(2.0 ** -b + (1 - 2.0 ** -b) / n)
    print("N=%5d  estimate rms %.3f (predicted %.3f)  AUC %.3f  mean matches %.0f vs %.1f"
          % (n, r["estimate_rms"], floor, r["auc"], r["mean_positive_matches"], r["mean_negative_matches"]))
