"""ROC-AUC via the Mann-Whitney U statistic."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


def roc_auc(positive_scores, negative_scores) -> float:
    """Probability that a random positive outscores a random negative.

    Ties count one half. Equivalent to the area under the ROC curve swept
    over every threshold on the score.
    """
    pos = np.asarray(positive_scores, dtype=np.float64).ravel()
    neg = np.asarray(negative_scores, dtype=np.float64).ravel()
    if pos.size == 0 or neg.size == 0:
        raise ValueError("need at least one positive and one negative score")
    if np.isnan(pos).any() or np.isnan(neg).any():
        raise ValueError("scores contain NaN")
    ranks = rankdata(np.concatenate([pos, neg]))
    u = ranks[: pos.size].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def rate(flags) -> float:
    flags = np.asarray(flags, dtype=bool)
    return float(flags.mean()) if flags.size else float("nan")
