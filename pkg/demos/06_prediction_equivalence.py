#!/usr/bin/env python3
"""Comparing prediction outputs across devices.

When the same model runs on a float device and a quantized one, the
question is whether the outputs still agree. Segmentation masks compare by
Dice coefficient; classifier probability pairs compare by the maximum
absolute componentwise difference, and a label check confirms whether any
prediction actually flips class.
"""

import numpy as np

from edgebench import (
    ConfusionMatrix,
    ProbPair,
    classification_error,
    dice,
    dice_pair_stats,
    mean_classification_error,
    normalize_confusion,
    predicted_label_agrees,
    threshold_mask,
)

rng = np.random.default_rng(11)

# Segmentation: reference masks vs a slightly eroded candidate.
reference, candidate = [], []
for _ in range(20):
    probs = rng.random((64, 64))
    ref = threshold_mask(probs, 0.6)
    noisy = probs + rng.normal(0, 0.02, size=probs.shape)
    candidate.append(threshold_mask(np.clip(noisy, 0, 1), 0.6))
    reference.append(ref)
stats = dice_pair_stats(reference, candidate)
print(f"mask agreement: Dice {stats.mean:.3f} ± {stats.std:.3f} over {stats.count} images")
print(f"one identical pair: Dice {dice(reference[0], reference[0]):.3f}")

# Classification: probabilities drift a little under quantization.
pairs = []
flips = 0
for _ in range(50):
    p = float(rng.uniform(0.05, 0.95))
    ref = ProbPair(p, 1 - p)
    drift = float(rng.normal(0, 0.02))
    q = min(1.0, max(0.0, p + drift))
    cand = ProbPair(q, 1 - q)
    pairs.append((ref, cand))
    flips += not predicted_label_agrees(ref, cand)
err = mean_classification_error(pairs)
print(f"\nclassifier drift: error {err.mean:.3f} ± {err.std:.3f} over {err.count}")
print(f"label flips: {flips}")
print(f"single-pair example: {classification_error(ProbPair(0.70, 0.30), ProbPair(0.55, 0.41)):.2f}")

# Confusion counts normalize row-wise for reporting.
counts = ConfusionMatrix(np.array([[67, 33], [13, 87]]))
print("\nrow-normalized confusion matrix:")
for row in normalize_confusion(counts):
    print("  " + "  ".join(f"{v:.2f}" for v in row))
