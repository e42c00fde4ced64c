"""Output-equivalence metrics between reference and candidate predictions.

Segmentation outputs compare as binary masks via the Dice coefficient
(2|A n B| / (|A| + |B|) over active pixels); classification outputs compare
as probability pairs via the maximum absolute componentwise difference.
Aggregates report mean +/- population std. A 2x2 confusion matrix helper
row-normalizes integer counts.

Masks load from PGM (P2/P5) or single-channel PNG files, nonzero = active;
paired directories match by filename. Probability pairs load from CSV
``image_id,p_glaucoma,p_healthy`` and match by image_id.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import DimensionMismatch, EmptyInput, LengthMismatch, ZeroRow

PROB_HEADER = ["image_id", "p_glaucoma", "p_healthy"]


@dataclass(frozen=True)
class BinaryMask:
    """A width x height grid of {0,1} pixels."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError("mask must be a non-empty 2-D grid")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask pixels must be 0 or 1")
        object.__setattr__(self, "pixels", arr.astype(np.uint8))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def active_count(self) -> int:
        return int(self.pixels.sum())


def threshold_mask(values: np.ndarray, threshold: float = 0.5) -> BinaryMask:
    """Binarize a probability map or grayscale image: active where value is
    strictly above the threshold."""
    return BinaryMask((np.asarray(values, dtype=float) > threshold).astype(np.uint8))


def load_mask(path: str | Path) -> BinaryMask:
    """Load a PGM or single-channel PNG file; nonzero pixels are active."""
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return threshold_mask(arr, 0)


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """Dice coefficient over active pixels; two all-empty masks count as 1."""
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatch(
            f"mask shapes differ: {a.pixels.shape} vs {b.pixels.shape}"
        )
    total = a.active_count + b.active_count
    if total == 0:
        return 1.0
    intersection = int((a.pixels & b.pixels).sum())
    return 2.0 * intersection / total


@dataclass(frozen=True)
class QualityStats:
    """Mean +/- population std over a set of per-image comparisons."""

    mean: float
    std: float
    count: int


def _stats(values: Sequence[float]) -> QualityStats:
    if min(values) == max(values):  # constant series reduces exactly
        return QualityStats(mean=values[0], std=0.0, count=len(values))
    mean = math.fsum(values) / len(values)
    var = math.fsum((v - mean) ** 2 for v in values) / len(values)
    return QualityStats(mean=mean, std=math.sqrt(var), count=len(values))


def dice_pair_stats(
    reference: Sequence[BinaryMask], candidate: Sequence[BinaryMask]
) -> QualityStats:
    """Per-image Dice between paired reference and candidate masks."""
    if len(reference) != len(candidate):
        raise LengthMismatch(
            f"{len(reference)} reference masks vs {len(candidate)} candidates"
        )
    if not reference:
        raise EmptyInput("no mask pairs to compare")
    return _stats([dice(r, c) for r, c in zip(reference, candidate)])


@dataclass(frozen=True)
class ProbPair:
    """Class probabilities of one prediction: (glaucoma, healthy)."""

    p_glaucoma: float
    p_healthy: float

    def __post_init__(self):
        for v in (self.p_glaucoma, self.p_healthy):
            if not 0.0 <= v <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


def classification_error(reference: ProbPair, candidate: ProbPair) -> float:
    """Maximum absolute componentwise difference between two predictions."""
    return max(
        abs(reference.p_glaucoma - candidate.p_glaucoma),
        abs(reference.p_healthy - candidate.p_healthy),
    )


def mean_classification_error(
    pairs: Sequence[tuple[ProbPair, ProbPair]]
) -> QualityStats:
    """Mean +/- population std of per-prediction classification error."""
    if not pairs:
        raise EmptyInput("no prediction pairs to compare")
    return _stats([classification_error(r, c) for r, c in pairs])


def predicted_label_agrees(reference: ProbPair, candidate: ProbPair) -> bool:
    """True when both predictions pick the same class. Ties classify as
    glaucoma (fail-safe toward the pathological class)."""

    def label(p: ProbPair) -> str:
        return "glaucoma" if p.p_glaucoma >= p.p_healthy else "healthy"

    return label(reference) == label(candidate)


@dataclass(frozen=True)
class ConfusionMatrix:
    """2x2 counts over {glaucoma, healthy}; rows = true, columns = predicted."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.shape != (2, 2):
            raise ValueError("confusion matrix must be 2x2")
        if np.any(arr < 0):
            raise ValueError("counts must be non-negative")
        if not arr.any():
            raise ValueError("confusion matrix must have a nonzero row")
        object.__setattr__(self, "counts", arr.astype(float))


def normalize_confusion(m: ConfusionMatrix) -> np.ndarray:
    """Divide each row by its sum; rows of the result sum to 1."""
    sums = m.counts.sum(axis=1)
    for i, s in enumerate(sums):
        if s == 0:
            raise ZeroRow(f"row {i} sums to zero")
    return m.counts / sums[:, None]


# --- file loading for paired comparisons ---

def load_mask_pairs(
    ref_dir: str | Path, cand_dir: str | Path
) -> tuple[list[BinaryMask], list[BinaryMask], list[str]]:
    """Load masks from two directories paired by filename.

    Both directories must contain exactly the same mask filenames.
    Returns (reference_masks, candidate_masks, names) in name order.
    """
    ref_dir, cand_dir = Path(ref_dir), Path(cand_dir)
    exts = {".pgm", ".png"}
    ref_names = {p.name for p in ref_dir.iterdir() if p.suffix.lower() in exts}
    cand_names = {p.name for p in cand_dir.iterdir() if p.suffix.lower() in exts}
    if ref_names != cand_names:
        missing = sorted(ref_names ^ cand_names)
        raise LengthMismatch(f"directories differ in mask files: {missing}")
    if not ref_names:
        raise EmptyInput(f"no .pgm/.png masks under {ref_dir}")
    names = sorted(ref_names)
    return (
        [load_mask(ref_dir / n) for n in names],
        [load_mask(cand_dir / n) for n in names],
        names,
    )


def parse_prob_csv(text: str) -> dict[str, ProbPair]:
    """Parse ``image_id,p_glaucoma,p_healthy`` CSV text."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != PROB_HEADER:
        raise LengthMismatch(
            f"bad header: expected {','.join(PROB_HEADER)!r}, found {header}"
        )
    out: dict[str, ProbPair] = {}
    for row in reader:
        if not row:
            continue
        if len(row) != 3:
            raise LengthMismatch(f"expected 3 fields, found {len(row)}: {row}")
        image_id = row[0].strip()
        if image_id in out:
            raise LengthMismatch(f"duplicate image_id {image_id!r}")
        out[image_id] = ProbPair(float(row[1]), float(row[2]))
    if not out:
        raise EmptyInput("probability CSV has no data rows")
    return out


def pair_prob_maps(
    reference: dict[str, ProbPair], candidate: dict[str, ProbPair]
) -> list[tuple[ProbPair, ProbPair]]:
    """Join two probability maps on image_id; the id sets must be equal."""
    if set(reference) != set(candidate):
        missing = sorted(set(reference) ^ set(candidate))
        raise LengthMismatch(f"image ids differ between files: {missing}")
    return [(reference[k], candidate[k]) for k in sorted(reference)]
