"""
Sparse colour-sample patch models.

A patch model is a short list of (colour centre, match count) pairs built by
sampling the patch's own pixels: a pixel either counts towards the nearest
existing centre within radius R or becomes a new centre. Candidate image
regions are compared to a model by counting how many of their pixels fall
within R of each centre and feeding both normalised count vectors through a
modified Bhattacharyya distance.

All colour distances are Euclidean in RGB and are compared in squared form, so
integer-valued inputs are matched without rounding error.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import ModelError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CentreCount:
    centre: tuple
    count: float


@dataclass(eq=False)
class PatchModel:
    """Location plus sparse colour histogram of one patch.

    ``centres`` is an (S, 3) float array, ``counts`` the matching (S,) array.
    Instances are treated as values: ``update_model`` returns a new one.
    """
    location: np.ndarray
    centres: np.ndarray
    counts: np.ndarray
    patch_w: int
    patch_h: int
    radius: float
    pruned_ties: list = field(default_factory=list)

    def __post_init__(self):
        self.location = np.asarray(self.location, dtype=np.float64).reshape(2)
        self.centres = np.asarray(self.centres, dtype=np.float64).reshape(-1, 3)
        self.counts = np.asarray(self.counts, dtype=np.float64).reshape(-1)
        if len(self.centres) != len(self.counts):
            raise ModelError('centres and counts differ in length')

    @property
    def size(self):
        return len(self.counts)

    @property
    def n_pixels(self):
        return self.patch_w * self.patch_h

    @property
    def histogram(self):
        """The model's own counts divided by the patch pixel count."""
        return self.counts / self.n_pixels

    @property
    def pairs(self):
        return [CentreCount(tuple(c), float(h)) for c, h in zip(self.centres, self.counts)]

    def with_location(self, location):
        return replace(self, location=np.asarray(location, dtype=np.float64), pruned_ties=[])


def _as_pixels(pixels):
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.size == 0:
        return pixels.reshape(0, 3)
    return pixels.reshape(-1, 3)


def _sample_pairs(pixels, radius, rng):
    """Visit every pixel once in a random order, growing centres of radius R."""
    r2 = radius * radius
    order = rng.permutation(len(pixels))
    centres = np.empty((len(pixels), 3), dtype=np.float64)
    counts = np.empty(len(pixels), dtype=np.float64)
    n = 0
    for i in order:
        pixel = pixels[i]
        if n:
            d2 = ((centres[:n] - pixel) ** 2).sum(axis=1)
            d2[d2 >= r2] = np.inf
            nearest = int(np.argmin(d2))
            if np.isfinite(d2[nearest]):
                counts[nearest] += 1
                continue
        centres[n] = pixel
        counts[n] = 1
        n += 1
    return centres[:n].copy(), counts[:n].copy()


def init_model(pixels, radius, max_samples, rng, location=(0.0, 0.0), patch_w=None, patch_h=None):
    """Build a patch model from the pixels of its region.

    ``patch_w``/``patch_h`` default to a square patch holding ``len(pixels)``
    pixels. When more than ``max_samples`` pairs exist the lowest-count pairs
    are removed one at a time, ties decided by ``rng``; the indices chosen at
    each tie are kept in ``pruned_ties`` so a run can be replayed.
    ``max_samples=None`` disables the cap.
    """
    pixels = _as_pixels(pixels)
    if not len(pixels):
        raise ModelError('cannot build a colour model from an empty pixel list')
    if radius <= 0:
        raise ModelError(f'matching radius must be positive, got {radius}')
    if max_samples is not None and max_samples < 1:
        raise ModelError(f'max_samples must be at least 1, got {max_samples}')

    if patch_w is None or patch_h is None:
        side = int(round(np.sqrt(len(pixels))))
        patch_w = patch_h = side

    centres, counts = _sample_pairs(pixels, radius, rng)
    ties = []
    if max_samples is not None:
        while len(counts) > max_samples:
            lowest = np.flatnonzero(counts == counts.min())
            drop = int(rng.choice(lowest)) if len(lowest) > 1 else int(lowest[0])
            if len(lowest) > 1:
                ties.append(drop)
            centres = np.delete(centres, drop, axis=0)
            counts = np.delete(counts, drop)

    return PatchModel(location, centres, counts, patch_w, patch_h, radius, pruned_ties=ties)


def _nearest_matches(pixels, centres, radius):
    """Index of the closest centre within R for every pixel, -1 when none.

    Exact ties go to the lowest-index centre (``argmin`` returns the first).
    """
    if not len(pixels) or not len(centres):
        return np.full(len(pixels), -1, dtype=np.intp)
    d2 = cdist(pixels, centres, 'sqeuclidean')
    d2[d2 >= radius * radius] = np.inf
    nearest = np.argmin(d2, axis=1)
    hit = np.isfinite(d2[np.arange(len(pixels)), nearest])
    return np.where(hit, nearest, -1)


def nearest_centres(model, pixels):
    """Closest matching centre index for every pixel, -1 where nothing matches."""
    return _nearest_matches(_as_pixels(pixels), model.centres, model.radius)


def match_counts(model, pixels):
    """Normalised per-centre match counts of ``pixels`` against ``model``."""
    pixels = _as_pixels(pixels)
    nearest = _nearest_matches(pixels, model.centres, model.radius)
    counts = np.bincount(nearest[nearest >= 0], minlength=model.size)
    return counts.astype(np.float64) / model.n_pixels


def match_counts_batch(model, blocks, valid=None):
    """``match_counts`` for N candidate blocks at once.

    ``blocks`` is (N, n, 3); ``valid`` an optional (N, n) mask of pixels that
    exist in the frame. Returns an (N, S) array.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    n_blocks = blocks.shape[0]
    if model.size == 0:
        return np.zeros((n_blocks, 0))
    d2 = ((blocks[:, :, None, :] - model.centres[None, None, :, :]) ** 2).sum(axis=-1)
    d2[d2 >= model.radius * model.radius] = np.inf
    if valid is not None:
        d2[~valid] = np.inf
    nearest = np.argmin(d2, axis=-1)
    hit = np.isfinite(np.take_along_axis(d2, nearest[..., None], axis=-1)[..., 0])
    one_hot = (nearest[..., None] == np.arange(model.size)) & hit[..., None]
    return one_hot.sum(axis=1).astype(np.float64) / model.n_pixels


def bhattacharyya_coefficient(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ModelError(f'histogram lengths differ: {p.shape} vs {q.shape}')
    return float(np.sqrt(p * q).sum())


def mbd(p, q, b):
    """Modified Bhattacharyya distance (1 - BC)^b."""
    if b < 0:
        raise ModelError(f'MBD exponent must be non-negative, got {b}')
    gap = 1.0 - bhattacharyya_coefficient(p, q)
    # a perfect match is distance 0 for every b, including b = 0
    return float(gap ** b) if gap > 0 else 0.0


def qualities_from_counts(histogram, candidate_counts, b):
    """Patch quality 1 - MBD for each row of an (N, S) count array."""
    if histogram.size == 0:
        return np.zeros(candidate_counts.shape[0])
    bc = np.sqrt(histogram[None, :] * candidate_counts).sum(axis=1)
    gap = np.clip(1.0 - bc, 0.0, 1.0)
    return 1.0 - np.where(gap > 0, gap ** b, 0.0)


def patch_quality(model, candidate_pixels, b):
    candidate = match_counts(model, candidate_pixels)
    return 1.0 - mbd(model.histogram, candidate, b)


def object_quality(qualities):
    qualities = np.asarray(qualities, dtype=np.float64)
    if not qualities.size:
        raise ModelError('object quality needs at least one patch quality')
    return float(qualities.mean())


def update_model(model, matched_pixels, count_rate, centre_rate, radius, rng):
    """Blend the pixels found at the patch's new location into its model.

    Counts move towards the per-centre match sizes at ``count_rate``, matched
    centres move towards (or past) the mean of their matches at
    ``centre_rate``, unmatched pixels seed new pairs at count-rate scale and
    finally every pair with a count below ``count_rate`` is dropped.
    """
    if not 0.0 <= count_rate <= 1.0:
        raise ModelError(f'count rate must lie in [0, 1], got {count_rate}')
    if centre_rate < 0:
        raise ModelError(f'centre rate must be non-negative, got {centre_rate}')

    pixels = _as_pixels(matched_pixels)
    centres = model.centres.copy()
    counts = model.counts.copy()

    nearest = _nearest_matches(pixels, centres, radius)
    hit = nearest >= 0
    sizes = np.bincount(nearest[hit], minlength=len(counts)).astype(np.float64)

    counts = count_rate * sizes + (1.0 - count_rate) * counts

    moved = sizes > 0
    if moved.any():
        sums = np.zeros_like(centres)
        np.add.at(sums, nearest[hit], pixels[hit])
        means = sums[moved] / sizes[moved, None]
        centres[moved] = np.clip(centre_rate * means + (1.0 - centre_rate) * centres[moved], 0.0, 255.0)

    unmatched = pixels[~hit]
    if count_rate > 0 and len(unmatched):
        born_centres, born_counts = _sample_pairs(unmatched, radius, rng)
        centres = np.vstack([centres, born_centres])
        counts = np.concatenate([counts, count_rate * born_counts])

    keep = counts >= count_rate
    logger.debug('model update: %d matched, %d born, %d pruned',
                 int(hit.sum()), len(counts) - len(model.counts), int((~keep).sum()))
    return replace(model, centres=centres[keep], counts=counts[keep], radius=radius, pruned_ties=[])
