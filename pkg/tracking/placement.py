"""
First-frame patch placement.

The bounding box is first reduced to the pixels that probably belong to the
object, that region is over-segmented with SLICO superpixels, and patches are
put at superpixel centroids, largest superpixel first, as long as they do not
overlap earlier patches by too much.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.measure import regionprops
from skimage.segmentation import slic

from .colour_model import init_model, nearest_centres
from .exceptions import PlacementError
from .geometry import Box

logger = logging.getLogger(__name__)

# Below this share of object pixels the segmentation is considered useless.
MIN_OBJECT_FRACTION = 0.05


@dataclass(frozen=True)
class SegmenterConfig:
    rho_minus: float = 0.8
    rho_plus: float = 1.2
    tau: float = 0.85
    lam: float = 1e-2

    def __post_init__(self):
        if not 0 < self.rho_minus <= 1 <= self.rho_plus:
            raise PlacementError('segmenter needs 0 < rho_minus <= 1 <= rho_plus')
        if not 0 < self.tau < 1:
            raise PlacementError(f'tau must lie in (0, 1), got {self.tau}')
        if self.lam < 0:
            raise PlacementError(f'lambda must be non-negative, got {self.lam}')

    @property
    def smoothing_passes(self):
        if self.lam == 0:
            return 0
        return math.ceil(1.0 / (100.0 * self.lam))


@dataclass(frozen=True)
class SuperpixelLabels:
    """Label raster over an analysed region: 0 outside the mask, 1..count inside."""
    labels: np.ndarray
    count: int


def region_bounds(box, width, height):
    """Integer pixel bounds (x0, y0, x1, y1) of ``box`` clipped to the frame."""
    x0 = max(0, int(math.floor(box.x)))
    y0 = max(0, int(math.floor(box.y)))
    x1 = min(width, int(math.ceil(box.right)))
    y1 = min(height, int(math.ceil(box.bottom)))
    return x0, y0, max(x0, x1), max(y0, y1)


def _scaled(box, factor):
    cx, cy = box.centre
    return Box(cx - box.w * factor / 2.0, cy - box.h * factor / 2.0, box.w * factor, box.h * factor)


class FullBoxSegmenter:
    """Treats every pixel of the box as object."""

    def __call__(self, image, bbox, cfg, rng):
        x0, y0, x1, y1 = region_bounds(bbox, image.shape[1], image.shape[0])
        return np.ones((y1 - y0, x1 - x0), dtype=bool)


class ColourLikelihoodSegmenter:
    """Object/background split from two colour-sample models.

    One model is sampled from the box shrunk by ``rho_minus`` (object prior),
    one from the ring between the box and the box grown by ``rho_plus``
    (background prior). A pixel's score is the share of object-model mass among
    the two models' masses at its nearest matching centres. Scores are smoothed
    with a 3x3 mean filter ``ceil(1 / (100 * lam))`` times and thresholded at
    ``tau``; pixels the object model cannot match are never object.
    """

    def __init__(self, radius=20.0):
        self.radius = radius

    def _likelihood(self, model, pixels):
        if model is None:
            return np.zeros(len(pixels))
        nearest = nearest_centres(model, pixels)
        share = model.counts / model.counts.sum()
        return np.where(nearest >= 0, share[np.maximum(nearest, 0)], 0.0)

    def __call__(self, image, bbox, cfg, rng):
        height, width = image.shape[:2]
        x0, y0, x1, y1 = region_bounds(bbox, width, height)
        shape = (y1 - y0, x1 - x0)
        if bbox.w < 3 or bbox.h < 3 or 0 in shape:
            return np.ones(shape, dtype=bool)

        ix0, iy0, ix1, iy1 = region_bounds(_scaled(bbox, cfg.rho_minus), width, height)
        inner = image[iy0:iy1, ix0:ix1].reshape(-1, 3)
        if not len(inner):
            return np.ones(shape, dtype=bool)

        ox0, oy0, ox1, oy1 = region_bounds(_scaled(bbox, cfg.rho_plus), width, height)
        ring = np.ones((oy1 - oy0, ox1 - ox0), dtype=bool)
        ring[y0 - oy0:y1 - oy0, x0 - ox0:x1 - ox0] = False
        outer = image[oy0:oy1, ox0:ox1][ring]

        object_model = init_model(inner, self.radius, None, rng)
        background_model = init_model(outer, self.radius, None, rng) if len(outer) else None

        pixels = image[y0:y1, x0:x1].reshape(-1, 3)
        p_object = self._likelihood(object_model, pixels)
        p_background = self._likelihood(background_model, pixels)
        total = p_object + p_background
        score = np.divide(p_object, total, out=np.zeros_like(total), where=total > 0).reshape(shape)

        for _ in range(cfg.smoothing_passes):
            score = ndimage.uniform_filter(score, size=3, mode='nearest')

        mask = (p_object.reshape(shape) > 0) & (score > cfg.tau)
        if mask.mean() < MIN_OBJECT_FRACTION:
            logger.debug('segmentation kept %.1f%% of the box, using the whole box', 100 * mask.mean())
            return np.ones(shape, dtype=bool)
        return mask


def segment_object(image, bbox, cfg, rng, radius=20.0):
    return ColourLikelihoodSegmenter(radius)(image, bbox, cfg, rng)


def enforce_connectivity(labels):
    """Make every label 4-connected and renumber labels 1..K.

    Smaller pieces of a split label join the biggest label they touch, or
    become labels of their own when they touch none.
    """
    out = labels.copy()
    for label in np.unique(out[out > 0]):
        pieces, n = ndimage.label(out == label)
        if n <= 1:
            continue
        sizes = np.bincount(pieces.ravel())[1:]
        main = int(np.argmax(sizes)) + 1
        for piece in range(1, n + 1):
            if piece == main:
                continue
            region = pieces == piece
            border = ndimage.binary_dilation(region) & ~region
            neighbours = out[border]
            neighbours = neighbours[(neighbours > 0) & (neighbours != label)]
            if neighbours.size:
                candidates = np.unique(neighbours)
                areas = [(out == c).sum() for c in candidates]
                out[region] = candidates[int(np.argmax(areas))]
            else:
                out[region] = out.max() + 1

    uniq = np.unique(out[out > 0])
    lookup = np.zeros(out.max() + 1, dtype=np.int64)
    lookup[uniq] = np.arange(1, len(uniq) + 1)
    return lookup[out]


def slico_superpixels(image, mask, target_k):
    """Zero-parameter SLIC over the masked pixels of ``image``.

    ``image`` and ``mask`` cover the same region. The number of superpixels asked
    for never exceeds the number of masked pixels.
    """
    mask = np.asarray(mask, dtype=bool)
    n_masked = int(mask.sum())
    if not n_masked:
        raise PlacementError('cannot superpixel an empty mask')
    if target_k < 1:
        raise PlacementError(f'target superpixel count must be at least 1, got {target_k}')

    k = min(int(target_k), n_masked)
    if k == 1 or n_masked < 4:
        labels = mask.astype(np.int64)
    else:
        labels = slic(
            np.ascontiguousarray(image),
            n_segments=k,
            slic_zero=True,
            mask=mask,
            start_label=1,
            max_num_iter=10,
            enforce_connectivity=True,
            convert2lab=True,
            channel_axis=-1,
        )
        labels = np.where(mask, labels, 0)
    labels = enforce_connectivity(labels)
    return SuperpixelLabels(labels, int(labels.max()))


def overlap_fraction(a, b, patch_w, patch_h):
    """Share of one patch's area covered by another equal-sized patch."""
    ox = max(0.0, patch_w - abs(a[0] - b[0]))
    oy = max(0.0, patch_h - abs(a[1] - b[1]))
    return ox * oy / float(patch_w * patch_h)


def place_patches(labels, n_patches, patch_w, patch_h, max_overlap, offset=(0, 0), frame_size=None):
    """Greedy patch centres at superpixel centroids, biggest superpixel first.

    ``offset`` moves region coordinates into frame coordinates; ``frame_size``
    (width, height) keeps centres at least half a patch inside the frame.
    """
    props = sorted(regionprops(labels.labels), key=lambda p: (-p.area, p.label))
    accepted = []
    for prop in props:
        row, col = prop.centroid
        x = math.floor(col + 0.5) + offset[0]
        y = math.floor(row + 0.5) + offset[1]
        if frame_size is not None:
            x = min(max(x, patch_w // 2), frame_size[0] - 1 - patch_w // 2)
            y = min(max(y, patch_h // 2), frame_size[1] - 1 - patch_h // 2)
        centre = (float(x), float(y))
        if all(overlap_fraction(centre, other, patch_w, patch_h) < max_overlap for other in accepted):
            accepted.append(centre)
        if len(accepted) >= n_patches:
            break
    return accepted


def uniform_grid(bbox, n_patches):
    """Patch centres on a ceil(sqrt(P)) square grid over the box, row-major."""
    side = math.ceil(math.sqrt(n_patches))
    centres = []
    for row in range(side):
        for col in range(side):
            if len(centres) == n_patches:
                return centres
            centres.append((bbox.x + (col + 0.5) * bbox.w / side,
                            bbox.y + (row + 0.5) * bbox.h / side))
    return centres
