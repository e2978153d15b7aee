"""
Per-frame localisation.

Candidate patch sets come from G random non-shearing affine transforms of the
previous patch centres. Every candidate is scored by the mean patch quality,
the best L are refined by moving each patch to the best position within a
W x W window, and the best refined set gives the new patch centres and the
reported box.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .colour_model import match_counts_batch, qualities_from_counts
from .geometry import apply_transforms, enclosing_aabb, expand_box, sample_transform_arrays

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateSet:
    transform: tuple
    patch_centres: np.ndarray
    quality: float


@dataclass(frozen=True)
class Localisation:
    centres: np.ndarray
    qualities: np.ndarray
    valid_fractions: np.ndarray
    box: object
    quality: float
    transform: tuple
    global_quality: float
    candidates: tuple = ()


def block_offsets(patch_w, patch_h):
    """Row-major (dx, dy) offsets of a patch's pixels from its centre pixel."""
    dy, dx = np.mgrid[0:patch_h, 0:patch_w]
    return (dx - patch_w // 2).ravel(), (dy - patch_h // 2).ravel()


def round_half_up(values):
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.int64)


def gather_blocks(frame, centres, patch_w, patch_h):
    """Pixel blocks around N centres.

    Returns an (N, w*h, 3) array and an (N, w*h) mask of in-frame pixels;
    out-of-frame positions hold arbitrary values and must be ignored.
    """
    height, width = frame.shape[:2]
    centres = round_half_up(np.asarray(centres).reshape(-1, 2))
    dx, dy = block_offsets(patch_w, patch_h)
    xs = centres[:, 0, None] + dx[None, :]
    ys = centres[:, 1, None] + dy[None, :]
    valid = (xs >= 0) & (xs < width) & (ys >= 0) & (ys < height)
    pixels = frame[np.clip(ys, 0, height - 1), np.clip(xs, 0, width - 1)]
    return pixels, valid


def extract_patch_pixels(frame, centre, patch_w, patch_h):
    """In-frame pixels of the patch at ``centre`` (row-major) and their count."""
    pixels, valid = gather_blocks(frame, [centre], patch_w, patch_h)
    kept = pixels[0][valid[0]]
    return kept, len(kept)


def score_positions(frame, model, positions, b):
    """Patch quality of ``model`` at each of N positions."""
    pixels, valid = gather_blocks(frame, positions, model.patch_w, model.patch_h)
    counts = match_counts_batch(model, pixels, valid)
    return qualities_from_counts(model.histogram, counts, b)


def _params(r, s, tx, ty, i):
    return (float(r[i]), float(s[i]), float(tx[i]), float(ty[i]))


def _map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _ordered_best(qualities, keys, n):
    """Indices of the ``n`` highest qualities; equal qualities ordered by ``keys``."""
    order = np.lexsort((keys, -qualities))
    return order[:n]


def window_offsets(window):
    half = window // 2
    dy, dx = np.mgrid[-half:half + 1, -half:half + 1]
    return np.stack([dx.ravel(), dy.ravel()], axis=1).astype(np.float64)


def _refine_patch(frame, model, base, offsets, b, tie_keys):
    """Best window position per candidate for one patch.

    ``base`` is (L, 2), the transformed centres. Among equal-quality offsets the
    one closest to the window centre wins, then the highest tie key.
    """
    positions = base[:, None, :] + offsets[None, :, :]
    quality = score_positions(frame, model, positions.reshape(-1, 2), b).reshape(len(base), len(offsets))
    best = quality.max(axis=1, keepdims=True)
    dist2 = (offsets ** 2).sum(axis=1)[None, :]
    at_best = quality == best
    nearest = np.where(at_best, dist2, np.inf).min(axis=1, keepdims=True)
    eligible = at_best & (dist2 == nearest)
    choice = np.argmax(np.where(eligible, tie_keys, -1.0), axis=1)
    rows = np.arange(len(base))
    return positions[rows, choice], quality[rows, choice]


def localise(frame, patches, prev_box, cfg, transform_rng, tie_rng, transforms=None):
    """Locate the patch set in ``frame``.

    ``transforms`` optionally replaces the sampled transforms with explicit
    ``(r, s, tx, ty)`` arrays; the anchor is always the centroid of the current
    patch centres.
    """
    frame = np.asarray(frame)
    points = np.array([p.location for p in patches], dtype=np.float64)
    anchor = points.mean(axis=0)

    if transforms is None:
        r, s, tx, ty = sample_transform_arrays(cfg.priors, prev_box, transform_rng, cfg.n_transforms)
    else:
        r, s, tx, ty = (np.asarray(v, dtype=np.float64) for v in transforms)
    n_candidates = len(r)
    candidates = apply_transforms(r, s, tx, ty, anchor, points)  # (G, P, 2)
    b = cfg.b

    per_patch = _map(
        lambda i: score_positions(frame, patches[i], candidates[:, i, :], b),
        list(range(len(patches))),
        cfg.workers,
    )
    global_q = np.stack(per_patch, axis=1)  # (G, P)
    candidate_q = global_q.mean(axis=1)

    n_refine = min(cfg.refine, n_candidates)
    cut_keys = tie_rng.random(n_candidates)
    if n_refine == 0:
        best = int(_ordered_best(candidate_q, cut_keys, 1)[0])
        centres = candidates[best]
        qualities = global_q[best]
        final_quality = float(candidate_q[best])
        sets = (CandidateSet(_params(r, s, tx, ty, best), centres, final_quality),)
    else:
        kept = _ordered_best(candidate_q, cut_keys, n_refine)
        offsets = window_offsets(cfg.window)
        tie_keys = tie_rng.random((len(patches), n_refine, len(offsets)))
        refined = _map(
            lambda i: _refine_patch(frame, patches[i], candidates[kept, i, :], offsets, b, tie_keys[i]),
            list(range(len(patches))),
            cfg.workers,
        )
        refined_centres = np.stack([c for c, _ in refined], axis=1)  # (L, P, 2)
        refined_q = np.stack([q for _, q in refined], axis=1)  # (L, P)
        totals = refined_q.mean(axis=1)
        pick = int(np.argmax(totals))
        best = int(kept[pick])
        centres = refined_centres[pick]
        qualities = refined_q[pick]
        final_quality = float(totals[pick])
        sets = tuple(
            CandidateSet(_params(r, s, tx, ty, k), refined_centres[j], float(totals[j]))
            for j, k in enumerate(kept)
        )

    _, valid = gather_blocks(frame, centres, patches[0].patch_w, patches[0].patch_h)
    box = expand_box(enclosing_aabb(centres, patches[0].patch_w, patches[0].patch_h), cfg.expand)
    logger.debug('localised: global %.4f, refined %.4f, transform r=%.4f s=%.4f t=(%.2f, %.2f)',
                 candidate_q[best], final_quality, r[best], s[best], tx[best], ty[best])
    return Localisation(
        centres=np.asarray(centres, dtype=np.float64),
        qualities=np.asarray(qualities, dtype=np.float64),
        valid_fractions=valid.mean(axis=1),
        box=box,
        quality=final_quality,
        transform=_params(r, s, tx, ty, best),
        global_quality=float(candidate_q[best]),
        candidates=sets,
    )

