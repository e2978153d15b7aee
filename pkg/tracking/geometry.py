"""
Non-shearing affine transforms, boxes and overlap metrics.

Points are (x, y) pairs in pixel units; a pixel at row i, column j has its
centre at (j, i). Boxes are real-valued (x, y, w, h) with (x, y) the top-left
corner.
"""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import GeometryError


@dataclass(frozen=True)
class Box:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise GeometryError(f'box extents must be non-negative, got {self.w}x{self.h}')

    @property
    def area(self):
        return self.w * self.h

    @property
    def centre(self):
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def right(self):
        return self.x + self.w

    @property
    def bottom(self):
        return self.y + self.h

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)

    @classmethod
    def from_polygon(cls, coords):
        """Minimal axis-aligned box around a flat list of x, y pairs."""
        xs = [float(v) for v in coords[0::2]]
        ys = [float(v) for v in coords[1::2]]
        if not xs or len(xs) != len(ys):
            raise GeometryError('polygon needs an even, non-zero number of coordinates')
        return cls(min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys))


@dataclass(frozen=True)
class MotionPriors:
    sigma_r: float = math.pi / 16
    sigma_s: float = 0.02
    sigma_x: float = 0.15
    sigma_y: float = 0.1

    def __post_init__(self):
        for name in ('sigma_r', 'sigma_s', 'sigma_x', 'sigma_y'):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise GeometryError(f'{name} must be positive and finite, got {value}')


@dataclass(frozen=True)
class TransformParams:
    """Rotation ``r`` (radians), isotropic scale ``s`` and translation offset.

    The translation is relative to ``anchor``: the transform rotates and scales
    about the anchor, then moves the anchor by (tx, ty).
    """
    r: float = 0.0
    s: float = 1.0
    tx: float = 0.0
    ty: float = 0.0
    anchor: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.s > 0:
            raise GeometryError(f'scale must be positive, got {self.s}')
        if not all(math.isfinite(v) for v in (self.r, self.s, self.tx, self.ty)):
            raise GeometryError('transform parameters must be finite')

    @classmethod
    def identity(cls, anchor=(0.0, 0.0)):
        return cls(anchor=tuple(anchor))


def sample_transform_arrays(priors, prev_box, rng, n):
    """Draw ``n`` transforms as parameter arrays (r, s, tx, ty)."""
    if prev_box.w <= 0 or prev_box.h <= 0:
        raise GeometryError('previous box must have positive width and height')
    r = rng.normal(0.0, priors.sigma_r, n)
    s = rng.normal(1.0, priors.sigma_s, n)
    bad = s <= 0
    while bad.any():
        s[bad] = rng.normal(1.0, priors.sigma_s, int(bad.sum()))
        bad = s <= 0
    tx = rng.laplace(0.0, prev_box.w * priors.sigma_x, n)
    ty = rng.laplace(0.0, prev_box.h * priors.sigma_y, n)
    return r, s, tx, ty


def sample_transforms(priors, prev_box, anchor, rng, n):
    r, s, tx, ty = sample_transform_arrays(priors, prev_box, rng, n)
    anchor = (float(anchor[0]), float(anchor[1]))
    return [TransformParams(float(r[i]), float(s[i]), float(tx[i]), float(ty[i]), anchor) for i in range(n)]


def sample_transform(priors, prev_box, anchor, rng):
    return sample_transforms(priors, prev_box, anchor, rng, 1)[0]


def apply_transform(t, anchor, p):
    """Map point ``p`` through ``t`` about ``anchor``; ``None`` uses ``t.anchor``."""
    ax, ay = t.anchor if anchor is None else anchor
    dx, dy = p[0] - ax, p[1] - ay
    c, s = math.cos(t.r), math.sin(t.r)
    return (ax + t.tx + t.s * (c * dx - s * dy),
            ay + t.ty + t.s * (s * dx + c * dy))


def apply_transforms(r, s, tx, ty, anchor, points):
    """Vectorised ``apply_transform``: G parameter sets times P points -> (G, P, 2)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    rel = points - np.asarray(anchor, dtype=np.float64)
    cos = (np.cos(r) * s)[:, None]
    sin = (np.sin(r) * s)[:, None]
    x = anchor[0] + np.asarray(tx)[:, None] + cos * rel[None, :, 0] - sin * rel[None, :, 1]
    y = anchor[1] + np.asarray(ty)[:, None] + sin * rel[None, :, 0] + cos * rel[None, :, 1]
    return np.stack([x, y], axis=-1)


def enclosing_aabb(points, patch_w, patch_h):
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if not len(points):
        raise GeometryError('cannot enclose an empty set of patches')
    x0 = points[:, 0].min() - patch_w / 2.0
    y0 = points[:, 1].min() - patch_h / 2.0
    x1 = points[:, 0].max() + patch_w / 2.0
    y1 = points[:, 1].max() + patch_h / 2.0
    return Box(float(x0), float(y0), float(x1 - x0), float(y1 - y0))


def expand_box(box, factor):
    if factor < 0:
        raise GeometryError(f'expansion factor must be non-negative, got {factor}')
    cx, cy = box.centre
    w = box.w * (1.0 + factor)
    h = box.h * (1.0 + factor)
    return Box(cx - w / 2.0, cy - h / 2.0, w, h)


def intersection_area(a, b):
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    return iw * ih


def iou(a, b):
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def centre_error(a, b):
    (ax, ay), (bx, by) = a.centre, b.centre
    return math.hypot(ax - bx, ay - by)


def clip_box(box, width, height):
    """Intersection of ``box`` with the frame, or None when they are disjoint."""
    x0, y0 = max(box.x, 0.0), max(box.y, 0.0)
    x1, y1 = min(box.right, float(width)), min(box.bottom, float(height))
    if x1 <= x0 or y1 <= y0:
        return None
    return Box(x0, y0, x1 - x0, y1 - y0)
