import math

import numpy as np
from django.test import SimpleTestCase

from tracking.exceptions import GeometryError
from tracking.geometry import (
    Box,
    MotionPriors,
    TransformParams,
    apply_transform,
    apply_transforms,
    centre_error,
    clip_box,
    enclosing_aabb,
    expand_box,
    iou,
    sample_transform,
    sample_transform_arrays,
)


def raster_iou(a, b, size=40):
    grid = np.zeros((2, size, size), dtype=bool)
    for k, box in enumerate((a, b)):
        grid[k, int(box.y):int(box.bottom), int(box.x):int(box.right)] = True
    union = (grid[0] | grid[1]).sum()
    return (grid[0] & grid[1]).sum() / union if union else 0.0


class TransformTests(SimpleTestCase):
    def test_identity_maps_points_to_themselves(self):
        t = TransformParams.identity(anchor=(3.5, -2.0))
        for p in [(0.0, 0.0), (10.25, 7.5), (-4.0, 100.0)]:
            self.assertEqual(apply_transform(t, None, p), p)

    def test_quarter_turn(self):
        x, y = apply_transform(TransformParams(r=math.pi / 2), (0.0, 0.0), (1.0, 0.0))
        self.assertAlmostEqual(x, 0.0, places=12)
        self.assertAlmostEqual(y, 1.0, places=12)

    def test_scale_about_anchor(self):
        self.assertEqual(apply_transform(TransformParams(s=2.0), (10.0, 10.0), (11.0, 10.0)), (12.0, 10.0))

    def test_explicit_anchor_overrides_stored_one(self):
        t = TransformParams(s=2.0, anchor=(0.0, 0.0))
        self.assertEqual(apply_transform(t, (10.0, 10.0), (11.0, 10.0)), (12.0, 10.0))
        self.assertEqual(apply_transform(t, None, (11.0, 10.0)), (22.0, 20.0))

    def test_anchor_is_fixed_by_rotation_and_scale(self):
        t = TransformParams(r=0.7, s=1.3, anchor=(5.0, 8.0))
        x, y = apply_transform(t, None, (5.0, 8.0))
        self.assertEqual((x, y), (5.0, 8.0))

    def test_distances_scale_by_s(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            r, s = rng.normal(0, 0.5), rng.uniform(0.5, 2.0)
            tx, ty = rng.normal(0, 10, 2)
            anchor = tuple(rng.normal(0, 50, 2))
            points = rng.normal(0, 40, size=(2, 2))
            mapped = apply_transforms(np.array([r]), np.array([s]), np.array([tx]), np.array([ty]), anchor, points)[0]
            d = np.linalg.norm(points[0] - points[1])
            d_mapped = np.linalg.norm(mapped[0] - mapped[1])
            self.assertLess(abs(d_mapped - s * d), 1e-9)

    def test_vectorised_matches_scalar(self):
        t = TransformParams(0.3, 1.1, 4.0, -2.0, (10.0, 20.0))
        points = [(0.0, 0.0), (15.0, 22.0)]
        mapped = apply_transforms(np.array([t.r]), np.array([t.s]), np.array([t.tx]), np.array([t.ty]),
                                  t.anchor, points)[0]
        for p, m in zip(points, mapped):
            np.testing.assert_allclose(m, apply_transform(t, t.anchor, p), atol=1e-12)

    def test_invalid_params(self):
        with self.assertRaises(GeometryError):
            TransformParams(s=0.0)
        with self.assertRaises(GeometryError):
            TransformParams(r=math.inf)


class SamplerTests(SimpleTestCase):
    def test_statistics_match_priors(self):
        rng = np.random.default_rng(12345)
        r, s, tx, ty = sample_transform_arrays(MotionPriors(), Box(0, 0, 100, 100), rng, 100_000)
        self.assertLess(abs(r.mean()), 0.01)
        self.assertAlmostEqual(r.std() / (math.pi / 16), 1.0, delta=0.05)
        self.assertAlmostEqual(s.mean(), 1.0, delta=0.001)
        self.assertAlmostEqual(s.std() / 0.02, 1.0, delta=0.05)
        self.assertAlmostEqual(np.abs(tx).mean() / 15.0, 1.0, delta=0.05)
        self.assertAlmostEqual(np.abs(ty).mean() / 10.0, 1.0, delta=0.05)
        self.assertTrue((s > 0).all())

    def test_same_seed_same_draws(self):
        a = sample_transform_arrays(MotionPriors(), Box(0, 0, 40, 30), np.random.default_rng(8), 50)
        b = sample_transform_arrays(MotionPriors(), Box(0, 0, 40, 30), np.random.default_rng(8), 50)
        for x, y in zip(a, b):
            self.assertEqual(x.tobytes(), y.tobytes())

    def test_tiny_priors_approach_identity(self):
        priors = MotionPriors(1e-12, 1e-12, 1e-12, 1e-12)
        t = sample_transform(priors, Box(0, 0, 10, 10), (5.0, 5.0), np.random.default_rng(0))
        self.assertAlmostEqual(t.r, 0.0, places=9)
        self.assertAlmostEqual(t.s, 1.0, places=9)
        self.assertAlmostEqual(t.tx, 0.0, places=9)
        self.assertEqual(t.anchor, (5.0, 5.0))

    def test_degenerate_previous_box(self):
        with self.assertRaises(GeometryError):
            sample_transform_arrays(MotionPriors(), Box(0, 0, 0, 10), np.random.default_rng(0), 1)

    def test_priors_must_be_positive(self):
        with self.assertRaises(GeometryError):
            MotionPriors(sigma_r=0.0)


class BoxTests(SimpleTestCase):
    def test_enclosing_aabb(self):
        self.assertEqual(enclosing_aabb([(10, 10)], 5, 5), Box(7.5, 7.5, 5, 5))
        self.assertEqual(enclosing_aabb([(0, 0), (10, 20)], 5, 5), Box(-2.5, -2.5, 15, 25))
        self.assertEqual(enclosing_aabb([(0, 3), (10, 3), (20, 3)], 5, 7).h, 7)
        with self.assertRaises(GeometryError):
            enclosing_aabb([], 5, 5)

    def test_expand_box(self):
        self.assertEqual(expand_box(Box(0, 0, 10, 20), 0.2), Box(-1, -2, 12, 24))
        self.assertEqual(expand_box(Box(3, 4, 5, 6), 0), Box(3, 4, 5, 6))
        self.assertEqual(expand_box(Box(3, 4, 0, 0), 0.2), Box(3, 4, 0, 0))

    def test_iou_examples(self):
        self.assertEqual(iou(Box(0, 0, 10, 10), Box(0, 0, 10, 10)), 1.0)
        self.assertEqual(iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)), 0.0)
        self.assertAlmostEqual(iou(Box(0, 0, 10, 10), Box(5, 0, 10, 10)), 1 / 3)
        self.assertEqual(iou(Box(1, 1, 0, 0), Box(1, 1, 0, 0)), 0.0)

    def test_iou_matches_raster_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            a = Box(*rng.integers(0, 20, 2), *rng.integers(1, 20, 2))
            b = Box(*rng.integers(0, 20, 2), *rng.integers(1, 20, 2))
            self.assertAlmostEqual(iou(a, b), raster_iou(a, b), delta=1e-12)
            self.assertEqual(iou(a, b), iou(b, a))

    def test_centre_error(self):
        self.assertEqual(centre_error(Box(0, 0, 10, 10), Box(3, 4, 10, 10)), 5.0)

    def test_polygon_aabb(self):
        self.assertEqual(Box.from_polygon([0, 0, 10, 10, 20, 0, 10, -10]), Box(0, -10, 20, 20))

    def test_clip_box(self):
        self.assertEqual(clip_box(Box(-5, -5, 20, 20), 10, 10), Box(0, 0, 10, 10))
        self.assertIsNone(clip_box(Box(20, 20, 5, 5), 10, 10))

    def test_negative_extent_rejected(self):
        with self.assertRaises(GeometryError):
            Box(0, 0, -1, 5)
