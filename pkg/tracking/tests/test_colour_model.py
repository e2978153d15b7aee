import math

import numpy as np
from django.test import SimpleTestCase

from tracking.colour_model import (
    PatchModel,
    bhattacharyya_coefficient,
    init_model,
    match_counts,
    match_counts_batch,
    mbd,
    object_quality,
    patch_quality,
    qualities_from_counts,
    update_model,
)
from tracking.exceptions import ModelError


def make_model(centres, counts, patch_w=5, patch_h=5, radius=20.0):
    return PatchModel((0.0, 0.0), np.array(centres, dtype=float), np.array(counts, dtype=float),
                      patch_w, patch_h, radius)


def brute_force_counts(model, pixels):
    counts = np.zeros(model.size)
    r2 = model.radius ** 2
    for pixel in pixels:
        best, best_d2 = -1, math.inf
        for s, centre in enumerate(model.centres):
            d2 = sum((float(a) - float(b)) ** 2 for a, b in zip(pixel, centre))
            if d2 < r2 and d2 < best_d2:
                best, best_d2 = s, d2
        if best >= 0:
            counts[best] += 1
    return counts / model.n_pixels


class InitModelTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_identical_pixels_give_one_pair(self):
        model = init_model([(100, 150, 200)] * 25, 20.0, 10, self.rng)
        self.assertEqual(model.size, 1)
        np.testing.assert_array_equal(model.centres[0], [100, 150, 200])
        self.assertEqual(model.counts[0], 25)

    def test_two_colours_give_two_pairs(self):
        pixels = [(0, 0, 0)] * 13 + [(255, 255, 255)] * 12
        model = init_model(pixels, 20.0, 10, self.rng)
        self.assertEqual(sorted(model.counts), [12, 13])

    def test_pruning_keeps_max_samples_lowest_counts_dropped(self):
        base = np.array([(0, 0, 0), (60, 0, 0), (0, 60, 0), (0, 0, 60), (60, 60, 60)], dtype=float)
        offsets = np.array([(0, 0, 0), (2, 0, 0), (0, 2, 0), (0, 0, 2), (2, 2, 0)], dtype=float)
        pixels = np.concatenate([b + offsets for b in base])
        model = init_model(pixels, 20.0, 3, self.rng)
        self.assertEqual(model.size, 3)
        self.assertEqual(model.counts.sum(), 15)
        np.testing.assert_array_equal(model.counts, [5, 5, 5])
        self.assertEqual(len(model.pruned_ties), 2)

    def test_counts_conserved_without_cap(self):
        pixels = self.rng.integers(0, 256, size=(25, 3))
        model = init_model(pixels, 20.0, None, self.rng)
        self.assertEqual(model.counts.sum(), 25)

    def test_every_counted_pixel_within_radius_of_its_centre(self):
        pixels = self.rng.integers(0, 80, size=(25, 3)).astype(float)
        model = init_model(pixels, 20.0, None, self.rng)
        for pixel in pixels:
            d = np.sqrt(((model.centres - pixel) ** 2).sum(axis=1))
            self.assertLess(d.min(), 20.0)

    def test_same_seed_same_model(self):
        pixels = np.random.default_rng(1).integers(0, 256, size=(25, 3))
        a = init_model(pixels, 20.0, 10, np.random.default_rng(3))
        b = init_model(pixels, 20.0, 10, np.random.default_rng(3))
        np.testing.assert_array_equal(a.centres, b.centres)
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_errors(self):
        with self.assertRaises(ModelError):
            init_model([], 20.0, 10, self.rng)
        with self.assertRaises(ModelError):
            init_model([(1, 2, 3)], 0.0, 10, self.rng)
        with self.assertRaises(ModelError):
            init_model([(1, 2, 3)], 20.0, 0, self.rng)


class MatchCountTests(SimpleTestCase):
    def test_own_uniform_pixels_match_fully(self):
        model = make_model([(10, 20, 30)], [25])
        np.testing.assert_array_equal(match_counts(model, [(10, 20, 30)] * 25), [1.0])

    def test_far_pixels_match_nothing(self):
        model = make_model([(10, 20, 30)], [25])
        np.testing.assert_array_equal(match_counts(model, [(200, 200, 200)] * 25), [0.0])

    def test_closest_centre_wins(self):
        model = make_model([(0, 0, 0), (30, 0, 0)], [1, 1])
        np.testing.assert_allclose(match_counts(model, [(14, 0, 0)]), [1 / 25, 0.0])

    def test_exact_tie_goes_to_lowest_index(self):
        model = make_model([(0, 0, 0), (20, 0, 0)], [1, 1])
        np.testing.assert_allclose(match_counts(model, [(10, 0, 0)]), [1 / 25, 0.0])

    def test_empty_pixels_give_zero_histogram(self):
        model = make_model([(0, 0, 0)], [25])
        np.testing.assert_array_equal(match_counts(model, []), [0.0])

    def test_agrees_with_brute_force_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            size = int(rng.integers(1, 11))
            model = make_model(rng.integers(0, 64, size=(size, 3)), np.ones(size))
            pixels = rng.integers(0, 64, size=(25, 3))
            np.testing.assert_array_equal(match_counts(model, pixels), brute_force_counts(model, pixels))

    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        model = make_model(rng.integers(0, 64, size=(6, 3)), np.ones(6))
        blocks = rng.integers(0, 64, size=(8, 25, 3))
        valid = rng.random((8, 25)) > 0.2
        batch = match_counts_batch(model, blocks, valid)
        for i in range(8):
            np.testing.assert_array_equal(batch[i], match_counts(model, blocks[i][valid[i]]))

    def test_histogram_is_sub_normalised(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            model = make_model(rng.integers(0, 256, size=(4, 3)), np.ones(4))
            h = match_counts(model, rng.integers(0, 256, size=(25, 3)))
            self.assertTrue((h >= 0).all())
            self.assertLessEqual(h.sum(), 1.0 + 1e-12)


class SimilarityTests(SimpleTestCase):
    def test_coefficient_examples(self):
        self.assertAlmostEqual(bhattacharyya_coefficient([0.5, 0.5], [0.5, 0.5]), 1.0)
        self.assertEqual(bhattacharyya_coefficient([1, 0], [0, 1]), 0.0)
        self.assertAlmostEqual(bhattacharyya_coefficient([1, 0], [0.5, 0.5]), 0.70711, delta=1e-5)

    def test_length_mismatch(self):
        with self.assertRaises(ModelError):
            bhattacharyya_coefficient([1.0], [0.5, 0.5])

    def test_mbd_examples(self):
        self.assertEqual(mbd([0.5, 0.5], [0.5, 0.5], 1.4), 0.0)
        self.assertAlmostEqual(mbd([1, 0], [0.5, 0.5], 0.5), 0.54120, delta=1e-4)
        self.assertAlmostEqual(mbd([1, 0], [0.5, 0.5], 1.4), 0.17920, delta=1e-4)
        with self.assertRaises(ModelError):
            mbd([1.0], [1.0], -1)

    def test_perfect_match_is_zero_for_any_exponent(self):
        for b in (0.0, 0.5, 1.4, 3.0):
            with self.subTest(b=b):
                self.assertEqual(mbd([0.5, 0.5], [0.5, 0.5], b), 0.0)
        self.assertEqual(mbd([1, 0], [0.5, 0.5], 0.0), 1.0)

    def test_batched_qualities_at_zero_exponent(self):
        histogram = np.array([0.5, 0.5])
        counts = np.array([[0.5, 0.5], [1.0, 0.0], [0.0, 0.0]])
        np.testing.assert_array_equal(qualities_from_counts(histogram, counts, 0.0), [1.0, 0.0, 0.0])
        model = init_model([(100, 100, 100)] * 25, 20.0, 10, np.random.default_rng(0))
        self.assertEqual(patch_quality(model, [(100, 100, 100)] * 25, 0.0), 1.0)

    def test_random_properties(self):
        rng = np.random.default_rng(99)
        for _ in range(10000):
            k = int(rng.integers(1, 8))
            p = rng.random(k)
            q = rng.random(k)
            p /= p.sum() * rng.uniform(1.0, 2.0)
            q /= q.sum() * rng.uniform(1.0, 2.0)
            bc = bhattacharyya_coefficient(p, q)
            self.assertEqual(bc, bhattacharyya_coefficient(q, p))
            self.assertGreaterEqual(bc, 0.0)
            self.assertLessEqual(bc, 1.0 + 1e-12)
            self.assertAlmostEqual(mbd(p, q, 0.5), math.sqrt(max(0.0, 1.0 - bc)), delta=1e-12)
            self.assertGreaterEqual(mbd(p, q, 1.0), mbd(p, q, 2.0))

    def test_mbd_decreases_in_coefficient(self):
        low = mbd([1.0, 0.0], [0.2, 0.8], 1.4)
        high = mbd([1.0, 0.0], [0.6, 0.4], 1.4)
        self.assertGreater(low, high)

    def test_patch_quality(self):
        own = [(100, 100, 100)] * 25
        model = init_model(own, 20.0, 10, np.random.default_rng(0))
        self.assertEqual(patch_quality(model, own, 1.4), 1.0)
        self.assertEqual(patch_quality(model, [(0, 0, 0)] * 25, 1.4), 0.0)

        half = init_model([(50, 50, 50)] * 16, 20.0, 10, np.random.default_rng(0))
        candidate = [(50, 50, 50)] * 8 + [(250, 250, 250)] * 8
        self.assertAlmostEqual(patch_quality(half, candidate, 1.4), 0.82080, delta=1e-4)

    def test_object_quality(self):
        self.assertEqual(object_quality([1.0]), 1.0)
        self.assertEqual(object_quality([0.0, 1.0]), 0.5)
        self.assertAlmostEqual(object_quality([0.2, 0.4, 0.9]), 0.5)
        with self.assertRaises(ModelError):
            object_quality([])


class UpdateModelTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(13)

    def test_worked_example(self):
        model = make_model([(100, 100, 100)], [10])
        updated = update_model(model, [(110, 100, 100)] * 20, 0.05, 1.7, 20.0, self.rng)
        self.assertAlmostEqual(updated.counts[0], 10.5)
        np.testing.assert_allclose(updated.centres[0], [117, 100, 100])

    def test_small_unmatched_pair_is_pruned(self):
        model = make_model([(100, 100, 100), (200, 200, 200)], [0.04, 10])
        updated = update_model(model, [], 0.05, 1.7, 20.0, self.rng)
        self.assertEqual(updated.size, 1)
        np.testing.assert_array_equal(updated.centres[0], [200, 200, 200])
        self.assertAlmostEqual(updated.counts[0], 9.5)

    def test_zero_rates_leave_model_unchanged(self):
        model = make_model([(100, 100, 100), (10, 200, 30)], [20, 5])
        updated = update_model(model, [(90, 90, 90)] * 10 + [(255, 0, 0)] * 15, 0.0, 0.0, 20.0, self.rng)
        np.testing.assert_array_equal(updated.centres, model.centres)
        np.testing.assert_array_equal(updated.counts, model.counts)

    def test_fixed_point(self):
        model = make_model([(20, 20, 20), (120, 60, 200)], [15, 10])
        pixels = [(20, 20, 20)] * 15 + [(120, 60, 200)] * 10
        updated = update_model(model, pixels, 0.05, 1.7, 20.0, self.rng)
        np.testing.assert_allclose(updated.counts, model.counts, atol=1e-9)
        np.testing.assert_allclose(updated.centres, model.centres, atol=1e-9)

    def test_unmatched_pixels_are_born_at_count_rate_scale(self):
        model = make_model([(0, 0, 0)], [25])
        updated = update_model(model, [(0, 0, 0)] * 20 + [(200, 0, 0)] * 5, 0.05, 1.7, 20.0, self.rng)
        self.assertEqual(updated.size, 2)
        self.assertAlmostEqual(updated.counts[1], 0.25)

    def test_centres_are_clamped(self):
        model = make_model([(250, 250, 250)], [10])
        updated = update_model(model, [(255, 255, 255)] * 25, 0.05, 1.7, 20.0, self.rng)
        self.assertTrue((updated.centres <= 255).all())

    def test_pruning_floor_on_random_updates(self):
        rng = np.random.default_rng(77)
        for _ in range(1000):
            model = init_model(rng.integers(0, 256, size=(25, 3)), 20.0, 10, rng)
            count_rate = float(rng.uniform(0.01, 0.5))
            updated = update_model(model, rng.integers(0, 256, size=(25, 3)), count_rate, 1.7, 20.0, rng)
            self.assertTrue((updated.counts >= count_rate).all())
            self.assertTrue(((updated.centres >= 0) & (updated.centres <= 255)).all())

    def test_rate_validation(self):
        model = make_model([(0, 0, 0)], [25])
        with self.assertRaises(ModelError):
            update_model(model, [], 1.5, 1.7, 20.0, self.rng)
        with self.assertRaises(ModelError):
            update_model(model, [], 0.05, -1.0, 20.0, self.rng)
