import shutil
import tempfile
from pathlib import Path

import numpy as np
from django.contrib.auth.models import User
from django.test import TestCase, override_settings
from django.urls import reverse

from tracking.config import TrackerConfig
from tracking.evaluation import run_one_pass, run_supervised
from tracking.imaging import save_image
from tracking.models import EvaluationRun, FrameRecord

from .test_evaluation import StubTracker, indexed_sequence

MEDIA = tempfile.mkdtemp()


@override_settings(MEDIA_ROOT=MEDIA)
class EvaluationRunModelTests(TestCase):
    @classmethod
    def tearDownClass(cls):
        super().tearDownClass()
        shutil.rmtree(MEDIA, ignore_errors=True)

    def setUp(self):
        self.sequence = indexed_sequence()

    def test_from_supervised_result(self):
        result = run_supervised(self.sequence, tracker_factory=StubTracker(self.sequence, bad={3, 9}).factory)
        config = TrackerConfig().with_ablations('no_update')
        run = EvaluationRun.from_result(result, config, results_dir='/tmp/results/stub')
        self.assertEqual(run.frames.count(), 20)
        self.assertEqual(run.failures, 2.0)
        self.assertEqual(run.failure_frames, [3, 9])
        self.assertEqual(run.ablations, 'no_update')
        self.assertEqual(run.config['n_patches'], 35)
        self.assertIsNone(run.auc)
        skipped = run.frames.get(index=5)
        self.assertEqual(skipped.status, 'skipped')
        self.assertIsNone(skipped.x)
        self.assertIsNone(skipped.iou)
        self.assertEqual(str(run), 'stub (Supervised (re-initialising), seed 0)')

    def test_from_one_pass_result(self):
        result = run_one_pass(self.sequence, tracker_factory=StubTracker(self.sequence).factory)
        run = EvaluationRun.from_result(result)
        self.assertEqual(run.auc, 1.0)
        self.assertEqual(run.summary()['precision@20'], 1.0)
        self.assertEqual(run.summary()['ablations'], [])

    def test_preview_thumbnail(self):
        path = Path(MEDIA) / 'frame.png'
        save_image(np.full((600, 800, 3), 90, dtype=np.uint8), path)
        result = run_supervised(self.sequence, tracker_factory=StubTracker(self.sequence).factory)
        run = EvaluationRun.from_result(result, preview_path=path)
        self.assertTrue(run.preview.name.startswith('previews/stub-frame'))
        self.assertEqual(run.preview.width, 480)

    def test_frames_go_with_the_run(self):
        result = run_supervised(self.sequence, tracker_factory=StubTracker(self.sequence).factory)
        EvaluationRun.from_result(result).delete()
        self.assertEqual(FrameRecord.objects.count(), 0)


class RunViewTests(TestCase):
    def setUp(self):
        sequence = indexed_sequence()
        self.run = EvaluationRun.from_result(
            run_supervised(sequence, tracker_factory=StubTracker(sequence, bad={3}).factory)
        )
        other = indexed_sequence(name='ball')
        self.other = EvaluationRun.from_result(
            run_one_pass(other, tracker_factory=StubTracker(other).factory)
        )

    def test_list(self):
        response = self.client.get(reverse('run_list'))
        self.assertEqual(response.status_code, 200)
        self.assertContains(response, 'stub')
        self.assertContains(response, 'ball')

    def test_list_filters(self):
        response = self.client.get(reverse('run_list'), {'mode': 'onepass'})
        self.assertEqual(list(response.context['runs']), [self.other])
        response = self.client.get(reverse('run_list'), {'sequence': 'stu'})
        self.assertEqual(list(response.context['runs']), [self.run])

    def test_detail(self):
        response = self.client.get(self.run.get_absolute_url())
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.context['failure_frames'], [3])
        self.assertEqual(len(response.context['frames']), 20)

    def test_missing_run(self):
        self.assertEqual(self.client.get(reverse('run_detail', args=[9999])).status_code, 404)

    def test_summary_json(self):
        response = self.client.get(reverse('run_summary', args=[self.other.pk]))
        self.assertEqual(response.status_code, 200)
        data = response.json()
        self.assertEqual(data['AUC'], 1.0)
        self.assertEqual(data['mode'], 'onepass')

    def test_delete_needs_staff(self):
        url = reverse('run_delete', args=[self.run.pk])
        response = self.client.post(url)
        self.assertEqual(response.status_code, 302)
        self.assertIn('/admin/login/', response['Location'])
        self.assertTrue(EvaluationRun.objects.filter(pk=self.run.pk).exists())

        User.objects.create_user('viewer', password='pw-viewer-123')
        self.client.login(username='viewer', password='pw-viewer-123')
        self.client.post(url)
        self.assertTrue(EvaluationRun.objects.filter(pk=self.run.pk).exists())

    def test_staff_can_delete(self):
        User.objects.create_user('admin', password='pw-admin-123', is_staff=True)
        self.client.login(username='admin', password='pw-admin-123')
        url = reverse('run_delete', args=[self.run.pk])
        self.assertEqual(self.client.get(url).status_code, 200)
        response = self.client.post(url)
        self.assertRedirects(response, reverse('run_list'))
        self.assertFalse(EvaluationRun.objects.filter(pk=self.run.pk).exists())
