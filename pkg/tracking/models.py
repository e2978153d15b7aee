import math
from pathlib import Path

from django.core.files.base import ContentFile
from django.db import models
from django.urls import reverse

from .imaging import thumbnail_bytes


def _finite(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class EvaluationRun(models.Model):
    MODE_CHOICES = [
        ('supervised', 'Supervised (re-initialising)'),
        ('onepass', 'One pass'),
    ]

    sequence = models.CharField(max_length=200)
    mode = models.CharField(max_length=20, choices=MODE_CHOICES, default='supervised')
    seed = models.BigIntegerField(default=0)
    config = models.JSONField(default=dict)
    ablations = models.CharField(max_length=200, blank=True)
    ao = models.FloatField('AO', default=0.0)
    failures = models.FloatField(default=0.0)
    auc = models.FloatField('AUC', null=True, blank=True)
    precision_at_20 = models.FloatField('precision@20', null=True, blank=True)
    fps = models.FloatField(default=0.0)
    frame_count = models.PositiveIntegerField(default=0)
    results_dir = models.CharField(max_length=500, blank=True)
    preview = models.ImageField(upload_to='previews/', blank=True, null=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = 'evaluation run'

    def __str__(self):
        return f'{self.sequence} ({self.get_mode_display()}, seed {self.seed})'

    def get_absolute_url(self):
        return reverse('run_detail', kwargs={'pk': self.pk})

    @property
    def failure_frames(self):
        return list(self.frames.filter(status='failure').values_list('index', flat=True))

    def attach_preview(self, image_path):
        """Store a JPEG thumbnail of ``image_path`` as the run preview."""
        name = f'{self.sequence}-{Path(image_path).stem}.jpg'
        self.preview.save(name, ContentFile(thumbnail_bytes(image_path)), save=False)

    def summary(self):
        data = {
            'sequence': self.sequence,
            'mode': self.mode,
            'seed': self.seed,
            'frames': self.frame_count,
            'AO': self.ao,
            'failures': self.failures,
            'fps': self.fps,
            'ablations': [a for a in self.ablations.split(',') if a],
        }
        if self.auc is not None:
            data['AUC'] = self.auc
            data['precision@20'] = self.precision_at_20
        return data

    @classmethod
    def from_result(cls, result, config=None, results_dir='', preview_path=None):
        """Store a ``RunResult`` with one ``FrameRecord`` per frame."""
        curves = result.curves
        run = cls(
            sequence=result.sequence,
            mode=result.mode,
            seed=result.seed,
            config=config.to_dict() if config is not None else {},
            ablations=','.join(sorted(config.ablations)) if config is not None else '',
            ao=result.ao,
            failures=result.failure_count,
            auc=curves.auc if curves is not None else None,
            precision_at_20=curves.precision_at(20) if curves is not None else None,
            fps=result.fps,
            frame_count=len(result),
            results_dir=str(results_dir),
        )
        if preview_path is not None:
            run.attach_preview(preview_path)
        run.save()
        FrameRecord.objects.bulk_create([
            FrameRecord(
                run=run,
                index=i,
                status=result.statuses[i],
                x=box.x if box is not None else None,
                y=box.y if box is not None else None,
                w=box.w if box is not None else None,
                h=box.h if box is not None else None,
                iou=_finite(result.ious[i]),
                centre_error=_finite(result.centre_errors[i]),
                quality=_finite(result.qualities[i]),
            )
            for i, box in enumerate(result.boxes)
        ])
        return run


class FrameRecord(models.Model):
    STATUS_CHOICES = [
        ('init', 'Initialised'),
        ('tracked', 'Tracked'),
        ('failure', 'Failure'),
        ('skipped', 'Skipped'),
    ]

    run = models.ForeignKey(EvaluationRun, on_delete=models.CASCADE, related_name='frames')
    index = models.PositiveIntegerField()
    status = models.CharField(max_length=10, choices=STATUS_CHOICES)
    x = models.FloatField(null=True, blank=True)
    y = models.FloatField(null=True, blank=True)
    w = models.FloatField(null=True, blank=True)
    h = models.FloatField(null=True, blank=True)
    iou = models.FloatField('IoU', null=True, blank=True)
    centre_error = models.FloatField(null=True, blank=True)
    quality = models.FloatField(null=True, blank=True)

    class Meta:
        ordering = ['run', 'index']
        constraints = [
            models.UniqueConstraint(fields=['run', 'index'], name='unique_frame_per_run'),
        ]

    def __str__(self):
        return f'{self.run.sequence} frame {self.index}'
