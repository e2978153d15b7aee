# Generated by Django 6.0.1 on 2026-10-19 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='EvaluationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('sequence', models.CharField(max_length=200)),
                ('mode', models.CharField(choices=[('supervised', 'Supervised (re-initialising)'), ('onepass', 'One pass')], default='supervised', max_length=20)),
                ('seed', models.BigIntegerField(default=0)),
                ('config', models.JSONField(default=dict)),
                ('ablations', models.CharField(blank=True, max_length=200)),
                ('ao', models.FloatField(default=0.0, verbose_name='AO')),
                ('failures', models.FloatField(default=0.0)),
                ('auc', models.FloatField(blank=True, null=True, verbose_name='AUC')),
                ('precision_at_20', models.FloatField(blank=True, null=True, verbose_name='precision@20')),
                ('fps', models.FloatField(default=0.0)),
                ('frame_count', models.PositiveIntegerField(default=0)),
                ('results_dir', models.CharField(blank=True, max_length=500)),
                ('preview', models.ImageField(blank=True, null=True, upload_to='previews/')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'evaluation run',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='FrameRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('index', models.PositiveIntegerField()),
                ('status', models.CharField(choices=[('init', 'Initialised'), ('tracked', 'Tracked'), ('failure', 'Failure'), ('skipped', 'Skipped')], max_length=10)),
                ('x', models.FloatField(blank=True, null=True)),
                ('y', models.FloatField(blank=True, null=True)),
                ('w', models.FloatField(blank=True, null=True)),
                ('h', models.FloatField(blank=True, null=True)),
                ('iou', models.FloatField(blank=True, null=True, verbose_name='IoU')),
                ('centre_error', models.FloatField(blank=True, null=True)),
                ('quality', models.FloatField(blank=True, null=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='frames', to='tracking.evaluationrun')),
            ],
            options={
                'ordering': ['run', 'index'],
                'constraints': [models.UniqueConstraint(fields=('run', 'index'), name='unique_frame_per_run')],
            },
        ),
    ]
