"""
Management command driving the tracker: evaluate sequences, render synthetic
ones, and re-score stored results.

    python manage.py track run --seq data/ball --mode onepass --out results/
    python manage.py track synth --spec scenarios/slide.json --out data/slide
    python manage.py track eval --results results/

Configuration and parse errors exit with status 2, run errors with status 1.
"""
from dataclasses import replace
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from tracking.config import ABLATIONS, load_config
from tracking.evaluation import MODES, SUPERVISED, evaluate_suite
from tracking.exceptions import ConfigError, GroundTruthError, ScenarioError, TrackingError
from tracking.export import evaluate_results_dir, export_suite
from tracking.imaging import save_label_map, save_mask
from tracking.sequences import load_sequence
from tracking.synthetic import load_scenario, make_synthetic
from tracking.tracker import init

PARSE_ERRORS = (ConfigError, GroundTruthError, ScenarioError)


def _fail(exc):
    code = 2 if isinstance(exc, PARSE_ERRORS) else 1
    return CommandError(str(exc), returncode=code)


def _ablations(value):
    names = [part.strip() for part in (value or '').split(',') if part.strip()]
    unknown = sorted(set(names) - set(ABLATIONS))
    if unknown:
        raise CommandError(
            f'unknown ablation switch(es): {", ".join(unknown)} (choose from {", ".join(ABLATIONS)})',
            returncode=2,
        )
    return names


class Command(BaseCommand):
    help = 'Runs the part-based tracker: evaluate sequences, render synthetic ones, re-score results'

    def add_arguments(self, parser):
        actions = parser.add_subparsers(dest='action', required=True)

        run = actions.add_parser('run', help='Track one or more sequences and export the results')
        run.add_argument('--seq', action='append', required=True, help='Frame directory or manifest (repeatable)')
        run.add_argument('--gt', help='Ground-truth file (single sequence only)')
        run.add_argument('--config', help='Tracker config file (key = value lines)')
        run.add_argument('--seed', type=int, default=0)
        run.add_argument('--mode', choices=MODES, default=SUPERVISED)
        run.add_argument('--out', help='Output directory (default: TRACKING["RESULTS_ROOT"])')
        run.add_argument('--annotate', action='store_true', help='Write frames with the boxes drawn on them')
        run.add_argument('--ablate', default='', help=f'Comma-separated switches: {", ".join(ABLATIONS)}')
        run.add_argument('--repetitions', type=int, default=1, help='Supervised repetitions per sequence')
        run.add_argument('--workers', type=int, help='Worker count (default: TRACKING["WORKERS"])')
        run.add_argument('--record', action='store_true', help='Store the runs in the database')
        run.add_argument('--dump-placement', action='store_true',
                         help='Write the first-frame object mask and superpixel labels as PNG')

        synth = actions.add_parser('synth', help='Render a synthetic sequence from a JSON scenario')
        synth.add_argument('--spec', required=True)
        synth.add_argument('--out', required=True)
        synth.add_argument('--seed', type=int, default=0)

        evaluate = actions.add_parser('eval', help='Recompute summaries from per-frame CSVs')
        evaluate.add_argument('--results', required=True)

    def handle(self, *args, **options):
        action = options['action']
        try:
            if action == 'run':
                self.handle_run(options)
            elif action == 'synth':
                self.handle_synth(options)
            else:
                self.handle_eval(options)
        except TrackingError as exc:
            raise _fail(exc) from exc
        except OSError as exc:
            raise CommandError(str(exc), returncode=1) from exc

    def handle_run(self, options):
        tracking = settings.TRACKING
        ablations = _ablations(options['ablate'])
        config = load_config(options['config'], ablations)
        if options['gt'] and len(options['seq']) > 1:
            raise CommandError('--gt can only be used with a single --seq', returncode=2)
        if options['repetitions'] < 1:
            raise CommandError('--repetitions must be at least 1', returncode=2)
        workers = options['workers'] or tracking['WORKERS']
        if workers < 1:
            raise CommandError('--workers must be at least 1', returncode=2)
        out = Path(options['out'] or tracking['RESULTS_ROOT'])

        sequences = [load_sequence(path, options['gt']) for path in options['seq']]
        if len(sequences) == 1:
            # a single sequence spends its workers inside localisation
            config = replace(config, workers=workers)

        self.stdout.write(f'Tracking {len(sequences)} sequence(s) in {options["mode"]} mode, seed {options["seed"]}')
        results = evaluate_suite(
            sequences, config, options['seed'], options['mode'],
            repetitions=options['repetitions'], skip=tracking['REINIT_SKIP'], workers=workers,
        )
        extra = {'ablations': sorted(config.ablations), 'config_fingerprint': config.fingerprint()}
        summary, directories = export_suite(results, out, sequences, options['annotate'], extra)

        if options['dump_placement']:
            for sequence, directory in zip(sequences, directories):
                self.dump_placement(sequence, config, options['seed'], directory)

        for result in results:
            line = f'{result.sequence}: AO {result.ao:.3f}, failures {result.failure_count:g}, {result.fps:.1f} fps'
            if result.curves is not None:
                line += f', AUC {result.curves.auc:.3f}, precision@20 {result.curves.precision_at(20):.3f}'
            self.stdout.write(line)

        if options['record']:
            from tracking.models import EvaluationRun

            for result, directory in zip(results, directories):
                preview = directory / 'annotated' / '00000001.png' if options['annotate'] else None
                if preview is not None and not preview.is_file():
                    preview = None
                run = EvaluationRun.from_result(result, config, directory, preview)
                self.stdout.write(f'Recorded run {run.pk} for {result.sequence}')

        self.stdout.write(self.style.SUCCESS(
            f'Mean AO {summary.ao:.3f}, mean failures {summary.failures:.2f}; results in {out}'
        ))

    def dump_placement(self, sequence, config, seed, directory):
        state = init(sequence.read_frame(0), sequence.groundtruth[0], config, seed)
        debug = state.placement
        if debug is None or debug.mask is None:
            self.stdout.write(self.style.WARNING(
                f'{sequence.name}: uniform placement has no mask or superpixels to dump'
            ))
            return
        save_mask(debug.mask, directory / 'placement_mask.png')
        save_label_map(debug.labels, directory / 'placement_labels.png')
        self.stdout.write(f'{sequence.name}: {len(state.patches)} patches, placement written to {directory}')

    def handle_synth(self, options):
        spec = load_scenario(options['spec'])
        sequence = make_synthetic(spec, options['out'], options['seed'])
        self.stdout.write(self.style.SUCCESS(
            f'Rendered {len(sequence)} frames of {sequence.name} to {options["out"]}'
        ))

    def handle_eval(self, options):
        summary, results = evaluate_results_dir(options['results'])
        for result in results:
            self.stdout.write(f'{result.sequence}: AO {result.ao:.3f}, failures {result.failure_count:g}')
        line = f'Mean AO {summary.ao:.3f}, mean failures {summary.failures:.2f}'
        if summary.auc is not None:
            line += f', AUC {summary.auc:.3f}, precision@20 {summary.precision_at_20:.3f}'
        self.stdout.write(self.style.SUCCESS(line))
