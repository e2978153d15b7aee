"""
Result files.

Each run is written to ``<out>/<sequence>/``:

- ``frames.csv``: one row per frame (0-based index, status, predicted and
  ground-truth boxes, IoU, centre error, quality); floats are written with
  ``repr`` so they read back exactly,
- ``summary.json``: AO, failures, fps and, for one-pass runs, AUC and
  precision at 20 px,
- ``success.csv`` / ``precision.csv``: the curves of a one-pass run,
- ``annotated/``: optional frames with the predicted (red) and ground-truth
  (green) boxes drawn.

A suite writes ``<out>/summary.json`` with the averaged scores.
"""
import csv
import json
import logging
import math
from pathlib import Path

from .evaluation import FAILURE, MODES, ONE_PASS, SUPERVISED, RunResult, curves_for, summarise
from .exceptions import SequenceError
from .geometry import Box
from .imaging import GROUND_TRUTH_COLOUR, PREDICTION_COLOUR, annotate_frame, save_image

logger = logging.getLogger(__name__)

FRAME_FIELDS = (
    'frame', 'status', 'x', 'y', 'w', 'h', 'gt_x', 'gt_y', 'gt_w', 'gt_h', 'iou', 'centre_error', 'quality',
)
FRAMES_CSV = 'frames.csv'
SUMMARY_JSON = 'summary.json'
SUCCESS_CSV = 'success.csv'
PRECISION_CSV = 'precision.csv'


def _num(value):
    if value is None or math.isnan(value):
        return ''
    return repr(float(value))


def _parse(value):
    return math.nan if value == '' else float(value)


def _json_safe(data):
    """Replace NaN and infinities with None so the JSON stays standard."""
    if isinstance(data, dict):
        return {k: _json_safe(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_safe(v) for v in data]
    if isinstance(data, float) and not math.isfinite(data):
        return None
    return data


def write_json(data, path):
    Path(path).write_text(json.dumps(_json_safe(data), indent=2, sort_keys=True) + '\n', encoding='utf-8')


def write_frames_csv(result, path):
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(FRAME_FIELDS)
        for i in range(len(result)):
            box = result.boxes[i]
            truth = result.groundtruth[i]
            predicted = box.as_tuple() if box is not None else (None,) * 4
            writer.writerow([
                i, result.statuses[i],
                *(_num(v) for v in predicted),
                *(_num(v) for v in truth.as_tuple()),
                _num(result.ious[i]), _num(result.centre_errors[i]), _num(result.qualities[i]),
            ])


def write_curves(curves, directory):
    with open(directory / SUCCESS_CSV, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(('threshold', 'success'))
        writer.writerows((_num(t), _num(v)) for t, v in zip(curves.success_thresholds, curves.success))
    with open(directory / PRECISION_CSV, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(('threshold', 'precision'))
        writer.writerows((_num(t), _num(v)) for t, v in zip(curves.precision_thresholds, curves.precision))


def write_annotated(sequence, result, directory):
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(len(result)):
        frame = annotate_frame(sequence.read_frame(i), [
            (result.groundtruth[i], GROUND_TRUTH_COLOUR),
            (result.boxes[i], PREDICTION_COLOUR),
        ])
        save_image(frame, directory / f'{i:08d}.png')


def export_run(result, out_dir, sequence=None, annotate=False, extra=None):
    """Write one run's files under ``out_dir/<sequence name>``; returns that directory."""
    directory = Path(out_dir) / result.sequence
    directory.mkdir(parents=True, exist_ok=True)
    write_frames_csv(result, directory / FRAMES_CSV)
    summary = result.summary()
    if extra:
        summary.update(extra)
    write_json(summary, directory / SUMMARY_JSON)
    if result.curves is not None:
        write_curves(result.curves, directory)
    if annotate:
        if sequence is None:
            raise SequenceError('annotated frames need the sequence frames')
        write_annotated(sequence, result, directory / 'annotated')
    logger.info('wrote results for %s to %s', result.sequence, directory)
    return directory


def export_suite(results, out_dir, sequences=None, annotate=False, extra=None):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sequences = sequences or [None] * len(results)
    directories = [
        export_run(result, out_dir, sequence, annotate, extra) for result, sequence in zip(results, sequences)
    ]
    summary = summarise(results)
    data = summary.as_dict()
    if extra:
        data.update(extra)
    write_json(data, out_dir / SUMMARY_JSON)
    return summary, directories


def read_frames_csv(path, sequence=None, mode=SUPERVISED, seed=0):
    """Rebuild a ``RunResult`` from a per-frame CSV."""
    path = Path(path)
    boxes, truths, ious, errors, qualities, statuses = [], [], [], [], [], []
    try:
        with open(path, newline='', encoding='utf-8') as handle:
            for row in csv.DictReader(handle):
                predicted = [row[k] for k in ('x', 'y', 'w', 'h')]
                boxes.append(None if '' in predicted else Box(*(float(v) for v in predicted)))
                truths.append(Box(*(float(row[k]) for k in ('gt_x', 'gt_y', 'gt_w', 'gt_h'))))
                ious.append(_parse(row['iou']))
                errors.append(_parse(row['centre_error']))
                qualities.append(_parse(row['quality']))
                statuses.append(row['status'])
    except (OSError, KeyError, ValueError) as exc:
        raise SequenceError(f'cannot read per-frame results {path}: {exc}') from exc
    result = RunResult(
        sequence=sequence or path.parent.name, mode=mode, seed=seed, boxes=boxes, groundtruth=truths,
        ious=ious, centre_errors=errors, qualities=qualities, statuses=statuses,
    )
    if mode == ONE_PASS:
        result.curves = curves_for(ious[1:], errors[1:])
    return result


def _stored_meta(directory, statuses_path):
    meta = {}
    summary_path = directory / SUMMARY_JSON
    if summary_path.is_file():
        try:
            meta = json.loads(summary_path.read_text(encoding='utf-8'))
        except ValueError:
            meta = {}
    mode = meta.get('mode')
    if mode not in MODES:
        with open(statuses_path, newline='', encoding='utf-8') as handle:
            failed = any(row.get('status') == FAILURE for row in csv.DictReader(handle))
        mode = SUPERVISED if failed else ONE_PASS
    return mode, int(meta.get('seed') or 0), meta


def evaluate_results_dir(results_dir):
    """Recompute per-run and suite summaries from the per-frame CSVs under ``results_dir``.

    Only the recorded repetition is available in the CSVs, so repeated
    supervised runs are re-scored from their first repetition.
    """
    results_dir = Path(results_dir)
    paths = sorted(results_dir.glob(f'*/{FRAMES_CSV}'))
    if (results_dir / FRAMES_CSV).is_file():
        paths.insert(0, results_dir / FRAMES_CSV)
    if not paths:
        raise SequenceError(f'no {FRAMES_CSV} found under {results_dir}')

    results = []
    for path in paths:
        mode, seed, meta = _stored_meta(path.parent, path)
        result = read_frames_csv(path, mode=mode, seed=seed)
        if meta.get('fps'):
            result.track_seconds = result.tracked_frames / meta['fps']
        # keep run metadata such as the ablation switches
        meta.pop('repetitions', None)
        summary = {**meta, **result.summary()}
        write_json(summary, path.parent / SUMMARY_JSON)
        if result.curves is not None:
            write_curves(result.curves, path.parent)
        results.append(result)

    suite = summarise(results)
    if len(results) > 1 or paths[0].parent != results_dir:
        write_json(suite.as_dict(), results_dir / SUMMARY_JSON)
    return suite, results
