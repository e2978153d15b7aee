"""
Evaluation protocols.

Supervised runs follow the VOT convention: a frame whose predicted box does
not overlap the ground truth at all is a failure, the next frames are skipped
and the tracker is re-initialised from ground truth ``skip`` frames after the
failure. One-pass runs follow OTB: initialise once, never intervene, and
summarise with success (IoU) and precision (centre error) curves.

Frame indices are 0-based throughout.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import TrackerConfig
from .exceptions import ConfigError
from .geometry import centre_error, iou
from .tracker import PatchTracker

logger = logging.getLogger(__name__)

SUPERVISED = 'supervised'
ONE_PASS = 'onepass'
MODES = (SUPERVISED, ONE_PASS)

REINIT_SKIP = 5
SUCCESS_THRESHOLDS = np.linspace(0.0, 1.0, 21)
PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
PRECISION_AT = 20

# Per-frame status values.
INIT = 'init'
TRACKED = 'tracked'
FAILURE = 'failure'
SKIPPED = 'skipped'


@dataclass(frozen=True)
class CurveData:
    success_thresholds: np.ndarray
    success: np.ndarray
    precision_thresholds: np.ndarray
    precision: np.ndarray

    @property
    def auc(self):
        """Area under the success curve: the mean success over the threshold grid."""
        return float(self.success.mean())

    def precision_at(self, threshold=PRECISION_AT):
        index = int(np.flatnonzero(self.precision_thresholds == threshold)[0])
        return float(self.precision[index])


def success_curve(ious, thresholds=SUCCESS_THRESHOLDS):
    """Share of frames whose IoU reaches each threshold; a perfect run scores 1 everywhere."""
    ious = np.asarray(ious, dtype=np.float64)
    if not ious.size:
        return np.zeros(len(thresholds))
    return (ious[None, :] >= thresholds[:, None]).mean(axis=1)


def precision_curve(errors, thresholds=PRECISION_THRESHOLDS):
    errors = np.asarray(errors, dtype=np.float64)
    if not errors.size:
        return np.zeros(len(thresholds))
    return (errors[None, :] <= thresholds[:, None]).mean(axis=1)


def curves_for(ious, errors):
    return CurveData(
        success_thresholds=SUCCESS_THRESHOLDS,
        success=success_curve(ious),
        precision_thresholds=PRECISION_THRESHOLDS,
        precision=precision_curve(errors),
    )


@dataclass
class RunResult:
    """Per-frame outcome of one run over one sequence.

    Every per-frame list has one entry per sequence frame; frames the tracker
    did not predict (skipped after a failure) hold ``None`` boxes and NaN
    metrics.
    """
    sequence: str
    mode: str
    seed: int
    boxes: list
    groundtruth: list
    ious: list
    centre_errors: list
    qualities: list
    statuses: list
    track_seconds: float = 0.0
    curves: CurveData = None
    repetition_ao: tuple = ()
    repetition_failures: tuple = ()

    def __len__(self):
        return len(self.boxes)

    @property
    def failures(self):
        return [i for i, status in enumerate(self.statuses) if status == FAILURE]

    @property
    def initialisations(self):
        return [i for i, status in enumerate(self.statuses) if status == INIT]

    @property
    def tracked_frames(self):
        return sum(1 for status in self.statuses if status in (TRACKED, FAILURE))

    @property
    def ao(self):
        """Average overlap, over repetitions when there were several."""
        if self.repetition_ao:
            return float(np.mean(self.repetition_ao))
        return average_overlap(self.ious, self.statuses)

    @property
    def failure_count(self):
        if self.repetition_failures:
            return float(np.mean(self.repetition_failures))
        return float(len(self.failures))

    @property
    def fps(self):
        if self.track_seconds <= 0:
            return 0.0
        return self.tracked_frames / self.track_seconds

    def summary(self):
        data = {
            'sequence': self.sequence,
            'mode': self.mode,
            'seed': self.seed,
            'frames': len(self),
            'AO': self.ao,
            'failures': self.failure_count,
            'fps': self.fps,
        }
        if self.curves is not None:
            data['AUC'] = self.curves.auc
            data['precision@20'] = self.curves.precision_at(PRECISION_AT)
        if len(self.repetition_ao) > 1:
            data['repetitions'] = len(self.repetition_ao)
        return data


def average_overlap(ious, statuses):
    """Mean IoU over frames the tracker followed without failing."""
    values = [v for v, status in zip(ious, statuses) if status == TRACKED]
    if not values:
        return 0.0
    return float(np.mean(values))


def repetition_seed(seed, repetition):
    if repetition == 0:
        return int(seed)
    return int(np.random.SeedSequence([int(seed), repetition]).generate_state(1)[0])


def _default_factory(config, seed):
    return PatchTracker(config, seed)


class _Recorder:
    def __init__(self, sequence, mode, seed):
        n = len(sequence)
        self.result = RunResult(
            sequence=sequence.name, mode=mode, seed=seed,
            boxes=[None] * n, groundtruth=list(sequence.groundtruth),
            ious=[math.nan] * n, centre_errors=[math.nan] * n,
            qualities=[math.nan] * n, statuses=[SKIPPED] * n,
        )

    def record(self, index, box, quality, status):
        truth = self.result.groundtruth[index]
        self.result.boxes[index] = box
        self.result.ious[index] = iou(box, truth)
        self.result.centre_errors[index] = centre_error(box, truth)
        self.result.qualities[index] = float(quality)
        self.result.statuses[index] = status


def _timed_track(tracker, frame):
    started = time.perf_counter()
    output = tracker.track(frame)
    return output, time.perf_counter() - started


def _supervised_once(sequence, config, seed, factory, skip):
    tracker = factory(config, seed)
    recorder = _Recorder(sequence, SUPERVISED, seed)
    seconds = 0.0
    index = 0
    while index < len(sequence):
        frame = sequence.read_frame(index)
        output = tracker.initialize(frame, sequence.groundtruth[index])
        recorder.record(index, sequence.groundtruth[index], output.quality, INIT)
        index += 1
        while index < len(sequence):
            frame = sequence.read_frame(index)
            output, elapsed = _timed_track(tracker, frame)
            seconds += elapsed
            overlap = iou(output.box, sequence.groundtruth[index])
            if overlap > 0:
                recorder.record(index, output.box, output.quality, TRACKED)
                index += 1
                continue
            recorder.record(index, output.box, output.quality, FAILURE)
            logger.info('%s: failure at frame %d, re-initialising at frame %d',
                        sequence.name, index, index + skip)
            index += skip
            break
    recorder.result.track_seconds = seconds
    return recorder.result


def run_supervised(sequence, config=None, seed=0, repetitions=1, skip=REINIT_SKIP, tracker_factory=None):
    """Supervised (re-initialising) run; the first repetition's frames are kept.

    ``tracker_factory(config, seed)`` builds the tracker for each repetition;
    it defaults to ``PatchTracker``.
    """
    config = config or TrackerConfig()
    factory = tracker_factory or _default_factory
    if skip < 1:
        raise ConfigError(f're-initialisation skip must be at least 1, got {skip}')
    if repetitions < 1:
        raise ConfigError(f'repetitions must be at least 1, got {repetitions}')

    runs = [
        _supervised_once(sequence, config, repetition_seed(seed, r), factory, skip)
        for r in range(repetitions)
    ]
    result = runs[0]
    result.seed = int(seed)
    result.repetition_ao = tuple(average_overlap(r.ious, r.statuses) for r in runs)
    result.repetition_failures = tuple(len(r.failures) for r in runs)
    result.track_seconds = sum(r.track_seconds for r in runs) / repetitions
    logger.info('%s: supervised AO %.3f, %.2f failures over %d repetition(s)',
                sequence.name, result.ao, result.failure_count, repetitions)
    return result


def run_one_pass(sequence, config=None, seed=0, tracker_factory=None):
    """One-pass run with success and precision curves over the non-initial frames."""
    config = config or TrackerConfig()
    factory = tracker_factory or _default_factory
    tracker = factory(config, seed)
    recorder = _Recorder(sequence, ONE_PASS, seed)

    output = tracker.initialize(sequence.read_frame(0), sequence.groundtruth[0])
    recorder.record(0, sequence.groundtruth[0], output.quality, INIT)
    seconds = 0.0
    for index in range(1, len(sequence)):
        output, elapsed = _timed_track(tracker, sequence.read_frame(index))
        seconds += elapsed
        recorder.record(index, output.box, output.quality, TRACKED)

    result = recorder.result
    result.track_seconds = seconds
    result.curves = curves_for(result.ious[1:], result.centre_errors[1:])
    logger.info('%s: one-pass AUC %.3f, precision@20 %.3f',
                sequence.name, result.curves.auc, result.curves.precision_at(PRECISION_AT))
    return result


def evaluate(sequence, config=None, seed=0, mode=SUPERVISED, repetitions=1, skip=REINIT_SKIP,
             tracker_factory=None):
    if mode == SUPERVISED:
        return run_supervised(sequence, config, seed, repetitions, skip, tracker_factory)
    if mode == ONE_PASS:
        return run_one_pass(sequence, config, seed, tracker_factory)
    raise ConfigError(f'unknown evaluation mode {mode!r}')


def _evaluate_job(job):
    return evaluate(*job)


def evaluate_suite(sequences, config=None, seed=0, mode=SUPERVISED, repetitions=1, skip=REINIT_SKIP,
                   workers=1):
    """Evaluate several sequences, one tracker each, results in input order.

    With ``workers > 1`` the sequences run in separate processes.
    """
    jobs = [(sequence, config, seed, mode, repetitions, skip) for sequence in sequences]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(_evaluate_job, jobs))
    return [_evaluate_job(job) for job in jobs]


@dataclass
class SuiteSummary:
    sequences: list = field(default_factory=list)
    mode: str = SUPERVISED
    ao: float = 0.0
    failures: float = 0.0
    fps: float = 0.0
    auc: float = None
    precision_at_20: float = None
    success: list = None
    precision: list = None

    def as_dict(self):
        data = {
            'mode': self.mode,
            'sequences': self.sequences,
            'AO': self.ao,
            'failures': self.failures,
            'fps': self.fps,
        }
        if self.auc is not None:
            data['AUC'] = self.auc
            data['precision@20'] = self.precision_at_20
        return data


def summarise(results):
    """Per-video scores averaged over the suite."""
    if not results:
        raise ValueError('nothing to summarise')
    summary = SuiteSummary(
        sequences=[r.sequence for r in results],
        mode=results[0].mode,
        ao=float(np.mean([r.ao for r in results])),
        failures=float(np.mean([r.failure_count for r in results])),
        fps=float(np.mean([r.fps for r in results])),
    )
    curves = [r.curves for r in results if r.curves is not None]
    if curves:
        success = np.mean([c.success for c in curves], axis=0)
        precision = np.mean([c.precision for c in curves], axis=0)
        summary.success = success.tolist()
        summary.precision = precision.tolist()
        summary.auc = float(success.mean())
        summary.precision_at_20 = float(precision[PRECISION_AT])
    return summary
