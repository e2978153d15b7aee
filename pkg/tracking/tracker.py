"""
The part-based tracker.

``init`` places patches on the object in the first frame and samples a colour
model for each; ``step`` localises the patch set in the next frame, reports the
expanded box around it and folds the new pixels into the patch models.
``PatchTracker`` wraps the pair behind the ``initialize``/``track`` protocol the
evaluation harness drives.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .colour_model import init_model, update_model
from .config import TrackerConfig
from .exceptions import TrackerInitError
from .geometry import clip_box
from .localisation import extract_patch_pixels, localise, round_half_up
from .placement import (
    FullBoxSegmenter,
    region_bounds,
    place_patches,
    segment_object,
    slico_superpixels,
    uniform_grid,
)

logger = logging.getLogger(__name__)

STREAMS = ('placement', 'transforms', 'ties', 'pruning')


@dataclass
class RandomStreams:
    """One generator per pipeline stage, all derived from the run seed.

    Keeping the stages apart means switching one stage off leaves the random
    draws of every other stage untouched.
    """
    placement: np.random.Generator
    transforms: np.random.Generator
    ties: np.random.Generator
    pruning: np.random.Generator

    @classmethod
    def from_seed(cls, seed):
        children = np.random.SeedSequence(seed).spawn(len(STREAMS))
        return cls(*(np.random.default_rng(child) for child in children))

    def states(self):
        return {name: getattr(self, name).bit_generator.state for name in STREAMS}

    @classmethod
    def from_states(cls, states):
        generators = []
        for name in STREAMS:
            state = states[name]
            bit_generator = getattr(np.random, state['bit_generator'])()
            bit_generator.state = state
            generators.append(np.random.Generator(bit_generator))
        return cls(*generators)


@dataclass(frozen=True)
class PlacementDebug:
    """Intermediate rasters of the first-frame placement, in region coordinates."""
    offset: tuple
    mask: np.ndarray = None
    labels: np.ndarray = None


@dataclass
class TrackerState:
    patches: list
    prev_box: object
    frame_index: int
    streams: RandomStreams
    placement: PlacementDebug = field(default=None, compare=False)

    @property
    def centres(self):
        return np.array([p.location for p in self.patches], dtype=np.float64)


@dataclass(frozen=True)
class StepResult:
    box: object
    qualities: np.ndarray
    quality: float
    state: TrackerState


def _patch_centres(frame, bbox, cfg, streams):
    height, width = frame.shape[:2]
    if 'uniform_placement' in cfg.ablations:
        return uniform_grid(bbox, cfg.n_patches), PlacementDebug(offset=(0, 0))

    x0, y0, x1, y1 = region_bounds(bbox, width, height)
    region = frame[y0:y1, x0:x1]
    if 'no_segmentation' in cfg.ablations:
        mask = FullBoxSegmenter()(frame, bbox, cfg.segmenter, streams.placement)
    else:
        mask = segment_object(frame, bbox, cfg.segmenter, streams.placement, radius=cfg.radius)
    logger.debug('object mask covers %.1f%% of the box', 100.0 * mask.mean())
    labels = slico_superpixels(region, mask, cfg.n_patches)
    centres = place_patches(
        labels, cfg.n_patches, cfg.patch_w, cfg.patch_h, cfg.max_overlap,
        offset=(x0, y0), frame_size=(width, height),
    )
    return centres, PlacementDebug(offset=(x0, y0), mask=mask, labels=labels.labels)


def init(frame, bbox, cfg=None, seed=0):
    """Build the initial tracker state from the object's box in ``frame``.

    A box reaching past the frame is clipped to it; a box entirely outside is
    an error.
    """
    cfg = cfg or TrackerConfig()
    frame = np.asarray(frame)
    height, width = frame.shape[:2]
    box = clip_box(bbox, width, height)
    if box is None:
        raise TrackerInitError(f'box {bbox.as_tuple()} does not intersect the {width}x{height} frame')

    streams = RandomStreams.from_seed(seed)
    centres, debug = _patch_centres(frame, box, cfg, streams)
    if not centres:
        cx, cy = box.centre
        centres = [tuple(float(v) for v in round_half_up([cx, cy]))]
        logger.info('no placeable patch, falling back to one patch at the box centre')

    patches = []
    for centre in centres:
        pixels, count = extract_patch_pixels(frame, centre, cfg.patch_w, cfg.patch_h)
        if not count:
            continue
        patches.append(init_model(
            pixels, cfg.radius, cfg.max_samples, streams.pruning,
            location=centre, patch_w=cfg.patch_w, patch_h=cfg.patch_h,
        ))
    if not patches:
        raise TrackerInitError('no patch could be sampled inside the frame')

    logger.info('tracker initialised with %d patches in box %s', len(patches),
                tuple(round(v, 2) for v in box.as_tuple()))
    return TrackerState(patches=patches, prev_box=box, frame_index=0, streams=streams, placement=debug)


def step(frame, state, cfg=None, transforms=None):
    """Track the object into ``frame``.

    Patches whose block is at least ``min_valid_fraction`` inside the frame
    have their models updated with the pixels at their new location.
    """
    cfg = cfg or TrackerConfig()
    frame = np.asarray(frame)
    streams = state.streams
    found = localise(frame, state.patches, state.prev_box, cfg, streams.transforms, streams.ties,
                     transforms=transforms)

    patches = [p.with_location(c) for p, c in zip(state.patches, found.centres)]
    if cfg.updates:
        count_rate, centre_rate = cfg.rates
        for i, patch in enumerate(patches):
            if found.valid_fractions[i] < cfg.min_valid_fraction:
                continue
            pixels, _ = extract_patch_pixels(frame, patch.location, patch.patch_w, patch.patch_h)
            patches[i] = update_model(patch, pixels, count_rate, centre_rate, cfg.radius, streams.pruning)
        logger.debug('frame %d: mean model size %.2f', state.frame_index + 1,
                     float(np.mean([p.size for p in patches])))

    new_state = replace(state, patches=patches, prev_box=found.box, frame_index=state.frame_index + 1)
    return StepResult(box=found.box, qualities=found.qualities, quality=found.quality, state=new_state)


@dataclass(frozen=True)
class TrackOutput:
    box: object
    quality: float = float('nan')
    qualities: tuple = ()


class PatchTracker:
    """Stateful tracker object for the evaluation harness.

    Every call to ``initialize`` after the first derives a fresh seed from the
    run seed and the initialisation count, so re-initialised runs stay
    reproducible.
    """

    name = 'patchtrack'

    def __init__(self, config=None, seed=0):
        self.config = config or TrackerConfig()
        self.seed = int(seed)
        self.state = None
        self._initialisations = 0

    def initialize(self, frame, box):
        seed = self.seed if not self._initialisations else [self.seed, self._initialisations]
        self._initialisations += 1
        self.state = init(frame, box, self.config, seed)
        return TrackOutput(box=self.state.prev_box, quality=1.0)

    def track(self, frame):
        if self.state is None:
            raise TrackerInitError('track() called before initialize()')
        result = step(frame, self.state, self.config)
        self.state = result.state
        return TrackOutput(box=result.box, quality=result.quality, qualities=tuple(result.qualities))

    def snapshot(self):
        from .snapshot import dump_state

        if self.state is None:
            raise TrackerInitError('nothing to snapshot before initialize()')
        return dump_state(self.state, self.config)

    def restore(self, payload):
        from .snapshot import load_state

        self.state = load_state(payload, self.config)
        return self.state
