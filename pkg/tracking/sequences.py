"""
Image sequences with per-frame ground truth.

Ground truth files hold one line per frame, either ``x,y,w,h`` or an
eight-value polygon ``x1,y1,...,x4,y4``. Polygons are scored through their
minimal axis-aligned box.
"""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import GeometryError, GroundTruthError, SequenceError
from .geometry import Box
from .imaging import load_image

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = ('.png', '.jpg', '.jpeg', '.ppm')
GROUND_TRUTH_NAMES = ('groundtruth.txt', 'groundtruth_rect.txt')

_SEPARATORS = re.compile(r'[,\s]+')


@dataclass
class Sequence:
    """Frames (paths or in-memory arrays) and their ground-truth boxes."""
    name: str
    frames: list
    groundtruth: list
    polygons: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.frames) < 2:
            raise SequenceError(f'sequence {self.name!r} needs at least two frames, has {len(self.frames)}')
        if len(self.groundtruth) != len(self.frames):
            raise SequenceError(
                f'sequence {self.name!r} has {len(self.frames)} frames '
                f'but {len(self.groundtruth)} ground-truth entries'
            )
        if not self.polygons:
            self.polygons = [None] * len(self.frames)

    def __len__(self):
        return len(self.frames)

    def read_frame(self, index):
        frame = self.frames[index]
        if isinstance(frame, np.ndarray):
            return frame
        return load_image(frame, index=index)


def parse_groundtruth(text):
    """Boxes and (optional) polygons from ground-truth text."""
    boxes, polygons = [], []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            values = [float(v) for v in _SEPARATORS.split(line) if v]
        except ValueError:
            raise GroundTruthError(f'non-numeric value in {line!r}', line=number) from None
        try:
            if len(values) == 4:
                boxes.append(Box(*values))
                polygons.append(None)
            elif len(values) == 8:
                boxes.append(Box.from_polygon(values))
                polygons.append(values)
            else:
                raise GroundTruthError(f'expected 4 or 8 values, got {len(values)}', line=number)
        except GeometryError as exc:
            raise GroundTruthError(str(exc), line=number) from exc
    return boxes, polygons


def format_groundtruth(boxes, polygons=None):
    lines = []
    for i, box in enumerate(boxes):
        polygon = polygons[i] if polygons else None
        values = polygon if polygon is not None else box.as_tuple()
        lines.append(','.join(f'{float(v):.6f}' for v in values))
    return '\n'.join(lines) + '\n'


def _frames_in(directory):
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def _frames_from_manifest(manifest):
    frames = []
    for raw in manifest.read_text(encoding='utf-8').splitlines():
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        path = Path(line)
        frames.append(path if path.is_absolute() else manifest.parent / path)
    return frames


def load_sequence(path, groundtruth=None, name=None):
    """Load a sequence from a frame directory or a manifest file.

    A directory contributes its image files in lexicographic order; a manifest
    lists one frame path per line, relative to the manifest. Without an explicit
    ``groundtruth`` file, ``groundtruth.txt`` (or ``groundtruth_rect.txt``) next to
    the frames is used.
    """
    path = Path(path)
    if path.is_dir():
        frames = _frames_in(path)
        base = path
        if not frames:
            # VOT-style layout keeps the images in a "color" or "img" folder.
            for sub in ('color', 'img'):
                if (path / sub).is_dir():
                    frames = _frames_in(path / sub)
                    break
    elif path.is_file():
        frames = _frames_from_manifest(path)
        base = path.parent
    else:
        raise SequenceError(f'no such sequence: {path}')

    if groundtruth is None:
        candidates = [base / n for n in GROUND_TRUTH_NAMES if (base / n).is_file()]
        if not candidates:
            raise SequenceError(f'no ground-truth file found in {base}')
        groundtruth = candidates[0]
    try:
        text = Path(groundtruth).read_text(encoding='utf-8')
    except OSError as exc:
        raise SequenceError(f'cannot read ground truth {groundtruth}: {exc}') from exc

    boxes, polygons = parse_groundtruth(text)
    sequence = Sequence(name or (path.name if path.is_dir() else path.stem), frames, boxes, polygons)
    logger.info('loaded sequence %s: %d frames', sequence.name, len(sequence))
    return sequence
