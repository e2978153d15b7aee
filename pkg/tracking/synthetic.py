"""
Synthetic sequences with exact ground truth.

A textured rectangle or ellipse moves over a static background with constant
per-frame translation, rotation and scale change. Optional extras: a global
brightness ramp, an occluding bar sweeping across the frame, and a busy
background of saturated cells whose colours stay clear of the object palette.
"""
import json
import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .exceptions import ScenarioError
from .geometry import Box
from .imaging import save_image
from .sequences import Sequence, format_groundtruth

logger = logging.getLogger(__name__)

SHAPES = ('rectangle', 'ellipse')

PALETTE = np.array([
    (220, 40, 40),
    (40, 200, 60),
    (50, 80, 220),
    (230, 200, 40),
    (200, 60, 200),
    (60, 210, 210),
], dtype=np.float64)

# at least three matching radii from every PALETTE colour
CLUTTER_PALETTE = np.array([
    (240, 130, 20),
    (120, 40, 140),
    (20, 110, 100),
    (130, 90, 60),
    (25, 25, 25),
    (235, 235, 235),
], dtype=np.float64)

BACKGROUND_LEVELS = (45.0, 70.0, 95.0)
OCCLUDER_COLOUR = (128.0, 128.0, 128.0)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str = 'synthetic'
    n_frames: int = 100
    width: int = 320
    height: int = 240
    shape: str = 'rectangle'
    object_w: float = 60.0
    object_h: float = 40.0
    start_x: float = None
    start_y: float = None
    velocity_x: float = 0.0
    velocity_y: float = 0.0
    rotation: float = 0.0
    scale: float = 0.0
    illumination: float = 0.0
    noise: float = 6.0
    cell_size: int = 10
    occluder: bool = False
    clutter: bool = False

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ScenarioError(f'unknown shape {self.shape!r}')
        if self.n_frames < 2:
            raise ScenarioError('a scenario needs at least two frames')
        if self.width < 16 or self.height < 16:
            raise ScenarioError('frames must be at least 16x16 pixels')
        if self.object_w < 4 or self.object_h < 4:
            raise ScenarioError('object must be at least 4x4 pixels')
        if self.scale <= -1:
            raise ScenarioError('per-frame scale change must exceed -100%')
        if self.cell_size < 2:
            raise ScenarioError('texture cells must be at least 2 pixels')

    @property
    def start(self):
        x = self.width / 2.0 if self.start_x is None else self.start_x
        y = self.height / 2.0 if self.start_y is None else self.start_y
        return x, y

    def pose(self, t):
        """Centre, angle and scale of the object in frame ``t`` (0-based)."""
        x, y = self.start
        return (x + self.velocity_x * t, y + self.velocity_y * t,
                self.rotation * t, (1.0 + self.scale) ** t)

    def corners(self, t):
        cx, cy, angle, s = self.pose(t)
        hw, hh = self.object_w / 2.0, self.object_h / 2.0
        c, sn = math.cos(angle), math.sin(angle)
        points = []
        for u, v in ((-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)):
            points.extend((cx + s * (c * u - sn * v), cy + s * (sn * u + c * v)))
        return points


def load_scenario(path):
    """Read and validate a JSON scenario descriptor."""
    from .forms import ScenarioForm

    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except (OSError, ValueError) as exc:
        raise ScenarioError(f'cannot read scenario {path}: {exc}') from exc
    if not isinstance(data, dict):
        raise ScenarioError('scenario must be a JSON object')
    form = ScenarioForm(data=data)
    if not form.is_valid():
        problems = '; '.join(f'{k}: {" ".join(str(e) for e in v)}' for k, v in form.errors.items())
        raise ScenarioError(problems)
    return form.to_scenario()


def _cell_texture(rng, width, height, cell, colours, noise):
    cols = math.ceil(width / cell)
    rows = math.ceil(height / cell)
    choice = rng.integers(0, len(colours), size=(rows, cols))
    texture = colours[choice].repeat(cell, axis=0).repeat(cell, axis=1)[:height, :width]
    return texture + rng.uniform(-noise, noise, size=texture.shape)


def _background(spec, rng):
    if spec.clutter:
        return _cell_texture(rng, spec.width, spec.height, spec.cell_size, CLUTTER_PALETTE, spec.noise)
    greys = np.array([(level, level, level) for level in BACKGROUND_LEVELS])
    return _cell_texture(rng, spec.width, spec.height, 16, greys, spec.noise)


class SceneRenderer:
    """Renders frames of one scenario; textures are fixed by the seed."""

    def __init__(self, spec, seed=0):
        self.spec = spec
        rng = np.random.default_rng(seed)
        self.texture = _cell_texture(
            rng, math.ceil(spec.object_w), math.ceil(spec.object_h), spec.cell_size, PALETTE, spec.noise,
        )
        self.background = _background(spec, rng)
        self._ys, self._xs = np.mgrid[0:spec.height, 0:spec.width].astype(np.float64)

    def object_mask(self, t):
        spec = self.spec
        cx, cy, angle, s = spec.pose(t)
        dx, dy = self._xs - cx, self._ys - cy
        c, sn = math.cos(angle), math.sin(angle)
        u = (c * dx + sn * dy) / s
        v = (-sn * dx + c * dy) / s
        hw, hh = spec.object_w / 2.0, spec.object_h / 2.0
        if spec.shape == 'ellipse':
            inside = (u / hw) ** 2 + (v / hh) ** 2 < 1.0
        else:
            inside = (np.abs(u) < hw) & (np.abs(v) < hh)
        return inside, u + hw, v + hh

    def occluder_columns(self, t):
        if not self.spec.occluder:
            return None
        bar = max(4, int(self.spec.object_w / 3))
        left = int(round((self.spec.width + bar) * t / (self.spec.n_frames - 1))) - bar
        return max(0, left), min(self.spec.width, left + bar)

    def render(self, t):
        inside, tu, tv = self.object_mask(t)
        frame = self.background.copy()
        rows = np.clip(tv[inside].astype(np.int64), 0, self.texture.shape[0] - 1)
        cols = np.clip(tu[inside].astype(np.int64), 0, self.texture.shape[1] - 1)
        frame[inside] = self.texture[rows, cols]
        columns = self.occluder_columns(t)
        if columns is not None and columns[1] > columns[0]:
            frame[:, columns[0]:columns[1]] = OCCLUDER_COLOUR
        frame += self.spec.illumination * t
        return np.clip(np.rint(frame), 0, 255).astype(np.uint8)

    def groundtruth(self, t):
        spec = self.spec
        if spec.rotation == 0:
            cx, cy, _, s = spec.pose(t)
            w, h = spec.object_w * s, spec.object_h * s
            return Box(cx - w / 2.0, cy - h / 2.0, w, h), None
        polygon = spec.corners(t)
        return Box.from_polygon(polygon), polygon


def render_sequence(spec, seed=0):
    """In-memory ``Sequence`` for ``spec``."""
    renderer = SceneRenderer(spec, seed)
    frames, boxes, polygons = [], [], []
    for t in range(spec.n_frames):
        frames.append(renderer.render(t))
        box, polygon = renderer.groundtruth(t)
        boxes.append(box)
        polygons.append(polygon)
    return Sequence(spec.name, frames, boxes, polygons)


def make_synthetic(spec, out_dir, seed=0):
    """Render ``spec`` to ``out_dir`` (PNG frames + groundtruth.txt) and load it back."""
    from .sequences import load_sequence

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    renderer = SceneRenderer(spec, seed)
    boxes, polygons = [], []
    for t in range(spec.n_frames):
        save_image(renderer.render(t), out_dir / f'{t + 1:08d}.png')
        box, polygon = renderer.groundtruth(t)
        boxes.append(box)
        polygons.append(polygon)
    (out_dir / 'groundtruth.txt').write_text(format_groundtruth(boxes, polygons), encoding='utf-8')
    (out_dir / 'scenario.json').write_text(
        json.dumps(dict(asdict(spec), seed=seed), indent=2), encoding='utf-8',
    )
    logger.info('wrote synthetic sequence %s (%d frames) to %s', spec.name, spec.n_frames, out_dir)
    return load_sequence(out_dir, name=spec.name)
