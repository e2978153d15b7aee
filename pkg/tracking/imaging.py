"""
Image I/O through Pillow.

Frames are handled as ``numpy`` arrays of shape (height, width, 3), dtype
uint8, in RGB order.
"""
import colorsys
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .exceptions import FrameReadError

GROUND_TRUTH_COLOUR = (40, 220, 60)
PREDICTION_COLOUR = (230, 40, 40)


def load_image(path, index=None):
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert('RGB'), dtype=np.uint8).copy()
    except (OSError, ValueError) as exc:
        raise FrameReadError(f'cannot read {path}: {exc}', index=index) from exc


def save_image(frame, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(path)


def _palette():
    palette = [0, 0, 0]
    for i in range(1, 256):
        hue = (i * 0.618033988749895) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.75, 0.95)
        palette.extend(int(255 * c) for c in (r, g, b))
    return palette


def save_label_map(labels, path):
    """Palette-coded PNG of a label raster; label 0 is black, labels cycle past 255."""
    labels = np.asarray(labels)
    coded = np.where(labels > 0, (labels - 1) % 255 + 1, 0).astype(np.uint8)
    img = Image.fromarray(coded)
    img.putpalette(_palette())
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    img.save(path)


def save_mask(mask, path):
    img = Image.fromarray(np.asarray(mask, dtype=np.uint8))
    img.putpalette([0, 0, 0, 255, 255, 255] + [0, 0, 0] * 254)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    img.save(path)


def annotate_frame(frame, boxes):
    """Copy of ``frame`` with ``(box, colour)`` outlines drawn on it."""
    img = Image.fromarray(np.asarray(frame, dtype=np.uint8))
    draw = ImageDraw.Draw(img)
    for box, colour in boxes:
        if box is None:
            continue
        draw.rectangle([box.x, box.y, box.right, box.bottom], outline=colour, width=2)
    return np.asarray(img)


def thumbnail_bytes(path, max_width=480, max_height=480):
    """JPEG bytes of ``path`` scaled down to fit the given size."""
    from io import BytesIO

    with Image.open(path) as img:
        if img.mode in ('RGBA', 'P'):
            img = img.convert('RGB')
        if img.height > max_height or img.width > max_width:
            img.thumbnail((max_width, max_height))
        buffer = BytesIO()
        img.save(buffer, format='JPEG', quality=85)
        return buffer.getvalue()
