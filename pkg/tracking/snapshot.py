"""
Binary snapshots of tracker state.

Layout: the magic ``PTSN``, a big-endian u16 format version, then three
sections, each a big-endian u32 length followed by its bytes:

1. the tracker configuration as JSON (with its fingerprint),
2. scalar state as JSON: previous box, frame index, generator states and the
   per-patch geometry,
3. the patch arrays as an ``.npz`` archive.
"""
import io
import json
import struct
import zipfile

import numpy as np

from .colour_model import PatchModel
from .config import TrackerConfig
from .exceptions import SnapshotConfigMismatchError, SnapshotCorruptError, SnapshotVersionError
from .geometry import Box

MAGIC = b'PTSN'
VERSION = 1

_HEADER = struct.Struct('>4sH')
_LENGTH = struct.Struct('>I')


def _section(blob):
    return _LENGTH.pack(len(blob)) + blob


def dump_state(state, config):
    """Serialise ``state`` (tracked with ``config``) to bytes."""
    config_blob = json.dumps(
        {'fingerprint': config.fingerprint(), 'config': config.to_dict()}, sort_keys=True,
    ).encode()
    scalars = {
        'prev_box': list(state.prev_box.as_tuple()),
        'frame_index': state.frame_index,
        'streams': state.streams.states(),
        'patches': [
            {'patch_w': p.patch_w, 'patch_h': p.patch_h, 'radius': p.radius} for p in state.patches
        ],
    }
    state_blob = json.dumps(scalars, sort_keys=True).encode()

    arrays = {}
    for i, patch in enumerate(state.patches):
        arrays[f'location_{i}'] = patch.location
        arrays[f'centres_{i}'] = patch.centres
        arrays[f'counts_{i}'] = patch.counts
    buffer = io.BytesIO()
    np.savez(buffer, **arrays)

    return _HEADER.pack(MAGIC, VERSION) + _section(config_blob) + _section(state_blob) + _section(buffer.getvalue())


def _read_sections(payload, count):
    sections = []
    offset = _HEADER.size
    for _ in range(count):
        if offset + _LENGTH.size > len(payload):
            raise SnapshotCorruptError('snapshot truncated in a section header')
        (length,) = _LENGTH.unpack_from(payload, offset)
        offset += _LENGTH.size
        if offset + length > len(payload):
            raise SnapshotCorruptError('snapshot truncated inside a section')
        sections.append(payload[offset:offset + length])
        offset += length
    if offset != len(payload):
        raise SnapshotCorruptError(f'{len(payload) - offset} trailing bytes after the last section')
    return sections


def read_header(payload):
    if len(payload) < _HEADER.size:
        raise SnapshotCorruptError('snapshot shorter than its header')
    magic, version = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise SnapshotCorruptError('not a tracker snapshot')
    return version


def load_state(payload, config=None):
    """Rebuild a ``TrackerState`` from ``dump_state`` bytes.

    With ``config`` given, the snapshot must have been taken under an
    equivalent configuration.
    """
    from .tracker import RandomStreams, TrackerState

    payload = bytes(payload)
    version = read_header(payload)
    if version != VERSION:
        raise SnapshotVersionError(f'snapshot format version {version}, expected {VERSION}')
    config_blob, state_blob, array_blob = _read_sections(payload, 3)

    try:
        stored = json.loads(config_blob)
        scalars = json.loads(state_blob)
    except ValueError as exc:
        raise SnapshotCorruptError(f'unreadable snapshot section: {exc}') from exc

    if config is not None and stored.get('fingerprint') != config.fingerprint():
        raise SnapshotConfigMismatchError('snapshot was taken with a different tracker configuration')
    if config is None:
        try:
            TrackerConfig.from_dict(stored['config'])
        except (KeyError, TypeError, ValueError) as exc:
            raise SnapshotCorruptError(f'invalid stored configuration: {exc}') from exc

    try:
        with np.load(io.BytesIO(array_blob), allow_pickle=False) as arrays:
            patches = [
                PatchModel(
                    location=arrays[f'location_{i}'],
                    centres=arrays[f'centres_{i}'],
                    counts=arrays[f'counts_{i}'],
                    patch_w=meta['patch_w'],
                    patch_h=meta['patch_h'],
                    radius=meta['radius'],
                )
                for i, meta in enumerate(scalars['patches'])
            ]
        streams = RandomStreams.from_states(scalars['streams'])
        state = TrackerState(
            patches=patches,
            prev_box=Box(*scalars['prev_box']),
            frame_index=int(scalars['frame_index']),
            streams=streams,
        )
    except (KeyError, TypeError, ValueError, OSError, zipfile.BadZipFile) as exc:
        raise SnapshotCorruptError(f'invalid snapshot contents: {exc}') from exc
    return state


def load_config(payload):
    """Configuration stored in a snapshot."""
    if read_header(payload) != VERSION:
        raise SnapshotVersionError('unsupported snapshot format version')
    config_blob, _, _ = _read_sections(bytes(payload), 3)
    try:
        return TrackerConfig.from_dict(json.loads(config_blob)['config'])
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotCorruptError(f'invalid stored configuration: {exc}') from exc
