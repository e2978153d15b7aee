"""
Error types raised by the tracking library and the evaluation harness.
"""


class TrackingError(Exception):
    """Base class for every error raised by the tracking package."""


class ModelError(TrackingError, ValueError):
    pass


class GeometryError(TrackingError, ValueError):
    pass


class PlacementError(TrackingError, ValueError):
    pass


class TrackerInitError(TrackingError, ValueError):
    pass


class ConfigError(TrackingError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class ScenarioError(TrackingError, ValueError):
    pass


class SnapshotError(TrackingError):
    pass


class SnapshotVersionError(SnapshotError):
    pass


class SnapshotCorruptError(SnapshotError):
    pass


class SnapshotConfigMismatchError(SnapshotError):
    pass


class SequenceError(TrackingError, ValueError):
    pass


class GroundTruthError(SequenceError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class FrameReadError(TrackingError, OSError):
    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f'frame {index}: {message}'
        super().__init__(message)
