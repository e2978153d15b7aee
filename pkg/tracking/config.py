"""
Tracker configuration.

``TrackerConfig`` carries every tunable constant with the published defaults,
plus the ablation switches that disable one stage of the pipeline each. Config
files are plain ``key = value`` text; values are validated by
``tracking.forms.TrackerConfigForm``.
"""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .exceptions import ConfigError
from .geometry import MotionPriors
from .placement import SegmenterConfig

ABLATIONS = (
    'no_local_opt',
    'no_update',
    'no_segmentation',
    'uniform_placement',
    'default_mbd',
)


@dataclass(frozen=True)
class TrackerConfig:
    n_patches: int = 35
    patch_w: int = 5
    patch_h: int = 5
    radius: float = 20.0
    mbd_exponent: float = 1.4
    count_rate: float = 0.05
    centre_rate: float = 1.7
    max_overlap: float = 0.25
    max_samples: int = 10
    n_transforms: int = 1000
    n_refine: int = 100
    window: int = 5
    expand: float = 0.2
    min_valid_fraction: float = 0.5
    workers: int = 1
    priors: MotionPriors = field(default_factory=MotionPriors)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    ablations: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, 'ablations', frozenset(self.ablations))
        unknown = self.ablations - set(ABLATIONS)
        if unknown:
            raise ConfigError(f'unknown ablation switch(es): {", ".join(sorted(unknown))}')
        if self.n_patches < 1 or self.patch_w < 1 or self.patch_h < 1:
            raise ConfigError('patch count and patch size must be positive')
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f'search window must be a positive odd number, got {self.window}')
        if self.n_transforms < 1:
            raise ConfigError('at least one transform must be sampled')
        if self.n_refine < 0:
            raise ConfigError('number of refined candidates cannot be negative')
        if not 0 <= self.count_rate <= 1:
            raise ConfigError('count_rate must lie in [0, 1]')
        if self.radius <= 0 or self.mbd_exponent < 0 or self.centre_rate < 0:
            raise ConfigError('radius must be positive, exponent and centre rate non-negative')

    def with_ablations(self, *names):
        return replace(self, ablations=self.ablations | set(names))

    @property
    def b(self):
        return 0.5 if 'default_mbd' in self.ablations else self.mbd_exponent

    @property
    def refine(self):
        return 0 if 'no_local_opt' in self.ablations else min(self.n_refine, self.n_transforms)

    @property
    def updates(self):
        return 'no_update' not in self.ablations

    @property
    def rates(self):
        """(count rate, centre rate) after ablations."""
        if not self.updates:
            return 0.0, 0.0
        return self.count_rate, self.centre_rate

    def to_dict(self):
        data = asdict(self)
        data['ablations'] = sorted(self.ablations)
        return data

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        priors = MotionPriors(**data.pop('priors', {}))
        segmenter = SegmenterConfig(**data.pop('segmenter', {}))
        ablations = frozenset(data.pop('ablations', ()))
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f'unknown config key(s): {", ".join(sorted(unknown))}')
        return cls(priors=priors, segmenter=segmenter, ablations=ablations, **data)

    def fingerprint(self):
        """Stable digest of everything that shapes tracker state (workers excluded)."""
        data = self.to_dict()
        data.pop('workers')
        blob = json.dumps(data, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()


def parse_config_text(text):
    """Parse ``key = value`` lines into a flat dict of strings.

    Dotted keys (``priors.sigma_r``) address nested groups.
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'expected "key = value", got {raw.strip()!r}', line=number)
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError('missing key', line=number)
        if key in values:
            raise ConfigError(f'duplicate key {key!r}', line=number)
        values[key] = value
    return values


def config_from_values(values, ablations=()):
    """Validate flat string values and build a ``TrackerConfig``."""
    from .forms import TrackerConfigForm

    form = TrackerConfigForm(data=values)
    if not form.is_valid():
        problems = '; '.join(
            f'{name}: {" ".join(str(e) for e in errors)}' for name, errors in form.errors.items()
        )
        raise ConfigError(problems)
    config = form.to_config()
    if ablations:
        config = config.with_ablations(*ablations)
    return config


def load_config(path=None, ablations=()):
    """Read a config file (defaults when ``path`` is None)."""
    if path is None:
        return config_from_values({}, ablations)
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f'cannot read config file {path}: {exc}') from exc
    return config_from_values(parse_config_text(text), ablations)


def format_config(config):
    """Render ``config`` in the config file format, one key per line."""
    lines = []
    for key, value in config.to_dict().items():
        if isinstance(value, dict):
            lines.extend(f'{key}.{sub} = {_fmt(v)}' for sub, v in value.items())
        elif key == 'ablations':
            lines.append(f'ablations = {",".join(value)}')
        else:
            lines.append(f'{key} = {_fmt(value)}')
    return '\n'.join(lines) + '\n'


def _fmt(value):
    if isinstance(value, float) and math.isfinite(value):
        return repr(value)
    return str(value)
