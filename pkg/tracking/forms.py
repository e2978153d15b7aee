from django import forms
from django.core.exceptions import ValidationError

from .config import ABLATIONS, TrackerConfig
from .exceptions import TrackingError
from .geometry import MotionPriors
from .placement import SegmenterConfig
from .synthetic import SHAPES, ScenarioSpec


class TrackerConfigForm(forms.Form):
    """Validates config-file values; every field is optional and falls back to the default."""

    n_patches = forms.IntegerField(min_value=1, required=False)
    patch_w = forms.IntegerField(min_value=1, required=False)
    patch_h = forms.IntegerField(min_value=1, required=False)
    radius = forms.FloatField(min_value=0.0, required=False)
    mbd_exponent = forms.FloatField(min_value=0.0, required=False)
    count_rate = forms.FloatField(min_value=0.0, max_value=1.0, required=False)
    centre_rate = forms.FloatField(min_value=0.0, required=False)
    max_overlap = forms.FloatField(min_value=0.0, max_value=1.0, required=False)
    max_samples = forms.IntegerField(min_value=1, required=False)
    n_transforms = forms.IntegerField(min_value=1, required=False)
    n_refine = forms.IntegerField(min_value=0, required=False)
    window = forms.IntegerField(min_value=1, required=False)
    expand = forms.FloatField(min_value=0.0, required=False)
    min_valid_fraction = forms.FloatField(min_value=0.0, max_value=1.0, required=False)
    workers = forms.IntegerField(min_value=1, required=False)

    priors_sigma_r = forms.FloatField(required=False)
    priors_sigma_s = forms.FloatField(required=False)
    priors_sigma_x = forms.FloatField(required=False)
    priors_sigma_y = forms.FloatField(required=False)

    segmenter_rho_minus = forms.FloatField(required=False)
    segmenter_rho_plus = forms.FloatField(required=False)
    segmenter_tau = forms.FloatField(required=False)
    segmenter_lam = forms.FloatField(min_value=0.0, required=False)

    ablations = forms.CharField(required=False)

    GROUPS = {'priors': MotionPriors, 'segmenter': SegmenterConfig}

    def __init__(self, data=None, **kwargs):
        data = {key.replace('.', '_'): value for key, value in (data or {}).items()}
        super().__init__(data=data, **kwargs)
        self.unknown_keys = sorted(set(data) - set(self.fields))
        self._config = None

    def clean_radius(self):
        radius = self.cleaned_data['radius']
        if radius is not None and radius <= 0:
            raise ValidationError('Matching radius must be positive.')
        return radius

    def clean_window(self):
        window = self.cleaned_data['window']
        if window is not None and window % 2 == 0:
            raise ValidationError('Search window side must be odd.')
        return window

    def clean_ablations(self):
        raw = self.cleaned_data['ablations'] or ''
        names = frozenset(part.strip() for part in raw.split(',') if part.strip())
        unknown = sorted(names - set(ABLATIONS))
        if unknown:
            raise ValidationError(f'Unknown ablation switch: {", ".join(unknown)}.')
        return names

    def clean(self):
        cleaned = super().clean()
        if self.unknown_keys:
            raise ValidationError(f'Unknown config key: {", ".join(self.unknown_keys)}.')
        if self.errors:
            return cleaned

        kwargs = {}
        groups = {name: {} for name in self.GROUPS}
        for name, value in cleaned.items():
            if value is None or name == 'ablations':
                continue
            group, _, sub = name.partition('_')
            if group in groups and sub:
                groups[group][sub] = value
            else:
                kwargs[name] = value
        try:
            for group, factory in self.GROUPS.items():
                kwargs[group] = factory(**groups[group])
            self._config = TrackerConfig(ablations=cleaned.get('ablations', frozenset()), **kwargs)
        except TrackingError as exc:
            raise ValidationError(str(exc))
        return cleaned

    def to_config(self):
        return self._config


class ScenarioForm(forms.Form):
    """Validates a synthetic scenario descriptor (JSON object)."""

    name = forms.SlugField(max_length=100, required=False)
    n_frames = forms.IntegerField(min_value=2, required=False)
    width = forms.IntegerField(min_value=16, required=False)
    height = forms.IntegerField(min_value=16, required=False)
    shape = forms.ChoiceField(choices=[(s, s) for s in SHAPES], required=False)
    object_w = forms.FloatField(min_value=4.0, required=False)
    object_h = forms.FloatField(min_value=4.0, required=False)
    start_x = forms.FloatField(required=False)
    start_y = forms.FloatField(required=False)
    velocity_x = forms.FloatField(required=False)
    velocity_y = forms.FloatField(required=False)
    rotation = forms.FloatField(required=False)
    scale = forms.FloatField(min_value=-0.5, max_value=0.5, required=False)
    illumination = forms.FloatField(required=False)
    noise = forms.FloatField(min_value=0.0, max_value=64.0, required=False)
    cell_size = forms.IntegerField(min_value=2, required=False)
    occluder = forms.BooleanField(required=False)
    clutter = forms.BooleanField(required=False)

    def __init__(self, data=None, **kwargs):
        data = dict(data or {})
        super().__init__(data=data, **kwargs)
        self.unknown_keys = sorted(set(data) - set(self.fields))

    def clean(self):
        cleaned = super().clean()
        if self.unknown_keys:
            raise ValidationError(f'Unknown scenario key: {", ".join(self.unknown_keys)}.')
        return cleaned

    def to_scenario(self):
        values = {
            name: value for name, value in self.cleaned_data.items()
            if value not in (None, '') and name in self.data
        }
        return ScenarioSpec(**values)
