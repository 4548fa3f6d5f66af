"""
Validation forms for the sections of a run-config file.

The forms only coerce strings and enforce ranges; defaults live on the
dataclasses the parsed values are handed to, so a key that is absent from
the file is simply left out of ``cleaned_data``.
"""
from django import forms
from django.core.exceptions import ValidationError

from .grid import BoundaryMode
from .initial_conditions import InitialMode
from .material import MobilityModel


def positive(value):
    if value is not None and value <= 0:
        raise ValidationError("must be positive, got %(value)s", params={'value': value})


def _choices(enum_cls):
    return [(member.value, member.value) for member in enum_cls]


class SectionForm(forms.Form):
    """Base form; ``provided()`` keeps only keys that appeared in the file."""

    def provided(self):
        return {name: value for name, value in self.cleaned_data.items() if name in self.data}


class GridForm(SectionForm):
    nx = forms.IntegerField(min_value=4)
    ny = forms.IntegerField(min_value=4)
    lx = forms.FloatField(required=False, validators=[positive])
    ly = forms.FloatField(required=False, validators=[positive])
    bc_mode = forms.ChoiceField(required=False, choices=_choices(BoundaryMode))


class MaterialForm(SectionForm):
    rho0 = forms.FloatField(required=False, validators=[positive])
    gamma = forms.FloatField(required=False, validators=[positive])
    theta0 = forms.FloatField(required=False, validators=[positive])
    mobility_model = forms.ChoiceField(required=False, choices=_choices(MobilityModel))
    mobility0 = forms.FloatField(required=False, min_value=0)
    nu_a = forms.FloatField(required=False, validators=[positive])
    nu_b = forms.FloatField(required=False, validators=[positive])
    kappa0 = forms.FloatField(required=False, min_value=0)
    spec_heat = forms.FloatField(required=False, validators=[positive])


class StepForm(SectionForm):
    dt = forms.FloatField(required=False, validators=[positive])
    stabilization_s = forms.FloatField(required=False, min_value=0)
    projection_tol = forms.FloatField(required=False, validators=[positive])
    max_linear_iters = forms.IntegerField(required=False, min_value=1)


class InitialForm(SectionForm):
    mode = forms.ChoiceField(required=False, choices=_choices(InitialMode))
    c_mean = forms.FloatField(required=False)
    amplitude = forms.FloatField(required=False, min_value=0)
    seed = forms.IntegerField(required=False, min_value=0)
    theta = forms.FloatField(required=False, validators=[positive])
    wavenumber_index = forms.IntegerField(required=False, min_value=1)
    vortex_strength = forms.FloatField(required=False)
    snapshot_prefix = forms.CharField(required=False, max_length=500)


class SourcesForm(SectionForm):
    body_force_x = forms.FloatField(required=False)
    body_force_y = forms.FloatField(required=False)
    heat_supply = forms.FloatField(required=False)


class RunForm(SectionForm):
    t_end = forms.FloatField(required=False, validators=[positive])
    snapshot_every = forms.IntegerField(required=False, min_value=0)
    output_dir = forms.CharField(required=False, max_length=500)
    audit_every = forms.IntegerField(required=False, min_value=0)


SECTION_FORMS = {
    'grid': GridForm,
    'material': MaterialForm,
    'step': StepForm,
    'initial': InitialForm,
    'sources': SourcesForm,
    'run': RunForm,
}
