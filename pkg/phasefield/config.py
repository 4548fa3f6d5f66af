"""
Run-config files.

Line format::

    # comment
    [section]
    key = value

Unknown sections and keys, duplicate keys and values outside a section are
errors. Every error names the offending key path (``material.theta0``) and
the line it sits on.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from django.conf import settings

from .dynamics import SourceTerms, StepConfig
from .exceptions import ConfigError, PhaseFieldError
from .forms import SECTION_FORMS
from .grid import GridSpec
from .initial_conditions import InitialCondition, InitialMode
from .material import MaterialParams

logger = logging.getLogger(__name__)

REQUIRED_SECTIONS = ('grid',)


@dataclass(frozen=True)
class SourceSpec:
    """Uniform source descriptors, turned into fields once the grid is known."""

    body_force_x: float = 0.0
    body_force_y: float = 0.0
    heat_supply: float = 0.0

    def build(self, spec):
        return SourceTerms.uniform(spec, self.body_force_x, self.body_force_y, self.heat_supply)


@dataclass(frozen=True)
class RunSettings:
    t_end: float = 1.0
    snapshot_every: int = 100
    output_dir: str = 'runs/default'
    audit_every: int = 1


@dataclass(frozen=True)
class RunConfig:
    grid: GridSpec
    material: MaterialParams = field(default_factory=MaterialParams)
    step: StepConfig = field(default_factory=StepConfig)
    initial: InitialCondition = field(default_factory=InitialCondition)
    sources: SourceSpec = field(default_factory=SourceSpec)
    run: RunSettings = field(default_factory=RunSettings)
    source_path: str = ''

    def resolve_output_dir(self, override=None):
        path = Path(override or self.run.output_dir)
        if not path.is_absolute():
            path = Path(settings.PHASEFIELD_OUTPUT_ROOT) / path
        return path


SECTION_TYPES = {
    'grid': GridSpec,
    'material': MaterialParams,
    'step': StepConfig,
    'initial': InitialCondition,
    'sources': SourceSpec,
    'run': RunSettings,
}


def _tokenize(text):
    """Return ``{section: {key: (value, line)}}`` after the structural checks."""
    sections = {}
    section_lines = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith('['):
            if not line.endswith(']'):
                raise ConfigError(f"malformed section header {line!r}", line=lineno)
            name = line[1:-1].strip()
            if name not in SECTION_FORMS:
                raise ConfigError(f"unknown section [{name}]", key=name, line=lineno)
            if name in sections:
                raise ConfigError(
                    f"duplicate section [{name}] (first opened on line {section_lines[name]})",
                    key=name, line=lineno,
                )
            sections[name] = {}
            section_lines[name] = lineno
            current = name
            continue
        if '=' not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, value = (part.strip() for part in line.split('=', 1))
        if current is None:
            raise ConfigError("key outside of any section", key=key, line=lineno)
        path = f"{current}.{key}"
        if key not in SECTION_FORMS[current].base_fields:
            raise ConfigError("unknown key", key=path, line=lineno)
        if key in sections[current]:
            first = sections[current][key][1]
            raise ConfigError(f"duplicate key (first set on line {first})", key=path, line=lineno)
        if not value:
            raise ConfigError("missing value", key=path, line=lineno)
        sections[current][key] = (value, lineno)
    return sections, section_lines


def _validate(name, entries, header_line):
    form = SECTION_FORMS[name](data={key: value for key, (value, _) in entries.items()})
    if not form.is_valid():
        key, errors = next(iter(form.errors.items()))
        line = entries[key][1] if key in entries else header_line
        raise ConfigError('; '.join(errors), key=f"{name}.{key}", line=line)
    try:
        return SECTION_TYPES[name](**form.provided())
    except PhaseFieldError as exc:
        raise ConfigError(str(exc), key=name, line=header_line) from exc


def parse_config(text, source=''):
    """Parse and validate run-config text into a ``RunConfig``."""
    sections, section_lines = _tokenize(text)
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            raise ConfigError(f"missing required section [{name}]", key=name)
    built = {
        name: _validate(name, entries, section_lines[name])
        for name, entries in sections.items()
    }
    config = RunConfig(source_path=str(source), **built)
    return _resolve_references(config, section_lines.get('initial'))


def _resolve_references(config, line):
    """Anchor a relative snapshot prefix at the config file and check that it exists."""
    initial = config.initial
    if initial.mode is not InitialMode.FROM_SNAPSHOT:
        return config
    prefix = Path(initial.snapshot_prefix)
    if not prefix.is_absolute() and config.source_path:
        prefix = Path(config.source_path).parent / prefix
    if not Path(f"{prefix}_c.spf").exists():
        raise ConfigError(f"no snapshot files for prefix {prefix}", key='initial.snapshot_prefix', line=line)
    return replace(config, initial=replace(initial, snapshot_prefix=str(prefix)))


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ConfigError(f"config file {path} is not UTF-8") from exc
    config = parse_config(text, source=path)
    logger.info(f"Loaded run config {path}")
    return config
