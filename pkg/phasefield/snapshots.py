"""
Binary field snapshots.

File layout (little-endian)::

    8s    magic  b'SPINFLD1'
    u32   version
    u32   name length, then the UTF-8 name
    u32   nx, u32 ny
    f64   dx, f64 dy, f64 time
    f64 * nx*ny  values, row-major (y slow, x fast)

A state is stored as one file per field, ``<prefix>_<field>.spf``.
"""
import logging
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import State
from .exceptions import GridMismatchError, PhaseFieldError, SnapshotError
from .grid import BoundaryMode, GridSpec, ScalarField, VectorField

logger = logging.getLogger(__name__)

MAGIC = b'SPINFLD1'
VERSION = 1
SUFFIX = '.spf'
MAX_CELLS = 1 << 28

_U32 = struct.Struct('<I')
_DIMS = struct.Struct('<II')
_SCALES = struct.Struct('<ddd')

STATE_FIELDS = ('c', 'theta', 'p', 'vx', 'vy')
REQUIRED_FIELDS = ('c', 'theta')


@dataclass(frozen=True)
class SnapshotHeader:
    field_name: str
    nx: int
    ny: int
    dx: float
    dy: float
    time: float
    version: int = VERSION

    @property
    def cells(self):
        return self.nx * self.ny

    def grid(self, bc_mode=BoundaryMode.PERIODIC):
        return GridSpec(self.nx, self.ny, self.nx * self.dx, self.ny * self.dy, bc_mode)


# ==================================================================
# CODEC
# ==================================================================

def encode_snapshot(field, name, time):
    raw_name = name.encode('utf-8')
    spec = field.spec
    header = b''.join([
        MAGIC,
        _U32.pack(VERSION),
        _U32.pack(len(raw_name)),
        raw_name,
        _DIMS.pack(spec.nx, spec.ny),
        _SCALES.pack(spec.dx, spec.dy, float(time)),
    ])
    payload = np.ascontiguousarray(field.values, dtype='<f8').tobytes()
    return header + payload


class _Reader:
    def __init__(self, data, source):
        self.data = data
        self.source = source
        self.offset = 0

    def take(self, size, what):
        end = self.offset + size
        if end > len(self.data):
            raise SnapshotError(
                f"{self.source}: truncated while reading {what} "
                f"(need {size} bytes at offset {self.offset}, file has {len(self.data)})"
            )
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt, what):
        return fmt.unpack(self.take(fmt.size, what))


def decode_header(data, source='<bytes>'):
    """Parse the header; returns ``(SnapshotHeader, payload_offset)``."""
    reader = _Reader(data, source)
    magic = reader.take(len(MAGIC), 'magic')
    if magic != MAGIC:
        raise SnapshotError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    (version,) = reader.unpack(_U32, 'version')
    if version != VERSION:
        raise SnapshotError(f"{source}: unsupported snapshot version {version}")
    (name_len,) = reader.unpack(_U32, 'name length')
    try:
        name = reader.take(name_len, 'field name').decode('utf-8')
    except UnicodeDecodeError as exc:
        raise SnapshotError(f"{source}: field name is not UTF-8") from exc
    nx, ny = reader.unpack(_DIMS, 'dimensions')
    if nx == 0 or ny == 0 or nx * ny > MAX_CELLS:
        raise SnapshotError(f"{source}: dimension overflow ({nx}x{ny})")
    dx, dy, time = reader.unpack(_SCALES, 'scales')
    if not all(math.isfinite(value) for value in (dx, dy, time)) or dx <= 0 or dy <= 0:
        raise SnapshotError(f"{source}: invalid cell size or time ({dx}, {dy}, {time})")
    return SnapshotHeader(name, nx, ny, dx, dy, time, version), reader.offset


def _check_grid(header, spec, source):
    if (header.nx, header.ny) != (spec.nx, spec.ny):
        raise GridMismatchError(
            f"{source}: snapshot grid {header.nx}x{header.ny} does not match configured grid {spec.nx}x{spec.ny}"
        )
    if not (math.isclose(header.dx, spec.dx, rel_tol=1e-9) and math.isclose(header.dy, spec.dy, rel_tol=1e-9)):
        raise GridMismatchError(
            f"{source}: snapshot cell size {header.dx:g}x{header.dy:g} does not match {spec.dx:g}x{spec.dy:g}"
        )


def decode_snapshot(data, source='<bytes>', spec=None):
    """
    Decode a snapshot into ``(SnapshotHeader, ScalarField)``.

    Without ``spec`` the grid is rebuilt from the header in periodic mode;
    with it, the header must describe the same grid.
    """
    header, offset = decode_header(data, source)
    expected = header.cells * 8
    remaining = len(data) - offset
    if remaining < expected:
        raise SnapshotError(f"{source}: truncated payload ({remaining} of {expected} bytes)")
    if remaining > expected:
        raise SnapshotError(f"{source}: {remaining - expected} trailing bytes after payload")
    if spec is None:
        try:
            spec = header.grid()
        except PhaseFieldError as exc:
            raise SnapshotError(f"{source}: {exc}") from exc
    else:
        _check_grid(header, spec, source)
    values = np.frombuffer(data, dtype='<f8', count=header.cells, offset=offset)
    return header, ScalarField(spec, values.astype(np.float64).reshape(spec.shape))


# ==================================================================
# FILES
# ==================================================================

def write_snapshot(field, name, time, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_snapshot(field, name, time))
    return path


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except FileNotFoundError as exc:
        raise SnapshotError(f"snapshot file {path} does not exist") from exc
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc.strerror or exc}") from exc


def read_snapshot_with_header(path, spec=None):
    return decode_snapshot(_read_bytes(path), source=str(path), spec=spec)


def read_snapshot(path, spec=None):
    _, field = read_snapshot_with_header(path, spec)
    return field


def state_prefix(directory, step):
    return Path(directory) / f"snap_{step:06d}"


def field_path(prefix, name):
    return Path(f"{prefix}_{name}{SUFFIX}")


def write_state(state, directory, step):
    """Write every field of ``state``; returns the common prefix."""
    prefix = state_prefix(directory, step)
    fields = {
        'c': state.c,
        'theta': state.theta,
        'p': state.p,
        'vx': state.v.x_component,
        'vy': state.v.y_component,
    }
    for name in STATE_FIELDS:
        write_snapshot(fields[name], name, state.t, field_path(prefix, name))
    logger.info(f"Snapshot written: {prefix} (t={state.t:.6g})")
    return prefix


def read_state(prefix, spec=None):
    """
    Rebuild a ``State`` from ``<prefix>_<field>.spf`` files.

    ``c`` and ``theta`` are required; missing velocity or pressure files read
    as zero. All files must agree on the grid and the time.
    """
    fields = {}
    time = None
    for name in STATE_FIELDS:
        path = field_path(prefix, name)
        if name not in REQUIRED_FIELDS and not path.exists():
            continue
        header, field = read_snapshot_with_header(path, spec)
        if spec is None:
            spec = field.spec
        if time is None:
            time = header.time
        elif header.time != time:
            raise SnapshotError(f"{path}: time {header.time} differs from {time} in sibling files")
        fields[name] = field
    zero = ScalarField.zeros(spec)
    v = VectorField(spec, fields.get('vx', zero).values, fields.get('vy', zero).values)
    try:
        return State(fields['c'], v, fields.get('p', zero), fields['theta'], time)
    except PhaseFieldError as exc:
        raise SnapshotError(f"{prefix}: {exc}") from exc
