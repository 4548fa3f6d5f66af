"""
Structured uniform 2D grid, field containers and finite-difference operators.

Fields are cell-centred and stored row-major as ``(ny, nx)`` arrays, so the
flat index of cell ``(i, j)`` is ``i + nx * j``. Every operator is a sparse
matrix built once per (grid, ghost convention) and cached, which keeps the
boundary handling in one place: periodic grids wrap, physical grids fill a
single ghost layer according to a ``Ghost`` convention.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .exceptions import GridMismatchError, NonFiniteFieldError, ParameterError


class BoundaryMode(str, enum.Enum):
    PERIODIC = 'periodic'
    PHYSICAL = 'physical'


class Ghost(enum.Enum):
    """How the ghost layer of a physical grid is filled."""

    MIRROR = 'mirror'              # ghost = edge value (homogeneous Neumann)
    ANTIMIRROR = 'antimirror'      # ghost = -edge value (zero value on the wall face)
    EXTRAPOLATE = 'extrapolate'    # ghost = 2*edge - next (exact on linear fields)


# ghost = a * edge + b * next-to-edge
_GHOST_WEIGHTS = {
    Ghost.MIRROR: (1.0, 0.0),
    Ghost.ANTIMIRROR: (-1.0, 0.0),
    Ghost.EXTRAPOLATE: (2.0, -1.0),
}


# ==================================================================
# GRID SPECIFICATION
# ==================================================================

@dataclass(frozen=True)
class GridSpec:
    """
    Uniform rectangular grid of ``nx * ny`` cells covering ``[0, lx] x [0, ly]``.

    Cell sizes are derived from the edge lengths and never stored.
    """

    nx: int
    ny: int
    lx: float = 2 * math.pi
    ly: float = 2 * math.pi
    bc_mode: BoundaryMode = BoundaryMode.PERIODIC

    def __post_init__(self):
        for name in ('nx', 'ny'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ParameterError(f"{name} must be an integer, got {value!r}")
            if value < 4:
                raise ParameterError(f"{name} must be >= 4, got {value}")
            object.__setattr__(self, name, int(value))
        for name in ('lx', 'ly'):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be a positive length, got {value}")
            object.__setattr__(self, name, value)
        try:
            object.__setattr__(self, 'bc_mode', BoundaryMode(self.bc_mode))
        except ValueError as exc:
            raise ParameterError(f"unknown bc_mode {self.bc_mode!r}") from exc

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def shape(self):
        return (self.ny, self.nx)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return self.lx * self.ly

    @property
    def periodic(self):
        return self.bc_mode is BoundaryMode.PERIODIC

    def cell_centers(self):
        """Return ``(x, y)`` coordinate arrays of shape ``(ny, nx)``."""
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return np.meshgrid(x, y, indexing='xy')

    def wavenumbers(self):
        """Angular wavenumbers ``(kx, ky)`` laid out like ``np.fft.fft2`` output."""
        kx = 2 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        ky = 2 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)
        return np.meshgrid(kx, ky, indexing='xy')

    def interior_mask(self, width=1):
        """Boolean mask excluding ``width`` boundary cells (all True when periodic)."""
        mask = np.ones(self.shape, dtype=bool)
        if not self.periodic:
            mask[:width, :] = False
            mask[-width:, :] = False
            mask[:, :width] = False
            mask[:, -width:] = False
        return mask


# ==================================================================
# FIELDS
# ==================================================================

def _as_grid_array(spec, values, label):
    arr = np.array(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(spec.shape, float(arr))
    if arr.shape != spec.shape:
        if arr.size != spec.size:
            raise ParameterError(
                f"{label} has {arr.size} values, grid {spec.nx}x{spec.ny} needs {spec.size}"
            )
        arr = arr.reshape(spec.shape)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteFieldError(f"{label} contains non-finite values")
    arr.flags.writeable = False
    return arr


def require_same_grid(*items):
    specs = {item.spec for item in items}
    if len(specs) > 1:
        raise GridMismatchError(f"fields live on different grids: {sorted(map(repr, specs))}")
    return items[0].spec


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Immutable grid samples of a scalar quantity (c, theta, p, mu, ...)."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _as_grid_array(self.spec, self.values, 'scalar field'))

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros(spec.shape))

    @classmethod
    def full(cls, spec, value):
        return cls(spec, np.full(spec.shape, float(value)))

    @classmethod
    def from_function(cls, spec, fn):
        x, y = spec.cell_centers()
        return cls(spec, np.broadcast_to(fn(x, y), spec.shape))

    def flat(self):
        return self.values.ravel()

    def _coerce(self, other):
        if isinstance(other, ScalarField):
            require_same_grid(self, other)
            return other.values
        return other

    def __add__(self, other):
        return ScalarField(self.spec, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return ScalarField(self.spec, self.values - self._coerce(other))

    def __rsub__(self, other):
        return ScalarField(self.spec, self._coerce(other) - self.values)

    def __mul__(self, other):
        return ScalarField(self.spec, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ScalarField(self.spec, self.values / self._coerce(other))

    def __neg__(self):
        return ScalarField(self.spec, -self.values)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Immutable grid samples of a 2-vector (v, b, J, grad c, ...)."""

    spec: GridSpec
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'x', _as_grid_array(self.spec, self.x, 'vector x-component'))
        object.__setattr__(self, 'y', _as_grid_array(self.spec, self.y, 'vector y-component'))

    @classmethod
    def zeros(cls, spec):
        return cls(spec, np.zeros(spec.shape), np.zeros(spec.shape))

    @classmethod
    def from_function(cls, spec, fx, fy):
        x, y = spec.cell_centers()
        return cls(spec, np.broadcast_to(fx(x, y), spec.shape), np.broadcast_to(fy(x, y), spec.shape))

    @property
    def x_component(self):
        return ScalarField(self.spec, self.x)

    @property
    def y_component(self):
        return ScalarField(self.spec, self.y)

    def dot(self, other):
        require_same_grid(self, other)
        return self.x * other.x + self.y * other.y

    def norm_squared(self):
        return self.x ** 2 + self.y ** 2

    def scaled(self, factor):
        factor = factor.values if isinstance(factor, ScalarField) else factor
        return VectorField(self.spec, self.x * factor, self.y * factor)

    def __add__(self, other):
        require_same_grid(self, other)
        return VectorField(self.spec, self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        require_same_grid(self, other)
        return VectorField(self.spec, self.x - other.x, self.y - other.y)


@dataclass(frozen=True, eq=False)
class TensorField:
    """
    Second-order tensor samples with ``t_ij`` stored as ``xx, xy, yx, yy``.

    For a velocity gradient the convention is ``t_ij = d v_i / d x_j``.
    """

    spec: GridSpec
    xx: np.ndarray
    xy: np.ndarray
    yx: np.ndarray
    yy: np.ndarray

    def components(self):
        return (self.xx, self.xy, self.yx, self.yy)

    def transpose(self):
        return TensorField(self.spec, self.xx, self.yx, self.xy, self.yy)

    def trace(self):
        return self.xx + self.yy

    def contract(self, other):
        """Pointwise ``A : B = tr(A^T B) = sum_ij A_ij B_ij``."""
        return sum(a * b for a, b in zip(self.components(), other.components()))

    def norm_squared(self):
        return self.contract(self)


# ==================================================================
# SPARSE STENCILS
# ==================================================================

def _stencil_1d(n, periodic, ghost, weights):
    w_minus, w_center, w_plus = weights
    ghost_edge, ghost_next = _GHOST_WEIGHTS[ghost]
    m = sp.lil_matrix((n, n))
    for i in range(n):
        m[i, i] += w_center
        for j, w in ((i - 1, w_minus), (i + 1, w_plus)):
            if 0 <= j < n:
                m[i, j] += w
            elif periodic:
                m[i, j % n] += w
            else:
                edge, nxt = (0, 1) if j < 0 else (n - 1, n - 2)
                m[i, edge] += w * ghost_edge
                m[i, nxt] += w * ghost_next
    return m.tocsr()


def _embed(spec, axis, m1d):
    if axis == 'x':
        return sp.kron(sp.identity(spec.ny, format='csr'), m1d, format='csr')
    if axis == 'y':
        return sp.kron(m1d, sp.identity(spec.nx, format='csr'), format='csr')
    raise ParameterError(f"axis must be 'x' or 'y', got {axis!r}")


def _axis_params(spec, axis):
    return (spec.nx, spec.dx) if axis == 'x' else (spec.ny, spec.dy)


@lru_cache(maxsize=None)
def derivative_matrix(spec, axis, ghost=Ghost.MIRROR):
    """Second-order central first derivative along ``axis``."""
    n, h = _axis_params(spec, axis)
    m1d = _stencil_1d(n, spec.periodic, ghost, (-0.5 / h, 0.0, 0.5 / h))
    return _embed(spec, axis, m1d)


@lru_cache(maxsize=None)
def laplacian_matrix(spec, ghost=Ghost.MIRROR):
    """Standard 5-point Laplacian."""
    mats = []
    for axis in ('x', 'y'):
        n, h = _axis_params(spec, axis)
        mats.append(_embed(spec, axis, _stencil_1d(n, spec.periodic, ghost, (1 / h**2, -2 / h**2, 1 / h**2))))
    return (mats[0] + mats[1]).tocsr()


@lru_cache(maxsize=None)
def face_difference_matrix(spec, axis):
    """
    Forward differences onto the faces ``i + 1/2``.

    The last face of a physical grid is the wall; its row is empty (no flux).
    """
    n, h = _axis_params(spec, axis)
    m = sp.lil_matrix((n, n))
    for i in range(n):
        if i + 1 < n:
            m[i, i + 1], m[i, i] = 1 / h, -1 / h
        elif spec.periodic:
            m[i, 0], m[i, i] = 1 / h, -1 / h
    return _embed(spec, axis, m.tocsr())


@lru_cache(maxsize=None)
def face_average_matrix(spec, axis):
    n, _ = _axis_params(spec, axis)
    m = sp.lil_matrix((n, n))
    for i in range(n):
        j = (i + 1) % n if spec.periodic else min(i + 1, n - 1)
        m[i, i] += 0.5
        m[i, j] += 0.5
    return _embed(spec, axis, m.tocsr())


@lru_cache(maxsize=None)
def divergence_matrix(spec, ghost=Ghost.ANTIMIRROR):
    """Central divergence as an ``N x 2N`` operator acting on ``[vx; vy]``."""
    return sp.hstack([derivative_matrix(spec, 'x', ghost), derivative_matrix(spec, 'y', ghost)], format='csr')


def laplacian_symbol(spec):
    """Fourier symbol of the 5-point Laplacian on a periodic grid (non-positive)."""
    kx, ky = spec.wavenumbers()
    return (-(2 * np.sin(kx * spec.dx / 2) / spec.dx) ** 2
            - (2 * np.sin(ky * spec.dy / 2) / spec.dy) ** 2)


def central_symbols(spec):
    """Real factors ``(sx, sy)``; the central derivative multiplies a mode by ``1j * s``."""
    kx, ky = spec.wavenumbers()
    return np.sin(kx * spec.dx) / spec.dx, np.sin(ky * spec.dy) / spec.dy


# ==================================================================
# OPERATORS
# ==================================================================

def _apply(matrix, arr, spec):
    return (matrix @ arr.ravel()).reshape(spec.shape)


def gradient(f, ghost=Ghost.MIRROR):
    spec = f.spec
    return VectorField(
        spec,
        _apply(derivative_matrix(spec, 'x', ghost), f.values, spec),
        _apply(derivative_matrix(spec, 'y', ghost), f.values, spec),
    )


def divergence(F, ghost=Ghost.ANTIMIRROR):
    """
    Central divergence.

    With the default ANTIMIRROR ghosts the normal component vanishes on the
    wall faces, so the integral telescopes to zero and ``divergence`` is the
    exact negative adjoint of ``gradient`` with MIRROR ghosts.
    """
    spec = F.spec
    return ScalarField(
        spec,
        _apply(derivative_matrix(spec, 'x', ghost), F.x, spec)
        + _apply(derivative_matrix(spec, 'y', ghost), F.y, spec),
    )


def laplacian(f, ghost=Ghost.MIRROR):
    return ScalarField(f.spec, _apply(laplacian_matrix(f.spec, ghost), f.values, f.spec))


def biharmonic(f, ghost=Ghost.MIRROR):
    return laplacian(laplacian(f, ghost), ghost)


def curl2d(v, ghost=Ghost.ANTIMIRROR):
    """Scalar vorticity ``dvy/dx - dvx/dy``."""
    spec = v.spec
    return ScalarField(
        spec,
        _apply(derivative_matrix(spec, 'x', ghost), v.y, spec)
        - _apply(derivative_matrix(spec, 'y', ghost), v.x, spec),
    )


def velocity_gradient(v, ghost=Ghost.ANTIMIRROR):
    spec = v.spec
    dx = derivative_matrix(spec, 'x', ghost)
    dy = derivative_matrix(spec, 'y', ghost)
    return TensorField(
        spec,
        _apply(dx, v.x, spec), _apply(dy, v.x, spec),
        _apply(dx, v.y, spec), _apply(dy, v.y, spec),
    )


def sym_gradient(v, ghost=Ghost.ANTIMIRROR):
    """Rate of strain ``D = (grad v + grad v^T) / 2``."""
    g = velocity_gradient(v, ghost)
    off = 0.5 * (g.xy + g.yx)
    return TensorField(v.spec, g.xx, off, off, g.yy)


def tensor_divergence(t, diagonal_ghost=Ghost.MIRROR, off_diagonal_ghost=Ghost.ANTIMIRROR):
    """Row divergence ``(div T)_i = d_j T_ij``."""
    spec = t.spec
    return VectorField(
        spec,
        _apply(derivative_matrix(spec, 'x', diagonal_ghost), t.xx, spec)
        + _apply(derivative_matrix(spec, 'y', off_diagonal_ghost), t.xy, spec),
        _apply(derivative_matrix(spec, 'x', off_diagonal_ghost), t.yx, spec)
        + _apply(derivative_matrix(spec, 'y', diagonal_ghost), t.yy, spec),
    )


def integrate(f):
    """Midpoint rule over the whole domain."""
    return float(np.sum(f.values) * f.spec.cell_area)


def advect(f, v, ghost=Ghost.MIRROR):
    """Convective rate ``v . grad f``."""
    require_same_grid(f, v)
    return ScalarField(f.spec, gradient(f, ghost).dot(v))


def weighted_laplacian(weight, f):
    """
    Conservative compact ``div(k grad f)`` with face-averaged ``k``.

    For ``k == 1`` this is exactly ``laplacian(f)`` with MIRROR ghosts; the
    wall faces of a physical grid carry no flux.
    """
    spec = f.spec
    if isinstance(weight, ScalarField):
        require_same_grid(weight, f)
        k = weight.values.ravel()
    else:
        k = np.broadcast_to(np.asarray(weight, dtype=float), spec.shape).ravel()
    out = np.zeros(spec.size)
    for axis in ('x', 'y'):
        d_plus = face_difference_matrix(spec, axis)
        k_face = face_average_matrix(spec, axis) @ k
        out -= d_plus.T @ (k_face * (d_plus @ f.values.ravel()))
    return ScalarField(spec, out.reshape(spec.shape))


def gradient_energy(f):
    """``1/2 * integral |grad f|^2`` with face differences (the form of ``laplacian``)."""
    spec = f.spec
    total = 0.0
    for axis in ('x', 'y'):
        face = face_difference_matrix(spec, axis) @ f.values.ravel()
        total += float(np.sum(face ** 2))
    return 0.5 * total * spec.cell_area
