r"""Uniform frequency/time lattices and the transforms between them.

Sign convention: the frequency-to-time transform uses the kernel
:math:`e^{-i\omega t}`,

.. math::

    E(t) = \frac{1}{\sqrt{2\pi}} \int d\omega\, f(\omega)\, e^{-i\omega t},

with the :math:`1/\sqrt{2\pi}` prefactor chosen so that the discrete transform
is unitary under rectangle-rule quadrature (Parseval holds exactly).
Units use :math:`\hbar = \epsilon_0 = c = 1`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridError, GridMismatchError

MIN_POINTS = 8


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency lattice ``center +- span/2`` with ``n_points`` samples."""

    center: float
    span: float
    n_points: int

    def __post_init__(self):
        if not np.isfinite(self.span) or self.span <= 0:
            raise GridError(f"span must be positive, got {self.span}")
        if int(self.n_points) != self.n_points or self.n_points < MIN_POINTS:
            raise GridError(f"n_points must be an integer >= {MIN_POINTS}, got {self.n_points}")
        if self.center - self.span / 2 <= 0:
            raise GridError(
                f"grid samples non-positive frequencies (lowest {self.center - self.span / 2:g})"
            )

    @property
    def spacing(self) -> float:
        return self.span / (self.n_points - 1)

    @property
    def omega(self) -> np.ndarray:
        return self.center - self.span / 2 + self.spacing * np.arange(self.n_points)

    @property
    def detuning(self) -> np.ndarray:
        """Frequencies relative to ``center``."""
        return self.omega - self.center

    def time_grid(self) -> "TimeGrid":
        dt = 2 * np.pi / (self.n_points * self.spacing)
        return TimeGrid(t0=-(self.n_points // 2) * dt, dt=dt, n_points=self.n_points)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    dt: float
    n_points: int

    def __post_init__(self):
        if self.dt <= 0 or self.n_points < 1:
            raise GridError("time grid needs dt > 0 and n_points >= 1")

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_points)

    def is_dual_to(self, grid: FrequencyGrid, rtol: float = 1e-12) -> bool:
        prod = self.dt * grid.spacing * self.n_points
        return self.n_points == grid.n_points and abs(prod - 2 * np.pi) <= rtol * 2 * np.pi


@dataclass(frozen=True)
class SpectralFunction:
    """Complex spectral amplitude sampled on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"values have shape {v.shape}, grid has {self.grid.n_points} points"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("spectral values must be finite")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(np.real(inner_product(self, self))))

    def __add__(self, other):
        _check_same(self.grid, other.grid)
        return SpectralFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same(self.grid, other.grid)
        return SpectralFunction(self.grid, self.values - other.values)

    def __mul__(self, c):
        return SpectralFunction(self.grid, self.values * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class TemporalFunction:
    """Complex temporal amplitude sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"values have shape {v.shape}, grid has {self.grid.n_points} points"
            )
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.dt))


def make_grids(center: float, span: float, n_points: int) -> tuple[FrequencyGrid, TimeGrid]:
    """Build a Fourier-dual pair of grids with ``dt = 2*pi / (n_points * d_omega)``."""
    fg = FrequencyGrid(float(center), float(span), int(n_points))
    return fg, fg.time_grid()


def _check_same(a, b):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def _transform_phases(fgrid: FrequencyGrid, tgrid: TimeGrid):
    if not tgrid.is_dual_to(fgrid):
        raise GridMismatchError("time grid is not Fourier-dual to the frequency grid")
    m = np.arange(fgrid.n_points)
    w_min = fgrid.omega[0]
    pre = np.exp(-1j * m * fgrid.spacing * tgrid.t0)
    post = np.exp(-1j * w_min * tgrid.t)
    return pre, post


def spectral_to_time(values: np.ndarray, fgrid: FrequencyGrid, tgrid: TimeGrid) -> np.ndarray:
    """Transform spectral samples along the last axis to time samples."""
    pre, post = _transform_phases(fgrid, tgrid)
    scale = fgrid.spacing / np.sqrt(2 * np.pi)
    return scale * post * np.fft.fft(np.asarray(values) * pre, axis=-1)


def time_to_spectral(values: np.ndarray, fgrid: FrequencyGrid, tgrid: TimeGrid) -> np.ndarray:
    """Inverse of :func:`spectral_to_time` along the last axis."""
    pre, post = _transform_phases(fgrid, tgrid)
    n = fgrid.n_points
    scale = tgrid.dt * n / np.sqrt(2 * np.pi)
    return scale * np.conj(pre) * np.fft.ifft(np.asarray(values) * np.conj(post), axis=-1)


def to_time(f: SpectralFunction, tgrid: TimeGrid | None = None) -> TemporalFunction:
    """Fourier transform a spectral amplitude onto the dual time grid."""
    tgrid = tgrid or f.grid.time_grid()
    return TemporalFunction(tgrid, spectral_to_time(f.values, f.grid, tgrid))


def to_frequency(p: TemporalFunction, fgrid: FrequencyGrid) -> SpectralFunction:
    return SpectralFunction(fgrid, time_to_spectral(p.values, fgrid, p.grid))


def inner_product(f: SpectralFunction, g: SpectralFunction) -> complex:
    r"""Rectangle-rule quadrature of :math:`\int d\omega\, f^*(\omega) g(\omega)`."""
    _check_same(f.grid, g.grid)
    return complex(np.vdot(f.values, g.values) * f.grid.spacing)


def weighted_overlap(f: SpectralFunction, g: SpectralFunction) -> complex:
    r"""Overlap with the :math:`\sqrt{\omega}` field-amplitude weight on each factor.

    Normalized by the grid center so that narrowband functions reproduce
    :func:`inner_product`::

        sum(sqrt(w) f* sqrt(w) g) * dw / w0
    """
    _check_same(f.grid, g.grid)
    w = f.grid.omega / f.grid.center
    return complex(np.sum(np.conj(f.values) * w * g.values) * f.grid.spacing)


def time_inner_product(p: TemporalFunction, q: TemporalFunction) -> complex:
    _check_same(p.grid, q.grid)
    return complex(np.vdot(p.values, q.values) * p.grid.dt)
