"""Temporal-mode bases: Hermite-Gaussian construction, projection and synthesis.

A :class:`ModeBasis` is an ordered orthonormal set of spectral mode functions on
one :class:`~tempomode.grid.FrequencyGrid`.  Mode operators are never
represented symbolically; everything downstream acts on coefficient vectors
over a basis.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BasisFitError, GridMismatchError
from .grid import FrequencyGrid, SpectralFunction, TemporalFunction, spectral_to_time

ORTHONORMAL_TOL = 1e-8
OUTSIDE_ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class ModeBasis:
    grid: FrequencyGrid
    matrix: np.ndarray = field(repr=False)  # shape (J, n_points), one mode per row
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[1] != self.grid.n_points:
            raise GridMismatchError("mode matrix must have shape (J, grid.n_points)")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        labels = tuple(self.labels) or tuple(f"mode{j}" for j in range(m.shape[0]))
        if len(labels) != m.shape[0]:
            raise ValueError("one label per mode required")
        object.__setattr__(self, "labels", labels)
        dev = np.max(np.abs(self.gram() - np.eye(len(self))))
        if dev > ORTHONORMAL_TOL:
            raise BasisFitError(f"basis is not orthonormal (Gram deviation {dev:.3g})")

    def __len__(self):
        return self.matrix.shape[0]

    def __getitem__(self, j) -> SpectralFunction:
        return SpectralFunction(self.grid, self.matrix[j])

    @property
    def modes(self) -> list[SpectralFunction]:
        return [self[j] for j in range(len(self))]

    def gram(self) -> np.ndarray:
        return self.matrix.conj() @ self.matrix.T * self.grid.spacing

    def temporal_modes(self) -> list[TemporalFunction]:
        tg = self.grid.time_grid()
        vals = spectral_to_time(self.matrix, self.grid, tg)
        return [TemporalFunction(tg, v) for v in vals]


@dataclass(frozen=True)
class ModeAmplitudeVector:
    basis: ModeBasis
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex).reshape(-1)
        if c.shape[0] != len(self.basis):
            raise ValueError(
                f"{c.shape[0]} coefficients for a basis of {len(self.basis)} modes"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)


def hermite_functions(x: np.ndarray, count: int) -> np.ndarray:
    """Orthonormal Hermite functions ``h_0..h_{count-1}`` at ``x`` (unit width).

    Uses the three-term recurrence on already-normalized functions, which stays
    finite for large orders where the raw polynomials overflow.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((count, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-(x**2) / 2)
    if count > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, count - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def hermite_gaussian_basis(
    grid: FrequencyGrid, center: float, bandwidth: float, count: int
) -> ModeBasis:
    r"""Hermite-Gaussian spectral modes :math:`H_j((\omega-\omega_c)/\sigma)\,e^{-(\omega-\omega_c)^2/2\sigma^2}`.

    Args:
        grid: frequency lattice to sample on
        center: mode center frequency
        bandwidth: Gaussian width parameter sigma of the amplitude (HG0 is
            ``exp(-x**2 / (2 sigma**2))``)
        count: number of modes J

    Raises:
        BasisFitError: if the highest mode leaks more than 1e-6 of its energy
            outside the grid, or the sampled set is not orthonormal to 1e-8.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    # energy of the highest mode outside the sampled window, on a dense reference grid
    lo, hi = grid.omega[0] - grid.spacing / 2, grid.omega[-1] + grid.spacing / 2
    reach = abs(center - lo) + abs(hi - center) + 10 * bandwidth * np.sqrt(2 * count + 1)
    ref = np.linspace(center - reach, center + reach, 20001)
    h = hermite_functions((ref - center) / bandwidth, count)[-1]
    w = h**2
    outside = w[(ref < lo) | (ref > hi)].sum() / w.sum()
    if outside > OUTSIDE_ENERGY_TOL:
        raise BasisFitError(
            f"HG{count - 1} has {outside:.2e} of its energy outside the grid"
        )
    modes = hermite_functions((grid.omega - center) / bandwidth, count)
    norms = np.sqrt(np.sum(modes**2, axis=1) * grid.spacing)
    modes = modes / norms[:, None]
    try:
        return ModeBasis(grid, modes, tuple(f"HG{j}" for j in range(count)))
    except BasisFitError as exc:
        raise BasisFitError(f"grid under-resolves HG basis: {exc}") from None


def project(field_: SpectralFunction, basis: ModeBasis) -> ModeAmplitudeVector:
    """Coefficients ``<f_j, field>`` of ``field_`` over ``basis``."""
    if field_.grid != basis.grid:
        raise GridMismatchError("field and basis live on different grids")
    coeffs = basis.matrix.conj() @ field_.values * basis.grid.spacing
    return ModeAmplitudeVector(basis, coeffs)


def synthesize(amps: ModeAmplitudeVector) -> SpectralFunction:
    """Field ``sum_j a_j f_j``."""
    return SpectralFunction(amps.basis.grid, amps.coefficients @ amps.basis.matrix)


def overlap_matrix(basis: ModeBasis, weighted: bool = False) -> np.ndarray:
    """Gram matrix of ``basis``; with ``weighted`` the sqrt(omega) field weight is applied."""
    if not weighted:
        return basis.gram()
    w = basis.grid.omega / basis.grid.center
    return (basis.matrix.conj() * w) @ basis.matrix.T * basis.grid.spacing


def export_basis_csv(basis: ModeBasis, path) -> None:
    """Write ``omega, Re f_0, Im f_0, Re f_1, ...`` columns."""
    header = ["omega"]
    for lab in basis.labels:
        header += [f"re_{lab}", f"im_{lab}"]
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, om in enumerate(basis.grid.omega):
            row = [format(om, ".17g")]
            for m in basis.matrix[:, i]:
                row += [format(m.real, ".17g"), format(m.imag, ".17g")]
            w.writerow(row)


def import_basis_csv(path) -> ModeBasis:
    """Read a basis written by :func:`export_basis_csv`."""
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], np.array(rows[1:], dtype=float)
    omega = data[:, 0]
    n = omega.size
    grid = FrequencyGrid(
        center=float((omega[0] + omega[-1]) / 2), span=float(omega[-1] - omega[0]), n_points=n
    )
    if not np.allclose(grid.omega, omega, rtol=1e-12, atol=0):
        raise GridMismatchError("CSV frequencies are not a uniform grid")
    modes = data[:, 1::2] + 1j * data[:, 2::2]
    labels = tuple(h[3:] for h in header[1::2])
    return ModeBasis(grid, modes.T, labels)
