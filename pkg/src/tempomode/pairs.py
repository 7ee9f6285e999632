r"""Photon-pair sources: joint spectral amplitudes, Schmidt modes, two-mode squeezing.

The joint spectral amplitude (JSA) model is the usual product of a pump
envelope evaluated at the sum frequency and a phase-matching function of the
two detunings,

.. math::

    \Psi(\omega, \tilde\omega) \propto \alpha(\omega + \tilde\omega)\,
    \Phi\!\left(\tfrac{L}{2}(k_1 x + k_2 y)\right),
    \qquad x = \omega - \omega_1,\ y = \tilde\omega - \omega_2,

normalized so that :math:`\sum |\Psi|^2 \Delta\omega_1 \Delta\omega_2 = 1`.
The Schmidt decomposition :math:`\Psi = \sum_j \sqrt{\lambda_j}\,\psi_j(\omega)\phi_j(\tilde\omega)`
is the SVD of the quadrature-weighted matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ClippedSupportError, GridMismatchError, TruncationError
from .grid import FrequencyGrid, TemporalFunction, spectral_to_time
from .io import write_csv, write_json

# exp(-GAUSSIAN_PM_COEFF * a**2) matches the central lobe of sinc(a)
GAUSSIAN_PM_COEFF = 0.193


@dataclass(frozen=True)
class PumpEnvelope:
    """Gaussian pump spectrum ``exp(-(1 + i*chirp) (W - center)**2 / (2 bandwidth**2))``."""

    center: float
    bandwidth: float
    chirp: float = 0.0

    def __call__(self, sum_freq):
        d = np.asarray(sum_freq) - self.center
        return np.exp(-(1 + 1j * self.chirp) * d**2 / (2 * self.bandwidth**2))


@dataclass(frozen=True)
class PhaseMatchingFunction:
    """Phase matching in the mismatch ``(length/2) (k1 x + k2 y)``.

    ``k1``, ``k2`` are inverse-group-velocity mismatches relative to the pump
    (s/m) and ``length`` the crystal length (m), so the argument is
    dimensionless for detunings in rad/s.
    """

    form: str
    k1: float
    k2: float
    length: float

    def __post_init__(self):
        if self.form not in ("sinc", "gaussian"):
            raise ValueError(f"unknown phase-matching form {self.form!r}")

    def __call__(self, x, y):
        a = 0.5 * self.length * (self.k1 * np.asarray(x) + self.k2 * np.asarray(y))
        if self.form == "sinc":
            return np.sinc(a / np.pi)
        return np.exp(-GAUSSIAN_PM_COEFF * a**2)


@dataclass(frozen=True)
class JointSpectralAmplitude:
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.grid1.n_points, self.grid2.n_points):
            raise GridMismatchError("JSA matrix shape does not match its grids")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def weight(self) -> float:
        return self.grid1.spacing * self.grid2.spacing

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.matrix) ** 2) * self.weight)

    def boundary_fraction(self, width: int = 2) -> float:
        """Fraction of |Psi|^2 in the outermost ``width`` rows and columns."""
        p = np.abs(self.matrix) ** 2
        inner = p[width:-width, width:-width].sum()
        return float(max(0.0, 1 - inner / p.sum()))

    def transpose(self) -> "JointSpectralAmplitude":
        return JointSpectralAmplitude(self.grid2, self.grid1, self.matrix.T)


def build_jsa(
    pump: PumpEnvelope,
    pm: PhaseMatchingFunction,
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    boundary_tol: float = 1e-6,
) -> JointSpectralAmplitude:
    """Sample and normalize the pump x phase-matching model.

    Raises:
        ClippedSupportError: if more than ``boundary_tol`` of the joint
            intensity sits in the outer two rows/columns of the grid.
    """
    w1, w2 = np.meshgrid(grid1.omega, grid2.omega, indexing="ij")
    psi = pump(w1 + w2) * pm(w1 - grid1.center, w2 - grid2.center)
    norm2 = np.sum(np.abs(psi) ** 2) * grid1.spacing * grid2.spacing
    if not norm2 > 0:
        raise ClippedSupportError("JSA vanishes on the grid")
    jsa = JointSpectralAmplitude(grid1, grid2, psi / np.sqrt(norm2))
    frac = jsa.boundary_fraction()
    if frac > boundary_tol:
        raise ClippedSupportError(
            f"{frac:.2e} of the joint intensity lies on the grid boundary (limit {boundary_tol:g})"
        )
    return jsa


@dataclass(frozen=True)
class SchmidtDecompositionResult:
    grid1: FrequencyGrid
    grid2: FrequencyGrid
    lambdas: np.ndarray
    psi: np.ndarray = field(repr=False)  # (K, n1) signal modes
    phi: np.ndarray = field(repr=False)  # (K, n2) idler modes

    def reconstruct(self) -> np.ndarray:
        return (self.psi.T * np.sqrt(self.lambdas)) @ self.phi

    def truncated(self, k: int) -> "SchmidtDecompositionResult":
        return SchmidtDecompositionResult(
            self.grid1, self.grid2, self.lambdas[:k], self.psi[:k], self.phi[:k]
        )


def schmidt_decompose(jsa: JointSpectralAmplitude) -> SchmidtDecompositionResult:
    """SVD of ``sqrt(dw1) Psi sqrt(dw2)``; modes orthonormal under grid quadrature.

    Phase convention: the largest-magnitude entry of each ``psi_j`` is real
    positive, with the compensating phase moved onto ``phi_j``.
    """
    d1, d2 = jsa.grid1.spacing, jsa.grid2.spacing
    u, s, vh = np.linalg.svd(jsa.matrix * np.sqrt(d1 * d2), full_matrices=False)
    psi = u.T / np.sqrt(d1)
    phi = vh / np.sqrt(d2)
    idx = np.argmax(np.abs(psi), axis=1)
    ph = psi[np.arange(psi.shape[0]), idx]
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    psi = psi * np.conj(ph)[:, None]
    phi = phi * ph[:, None]
    return SchmidtDecompositionResult(jsa.grid1, jsa.grid2, s**2, psi, phi)


def schmidt_number(result) -> float:
    """``K = 1 / sum(lambda**2)`` for a result or a bare array of weights."""
    lam = result.lambdas if isinstance(result, SchmidtDecompositionResult) else np.asarray(result)
    return float(1.0 / np.sum(np.asarray(lam, dtype=float) ** 2))


def gaussian_schmidt_spectrum(width_ratio: float, count: int) -> np.ndarray:
    r"""Closed-form Schmidt weights of a two-dimensional Gaussian amplitude.

    For an amplitude with Gaussian widths :math:`s_+`, :math:`s_-` along the
    sum and difference diagonals (equal scaling on both axes), Mehler's
    formula gives :math:`\lambda_n = (1-\mu^2)\mu^{2n}` with
    :math:`\mu = |r-1|/(r+1)`, :math:`r = s_+/s_-`.
    """
    mu = abs(width_ratio - 1) / (width_ratio + 1)
    n = np.arange(count)
    return (1 - mu**2) * mu ** (2 * n)


def time_domain_schmidt_modes(
    result: SchmidtDecompositionResult, count: int | None = None
) -> tuple[list[TemporalFunction], list[TemporalFunction]]:
    """Temporal Schmidt modes ``u_j(t)``, ``v_j(t)`` on the dual time grids."""
    k = len(result.lambdas) if count is None else min(count, len(result.lambdas))
    tg1, tg2 = result.grid1.time_grid(), result.grid2.time_grid()
    u = spectral_to_time(result.psi[:k], result.grid1, tg1)
    v = spectral_to_time(result.phi[:k], result.grid2, tg2)
    return [TemporalFunction(tg1, x) for x in u], [TemporalFunction(tg2, x) for x in v]


@dataclass(frozen=True)
class PairState:
    """Low-gain pair state ``sqrt(1-eps^2)|vac> + eps sum_j sqrt(lambda_j) A_j^+ B_j^+ |vac>``."""

    epsilon: float
    schmidt: SchmidtDecompositionResult

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must lie in [0, 1)")

    def pair_amplitudes(self) -> np.ndarray:
        return self.epsilon * np.sqrt(self.schmidt.lambdas)


@dataclass(frozen=True)
class TwoModeSqueezeParams:
    mu: float
    nu: float

    def __post_init__(self):
        if self.mu < 0 or self.nu < 0:
            raise ValueError("mu and nu must be non-negative")
        if abs(self.mu**2 - self.nu**2 - 1) > 1e-10:
            raise ValueError(f"mu^2 - nu^2 = {self.mu**2 - self.nu**2!r}, expected 1")


def two_mode_squeeze_params(r: float) -> TwoModeSqueezeParams:
    if r < 0:
        raise ValueError("squeezing parameter must be non-negative")
    return TwoModeSqueezeParams(float(np.cosh(r)), float(np.sinh(r)))


def two_mode_squeeze_matrix(params: TwoModeSqueezeParams) -> np.ndarray:
    """Real 2x2 matrix acting on ``(c, d^dagger)``: ``a = mu c + nu d^dagger``."""
    return np.array([[params.mu, params.nu], [params.nu, params.mu]])


def vacuum_pair_amplitudes(epsilon: float) -> np.ndarray:
    """Leading-order amplitudes on ``(|0,0>, |1,1>)``."""
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    return np.array([np.sqrt(1 - epsilon**2), epsilon])


@dataclass(frozen=True)
class TwinBeamStatistics:
    joint: np.ndarray = field(repr=False)  # P(n, m)
    mean_photons: float
    difference_variance: float

    @property
    def marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)


def twin_beam_statistics(params: TwoModeSqueezeParams, n_max: int, tail_tol: float = 1e-10) -> TwinBeamStatistics:
    """Joint photon-number distribution of two-mode squeezed vacuum.

    ``P(n, m) = delta_nm (1 - x) x**n`` with ``x = nu**2 / mu**2``.

    Raises:
        TruncationError: if the probability beyond ``n_max`` exceeds ``tail_tol``.
    """
    x = params.nu**2 / params.mu**2
    tail = x ** (n_max + 1)
    if tail > tail_tol:
        raise TruncationError(f"n_max={n_max} leaves tail probability {tail:.2e}")
    n = np.arange(n_max + 1)
    p = (1 - x) * x**n
    joint = np.diag(p)
    mean = float(np.sum(n * p))
    nn, mm = np.meshgrid(n, n, indexing="ij")
    diff = nn - mm
    d1 = float(np.sum(joint * diff))
    var = float(np.sum(joint * diff**2)) - d1**2
    return TwinBeamStatistics(joint, mean, var)


def export_jsa_csv(jsa: JointSpectralAmplitude, path) -> None:
    """Long-format CSV: ``omega1, omega2, re, im``."""
    w1, w2 = np.meshgrid(jsa.grid1.omega, jsa.grid2.omega, indexing="ij")
    m = jsa.matrix
    write_csv(path, ["omega1", "omega2", "re", "im"], [w1.ravel(), w2.ravel(), m.real.ravel(), m.imag.ravel()])


def import_jsa_csv(path) -> JointSpectralAmplitude:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    o1 = np.unique(data[:, 0])
    o2 = np.unique(data[:, 1])

    def grid(o):
        return FrequencyGrid(float((o[0] + o[-1]) / 2), float(o[-1] - o[0]), o.size)

    m = (data[:, 2] + 1j * data[:, 3]).reshape(o1.size, o2.size)
    return JointSpectralAmplitude(grid(o1), grid(o2), m)


def export_schmidt(result: SchmidtDecompositionResult, directory, count: int = 10, stem: str = "schmidt") -> dict:
    """Write ``<stem>.json`` (weights + file references) and ``<stem>_modes.csv``."""
    directory = Path(directory)
    k = min(count, len(result.lambdas))
    modes_name = f"{stem}_modes.csv"
    header = ["omega1"] + list(
        itertools.chain.from_iterable((f"re_psi{j}", f"im_psi{j}") for j in range(k))
    ) + ["omega2"] + list(
        itertools.chain.from_iterable((f"re_phi{j}", f"im_phi{j}") for j in range(k))
    )
    cols = [result.grid1.omega]
    for j in range(k):
        cols += [result.psi[j].real, result.psi[j].imag]
    cols.append(result.grid2.omega)
    for j in range(k):
        cols += [result.phi[j].real, result.phi[j].imag]
    if result.grid1.n_points != result.grid2.n_points:
        raise GridMismatchError("mode table export needs equal grid sizes")
    write_csv(directory / modes_name, header, cols)
    meta = {
        "lambdas": result.lambdas,
        "schmidt_number": schmidt_number(result),
        "modes_file": modes_name,
        "exported_modes": k,
    }
    write_json(directory / f"{stem}.json", meta)
    return meta


def gaussian_jsa_spectrum(pump: PumpEnvelope, pm: PhaseMatchingFunction, count: int) -> np.ndarray:
    r"""Closed-form Schmidt weights of an unchirped Gaussian pump with Gaussian phase matching.

    The amplitude is :math:`\exp(-(a x^2 + b y^2)/2 - c x y)`.  Rescaling both
    axes to unit curvature leaves the Mehler kernel with
    :math:`\kappa = c/\sqrt{ab} = 2\mu/(1+\mu^2)`, and
    :math:`\lambda_n = (1-\mu^2)\mu^{2n}`.
    """
    if pm.form != "gaussian" or pump.chirp != 0:
        raise ValueError("closed form needs an unchirped pump and Gaussian phase matching")
    g = 2 * GAUSSIAN_PM_COEFF * (pm.length / 2) ** 2
    s = 1 / pump.bandwidth**2
    a, b, c = s + g * pm.k1**2, s + g * pm.k2**2, s + g * pm.k1 * pm.k2
    kappa = abs(c) / np.sqrt(a * b)
    mu = kappa / (1 + np.sqrt(1 - kappa**2)) if kappa > 0 else 0.0
    n = np.arange(count)
    return (1 - mu**2) * mu ** (2 * n)
