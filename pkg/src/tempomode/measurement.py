r"""Temporal-mode-aware detection models.

Filters act on temporal mode functions sampled on a :class:`TimeGrid`; a filter
is stored as the discrete operator ``M`` with ``out = M @ in`` so that the
continuum kernel is ``M / dt``.  The detector's mean output for occupations
``N_ij = <A_i^dag A_j>`` is

.. math::

    \bar S = \sum_{ij} N_{ij} \int dt\, r(t)\, \tilde u_i^*(t) \tilde u_j(t),

with ``u~ = G u`` the filtered modes and ``r`` the response window.

Quadratures use ``x = (a + a^dag) / sqrt(2)``, so vacuum variance is 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import rng_stream
from .errors import GridMismatchError, StateError
from .fock import fock_beamsplitter_transform, number_moments
from .grid import SpectralFunction, TemporalFunction, TimeGrid
from .modes import ModeBasis

STATE_TOL = 1e-10


# --- filters and detectors -------------------------------------------------


@dataclass(frozen=True)
class FilterKernel:
    """Linear filter on a time grid; ``matrix`` maps input samples to output samples."""

    kind: str
    grid: TimeGrid
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in ("shutter", "stationary-spectral", "mode-selective", "general"):
            raise ValueError(f"unknown filter kind {self.kind!r}")
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.grid.n_points, self.grid.n_points):
            raise GridMismatchError("filter matrix does not match the time grid")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def shutter(cls, grid: TimeGrid, gate) -> "FilterKernel":
        """Fast shutter with transmission ``gate(t)``; ``|gate| <= 1`` required."""
        g = np.asarray(gate(grid.t) if callable(gate) else gate, dtype=complex)
        if np.any(np.abs(g) > 1 + 1e-12):
            raise ValueError("shutter gate must satisfy |g| <= 1")
        return cls("shutter", grid, np.diag(g))

    @classmethod
    def stationary(cls, grid: TimeGrid, response) -> "FilterKernel":
        """Time-invariant filter with impulse response ``response(t - s)``."""
        t = grid.t
        lag = t[:, None] - t[None, :]
        return cls("stationary-spectral", grid, response(lag) * grid.dt)

    @classmethod
    def mode_selective(cls, target: TemporalFunction, output: TemporalFunction) -> "FilterKernel":
        """Rank-1 filter passing only ``target``, re-emitted in shape ``output``."""
        if target.grid != output.grid:
            raise GridMismatchError("target and output modes need the same grid")
        grid = target.grid
        u = target.values / target.norm()
        psi = output.values / output.norm()
        return cls("mode-selective", grid, np.outer(psi, u.conj()) * grid.dt)

    @classmethod
    def general(cls, grid: TimeGrid, kernel: np.ndarray) -> "FilterKernel":
        """Arbitrary continuum kernel ``G(tau, s)`` sampled on the grid."""
        return cls("general", grid, np.asarray(kernel) * grid.dt)

    @classmethod
    def identity(cls, grid: TimeGrid) -> "FilterKernel":
        return cls.shutter(grid, np.ones(grid.n_points))

    @property
    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix))


@dataclass(frozen=True)
class FilterResult:
    modes: list
    transmissions: np.ndarray


def apply_filter(kernel: FilterKernel, modes) -> FilterResult:
    """Filter each signal mode and report its energy transmission."""
    out, trans = [], []
    for m in modes:
        if m.grid != kernel.grid:
            raise GridMismatchError("mode and filter live on different time grids")
        y = TemporalFunction(kernel.grid, kernel.matrix @ m.values)
        out.append(y)
        trans.append(y.norm() ** 2 / m.norm() ** 2 if m.norm() > 0 else 0.0)
    return FilterResult(out, np.array(trans))


@dataclass(frozen=True)
class DetectorResponse:
    """Detector response ``R(t, t')`` read out at one time, or the slow-detector limit.

    A slow detector integrates the intensity with unit weight over the whole
    pulse.  Otherwise ``kernel[i, j] = R(t_i, t_j)`` is read out at
    ``readout_index``; contributions from ``t' > t`` are dropped (causality).
    """

    slow: bool = True
    kernel: np.ndarray | None = field(default=None, repr=False)
    readout_index: int = -1

    def window(self, grid: TimeGrid) -> np.ndarray:
        if self.slow or self.kernel is None:
            return np.ones(grid.n_points)
        k = np.asarray(self.kernel, dtype=float)
        if k.shape != (grid.n_points, grid.n_points):
            raise GridMismatchError("response kernel does not match the time grid")
        i = self.readout_index % grid.n_points
        r = k[i].copy()
        r[i + 1 :] = 0.0
        return r

    @classmethod
    def flat_window(cls, grid: TimeGrid, t_start: float, t_stop: float) -> "DetectorResponse":
        """Stationary boxcar: unit response for ``t_start <= t' <= t_stop``."""
        t = grid.t
        row = ((t >= t_start) & (t <= t_stop)).astype(float)
        return cls(False, np.tile(row, (grid.n_points, 1)), -1)


def mean_detector_output(occupations, modes, kernel: FilterKernel | None = None, response=None) -> float:
    """Mean detector signal for occupation matrix ``N_ij = <A_i^dag A_j>``.

    Args:
        occupations: Hermitian ``(J, J)`` matrix.
        modes: ``J`` temporal mode functions on a common grid.
        kernel: filter in front of the detector (default: none).
        response: :class:`DetectorResponse` (default: slow).
    """
    n = np.atleast_2d(np.asarray(occupations, dtype=complex))
    if n.shape != (len(modes), len(modes)):
        raise ValueError("occupation matrix must be J x J for J modes")
    if np.max(np.abs(n - n.conj().T), initial=0.0) > STATE_TOL * max(1.0, np.abs(n).max(initial=0.0)):
        raise StateError("occupation matrix is not Hermitian")
    if not modes:
        return 0.0
    grid = modes[0].grid
    kernel = kernel or FilterKernel.identity(grid)
    response = response or DetectorResponse()
    u = np.array([m.values for m in apply_filter(kernel, modes).modes])
    r = response.window(grid)
    m = (u.conj() * r) @ u.T * grid.dt  # m_ij = int r u_i^* u_j
    return float(np.real(np.sum(n * m)))


# --- states ----------------------------------------------------------------


def _unit_mode(f: SpectralFunction) -> np.ndarray:
    """Quadrature-weighted, unit-norm samples of a spectral mode."""
    v = f.values * np.sqrt(f.grid.spacing)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise StateError("mode function is identically zero")
    return v / nrm


@dataclass(frozen=True)
class VacuumState:
    pass


@dataclass(frozen=True)
class CoherentState:
    mode: SpectralFunction
    alpha: complex


@dataclass(frozen=True)
class SqueezedVacuumState:
    """``S(xi)|0>`` in ``mode`` with ``xi = r exp(i phi)``; ``x`` at angle ``phi/2`` is squeezed."""

    mode: SpectralFunction
    r: float
    phi: float = 0.0


@dataclass(frozen=True)
class SinglePhotonMixedState:
    """One photon spread over basis modes with density matrix ``rho``.

    ``rho[m, n]`` multiplies ``|1_m><1_n|``.
    """

    basis: ModeBasis
    rho: np.ndarray

    def __post_init__(self):
        r = np.array(self.rho, dtype=complex)
        if r.ndim == 1:
            r = np.diag(r)
        if r.shape != (len(self.basis), len(self.basis)):
            raise StateError("density matrix must be J x J for a J-mode basis")
        if np.max(np.abs(r - r.conj().T)) > STATE_TOL:
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(r).real - 1) > STATE_TOL:
            raise StateError(f"density matrix trace {np.trace(r).real!r} is not 1")
        if np.linalg.eigvalsh(r).min() < -STATE_TOL:
            raise StateError("density matrix is not positive semidefinite")
        r.flags.writeable = False
        object.__setattr__(self, "rho", r)

    @classmethod
    def pure(cls, basis: ModeBasis, coeffs) -> "SinglePhotonMixedState":
        c = np.asarray(coeffs, dtype=complex)
        c = c / np.linalg.norm(c)
        return cls(basis, np.outer(c, c.conj()))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def mode_vectors(self) -> np.ndarray:
        """Basis modes as quadrature-weighted columns."""
        return self.basis.matrix.T * np.sqrt(self.basis.grid.spacing)


@dataclass(frozen=True)
class PhotonNumberState:
    """Single-mode state diagonal in photon number, ``probabilities[n] = P(n)``."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).reshape(-1)
        if np.any(p < -STATE_TOL) or abs(p.sum() - 1) > STATE_TOL:
            raise StateError("photon-number probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", np.clip(p, 0.0, None))

    @classmethod
    def fock(cls, n: int) -> "PhotonNumberState":
        p = np.zeros(n + 1)
        p[n] = 1.0
        return cls(p)


@dataclass(frozen=True)
class LocalOscillator:
    """Strong classical pulse; its temporal mode selects what is measured and
    ``arg(amplitude)`` sets the quadrature angle."""

    mode: SpectralFunction
    amplitude: complex = 1.0

    @property
    def phase(self) -> float:
        return float(np.angle(self.amplitude))


# --- balanced homodyne -----------------------------------------------------


@dataclass(frozen=True)
class BHDStatistics:
    eta: float
    mean: float
    variance: float
    distribution: str  # "gaussian" or "single-photon-mixture"


def _overlap(lo: LocalOscillator, f: SpectralFunction) -> complex:
    if lo.mode.grid != f.grid:
        raise GridMismatchError("local oscillator and signal live on different grids")
    return complex(np.vdot(_unit_mode(lo.mode), _unit_mode(f)))


def bhd_statistics(state, lo: LocalOscillator) -> BHDStatistics:
    """Mode-matching efficiency and moments of the quadrature ``x_theta`` in the LO mode.

    ``eta`` is the probability weight of the signal found in the LO mode; the
    unmatched part contributes vacuum noise.
    """
    theta = lo.phase
    if isinstance(state, VacuumState):
        return BHDStatistics(0.0, 0.0, 0.5, "gaussian")
    if isinstance(state, CoherentState):
        c = _overlap(lo, state.mode)
        beta = c * state.alpha
        mean = np.sqrt(2) * np.real(beta * np.exp(-1j * theta))
        return BHDStatistics(abs(c) ** 2, float(mean), 0.5, "gaussian")
    if isinstance(state, SqueezedVacuumState):
        c = _overlap(lo, state.mode)
        eta = abs(c) ** 2
        angle = theta - np.angle(c)
        r = state.r
        var_mode = 0.5 * (np.cosh(2 * r) - np.sinh(2 * r) * np.cos(state.phi - 2 * angle))
        return BHDStatistics(eta, 0.0, float(eta * var_mode + (1 - eta) * 0.5), "gaussian")
    if isinstance(state, SinglePhotonMixedState):
        if lo.mode.grid != state.basis.grid:
            raise GridMismatchError("local oscillator and signal live on different grids")
        c = state.mode_vectors().T @ _unit_mode(lo.mode).conj()  # c_m = <f_m|l>
        eta = float(np.real(c.conj() @ state.rho @ c))
        return BHDStatistics(eta, 0.0, 0.5 + eta, "single-photon-mixture")
    raise StateError(f"homodyne statistics not available for {type(state).__name__}")


def sample_bhd(state, lo: LocalOscillator, count: int, seed: int) -> np.ndarray:
    """Seeded quadrature samples drawn from the analytic distribution."""
    stats = bhd_statistics(state, lo)
    rng = rng_stream(seed, 0)
    if stats.distribution == "gaussian":
        return rng.normal(stats.mean, np.sqrt(stats.variance), size=count)
    # single photon with probability eta: density (2 x^2 / sqrt(pi)) exp(-x^2)
    photon = rng.random(count) < stats.eta
    x = rng.normal(0.0, np.sqrt(0.5), size=count)
    k = int(photon.sum())
    mag = np.sqrt(rng.gamma(1.5, 1.0, size=k))
    sign = np.where(rng.random(k) < 0.5, -1.0, 1.0)
    x[photon] = sign * mag
    return x


# --- intensity correlations ------------------------------------------------


def _split_50_50(p_n: np.ndarray):
    """Yield ``(P(n), output state)`` for ``|n, 0>`` through a 50:50 splitter."""
    s = np.sqrt(0.5)
    for n, p in enumerate(p_n):
        if p > 0:
            yield p, fock_beamsplitter_transform(s, s, (n, 0), n)


def hbt_g2(state) -> float:
    """Normalized coincidence ``<n_c n_d> / (<n_c><n_d>)`` behind a 50:50 splitter.

    Returns 0 when no coincidences are possible (vacuum, any single-photon state).
    """
    if isinstance(state, (VacuumState, SinglePhotonMixedState)):
        return 0.0
    if not isinstance(state, PhotonNumberState):
        raise StateError(f"HBT not available for {type(state).__name__}")
    m1 = m2 = m12 = 0.0
    for p, out in _split_50_50(state.probabilities):
        mom = number_moments(out)
        m1 += p * mom["n1"]
        m2 += p * mom["n2"]
        m12 += p * mom["n1n2"]
    if m12 == 0.0:
        return 0.0
    return float(m12 / (m1 * m2))


def click_statistics(state) -> dict:
    """Click-detector probabilities behind a 50:50 splitter (``P(click) = 1 - P(0)``)."""
    if isinstance(state, VacuumState):
        return {"p_click_c": 0.0, "p_click_d": 0.0, "p_coincidence": 0.0}
    if isinstance(state, SinglePhotonMixedState):
        return {"p_click_c": 0.5, "p_click_d": 0.5, "p_coincidence": 0.0}
    if not isinstance(state, PhotonNumberState):
        raise StateError(f"click statistics not available for {type(state).__name__}")
    p0c = p0d = pboth = 0.0
    for p, out in _split_50_50(state.probabilities):
        for (nc, nd), amp in out.items():
            q = p * abs(amp) ** 2
            p0c += q if nc == 0 else 0.0
            p0d += q if nd == 0 else 0.0
            pboth += q if (nc > 0 and nd > 0) else 0.0
    return {"p_click_c": float(1 - p0c), "p_click_d": float(1 - p0d), "p_coincidence": float(pboth)}


def _common_frame(a: SinglePhotonMixedState, b: SinglePhotonMixedState):
    if a.basis.grid != b.basis.grid:
        raise GridMismatchError("HOM inputs must share a frequency grid")
    ma, mb = a.mode_vectors(), b.mode_vectors()
    u, s, _ = np.linalg.svd(np.hstack([ma, mb]), full_matrices=False)
    q = u[:, s > 1e-10 * s[0]]
    ca, cb = q.conj().T @ ma, q.conj().T @ mb
    return ca @ a.rho @ ca.conj().T, cb @ b.rho @ cb.conj().T


def hom_coincidence(a: SinglePhotonMixedState, b: SinglePhotonMixedState) -> float:
    """Coincidence probability ``1 - Tr(rho_A rho_B)`` of two photons on a 50:50 splitter.

    Both density matrices are re-expressed in an orthonormal frame spanning
    both bases, so the inputs may use different mode sets on the same grid.
    """
    for s in (a, b):
        if abs(np.trace(s.rho).real - 1) > STATE_TOL:
            raise StateError("HOM inputs must have unit trace")
    ra, rb = _common_frame(a, b)
    return float(1.0 - np.real(np.trace(ra @ rb)))


def measurement_report(setup: str, inputs: dict, **results) -> dict:
    """JSON-ready measurement summary: ``{setup, inputs, eta, moments, g2, hom}``."""
    keys = ("eta", "moments", "g2", "hom")
    return {"setup": setup, "inputs": inputs, **{k: results.get(k) for k in keys}}
