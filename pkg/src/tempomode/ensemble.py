r"""Gaussian multi-mode pulse ensembles and Karhunen-Loeve analysis.

Each realization is :math:`E(t) = \sum_j a_j \phi_j(t)` with independent
circular complex Gaussian amplitudes.  The two-time correlation is
:math:`C(t,t') = \langle E^*(t) E(t') \rangle` and its eigenfunctions under
time quadrature are the Karhunen-Loeve modes:

.. math::

    \int C(t,t')\,\phi_i^*(t')\,dt' = \lambda_i\, \phi_i^*(t),

so ``C = sum_i lambda_i conj(phi_i(t)) phi_i(t')``.

Random numbers come from counter-based Philox streams keyed by
``(seed, block)``, so results do not depend on how many workers produce them.
"""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import EnsembleError, GridMismatchError
from .grid import TemporalFunction, TimeGrid
from .modes import ModeBasis

BLOCK_SIZE = 4096
MAGIC = b"TMQE"
BINARY_VERSION = 1


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator for stream ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("TEMPOMODE_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    n = cap if requested is None else min(requested, cap)
    return max(1, n)


@dataclass(frozen=True)
class GaussianModeSpec:
    """Mode basis plus the mean energy ``<|a_j|^2>`` carried by each mode."""

    basis: ModeBasis
    variances: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float).reshape(-1)
        if v.size != len(self.basis):
            raise ValueError("one variance per basis mode required")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("variances must be finite and non-negative")
        object.__setattr__(self, "variances", v)

    def temporal_matrix(self) -> tuple[TimeGrid, np.ndarray]:
        tms = self.basis.temporal_modes()
        return tms[0].grid, np.array([t.values for t in tms])


@dataclass(frozen=True)
class PulseEnsemble:
    grid: TimeGrid
    realizations: np.ndarray = field(repr=False)  # (n_real, n_t)
    seed: int | None = None
    amplitudes: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        r = np.asarray(self.realizations, dtype=complex)
        if r.ndim != 2 or r.shape[1] != self.grid.n_points:
            raise GridMismatchError("realizations must have shape (count, grid.n_points)")
        object.__setattr__(self, "realizations", r)

    def __len__(self):
        return self.realizations.shape[0]

    def __getitem__(self, i) -> TemporalFunction:
        return TemporalFunction(self.grid, self.realizations[i])


@dataclass(frozen=True)
class CorrelationFunction:
    grid: TimeGrid
    matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class KLDecomposition:
    grid: TimeGrid
    eigenvalues: np.ndarray
    modes: np.ndarray = field(repr=False)  # (K, n_t), orthonormal under time quadrature

    def mode(self, i) -> TemporalFunction:
        return TemporalFunction(self.grid, self.modes[i])

    def reconstruct(self) -> np.ndarray:
        return (self.modes.conj().T * self.eigenvalues) @ self.modes


def synthesize_ensemble(
    spec: GaussianModeSpec, count: int, seed: int, workers: int | None = None
) -> PulseEnsemble:
    """Draw ``count`` realizations; bit-identical for a fixed ``seed`` and any ``workers``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if len(spec.basis) == 0:
        raise ValueError("empty mode spec")
    tgrid, phi = spec.temporal_matrix()
    sd = np.sqrt(spec.variances / 2)
    n_modes = sd.size
    starts = list(range(0, count, BLOCK_SIZE))

    def block(b):
        n = min(BLOCK_SIZE, count - starts[b])
        g = rng_stream(seed, b)
        z = g.standard_normal((n, n_modes, 2))
        return (z[..., 0] + 1j * z[..., 1]) * sd

    nw = worker_count(workers)
    if nw > 1 and len(starts) > 1:
        with ThreadPoolExecutor(nw) as ex:
            parts = list(ex.map(block, range(len(starts))))
    else:
        parts = [block(b) for b in range(len(starts))]
    amps = np.concatenate(parts, axis=0)
    return PulseEnsemble(tgrid, amps @ phi, seed=seed, amplitudes=amps)


def estimate_correlation(ensemble: PulseEnsemble) -> CorrelationFunction:
    """Sample-mean estimate of ``<E*(t) E(t')>``."""
    if len(ensemble) < 2:
        raise EnsembleError("need at least 2 realizations")
    e = ensemble.realizations
    c = e.conj().T @ e / e.shape[0]
    return CorrelationFunction(ensemble.grid, (c + c.conj().T) / 2)


def _fix_phase(vecs):
    # largest-magnitude entry of each row made real positive
    idx = np.argmax(np.abs(vecs), axis=1)
    ph = vecs[np.arange(vecs.shape[0]), idx]
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return vecs * np.conj(ph)[:, None]


def kl_decompose(corr: CorrelationFunction, herm_tol: float = 1e-10) -> KLDecomposition:
    """Karhunen-Loeve modes and mean modal energies, sorted descending.

    Modes inside a degenerate eigenvalue block are whatever orthonormal basis
    the eigensolver returns; only their span is meaningful.
    """
    c = np.asarray(corr.matrix, dtype=complex)
    scale = max(np.max(np.abs(c)), np.finfo(float).tiny)
    if np.max(np.abs(c - c.conj().T)) > herm_tol * scale:
        raise EnsembleError("correlation matrix is not Hermitian")
    dt = corr.grid.dt
    w, v = np.linalg.eigh(dt * (c + c.conj().T) / 2)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    trace = max(np.sum(w), 0.0)
    if np.any(w < -1e-8 * max(trace, np.finfo(float).tiny)):
        raise EnsembleError("correlation matrix is not positive semidefinite")
    w = np.clip(w, 0.0, None)
    # eigenvectors of C are conj(phi)
    modes = _fix_phase(np.conj(v.T) / np.sqrt(dt))
    return KLDecomposition(corr.grid, w, modes)


def pulse_energy(p: TemporalFunction) -> float:
    return float(np.sum(np.abs(p.values) ** 2) * p.grid.dt)


def ensemble_energies(ensemble: PulseEnsemble) -> np.ndarray:
    return np.sum(np.abs(ensemble.realizations) ** 2, axis=1) * ensemble.grid.dt


@dataclass(frozen=True)
class EnergyStatistics:
    energies: np.ndarray = field(repr=False)
    mean: float
    ks_exponential: float
    p_above_mean: float
    hist_edges: np.ndarray = field(repr=False)
    hist_density: np.ndarray = field(repr=False)

    def ks_erlang(self, k: int) -> float:
        """Sup-norm CDF distance of mean-normalized energies to the Erlang-k law of unit mean."""
        return float(stats.kstest(self.energies / self.mean, stats.gamma(a=k, scale=1 / k).cdf).statistic)


def energy_statistics(ensemble: PulseEnsemble, bins: int = 60) -> EnergyStatistics:
    """Pulse-energy distribution and its distance from the exponential law.

    The KS statistic is computed on mean-normalized energies against the
    unit-mean exponential ``P(w) = exp(-w)``.
    """
    if len(ensemble) < 100:
        raise EnsembleError("energy statistics need at least 100 realizations")
    en = ensemble_energies(ensemble)
    mean = float(np.mean(en))
    if not mean > 0:
        raise EnsembleError("ensemble has zero mean energy")
    w = en / mean
    ks = float(stats.kstest(w, stats.expon.cdf).statistic)
    dens, edges = np.histogram(w, bins=bins, range=(0.0, max(6.0, float(w.max()))), density=True)
    return EnergyStatistics(
        energies=en,
        mean=mean,
        ks_exponential=ks,
        p_above_mean=float(np.mean(en > mean)),
        hist_edges=edges,
        hist_density=dens,
    )


@dataclass(frozen=True)
class PhaseStatistics:
    phases: np.ndarray = field(repr=False)
    counts: np.ndarray
    edges: np.ndarray = field(repr=False)
    chi2: float
    p_value: float


def _leading_amplitudes(ens: PulseEnsemble, min_fraction: float) -> np.ndarray:
    kl = kl_decompose(estimate_correlation(ens))
    total = np.sum(kl.eigenvalues)
    if total <= 0 or kl.eigenvalues[0] < min_fraction * total:
        raise EnsembleError("ensemble is multimode (leading KL eigenvalue below 90% of trace)")
    return ens.realizations @ np.conj(kl.modes[0]) * ens.grid.dt


def relative_phase_statistics(
    a: PulseEnsemble, b: PulseEnsemble, bins: int = 36, min_fraction: float = 0.9
) -> PhaseStatistics:
    """Histogram of ``arg A1 - arg A2`` over (-pi, pi] with a chi-square uniformity test."""
    if len(a) != len(b):
        raise EnsembleError("ensembles must have equal counts")
    if a.grid != b.grid:
        raise GridMismatchError("ensembles on different time grids")
    d = np.angle(_leading_amplitudes(a, min_fraction)) - np.angle(_leading_amplitudes(b, min_fraction))
    d = np.angle(np.exp(1j * d))
    d = np.where(d <= -np.pi, np.pi, d)
    counts, edges = np.histogram(d, bins=bins, range=(-np.pi, np.pi))
    res = stats.chisquare(counts)
    return PhaseStatistics(d, counts, edges, float(res.statistic), float(res.pvalue))


def export_ensemble_csv(ensemble: PulseEnsemble, path) -> None:
    """Columns: ``t, re_0, im_0, re_1, im_1, ...`` (one column pair per realization)."""
    e = ensemble.realizations
    cols = [ensemble.grid.t]
    for row in e:
        cols += [row.real, row.imag]
    header = "t," + ",".join(f"re_{i},im_{i}" for i in range(e.shape[0]))
    np.savetxt(Path(path), np.column_stack(cols), delimiter=",", header=header, comments="", fmt="%.17g")


def import_ensemble_csv(path) -> PulseEnsemble:
    data = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    dt = float(t[1] - t[0]) if t.size > 1 else 1.0
    grid = TimeGrid(t0=float(t[0]), dt=dt, n_points=t.size)
    real = (data[:, 1::2] + 1j * data[:, 2::2]).T
    return PulseEnsemble(grid, real)


def export_ensemble_binary(ensemble: PulseEnsemble, path) -> None:
    """Binary layout: ``b"TMQE"``, u32 version, u32 n_t, u32 n_real, then
    little-endian f64 ``re, im`` pairs, realization-major."""
    e = np.ascontiguousarray(ensemble.realizations, dtype="<c16")
    n_real, n_t = e.shape
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC + struct.pack("<III", BINARY_VERSION, n_t, n_real))
        fh.write(e.view("<f8").tobytes())


def import_ensemble_binary(path, grid: TimeGrid) -> PulseEnsemble:
    """Read a ``TMQE`` file; the layout carries no time axis, so ``grid`` is required."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError("not a TMQE file")
    version, n_t, n_real = struct.unpack("<III", raw[4:16])
    if version != BINARY_VERSION:
        raise ValueError(f"unsupported TMQE version {version}")
    if n_t != grid.n_points:
        raise GridMismatchError(f"file has {n_t} time points, grid has {grid.n_points}")
    body = np.frombuffer(raw[16:], dtype="<f8")
    if body.size != 2 * n_t * n_real:
        raise ValueError("truncated TMQE payload")
    return PulseEnsemble(grid, body.view("<c16").reshape(n_real, n_t).copy())
