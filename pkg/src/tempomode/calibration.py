"""Two-knob calibration of the sinc phase-matching JSA against target Schmidt weights.

The knobs are dimensionless:

``bandwidth_ratio``
    pump bandwidth divided by the phase-matching bandwidth ``2 / (L |k|)``
``asymmetry``
    angle of the phase-matching direction, ``(k1, k2) = |k| (cos a, sin a)``;
    it encodes the group-velocity-mismatch asymmetry between the two photons
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .grid import FrequencyGrid
from .pairs import PhaseMatchingFunction, PumpEnvelope, build_jsa, schmidt_decompose

DEFAULT_LENGTH = 0.8e-3  # m
DEFAULT_K_SCALE = 1.9e-10  # s/m
DEFAULT_CENTER = 2.355e15  # rad/s, 800 nm
HALF_SPAN_UNITS = 40.0  # grid half-width in phase-matching bandwidths


@dataclass(frozen=True)
class SincModel:
    bandwidth_ratio: float
    asymmetry: float
    center: float = DEFAULT_CENTER
    length: float = DEFAULT_LENGTH
    k_scale: float = DEFAULT_K_SCALE

    @property
    def pm_bandwidth(self) -> float:
        return 2.0 / (self.length * self.k_scale)

    def pump(self) -> PumpEnvelope:
        return PumpEnvelope(2 * self.center, self.bandwidth_ratio * self.pm_bandwidth)

    def phase_matching(self) -> PhaseMatchingFunction:
        return PhaseMatchingFunction(
            "sinc",
            self.k_scale * float(np.cos(self.asymmetry)),
            self.k_scale * float(np.sin(self.asymmetry)),
            self.length,
        )

    def grid(self, n_points: int = 160) -> FrequencyGrid:
        return FrequencyGrid(self.center, 2 * HALF_SPAN_UNITS * self.pm_bandwidth, n_points)

    def lambdas(self, n_points: int = 160, count: int = 8) -> np.ndarray:
        g = self.grid(n_points)
        jsa = build_jsa(self.pump(), self.phase_matching(), g, g, boundary_tol=1.0)
        return schmidt_decompose(jsa).lambdas[:count]


@dataclass(frozen=True)
class CalibrationResult:
    model: SincModel
    lambdas: np.ndarray
    max_error: float


def calibrate_sinc_model(
    targets,
    n_points: int = 160,
    ratios=None,
    angles=None,
    refine: bool = True,
) -> CalibrationResult:
    """Grid-search (then Nelder-Mead refine) the two knobs to match ``targets``.

    The objective is the max absolute deviation of the leading Schmidt weights.
    """
    targets = np.asarray(targets, dtype=float)
    k = targets.size
    ratios = np.linspace(0.3, 6.0, 40) if ratios is None else np.asarray(ratios)
    angles = np.linspace(-np.pi / 2, np.pi / 2, 61) if angles is None else np.asarray(angles)

    def err(r, a):
        lam = SincModel(float(r), float(a)).lambdas(n_points, k)
        return float(np.max(np.abs(lam - targets)))

    best = min(((err(r, a), r, a) for r in ratios for a in angles), key=lambda t: t[0])
    _, r0, a0 = best
    if refine:
        res = minimize(
            lambda p: err(p[0], p[1]) if p[0] > 0 else np.inf,
            x0=[r0, a0],
            method="Nelder-Mead",
            options={"xatol": 1e-4, "fatol": 1e-6, "maxiter": 200},
        )
        if res.fun <= best[0]:
            r0, a0 = res.x
    model = SincModel(float(r0), float(a0))
    lam = model.lambdas(n_points, k)
    return CalibrationResult(model, lam, float(np.max(np.abs(lam - targets))))
