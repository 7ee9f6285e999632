"""Two-mode beam splitter acting on Fock states.

Input creation operators map as ``a^dag -> tau c^dag - rho d^dag`` and
``b^dag -> rho c^dag + tau d^dag``, so ``|1,0> -> tau|1,0> - rho|0,1>``.
The transform conserves total photon number, so it is block diagonal over
sectors ``N = n_a + n_b``; each block is an ``(N+1) x (N+1)`` unitary indexed by
the photon number in the first mode.
"""

from __future__ import annotations

from math import comb, factorial, sqrt

import numpy as np

from .errors import StateError, TruncationError


def _check_amplitudes(tau: float, rho: float) -> None:
    if abs(tau * tau + rho * rho - 1.0) > 1e-12:
        raise ValueError(f"tau^2 + rho^2 = {tau * tau + rho * rho!r}, expected 1")


def sector_matrix(tau: float, rho: float, total: int) -> np.ndarray:
    """Beam-splitter block on the ``total``-photon sector.

    Entry ``[k, n]`` is the amplitude ``<k, N-k | U | n, N-n>``.
    """
    _check_amplitudes(tau, rho)
    N = int(total)
    if N < 0:
        raise ValueError("photon number must be non-negative")
    out = np.zeros((N + 1, N + 1))
    for n in range(N + 1):
        m = N - n
        for k in range(N + 1):
            s = 0.0
            for i in range(max(0, k - m), min(n, k) + 1):
                s += (
                    comb(n, i)
                    * comb(m, k - i)
                    * tau**i
                    * (-rho) ** (n - i)
                    * rho ** (k - i)
                    * tau ** (m - k + i)
                )
            norm = sqrt(factorial(k) * factorial(N - k) / (factorial(n) * factorial(m)))
            out[k, n] = norm * s
    return out


def sector_unitarity_residual(tau: float, rho: float, total: int) -> float:
    u = sector_matrix(tau, rho, total)
    return float(np.max(np.abs(u.T @ u - np.eye(total + 1))))


def fock_beamsplitter_transform(tau: float, rho: float, state, n_max: int) -> dict:
    """Apply the beam splitter to a two-mode state.

    Args:
        tau, rho: real transmission/reflection amplitudes, ``tau^2 + rho^2 = 1``.
        state: mapping ``{(n_a, n_b): amplitude}``, or a single ``(n_a, n_b)`` tuple
            for a pure Fock state.
        n_max: largest total photon number allowed.

    Returns:
        ``{(n_c, n_d): amplitude}`` with exact zeros dropped.

    Raises:
        TruncationError: if any input component has more than ``n_max`` photons.
    """
    if isinstance(state, tuple) and len(state) == 2 and all(isinstance(x, (int, np.integer)) for x in state):
        state = {state: 1.0}
    sectors: dict[int, np.ndarray] = {}
    for (na, nb), amp in state.items():
        if na < 0 or nb < 0:
            raise StateError("photon numbers must be non-negative")
        N = na + nb
        if N > n_max:
            raise TruncationError(f"state component |{na},{nb}> exceeds n_max={n_max}")
        vec = sectors.setdefault(N, np.zeros(N + 1, dtype=complex))
        vec[na] += amp
    out = {}
    for N in sorted(sectors):
        res = sector_matrix(tau, rho, N) @ sectors[N]
        for k, amp in enumerate(res):
            if amp != 0:
                out[(k, N - k)] = complex(amp)
    return out


def number_moments(state: dict) -> dict:
    """``<n_1>``, ``<n_2>`` and ``<n_1 n_2>`` of a two-mode state ``{(n1, n2): amp}``."""
    m1 = m2 = m12 = norm = 0.0
    for (n1, n2), amp in state.items():
        p = abs(amp) ** 2
        norm += p
        m1 += n1 * p
        m2 += n2 * p
        m12 += n1 * n2 * p
    return {"n1": m1, "n2": m2, "n1n2": m12, "norm": norm}
