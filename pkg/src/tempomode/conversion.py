r"""Beam-splitter-like mode conversion: frequency conversion, pulse gates, memories.

A two-band linear coupling is stored as its four Green-function blocks in
quadrature-weighted (discrete unitary) form,

.. math::

    \begin{pmatrix} a \\ b \end{pmatrix} =
    \begin{pmatrix} G^{ac} & G^{ad} \\ G^{bc} & G^{bd} \end{pmatrix}
    \begin{pmatrix} c \\ d \end{pmatrix},

so the continuum kernel is ``block / sqrt(d_out * d_in)``.  Band 1 carries
``(a, c)`` and band 2 carries ``(b, d)``.  Kernels are built by exponentiating
an anti-Hermitian block generator, which keeps them exactly unitary at any
coupling strength.

The joint Schmidt (Bloch-Messiah-Schmidt) form used throughout is

.. math::

    G^{ac} = \sum_n \tau_n V_n v_n^*,\quad
    G^{ad} = -\sum_n \rho_n V_n w_n^*,\quad
    G^{bc} = \sum_n \rho_n W_n v_n^*,\quad
    G^{bd} = \sum_n \tau_n W_n w_n^*,

which gives the pairwise relations ``A_n = tau_n C_n - rho_n D_n`` and
``B_n = rho_n C_n + tau_n D_n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import GridError, GridMismatchError, UnitarityError
from .grid import FrequencyGrid
from .modes import hermite_functions
from .pairs import PhaseMatchingFunction, PumpEnvelope

UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class QuadratureAxis:
    """Uniformly sampled coordinate (frequency, time or position)."""

    points: np.ndarray = field(repr=False)
    spacing: float
    label: str = "omega"

    @classmethod
    def from_grid(cls, grid: FrequencyGrid) -> "QuadratureAxis":
        return cls(grid.omega, grid.spacing, "omega")

    @classmethod
    def uniform(cls, start: float, stop: float, n_points: int, label: str) -> "QuadratureAxis":
        """Midpoint samples of ``[start, stop]``."""
        h = (stop - start) / n_points
        return cls(start + h * (np.arange(n_points) + 0.5), h, label)

    @property
    def n_points(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class GreenFunctionSet:
    axis1: QuadratureAxis
    axis2: QuadratureAxis
    unitary: np.ndarray = field(repr=False)  # (n1 + n2) square, quadrature-weighted

    def __post_init__(self):
        n = self.axis1.n_points + self.axis2.n_points
        if self.unitary.shape != (n, n):
            raise GridMismatchError("block matrix does not match the two axes")

    @property
    def _n1(self):
        return self.axis1.n_points

    @property
    def gac(self):
        return self.unitary[: self._n1, : self._n1]

    @property
    def gad(self):
        return self.unitary[: self._n1, self._n1 :]

    @property
    def gbc(self):
        return self.unitary[self._n1 :, : self._n1]

    @property
    def gbd(self):
        return self.unitary[self._n1 :, self._n1 :]

    def blocks(self):
        return self.gac, self.gad, self.gbc, self.gbd

    def kernel(self, name: str) -> np.ndarray:
        """Continuum kernel ``G^{name}(x, x')`` in units of 1/coordinate."""
        out_ax = self.axis1 if name[0] == "a" else self.axis2
        in_ax = self.axis1 if name[1] == "c" else self.axis2
        return getattr(self, "g" + name) / np.sqrt(out_ax.spacing * in_ax.spacing)

    def propagate(self, amp1, amp2):
        """Map single-excitation wavefunctions on the input labels ``(a, b)``
        to the output labels ``(c, d)``.

        Amplitudes are quadrature-weighted samples (``sqrt(dx) f(x)``).  A photon
        ``int f(x) a^dagger(x)`` becomes ``c``-amplitude ``G^{ac,H} f`` plus
        ``d``-amplitude ``G^{ad,H} f``, i.e. wavefunctions move with ``U^H``.
        """
        x = np.concatenate([np.asarray(amp1, complex), np.asarray(amp2, complex)])
        y = self.unitary.conj().T @ x
        return y[: self._n1], y[self._n1 :]


class MemoryKernelSet(GreenFunctionSet):
    """Green functions of an optical memory: band 1 is the field in time
    (``0 <= t <= T``), band 2 the medium excitation in space (``0 <= z <= L``)."""


def check_unitarity(gset: GreenFunctionSet) -> dict:
    """Residuals (max abs entry) of the four block-unitarity identities.

    ``aa``: Gac Gac^H + Gad Gad^H = 1, ``bb``: Gbc Gbc^H + Gbd Gbd^H = 1,
    ``ab``: Gac Gbc^H + Gad Gbd^H = 0, ``cols``: U^H U = 1.
    """
    a, b, c, d = gset.blocks()
    i1, i2 = np.eye(a.shape[0]), np.eye(d.shape[0])
    u = gset.unitary
    res = {
        "aa": float(np.max(np.abs(a @ a.conj().T + b @ b.conj().T - i1))),
        "bb": float(np.max(np.abs(c @ c.conj().T + d @ d.conj().T - i2))),
        "ab": float(np.max(np.abs(a @ c.conj().T + b @ d.conj().T))),
        "cols": float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))),
    }
    res["max"] = max(res.values())
    return res


def unitary_from_coupling(m: np.ndarray, coupling: float, method: str = "exact") -> np.ndarray:
    """Block unitary generated by coupling matrix ``m`` (band 1 rows, band 2 columns).

    ``m`` is rescaled so its largest singular value is 1; ``coupling`` is then
    the rotation angle of the most strongly coupled mode pair.  The
    ``first-order`` method returns ``1 + K`` and is unitary only to O(coupling^2).
    """
    m = np.asarray(m, dtype=complex)
    smax = np.linalg.norm(m, 2)
    mh = m / smax if smax > 0 else m
    n1, n2 = m.shape
    k = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    k[:n1, n1:] = -coupling * mh
    k[n1:, :n1] = coupling * mh.conj().T
    if method == "exact":
        return expm(k)
    if method == "first-order":
        return np.eye(n1 + n2) + k
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class FCModel:
    """Frequency-conversion model: pump spectrum at the band offset times phase matching.

    The generator kernel between band-1 frequency ``w`` and band-2 frequency
    ``w'`` is ``pump(w' - w) * pm(w - grid1.center, w' - grid2.center)``.
    """

    pump: PumpEnvelope
    phase_matching: PhaseMatchingFunction
    coupling: float

    def generator(self, grid1: FrequencyGrid, grid2: FrequencyGrid) -> np.ndarray:
        w1, w2 = np.meshgrid(grid1.omega, grid2.omega, indexing="ij")
        k = self.pump(w2 - w1) * self.phase_matching(w1 - grid1.center, w2 - grid2.center)
        return k * np.sqrt(grid1.spacing * grid2.spacing)


def build_fc_green_functions(
    model: FCModel,
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    method: str = "exact",
    tol: float = UNITARITY_TOL,
) -> GreenFunctionSet:
    """Green functions of ``model`` on the two band grids.

    Raises:
        GridError: if either grid spacing exceeds half the pump bandwidth.
        UnitarityError: if the block-unitarity residual exceeds ``tol``
            (only reachable with ``method="first-order"``).
    """
    if grid1.n_points != grid2.n_points:
        raise GridMismatchError("both bands need the same number of grid points")
    for g in (grid1, grid2):
        if g.spacing > model.pump.bandwidth / 2:
            raise GridError("grid too coarse to resolve the pump bandwidth")
    u = unitary_from_coupling(model.generator(grid1, grid2), model.coupling, method)
    gset = GreenFunctionSet(QuadratureAxis.from_grid(grid1), QuadratureAxis.from_grid(grid2), u)
    res = check_unitarity(gset)["max"]
    if res > tol:
        raise UnitarityError(f"unitarity residual {res:.2e} exceeds {tol:g}")
    return gset


def identity_set(axis1: QuadratureAxis, axis2: QuadratureAxis) -> GreenFunctionSet:
    return GreenFunctionSet(axis1, axis2, np.eye(axis1.n_points + axis2.n_points, dtype=complex))


@dataclass(frozen=True)
class BMSDecomposition:
    """Joint Schmidt form of a :class:`GreenFunctionSet`, ordered by decreasing ``rho``.

    Mode arrays hold one quadrature-weighted mode per column.
    """

    axis1: QuadratureAxis
    axis2: QuadratureAxis
    tau: np.ndarray
    rho: np.ndarray
    V: np.ndarray = field(repr=False)  # band-1 output-side (a) modes
    v: np.ndarray = field(repr=False)  # band-1 input-side (c) modes
    W: np.ndarray = field(repr=False)  # band-2 (b) modes
    w: np.ndarray = field(repr=False)  # band-2 (d) modes
    degenerate_groups: tuple = ()

    @property
    def degenerate(self) -> bool:
        return bool(self.degenerate_groups)

    def reconstruct(self) -> np.ndarray:
        t, r = self.tau, self.rho
        gac = (self.V * t) @ self.v.conj().T
        gad = -(self.V * r) @ self.w.conj().T
        gbc = (self.W * r) @ self.v.conj().T
        gbd = (self.W * t) @ self.w.conj().T
        return np.block([[gac, gad], [gbc, gbd]])

    def mode_function(self, which: str, n: int) -> np.ndarray:
        """Mode ``n`` of set ``which`` as a continuum-normalized function."""
        ax = self.axis1 if which in ("V", "v") else self.axis2
        return getattr(self, which)[:, n] / np.sqrt(ax.spacing)



def decompose_bms(
    gset: GreenFunctionSet, unitarity_tol: float = 1e-6, degeneracy_tol: float = 1e-8
) -> BMSDecomposition:
    """Bloch-Messiah-Schmidt decomposition of a unitary Green-function set.

    The SVD of ``Gac`` fixes ``tau_n, V_n, v_n`` for the strongly converted
    modes (``tau_n <= 1/sqrt(2)``), whose partners follow from
    ``rho_n W_n = Gbc v_n`` and ``rho_n w_n = -Gad^H V_n``.  On the remaining
    subspace ``tau`` is too close to 1 to resolve the modes, so they are taken
    from the SVD of ``Gbc`` there instead, with ``tau_n V_n = Gac v_n`` and
    ``tau_n w_n = Gbd^H W_n``.  Every division is then by a number >= 1/sqrt(2).

    Modes inside a degenerate block (for example the unconverted ``rho = 0``
    modes of a low-rank generator) are one valid choice among many; such
    blocks are listed in ``degenerate_groups``.

    Raises:
        UnitarityError: if the input violates unitarity by more than
            ``unitarity_tol``.
    """
    res = check_unitarity(gset)["max"]
    if res > unitarity_tol:
        raise UnitarityError(f"unitarity residual {res:.2e} exceeds {unitarity_tol:g}")
    a, b, c, d = gset.blocks()
    if a.shape[0] != d.shape[0]:
        raise GridMismatchError("decomposition requires equally sized bands")
    n = a.shape[0]
    p, sv, qh = np.linalg.svd(a)
    order = np.argsort(sv, kind="stable")
    p, sv, q = p[:, order], sv[order], qh.conj().T[:, order]
    k = int(np.sum(sv <= np.sqrt(0.5)))

    # strongly converted block
    V1, v1, tau1 = p[:, :k], q[:, :k], sv[:k]
    x1 = c @ v1
    rho1 = np.linalg.norm(x1, axis=0)
    W1 = x1 / rho1
    w1 = -(b.conj().T @ V1) / rho1

    # weakly converted block, resolved through Gbc on the complements
    wc = np.linalg.qr(W1, mode="complete")[0][:, k:] if k else np.eye(n, dtype=complex)
    y = wc.conj().T @ (c @ q[:, k:])
    pp, rho2, rh = np.linalg.svd(y)
    v2 = q[:, k:] @ rh.conj().T
    W2 = wc @ pp
    av2 = a @ v2
    tau2 = np.linalg.norm(av2, axis=0)
    V2 = av2 / tau2
    w2 = (d.conj().T @ W2) / tau2

    tau = np.concatenate([tau1, tau2])
    rho = np.concatenate([rho1, rho2])
    V, v = np.hstack([V1, V2]), np.hstack([v1, v2])
    W, w = np.hstack([W1, W2]), np.hstack([w1, w2])

    groups = []
    i = 0
    while i < n:
        j = i + 1
        while j < n and abs(rho[j] - rho[i]) < degeneracy_tol:
            j += 1
        if j - i > 1:
            groups.append((i, j))
        i = j
    return BMSDecomposition(gset.axis1, gset.axis2, tau, rho, V, v, W, w, tuple(groups))


def per_mode_transform(decomp: BMSDecomposition, a_in, b_in):
    """Excitation amplitudes over input modes ``(V_n, W_n)`` to outputs over ``(v_n, w_n)``.

    Each pair rotates independently: ``c = tau a + rho b``, ``d = -rho a + tau b``,
    the amplitude form of ``A_n = tau_n C_n - rho_n D_n``.
    """
    a_in = np.asarray(a_in, dtype=complex)
    b_in = np.asarray(b_in, dtype=complex)
    k = a_in.shape[0]
    t, r = decomp.tau[:k], decomp.rho[:k]
    return t * a_in + r * b_in, -r * a_in + t * b_in


def selectivity(decomp: BMSDecomposition) -> float:
    """``S = rho_0^2 * rho_0^2 / sum_n rho_n^2``; 1 iff exactly one mode fully converts."""
    r2 = np.asarray(decomp.rho if isinstance(decomp, BMSDecomposition) else decomp, float) ** 2
    total = r2.sum()
    if total <= 0:
        return 0.0
    return float(r2[0] * r2[0] / total)


def gaussian_kernel_correlation(model: FCModel) -> float:
    """Correlation coefficient of the Gaussian generator kernel (0 = separable).

    Only defined for an unchirped Gaussian pump with Gaussian phase matching.
    """
    pm = model.phase_matching
    if pm.form != "gaussian" or model.pump.chirp != 0:
        raise ValueError("correlation only defined for Gaussian/unchirped models")
    from .pairs import GAUSSIAN_PM_COEFF

    g = 2 * GAUSSIAN_PM_COEFF * (pm.length / 2) ** 2
    s = 1 / model.pump.bandwidth**2
    l11, l22, l12 = s + g * pm.k1**2, s + g * pm.k2**2, -s + g * pm.k1 * pm.k2
    return float(-l12 / np.sqrt(l11 * l22))


def separable_pump_bandwidth(pm: PhaseMatchingFunction) -> float:
    """Pump bandwidth that makes the Gaussian FC generator separable (needs k1 k2 > 0)."""
    from .pairs import GAUSSIAN_PM_COEFF

    prod = pm.k1 * pm.k2
    if prod <= 0:
        raise ValueError("separable pulse gate needs k1 * k2 > 0")
    return float(1 / np.sqrt(2 * GAUSSIAN_PM_COEFF * (pm.length / 2) ** 2 * prod))


def _profile(axis: QuadratureAxis, order: int, center: float, width: float) -> np.ndarray:
    f = hermite_functions((axis.points - center) / width, order + 1)[order]
    f = f * np.sqrt(axis.spacing)
    return f / np.linalg.norm(f)


def build_memory_kernels(
    toy: str,
    params: dict,
    T: float,
    L: float,
    n_points: int,
    tol: float = UNITARITY_TOL,
) -> MemoryKernelSet:
    """Toy memory Green functions over field time ``[0, T]`` and medium position ``[0, L]``.

    ``toy="separable-raman"`` couples one field mode (Hermite-Gaussian of order
    ``field_order`` in time) to one medium mode (order ``medium_order`` in z);
    ``toy="gaussian"`` uses a correlated two-dimensional Gaussian generator with
    correlation ``correlation`` in (-1, 1).  Other keys: ``coupling`` (rotation
    angle of the strongest pair), ``width_t``, ``width_z`` as fractions of T, L.
    """
    ax_t = QuadratureAxis.uniform(0.0, T, n_points, "t")
    ax_z = QuadratureAxis.uniform(0.0, L, n_points, "z")
    coupling = float(params.get("coupling", np.pi / 2))
    wt = float(params.get("width_t", 0.08)) * T
    wz = float(params.get("width_z", 0.08)) * L
    if toy == "separable-raman":
        ft = _profile(ax_t, int(params.get("field_order", 0)), T / 2, wt)
        fz = _profile(ax_z, int(params.get("medium_order", 0)), L / 2, wz)
        m = np.outer(ft, fz)
    elif toy == "gaussian":
        c = float(params.get("correlation", 0.5))
        if not -1 < c < 1:
            raise ValueError("correlation must lie in (-1, 1)")
        xt = (ax_t.points - T / 2) / wt
        xz = (ax_z.points - L / 2) / wz
        X, Z = np.meshgrid(xt, xz, indexing="ij")
        m = np.exp(-(X**2 + Z**2 - 2 * c * X * Z) / (2 * (1 - c**2)))
        m = m * np.sqrt(ax_t.spacing * ax_z.spacing)
    else:
        raise ValueError(f"unknown memory toy {toy!r}")
    u = unitary_from_coupling(m, coupling)
    kset = MemoryKernelSet(ax_t, ax_z, u)
    res = check_unitarity(kset)["max"]
    if res > tol:
        raise UnitarityError(f"unitarity residual {res:.2e} exceeds {tol:g}")
    return kset


def memory_profile(kset: MemoryKernelSet, which: str, order: int, width: float) -> np.ndarray:
    """Quadrature-weighted Hermite-Gaussian profile on the time (``"t"``) or space axis."""
    ax = kset.axis1 if which == "t" else kset.axis2
    extent = ax.spacing * ax.n_points
    return _profile(ax, order, extent / 2, width * extent)
