import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import cossin

from tempomode.conversion import (
    BMSDecomposition,
    FCModel,
    GreenFunctionSet,
    QuadratureAxis,
    build_fc_green_functions,
    build_memory_kernels,
    check_unitarity,
    decompose_bms,
    gaussian_kernel_correlation,
    identity_set,
    memory_profile,
    per_mode_transform,
    selectivity,
    separable_pump_bandwidth,
    unitary_from_coupling,
)
from tempomode.errors import GridError, UnitarityError
from tempomode.grid import FrequencyGrid
from tempomode.pairs import PhaseMatchingFunction, PumpEnvelope

C1, C2 = 2.0e15, 3.2e15


def _bands(n=64, span=4e13):
    return FrequencyGrid(C1, span, n), FrequencyGrid(C2, span, n)


def _model(bw=4e12, k1=1.2e-10, k2=-0.7e-10, coupling=0.8, form="gaussian", chirp=0.0):
    return FCModel(PumpEnvelope(C2 - C1, bw, chirp), PhaseMatchingFunction(form, k1, k2, 1e-3), coupling)


def _random_model(r, i):
    return FCModel(
        PumpEnvelope(C2 - C1, r.uniform(2e12, 8e12), r.uniform(-1, 1)),
        PhaseMatchingFunction("gaussian" if i % 2 == 0 else "sinc", r.uniform(-3, 3) * 1e-10, r.uniform(-3, 3) * 1e-10, 1e-3),
        r.uniform(0.1, 1.5),
    )


def _qpg(factor, coupling=np.pi / 2, n=128, span=4.6e14):
    pm = PhaseMatchingFunction("gaussian", 1e-10, 2e-10, 1e-3)
    model = FCModel(PumpEnvelope(C2 - C1, separable_pump_bandwidth(pm) * factor), pm, coupling)
    g1, g2 = _bands(n, span)
    return model, build_fc_green_functions(model, g1, g2)


class TestGreenFunctions:
    def test_zero_coupling_is_identity(self):
        g1, g2 = _bands()
        gset = build_fc_green_functions(_model(coupling=0.0), g1, g2)
        assert np.array_equal(gset.unitary, np.eye(128))

    def test_unitarity(self):
        g1, g2 = _bands()
        gset = build_fc_green_functions(_model(coupling=1.3), g1, g2)
        assert check_unitarity(gset)["max"] < 1e-12

    def test_dropping_a_block_breaks_unitarity(self):
        g1, g2 = _bands()
        u = build_fc_green_functions(_model(coupling=1.0), g1, g2).unitary.copy()
        u[:64, 64:] = 0
        res = check_unitarity(GreenFunctionSet(QuadratureAxis.from_grid(g1), QuadratureAxis.from_grid(g2), u))
        assert res["max"] > 1e-3

    def test_identity_set_residual(self):
        g1, g2 = _bands(16)
        assert check_unitarity(identity_set(QuadratureAxis.from_grid(g1), QuadratureAxis.from_grid(g2)))["max"] == 0.0

    def test_coarse_grid_rejected(self):
        g1, g2 = _bands(8, 4e13)
        with pytest.raises(GridError):
            build_fc_green_functions(_model(bw=4e12), g1, g2)

    def test_first_order_error_is_quadratic(self):
        m = np.random.default_rng(0).normal(size=(10, 10))
        errs = []
        for k in (0.02, 0.01):
            u = unitary_from_coupling(m, k, "first-order")
            errs.append(np.max(np.abs(u.conj().T @ u - np.eye(20))))
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=1e-6)
        # (1 + K)^H (1 + K) - 1 = K^H K for anti-Hermitian K
        mh = m / np.linalg.norm(m, 2)
        expected = 0.02**2 * max(np.max(np.abs(mh @ mh.T)), np.max(np.abs(mh.T @ mh)))
        assert errs[0] == pytest.approx(expected, rel=1e-9)

    def test_first_order_rejected_at_large_coupling(self):
        g1, g2 = _bands()
        with pytest.raises(UnitarityError):
            build_fc_green_functions(_model(coupling=0.5), g1, g2, method="first-order")

    def test_kernel_units(self):
        g1, g2 = _bands(32)
        gset = build_fc_green_functions(_model(), g1, g2)
        assert np.allclose(gset.kernel("ad") * g1.spacing, gset.gad)

    def test_propagate_conserves_norm(self, rng):
        g1, g2 = _bands(32)
        gset = build_fc_green_functions(_model(), g1, g2)
        f = rng.normal(size=32) + 1j * rng.normal(size=32)
        c, d = gset.propagate(f, np.zeros(32))
        assert np.linalg.norm(c) ** 2 + np.linalg.norm(d) ** 2 == pytest.approx(np.linalg.norm(f) ** 2, rel=1e-12)


class TestBMS:
    def test_identity_set(self):
        g1, g2 = _bands(16)
        dec = decompose_bms(identity_set(QuadratureAxis.from_grid(g1), QuadratureAxis.from_grid(g2)))
        assert np.allclose(dec.tau, 1.0) and np.allclose(dec.rho, 0.0)
        assert dec.degenerate

    def test_rejects_non_unitary(self):
        g1, g2 = _bands(16)
        u = np.eye(32, dtype=complex)
        u[0, 0] = 0.5
        with pytest.raises(UnitarityError):
            decompose_bms(GreenFunctionSet(QuadratureAxis.from_grid(g1), QuadratureAxis.from_grid(g2), u))

    @pytest.mark.parametrize("i", range(10))
    def test_random_configurations(self, i):
        r = np.random.default_rng(1000 + i)
        g1, g2 = _bands(128)
        gset = build_fc_green_functions(_random_model(r, i), g1, g2)
        dec = decompose_bms(gset)
        assert check_unitarity(gset)["max"] < 1e-8
        assert np.max(np.abs(dec.tau**2 + dec.rho**2 - 1)) < 1e-10
        assert np.max(np.abs(dec.reconstruct() - gset.unitary)) < 1e-8
        assert np.all(np.diff(dec.rho) <= 1e-12)
        # CS decomposition of the full block unitary: same conversion spectrum
        _, cs, _ = cossin(gset.unitary, p=128, q=128)
        sines = np.sort(np.abs(np.diag(cs[128:, :128])))[::-1]
        assert np.max(np.abs(sines - dec.rho)) < 1e-10

    def test_mode_sets_orthonormal(self):
        g1, g2 = _bands(64)
        dec = decompose_bms(build_fc_green_functions(_model(coupling=1.2), g1, g2))
        for m in (dec.V, dec.v, dec.W, dec.w):
            assert np.max(np.abs(m.conj().T @ m - np.eye(64))) < 1e-10

    def test_mode_function_normalization(self):
        g1, g2 = _bands(64)
        dec = decompose_bms(build_fc_green_functions(_model(), g1, g2))
        f = dec.mode_function("v", 0)
        assert np.sum(np.abs(f) ** 2) * g1.spacing == pytest.approx(1.0, abs=1e-12)

    def test_separable_full_conversion(self):
        _, gset = _qpg(1.0)
        dec = decompose_bms(gset)
        assert dec.rho[0] == pytest.approx(1.0, abs=1e-9)
        assert dec.tau[0] == pytest.approx(0.0, abs=1e-6)
        assert np.all(dec.rho[1:] < 1e-6)
        assert selectivity(dec) == pytest.approx(1.0, abs=1e-9)


class TestPerModeTransform:
    def _dec(self, tau, rho):
        n = len(tau)
        ax = QuadratureAxis.uniform(0, 1, n, "x")
        e = np.eye(n)
        return BMSDecomposition(ax, ax, np.asarray(tau, float), np.asarray(rho, float), e, e, e, e)

    def test_full_swap(self):
        c, d = per_mode_transform(self._dec([0.0], [1.0]), [1.0], [0.0])
        assert np.allclose(c, [0]) and np.allclose(d, [-1])

    def test_identity(self):
        c, d = per_mode_transform(self._dec([1.0], [0.0]), [0.3 + 0.1j], [0.2])
        assert np.allclose(c, [0.3 + 0.1j]) and np.allclose(d, [0.2])

    @given(theta=st.floats(0, np.pi / 2), a=st.complex_numbers(max_magnitude=10), b=st.complex_numbers(max_magnitude=10))
    def test_norm_conserved(self, theta, a, b):
        c, d = per_mode_transform(self._dec([np.cos(theta)], [np.sin(theta)]), [a], [b])
        assert abs(c[0]) ** 2 + abs(d[0]) ** 2 == pytest.approx(abs(a) ** 2 + abs(b) ** 2, rel=1e-12, abs=1e-12)


class TestSelectivity:
    @pytest.mark.parametrize(
        "rho, s",
        [([1.0, 0.0, 0.0], 1.0), ([0.0, 0.0], 0.0), ([np.sqrt(0.5), np.sqrt(0.5)], 0.25), ([1.0, 1.0], 0.5)],
    )
    def test_values(self, rho, s):
        assert selectivity(rho) == pytest.approx(s)

    def test_sweep_toward_separability(self):
        # kernel correlation falls to zero at the separable bandwidth, selectivity rises to 1
        rows = []
        for f in (0.5, 0.8, 1.0):
            model, gset = _qpg(f)
            rows.append((abs(gaussian_kernel_correlation(model)), selectivity(decompose_bms(gset))))
        corr, sel = zip(*rows)
        assert corr[0] > corr[1] > corr[2] and corr[2] < 1e-12
        assert sel[0] < sel[1] < sel[2]
        assert sel[2] > 0.999

    def test_separable_bandwidth_needs_same_sign(self):
        with pytest.raises(ValueError):
            separable_pump_bandwidth(PhaseMatchingFunction("gaussian", 1e-10, -1e-10, 1e-3))


class TestMemory:
    def test_zero_coupling_stores_nothing(self):
        kset = build_memory_kernels("separable-raman", {"coupling": 0.0}, 1e-9, 1e-2, 64)
        assert np.allclose(kset.unitary, np.eye(128))

    def test_separable_full_storage(self):
        kset = build_memory_kernels("separable-raman", {"coupling": np.pi / 2}, 1e-9, 1e-2, 64)
        dec = decompose_bms(kset)
        assert dec.rho[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(dec.rho[1:] < 1e-12)
        # the stored field mode is the input profile
        ft = memory_profile(kset, "t", 0, 0.08)
        assert abs(np.vdot(dec.V[:, 0], ft)) == pytest.approx(1.0, abs=1e-10)

    def test_write_then_read_reshapes(self):
        T, L, n = 1e-9, 1e-2, 96
        write = build_memory_kernels("separable-raman", {"coupling": np.pi / 2, "field_order": 0}, T, L, n)
        read = build_memory_kernels("separable-raman", {"coupling": np.pi / 2, "field_order": 1}, T, L, n)
        f_in = memory_profile(write, "t", 0, 0.08)
        _, spin = write.propagate(f_in, np.zeros(n))
        f_out, _ = read.propagate(np.zeros(n), spin)
        target = memory_profile(read, "t", 1, 0.08)
        assert abs(np.vdot(target, f_out)) ** 2 > 0.99

    def test_gaussian_toy_is_unitary(self):
        kset = build_memory_kernels("gaussian", {"correlation": 0.6, "coupling": 1.0}, 1e-9, 1e-2, 64)
        assert check_unitarity(kset)["max"] < 1e-12

    def test_unknown_toy(self):
        with pytest.raises(ValueError):
            build_memory_kernels("lambda", {}, 1e-9, 1e-2, 16)
