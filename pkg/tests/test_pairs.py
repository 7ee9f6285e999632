import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from tempomode.errors import ClippedSupportError, TruncationError
from tempomode.grid import FrequencyGrid, to_time
from tempomode.grid import SpectralFunction
from tempomode.pairs import (
    GAUSSIAN_PM_COEFF,
    JointSpectralAmplitude,
    PairState,
    PhaseMatchingFunction,
    PumpEnvelope,
    TwoModeSqueezeParams,
    build_jsa,
    export_jsa_csv,
    export_schmidt,
    gaussian_jsa_spectrum,
    gaussian_schmidt_spectrum,
    import_jsa_csv,
    schmidt_decompose,
    schmidt_number,
    time_domain_schmidt_modes,
    twin_beam_statistics,
    two_mode_squeeze_matrix,
    two_mode_squeeze_params,
    vacuum_pair_amplitudes,
)

W0 = 2.355e15
L = 2e-3


def _grid(n=256, span=1.2e14):
    return FrequencyGrid(W0, span, n)


def _gaussian_jsa(pump_bw, k1, k2, n=256, span=1.2e14):
    g = _grid(n, span)
    pump = PumpEnvelope(2 * W0, pump_bw)
    pm = PhaseMatchingFunction("gaussian", k1, k2, L)
    return pump, pm, build_jsa(pump, pm, g, g)


def _separable_bw(k1, k2):
    g = 2 * GAUSSIAN_PM_COEFF * (L / 2) ** 2
    return 1 / np.sqrt(-g * k1 * k2)


class TestBuildJSA:
    def test_normalized(self):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10)
        assert jsa.norm2() == pytest.approx(1.0, abs=1e-8)

    def test_narrow_pump_anticorrelated_is_entangled(self):
        _, _, jsa = _gaussian_jsa(1e12, 1e-10, -1e-10, n=256, span=1.6e14)
        assert schmidt_number(schmidt_decompose(jsa)) > 5

    def test_separable_at_45_degrees(self):
        k = 1e-10
        _, _, jsa = _gaussian_jsa(_separable_bw(k, -k), k, -k)
        assert schmidt_decompose(jsa).lambdas[0] > 0.999

    def test_clipped_support_rejected(self):
        with pytest.raises(ClippedSupportError):
            _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, span=2e13)

    def test_sinc_tails_need_loose_tolerance(self):
        from tempomode.calibration import SincModel
        from tempomode.presets import LAW_ASYMMETRY, LAW_BANDWIDTH_RATIO

        model = SincModel(LAW_BANDWIDTH_RATIO, LAW_ASYMMETRY)
        g = model.grid(160)
        with pytest.raises(ClippedSupportError):
            build_jsa(model.pump(), model.phase_matching(), g, g)
        jsa = build_jsa(model.pump(), model.phase_matching(), g, g, boundary_tol=1e-3)
        assert jsa.norm2() == pytest.approx(1.0, abs=1e-8)

    def test_sinc_phase_matching_value(self):
        pm = PhaseMatchingFunction("sinc", 1e-10, 0.0, 2e-3)
        x = np.array([0.0, np.pi / (0.5 * 2e-3 * 1e-10)])
        assert pm(x, 0.0) == pytest.approx([1.0, 0.0], abs=1e-15)

    def test_unknown_form(self):
        with pytest.raises(ValueError):
            PhaseMatchingFunction("box", 1, 1, 1)


def _brute_force_mu(lambdas):
    # least-squares fit of log(lambda_n) = log(1 - mu^2) + 2 n log(mu) over the leading weights
    lam = lambdas[:6]
    n = np.arange(lam.size)
    slope, _ = np.polyfit(n, np.log(lam), 1)
    return np.exp(slope / 2)


class TestSchmidt:
    def test_separable_product(self, rng):
        g = _grid(64)
        f = rng.normal(size=64) + 1j * rng.normal(size=64)
        h = rng.normal(size=64) + 1j * rng.normal(size=64)
        m = np.outer(f, h)
        m /= np.sqrt(np.sum(np.abs(m) ** 2) * g.spacing**2)
        res = schmidt_decompose(JointSpectralAmplitude(g, g, m))
        assert res.lambdas[0] == pytest.approx(1.0, abs=1e-10)
        assert np.all(res.lambdas[1:] < 1e-10)

    def test_gaussian_oracle(self):
        pump, pm, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10)
        res = schmidt_decompose(jsa)
        analytic = gaussian_jsa_spectrum(pump, pm, res.lambdas.size)
        assert np.max(np.abs(res.lambdas - analytic)) < 1e-3
        assert np.sum(res.lambdas) == pytest.approx(1.0, abs=1e-8)

    def test_closed_form_agrees_with_fitted_mu(self):
        # fine-grid SVD, geometric fit of the weights, compared with the exponent-derived mu
        pump, pm, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=384, span=1.4e14)
        fitted = _brute_force_mu(schmidt_decompose(jsa).lambdas)
        analytic = gaussian_jsa_spectrum(pump, pm, 2)
        mu_analytic = np.sqrt(analytic[1] / analytic[0])
        assert fitted == pytest.approx(mu_analytic, rel=1e-6)

    def test_width_ratio_form_matches_exponent_form(self):
        # symmetric orientation: widths along sum/difference diagonals
        k, bw = 1e-10, 5e12
        pump = PumpEnvelope(2 * W0, bw)
        pm = PhaseMatchingFunction("gaussian", k, -k, L)
        g = 2 * GAUSSIAN_PM_COEFF * (L / 2) ** 2
        s_plus = bw / np.sqrt(2)
        s_minus = 1 / np.sqrt(2 * g * k**2)
        assert np.allclose(gaussian_schmidt_spectrum(s_plus / s_minus, 10), gaussian_jsa_spectrum(pump, pm, 10), atol=1e-14)

    def test_reconstruction_and_orthonormality(self):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=128, span=1.2e14)
        res = schmidt_decompose(jsa)
        d = jsa.grid1.spacing
        err = np.linalg.norm((res.reconstruct() - jsa.matrix) * d)
        assert err < 1e-8
        for m in (res.psi, res.phi):
            assert np.max(np.abs(m.conj() @ m.T * d - np.eye(m.shape[0]))) < 1e-8

    def test_phase_convention(self):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=128)
        res = schmidt_decompose(jsa)
        for row in res.psi[:5]:
            top = row[np.argmax(np.abs(row))]
            assert abs(top.imag) < 1e-12 * abs(top) and top.real > 0

    def test_law_preset_values(self):
        from tempomode.calibration import SincModel
        from tempomode.presets import LAW_ASYMMETRY, LAW_BANDWIDTH_RATIO

        lam = SincModel(LAW_BANDWIDTH_RATIO, LAW_ASYMMETRY).lambdas(160, 4)
        assert np.max(np.abs(lam - [0.65, 0.19, 0.067, 0.028])) <= 0.05

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_jsa_invariants(self, seed):
        r = np.random.default_rng(seed)
        g = _grid(24)
        m = r.normal(size=(24, 24)) + 1j * r.normal(size=(24, 24))
        m /= np.sqrt(np.sum(np.abs(m) ** 2) * g.spacing**2)
        jsa = JointSpectralAmplitude(g, g, m)
        res = schmidt_decompose(jsa)
        assert np.sum(res.lambdas) == pytest.approx(1.0, abs=1e-8)
        assert np.all(res.lambdas >= 0)
        assert np.all(np.diff(res.lambdas) <= 1e-15)
        # transpose symmetry of the Schmidt number
        k_t = schmidt_number(schmidt_decompose(jsa.transpose()))
        assert abs(k_t - schmidt_number(res)) < 1e-10
        # invariance under unitary re-basing of rows and columns
        u = unitary_group.rvs(24, random_state=r)
        v = unitary_group.rvs(24, random_state=r)
        res2 = schmidt_decompose(JointSpectralAmplitude(g, g, u @ m @ v))
        assert np.max(np.abs(res2.lambdas - res.lambdas)) < 1e-10


class TestSchmidtNumber:
    @pytest.mark.parametrize("lam, k", [([1.0], 1.0), ([0.5, 0.5], 2.0)])
    def test_values(self, lam, k):
        assert schmidt_number(lam) == pytest.approx(k)

    def test_literature_weights(self):
        lam = [0.65, 0.19, 0.067, 0.028]
        tail = 1 - sum(lam)
        lam = lam + [tail * 0.6, tail * 0.4]
        assert schmidt_number(lam) == pytest.approx(2.1, abs=0.05)


class TestTimeDomainModes:
    def test_orthonormal_and_parseval(self):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=128)
        res = schmidt_decompose(jsa)
        u, v = time_domain_schmidt_modes(res, 6)
        for modes in (u, v):
            m = np.array([x.values for x in modes])
            dt = modes[0].grid.dt
            assert np.max(np.abs(m.conj() @ m.T * dt - np.eye(6))) < 1e-8

    def test_is_transform_of_spectral_mode(self):
        k = 1e-10
        _, _, jsa = _gaussian_jsa(_separable_bw(k, -k), k, -k, n=128)
        res = schmidt_decompose(jsa)
        u, _ = time_domain_schmidt_modes(res, 1)
        direct = to_time(SpectralFunction(res.grid1, res.psi[0]))
        assert np.max(np.abs(u[0].values - direct.values)) < 1e-12 * np.max(np.abs(direct.values))
        # Gaussian spectrum -> Gaussian pulse
        t = u[0].grid.t
        env = np.abs(u[0].values)
        p = env / env.max()
        width = np.sqrt(np.sum(p**2 * t**2) / np.sum(p**2))
        assert np.max(np.abs(p - np.exp(-(t**2) / (4 * width**2)))) < 1e-6


class TestSqueezing:
    def test_identity(self):
        p = two_mode_squeeze_params(0.0)
        assert (p.mu, p.nu) == (1.0, 0.0)

    def test_hyperbolic_identity(self):
        p = two_mode_squeeze_params(1.0)
        assert abs(p.mu**2 - p.nu**2 - 1) < 1e-12

    def test_composition(self):
        m = two_mode_squeeze_matrix(two_mode_squeeze_params(0.3)) @ two_mode_squeeze_matrix(two_mode_squeeze_params(0.5))
        assert np.allclose(m, two_mode_squeeze_matrix(two_mode_squeeze_params(0.8)), atol=1e-14)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            TwoModeSqueezeParams(1.0, 0.5)
        with pytest.raises(ValueError):
            two_mode_squeeze_params(-0.1)


class TestVacuumPairs:
    def test_examples(self):
        assert np.array_equal(vacuum_pair_amplitudes(0.0), [1.0, 0.0])
        a = vacuum_pair_amplitudes(0.1)
        assert a[0] == pytest.approx(0.99498743710662, abs=1e-12)
        assert a[1] == 0.1

    @given(eps=st.floats(0, 0.999999))
    def test_norm(self, eps):
        assert np.linalg.norm(vacuum_pair_amplitudes(eps)) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            vacuum_pair_amplitudes(1.0)

    def test_pair_state_amplitudes(self):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=128)
        ps = PairState(0.2, schmidt_decompose(jsa))
        assert np.sum(ps.pair_amplitudes() ** 2) == pytest.approx(0.04, rel=1e-8)


class TestTwinBeams:
    def test_vacuum(self):
        st_ = twin_beam_statistics(two_mode_squeeze_params(0.0), 5)
        assert st_.joint[0, 0] == 1.0 and st_.mean_photons == 0.0

    def test_mean_at_r_half(self):
        st_ = twin_beam_statistics(two_mode_squeeze_params(0.5), 60)
        # geometric series: sum n (1-x) x^n = x / (1-x) = sinh^2 r
        assert st_.mean_photons == pytest.approx(np.sinh(0.5) ** 2, abs=1e-9)
        assert st_.mean_photons == pytest.approx(0.27154, abs=1e-5)

    @pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
    def test_perfect_correlation(self, r):
        st_ = twin_beam_statistics(two_mode_squeeze_params(r), 200)
        assert st_.difference_variance == 0.0
        assert np.count_nonzero(st_.joint - np.diag(np.diag(st_.joint))) == 0
        x = np.tanh(r) ** 2
        assert np.allclose(st_.marginal, (1 - x) * x ** np.arange(201), rtol=1e-12)

    def test_truncation_error(self):
        with pytest.raises(TruncationError):
            twin_beam_statistics(two_mode_squeeze_params(2.0), 20)


class TestIO:
    def test_jsa_csv_round_trip(self, tmp_path):
        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=32, span=1.2e14)
        export_jsa_csv(jsa, tmp_path / "jsa.csv")
        back = import_jsa_csv(tmp_path / "jsa.csv")
        assert np.array_equal(back.matrix, jsa.matrix)
        assert back.grid1.n_points == 32

    def test_schmidt_export(self, tmp_path):
        import json

        _, _, jsa = _gaussian_jsa(4e12, 1.5e-10, -0.8e-10, n=64, span=1.2e14)
        res = schmidt_decompose(jsa)
        export_schmidt(res, tmp_path, count=3)
        meta = json.loads((tmp_path / "schmidt.json").read_text())
        assert meta["modes_file"] == "schmidt_modes.csv"
        assert np.allclose(meta["lambdas"], res.lambdas, rtol=0, atol=0)
        header = (tmp_path / "schmidt_modes.csv").read_text().splitlines()[0].split(",")
        assert header[:3] == ["omega1", "re_psi0", "im_psi0"]
