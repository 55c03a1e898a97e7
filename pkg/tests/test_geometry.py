"""Channel statistics builders and the realization sampler."""
import numpy as np
import pytest
from scipy.special import i0e, i1e

import ris_lab as rl
from ris_lab.linalg import max_asymmetry, min_relative_eigenvalue

from conftest import make_setup


# --------------------------------------------------------------------------
# phase deviation factor
# --------------------------------------------------------------------------

def test_phase_deviation_zero_noise_is_one():
    assert rl.phase_deviation_factor(rl.PhaseNoiseModel("uniform", 0.0)) == 1.0
    assert rl.phase_deviation_factor(rl.PhaseNoiseModel("von_mises", 0.0)) == 1.0
    assert rl.phase_deviation_factor(rl.PhaseNoiseModel()) == 1.0


def test_phase_deviation_uniform_value():
    # oracle: direct evaluation of sin(iota)/iota at iota = sqrt(0.3)
    iota = np.sqrt(0.3)
    expected = np.sin(iota) / iota
    got = rl.phase_deviation_factor(rl.PhaseNoiseModel("uniform", 0.1))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(0.9507446651178117, rel=1e-12)


def test_phase_deviation_von_mises_value():
    # oracle: scaled-Bessel-series ratio I1(10)/I0(10)
    expected = i1e(10.0) / i0e(10.0)
    got = rl.phase_deviation_factor(rl.PhaseNoiseModel("von_mises", 0.1))
    assert got == pytest.approx(expected, rel=1e-12)
    assert got == pytest.approx(0.9485998259548459, rel=1e-12)


def test_phase_deviation_large_concentration_stable():
    # nu up to 1e4 and beyond must not overflow the Bessel ratio
    for sigma_p2 in (1e-4, 1e-6, 1e-8):
        rho = rl.phase_deviation_factor(rl.PhaseNoiseModel("von_mises", sigma_p2))
        assert 0.0 < rho < 1.0
        assert np.isfinite(rho)


@pytest.mark.parametrize("kind", ["von_mises", "uniform"])
def test_phase_deviation_monotone_in_noise(kind):
    grid = [0.0, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0]
    vals = [rl.phase_deviation_factor(rl.PhaseNoiseModel(kind, s)) for s in grid]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_phase_deviation_negative_power_rejected():
    with pytest.raises(rl.InvalidParameterError):
        rl.PhaseNoiseModel("uniform", -0.1)


# --------------------------------------------------------------------------
# correlation builders
# --------------------------------------------------------------------------

def test_bs_correlation_identity_at_zero():
    assert np.array_equal(rl.build_bs_correlation(5, 0.0), np.eye(5))


def test_bs_correlation_exponential_entries():
    r = rl.build_bs_correlation(6, 0.6)
    assert r[0, 2] == pytest.approx(0.36)
    assert r[5, 3] == pytest.approx(0.36)
    assert np.trace(r) == pytest.approx(6.0)


def test_bs_correlation_positive_definite():
    # oracle: full eigendecomposition of the 4x4 matrix
    w = np.linalg.eigvalsh(rl.build_bs_correlation(4, 0.6))
    assert w.min() > 0.0


def test_bs_correlation_domain():
    with pytest.raises(rl.InvalidParameterError):
        rl.build_bs_correlation(4, 1.0)
    with pytest.raises(rl.InvalidParameterError):
        rl.build_bs_correlation(4, -0.1)


def test_ris_correlation_unit_diagonal_and_trace():
    dims = rl.SystemDimensions.square_ris(m=4, n=12, k=2, m_e=1)
    r = rl.build_ris_correlation(dims, rl.CorrelationSpec())
    assert np.allclose(np.diag(r), 1.0)
    assert np.trace(r) == pytest.approx(dims.n)
    assert max_asymmetry(r) < 1e-12


def test_ris_correlation_half_wavelength_neighbours_decorrelate():
    lam = 0.1
    dims = rl.SystemDimensions.square_ris(m=4, n=16, k=2, m_e=1)
    r = rl.build_ris_correlation(dims, rl.CorrelationSpec(wavelength=lam, d_h=lam / 2, d_v=lam / 2))
    assert r[0, 1] == pytest.approx(0.0, abs=1e-15)
    assert r[0, 4] == pytest.approx(0.0, abs=1e-15)   # vertical neighbour


def test_ris_correlation_quarter_wavelength_value():
    # oracle: sin(pi/2)/(pi/2)
    lam = 0.1
    dims = rl.SystemDimensions.square_ris(m=4, n=16, k=2, m_e=1)
    r = rl.build_ris_correlation(dims, rl.CorrelationSpec(wavelength=lam, d_h=lam / 4, d_v=lam / 4))
    expected = np.sin(np.pi / 2) / (np.pi / 2)
    assert r[0, 1] == pytest.approx(expected, rel=1e-12)
    assert r[0, 1] == pytest.approx(0.6366197723675814, rel=1e-12)


def test_ris_correlation_row_major_positions():
    dims = rl.SystemDimensions(m=4, n=6, k=2, m_e=1, n_h=3, n_v=2, tau_u=2)
    pos = rl.geometry.ris_element_positions(dims, rl.CorrelationSpec(wavelength=0.1))
    assert np.allclose(pos[4], [0.0, 0.05, 0.05])  # element 4: column 1, row 1


# --------------------------------------------------------------------------
# LoS bridge and path loss
# --------------------------------------------------------------------------

def test_los_channel_constant_modulus_and_energy():
    dims = rl.SystemDimensions.square_ris(m=6, n=16, k=2, m_e=1)
    h1 = rl.build_los_channel(dims, rl.CorrelationSpec(), beta_1=0.7,
                              rng=np.random.default_rng(1))
    assert np.allclose(np.abs(h1), np.sqrt(0.7))
    energy = np.trace(h1 @ h1.conj().T).real
    assert energy == pytest.approx(0.7 * dims.m * dims.n, rel=1e-12)


def test_los_channel_deterministic_per_seed():
    dims = rl.SystemDimensions.square_ris(m=6, n=16, k=2, m_e=1)
    a = rl.build_los_channel(dims, rl.CorrelationSpec(), 1.0, np.random.default_rng(9))
    b = rl.build_los_channel(dims, rl.CorrelationSpec(), 1.0, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_los_channel_large_n_near_identity_gram():
    # supports the large-RIS limit used by the asymptotic rate forms
    dims = rl.SystemDimensions.square_ris(m=8, n=512, k=2, m_e=1)
    spec = rl.CorrelationSpec()
    devs = []
    for seed in range(20):
        h1 = rl.build_los_channel(dims, spec, 1.0, np.random.default_rng(seed))
        gram = h1 @ h1.conj().T / dims.n
        devs.append(np.linalg.norm(gram - np.eye(dims.m)) / np.sqrt(dims.m))
    assert np.mean(devs) < 0.2


def test_path_loss_reference_point():
    assert rl.path_loss(1.0, 3.2) == pytest.approx(0.01)
    assert rl.path_loss(123.0, 0.0) == pytest.approx(0.01)
    assert rl.path_loss(100.0, 2.1) == pytest.approx(0.01 * 100.0 ** -2.1, rel=1e-12)
    with pytest.raises(rl.InvalidParameterError):
        rl.path_loss(0.0, 2.0)


# --------------------------------------------------------------------------
# effective correlations and aggregate covariances
# --------------------------------------------------------------------------

def test_effective_ris_correlation_endpoints():
    dims = rl.SystemDimensions.square_ris(m=4, n=16, k=2, m_e=1)
    r_i = rl.build_ris_correlation(dims, rl.CorrelationSpec())
    beta = 0.8
    assert np.allclose(rl.effective_ris_correlation(r_i, beta, 1.0, 16), beta * r_i)
    assert np.allclose(rl.effective_ris_correlation(r_i, beta, 0.0, 16), beta * np.eye(16))
    # identity template is a fixed point for any deviation factor
    blended = rl.effective_ris_correlation(None, beta, 0.6366, 16)
    assert np.allclose(blended, beta * np.eye(16))


def test_effective_ris_correlation_trace_preserved():
    dims = rl.SystemDimensions.square_ris(m=4, n=36, k=2, m_e=1)
    r_i = rl.build_ris_correlation(dims, rl.CorrelationSpec())
    for rho in (0.0, 0.3, 0.95):
        r_t = rl.effective_ris_correlation(r_i, 0.7, rho, 36)
        assert np.trace(r_t).real == pytest.approx(0.7 * 36, rel=1e-9)
        assert min_relative_eigenvalue(r_t) > -1e-10


def test_aggregate_covariance_no_ris_path():
    dims = rl.SystemDimensions.square_ris(m=4, n=9, k=2, m_e=1)
    h1 = rl.build_los_channel(dims, rl.CorrelationSpec(), 1.0, np.random.default_rng(0))
    r_bk = 0.9 * rl.build_bs_correlation(4, 0.5)
    phi = np.exp(1j * np.full(9, 0.3))
    got = rl.aggregate_covariance(r_bk, h1, phi, np.zeros((9, 9)))
    assert np.allclose(got, r_bk)


def test_aggregate_covariance_phase_cancels_for_identity_template():
    # with R_I proportional to identity the phase configuration drops out
    stats_a = make_setup(seed=5, correlated=False, phi=np.pi / 4)[0]
    rng = np.random.default_rng(12)
    stats_b = make_setup(seed=5, correlated=False,
                         phi=rng.uniform(0, 2 * np.pi, 16))[0]
    for a, b in zip(stats_a.r_k, stats_b.r_k):
        assert np.linalg.norm(a - b) / np.linalg.norm(a) < 1e-10
    # and the identity-template covariance is R_Bk + beta_i H1 H1^H
    hh = stats_a.h1 @ stats_a.h1.conj().T
    expect = stats_a.fading.beta_2[0] * np.eye(16) + stats_a.fading.beta_i[0] * hh
    assert np.linalg.norm(stats_a.r_k[0] - expect) / np.linalg.norm(expect) < 1e-12


def test_covariances_hermitian_psd_invariants(small_setup):
    stats = small_setup[0]
    mats = list(stats.r_k) + [stats.q_e, stats.r_tilde_ik(0), stats.r_tilde_ie]
    for mat in mats:
        assert max_asymmetry(mat) < 1e-12
        assert min_relative_eigenvalue(mat) > -1e-10


def test_sample_covariance_matches_aggregate(small_setup):
    stats = small_setup[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(2), 100_000)
    h0 = draws["h"][:, 0, :]
    cov = np.einsum("bi,bj->ij", h0, h0.conj()) / h0.shape[0]
    rel = np.linalg.norm(cov - stats.r_k[0]) / np.linalg.norm(stats.r_k[0])
    assert rel < 0.03


def test_sample_covariance_direct_link(small_setup):
    stats = small_setup[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(4), 100_000)
    hb = draws["h_b"][:, 1, :]
    cov = np.einsum("bi,bj->ij", hb, hb.conj()) / hb.shape[0]
    expect = stats.fading.beta_2[1] * stats.r_b
    assert np.linalg.norm(cov - expect) / np.linalg.norm(expect) < 0.03


def test_sample_covariance_eve(small_setup):
    stats = small_setup[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(6), 60_000)
    he = draws["h_e"]
    cov = np.einsum("bme,bne->mn", he, he.conj()) / (he.shape[0] * he.shape[2])
    assert np.linalg.norm(cov - stats.q_e) / np.linalg.norm(stats.q_e) < 0.03


def test_sampler_phase_errors():
    stats = make_setup(seed=1, sigma_p2=0.0)[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(0), 10)
    assert np.array_equal(draws["theta"], np.zeros_like(draws["theta"]))

    stats_vm = make_setup(seed=1, sigma_p2=0.1)[0]
    draws = rl.sample_realizations(stats_vm, np.random.default_rng(0), 7000)
    mean = np.mean(np.exp(1j * draws["theta"]))
    assert abs(mean - stats_vm.rho) < 0.005   # ~1e5 angle draws in total


def test_sampler_aggregate_identity(small_setup):
    # h = H1 Phi Theta h_I + h_B must hold draw by draw
    stats = small_setup[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(8), 4)
    bridge = stats.h1 * stats.phi[None, :]
    for b in range(4):
        rot = np.exp(1j * draws["theta"][b])
        for k in range(stats.dims.k):
            expect = bridge @ (rot * draws["h_i"][b, k]) + draws["h_b"][b, k]
            assert np.allclose(expect, draws["h"][b, k])
        expect_e = bridge @ (rot[:, None] * draws["h_ie"][b]) + draws["h_be"][b]
        assert np.allclose(expect_e, draws["h_e"][b])


def test_sampler_deterministic(small_setup):
    stats = small_setup[0]
    a = rl.sample_realizations(stats, np.random.default_rng(42), 5)
    b = rl.sample_realizations(stats, np.random.default_rng(42), 5)
    for key in a:
        assert np.array_equal(a[key], b[key])


def test_single_realization_shapes(small_setup):
    stats = small_setup[0]
    real = rl.sample_realization(stats, np.random.default_rng(0))
    dims = stats.dims
    assert real.h.shape == (dims.k, dims.m)
    assert real.h_e.shape == (dims.m, dims.m_e)
    assert np.allclose(np.abs(np.exp(1j * real.theta)), 1.0)


# --------------------------------------------------------------------------
# dimension invariants
# --------------------------------------------------------------------------

def test_dimension_invariants():
    with pytest.raises(rl.InvalidParameterError):
        rl.SystemDimensions(m=4, n=6, k=4, m_e=1, n_h=3, n_v=2, tau_u=4)   # M <= K
    with pytest.raises(rl.InvalidParameterError):
        rl.SystemDimensions(m=8, n=6, k=4, m_e=1, n_h=3, n_v=2, tau_u=2)   # tau < K
    with pytest.raises(rl.InvalidParameterError):
        rl.SystemDimensions(m=8, n=7, k=2, m_e=1, n_h=3, n_v=2, tau_u=2)   # grid mismatch
