"""MRT + null-space AN precoders and the transmit statistics."""
import numpy as np
import pytest

import ris_lab as rl
from ris_lab.precoding import mrt_normalizers, null_space_an_batch

from conftest import make_setup


def test_power_allocation_budget_identity():
    alloc = rl.PowerAllocation(p_t=7.0, xi=0.35, k=3, m=16)
    assert alloc.p * 3 + alloc.q * 13 == pytest.approx(7.0)
    assert rl.PowerAllocation(p_t=1.0, xi=1.0, k=2, m=4).q == 0.0
    with pytest.raises(rl.InvalidParameterError):
        rl.PowerAllocation(p_t=1.0, xi=0.0, k=2, m=4)
    with pytest.raises(rl.InvalidParameterError):
        rl.PowerAllocation(p_t=1.0, xi=1.2, k=2, m=4)
    scaled = rl.PowerAllocation.power_scaled(e_u=100.0, n=400, xi=0.5, k=2, m=8)
    assert scaled.p_t == pytest.approx(0.25)


def test_mrt_columns_normalized_statistically(small_setup):
    stats, est, _, _ = small_setup
    rng = np.random.default_rng(3)
    draws = rl.sample_realizations(stats, rng, 50_000)
    y = rl.simulate_pilot_phase(draws["h"], stats, est.pilots, rng)
    w = rl.mrt_precoder(est.estimate(y), est)
    norms = np.mean(np.sum(np.abs(w) ** 2, axis=1), axis=0)
    assert np.all(np.abs(norms - 1.0) < 0.02)
    tr_ww = np.mean(np.sum(np.abs(w) ** 2, axis=(1, 2)))
    assert abs(tr_ww - stats.dims.k) / stats.dims.k < 0.02


def test_mrt_scalar_direction():
    # a single column is the estimate scaled by its statistical norm
    stats, est, _, _ = make_setup(seed=6, m=4, n=4, k=1, m_e=1)
    h_hat = np.array([[1.0 + 1j], [0.5 - 0.5j], [0.0 + 0j], [2.0 + 0j]])
    w = rl.mrt_precoder(h_hat, est)
    expect = h_hat[:, 0] / np.sqrt(mrt_normalizers(est)[0])
    assert np.allclose(w[:, 0], expect)


def test_null_space_coordinate_case():
    v = rl.null_space_an(np.array([[1.0 + 0j], [0.0 + 0j]]))
    assert v.shape == (2, 1)
    assert abs(v[0, 0]) < 1e-14
    assert abs(abs(v[1, 0]) - 1.0) < 1e-14


def test_null_space_residual_and_orthonormality():
    rng = np.random.default_rng(0)
    for _ in range(5):
        h_hat = (rng.standard_normal((64, 6)) + 1j * rng.standard_normal((64, 6)))
        v = rl.null_space_an(h_hat)
        assert v.shape == (64, 58)
        assert np.max(np.abs(h_hat.conj().T @ v)) < 1e-10 * np.max(np.abs(h_hat))
        assert np.max(np.abs(v.conj().T @ v - np.eye(58))) < 1e-10


def test_null_space_rank_deficient_warns():
    h = np.zeros((6, 3), dtype=complex)
    h[:, 0] = 1.0
    h[:, 1] = 1.0          # duplicate direction
    h[0, 2] = 1j
    with pytest.warns(UserWarning, match="rank deficient"):
        v = rl.null_space_an(h)
    assert v.shape[1] == 4  # complement of a rank-2 span


def test_null_space_batch_matches_single():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((3, 8, 2)) + 1j * rng.standard_normal((3, 8, 2))
    vb = null_space_an_batch(h)
    for b in range(3):
        assert np.max(np.abs(h[b].conj().T @ vb[b])) < 1e-12
        assert np.max(np.abs(vb[b].conj().T @ vb[b] - np.eye(6))) < 1e-12


def test_transmit_statistics_structure(small_setup):
    stats, est, _, _ = small_setup
    rng = np.random.default_rng(5)
    draws = rl.sample_realizations(stats, rng, 1)
    y = rl.simulate_pilot_phase(draws["h"], stats, est.pilots, rng)
    h_hat = est.estimate(y)[0]
    w = rl.mrt_precoder(h_hat, est)
    v = rl.null_space_an(h_hat)

    full = rl.PowerAllocation(p_t=4.0, xi=1.0, k=stats.dims.k, m=stats.dims.m)
    ts = rl.transmit_statistics(w, v, full, kappa_t_bs=0.0, kappa_r_ue=0.02,
                                h=draws["h"][0])
    assert np.allclose(ts.t, full.p * w @ w.conj().T)
    assert np.allclose(ts.ups_t_diag, 0.0)
    assert ts.mu_r.shape == (stats.dims.k,)
    assert np.all(ts.mu_r >= 0)

    split = rl.PowerAllocation(p_t=4.0, xi=0.5, k=stats.dims.k, m=stats.dims.m)
    ts2 = rl.transmit_statistics(w, v, split, kappa_t_bs=0.03, kappa_r_ue=0.0)
    assert np.allclose(ts2.ups_t_diag, 0.03 * np.real(np.diag(ts2.t)))
    assert ts2.mu_r is None


def test_transmit_power_budget(small_setup):
    stats, est, _, alloc = small_setup
    orc = rl.estimate_user_rate(est, rl.HardwareProfile(), alloc,
                                rl.TrialPlan(n_blocks=20_000, master_seed=8))
    assert abs(orc.tr_t - alloc.p_t) / alloc.p_t < 0.02


def test_an_invisible_under_perfect_csi(small_setup):
    # with hhat = h the AN leakage h^H V V^H h vanishes identically
    stats = small_setup[0]
    draws = rl.sample_realizations(stats, np.random.default_rng(9), 1)
    h = np.swapaxes(draws["h"], 1, 2)[0]
    v = rl.null_space_an(h)
    leak = np.sum(np.abs(h.conj().T @ v) ** 2, axis=1)
    assert np.max(leak) < 1e-20 * np.sum(np.abs(h) ** 2)


def test_an_leakage_matches_error_trace():
    # imperfect CSI: E{h^H V V^H h} ~ (M-K)/M tr(C_k) within 5 percent
    stats, est, hw, alloc = make_setup(seed=15, m=24, n=16, k=3, m_e=2,
                                       correlated=False, kappa_ul=0.0)
    orc = rl.estimate_user_rate(est, hw, alloc,
                                rl.TrialPlan(n_blocks=40_000, master_seed=4))
    m, k_users = stats.dims.m, stats.dims.k
    for k in range(k_users):
        expect = (m - k_users) / m * np.trace(est.c[k]).real
        assert abs(orc.an_leakage[k] - expect) / expect < 0.05
