"""Shared fixtures: small, fast system setups used across the suite."""
import numpy as np
import pytest

import ris_lab as rl


def make_setup(seed=0, m=16, n=16, k=3, m_e=2, correlated=True, sigma_p2=0.1,
               kind="von_mises", kappa_ul=0.01, kappa_dl=0.01, rho=10.0,
               p_t=10.0, xi=0.5, sigma_u2=1.0, sigma_k2=1.0, tau_u=None,
               phi=np.pi / 4, beta_scale=1.0):
    """One random system configuration: stats, estimator, hardware, allocation."""
    rng = np.random.default_rng(seed)
    dims = rl.SystemDimensions.square_ris(m=m, n=n, k=k, m_e=m_e, tau_u=tau_u)
    spec = rl.CorrelationSpec(l=0.6 if correlated else 0.0)
    r_b = rl.build_bs_correlation(m, 0.6) if correlated else None
    r_i = rl.build_ris_correlation(dims, spec) if correlated else None
    h1 = rl.build_los_channel(dims, spec, beta_1=0.4 * beta_scale, rng=rng)
    fading = rl.LargeScaleFading(
        beta_1=0.4 * beta_scale,
        beta_i=tuple(beta_scale * rng.uniform(0.3, 1.2, k)),
        beta_2=tuple(beta_scale * rng.uniform(0.5, 1.5, k)),
        beta_3=1.1 * beta_scale, beta_ie=0.6 * beta_scale)
    pm = rl.PhaseNoiseModel(kind=kind, sigma_p2=sigma_p2) if sigma_p2 > 0 else rl.PhaseNoiseModel()
    stats = rl.build_channel_statistics(dims, fading, pm, h1, phi=phi, r_b=r_b, r_i=r_i)
    pilots = rl.PilotConfig(tau_u=dims.tau_u, rho=rho, sigma_u2=sigma_u2,
                            kappa_t_ue=kappa_ul, kappa_r_bs=kappa_ul)
    est = rl.ChannelEstimator(stats, pilots)
    hw = rl.HardwareProfile(kappa_t_ue=kappa_ul, kappa_r_bs=kappa_ul,
                            kappa_t_bs=kappa_dl, kappa_r_ue=kappa_dl,
                            sigma_u2=sigma_u2, sigma_k2=sigma_k2, phase_noise=pm)
    alloc = rl.PowerAllocation(p_t=p_t, xi=xi, k=k, m=m)
    return stats, est, hw, alloc


@pytest.fixture
def small_setup():
    return make_setup(seed=3)
