"""Channel geometry and statistics.

Builds every deterministic second-order object of the link model
(BS/RIS spatial correlation, LoS bridge matrix, path losses, aggregate
covariances seen at the BS) and draws random channel realizations that
are consistent with those statistics, including RIS phase errors.

Conventions:
  * sinc is the normalized one, sinc(x) = sin(pi x)/(pi x), so
    half-wavelength RIS spacing decorrelates same-row neighbours.
  * RIS elements are indexed row-major over N_H columns; element x sits
    at [0, mod(x-1, N_H) d_H, floor((x-1)/N_H) d_V].
  * Large-scale gains are absorbed into the correlation matrices:
    the BS-side covariance of user k's direct link is beta_2[k] * R_B.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import i0e, i1e

from .errors import InvalidParameterError
from .linalg import herm_sqrt, hermitize
from .streams import complex_normal


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemDimensions:
    """Antenna/element/user counts and pilot length."""

    m: int            # BS antennas
    n: int            # RIS elements
    k: int            # legitimate users
    m_e: int          # eavesdropper antennas
    n_h: int          # RIS elements per row
    n_v: int          # RIS rows
    tau_u: int        # pilot length in symbols

    def __post_init__(self):
        if self.n_h * self.n_v != self.n:
            raise InvalidParameterError(
                f"RIS grid {self.n_h}x{self.n_v} does not hold {self.n} elements")
        if self.m <= self.k:
            raise InvalidParameterError(
                f"need more BS antennas than users for null-space AN (M={self.m}, K={self.k})")
        if self.tau_u < self.k:
            raise InvalidParameterError(
                f"pilot length {self.tau_u} shorter than user count {self.k}")
        for name in ("m", "n", "k", "m_e"):
            if getattr(self, name) < 1:
                raise InvalidParameterError(f"{name} must be positive")

    @classmethod
    def square_ris(cls, m: int, n: int, k: int, m_e: int, tau_u: int | None = None):
        """Dimensions with the most square RIS grid that factors n."""
        n_h = int(round(np.sqrt(n)))
        while n_h > 1 and n % n_h != 0:
            n_h -= 1
        return cls(m=m, n=n, k=k, m_e=m_e, n_h=n_h, n_v=n // n_h,
                   tau_u=k if tau_u is None else tau_u)


@dataclass(frozen=True)
class PhaseNoiseModel:
    """Per-element RIS phase-error law, summarized by its circular mean.

    kind is one of 'von_mises', 'uniform', 'none'. sigma_p2 is the phase
    noise power in rad^2; the von Mises concentration is 1/sigma_p2 and
    the uniform half-width is sqrt(3 sigma_p2).
    """

    kind: str = "none"
    sigma_p2: float = 0.0

    def __post_init__(self):
        if self.kind not in ("von_mises", "uniform", "none"):
            raise InvalidParameterError(f"unknown phase noise kind {self.kind!r}")
        if self.sigma_p2 < 0:
            raise InvalidParameterError("phase noise power must be non-negative")

    @property
    def nu_p(self) -> float:
        return np.inf if self.sigma_p2 == 0 else 1.0 / self.sigma_p2

    @property
    def iota_p(self) -> float:
        return float(np.sqrt(3.0 * self.sigma_p2))

    @property
    def rho(self) -> float:
        return phase_deviation_factor(self)

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        """Exact phase-error angles (von Mises via rejection sampling)."""
        if self.kind == "none" or self.sigma_p2 == 0.0:
            return np.zeros(size)
        if self.kind == "uniform":
            return rng.uniform(-self.iota_p, self.iota_p, size)
        return rng.vonmises(0.0, self.nu_p, size)


def phase_deviation_factor(model: PhaseNoiseModel) -> float:
    """Circular mean E{exp(j theta)} of the phase-error law, in [0, 1].

    Von Mises uses the exponentially scaled Bessel ratio I1/I0, stable
    for concentrations far beyond 1e4.
    """
    if model.sigma_p2 < 0:
        raise InvalidParameterError("phase noise power must be non-negative")
    if model.kind == "none" or model.sigma_p2 == 0.0:
        return 1.0
    if model.kind == "uniform":
        iota = model.iota_p
        return float(np.sinc(iota / np.pi))
    nu = model.nu_p
    return float(i1e(nu) / i0e(nu))


@dataclass(frozen=True)
class CorrelationSpec:
    """Spatial-correlation knobs for the BS array and the RIS panel."""

    l: float = 0.6               # BS exponential correlation index
    wavelength: float = 0.1      # carrier wavelength [m]
    d_h: float | None = None     # RIS horizontal spacing [m]; default wavelength/2
    d_v: float | None = None     # RIS vertical spacing [m]; default wavelength/2
    d_bs: float | None = None    # BS antenna spacing for the LoS model; default wavelength/2
    d_ris: float | None = None   # RIS spacing for the LoS model; default wavelength/4

    def __post_init__(self):
        if not 0.0 <= self.l < 1.0:
            raise InvalidParameterError("BS correlation index must lie in [0, 1)")
        if self.wavelength <= 0:
            raise InvalidParameterError("wavelength must be positive")

    @property
    def spacing_h(self) -> float:
        return self.wavelength / 2 if self.d_h is None else self.d_h

    @property
    def spacing_v(self) -> float:
        return self.wavelength / 2 if self.d_v is None else self.d_v

    @property
    def spacing_bs(self) -> float:
        return self.wavelength / 2 if self.d_bs is None else self.d_bs

    @property
    def spacing_ris(self) -> float:
        return self.wavelength / 4 if self.d_ris is None else self.d_ris


@dataclass(frozen=True)
class LargeScaleFading:
    """Path-loss coefficients of every link, plus the model constants."""

    beta_1: float                       # BS-RIS
    beta_i: tuple                       # RIS-user, length K
    beta_2: tuple                       # BS-user, length K
    beta_3: float                       # BS-Eve
    beta_ie: float                      # RIS-Eve
    j0: float = 0.01                    # gain at the reference distance (-20 dB)
    j1: float = 1.0                     # reference distance [m]
    zeta_r: float = 2.1                 # exponent, RIS-side links
    zeta_d: float = 3.2                 # exponent, direct links

    def __post_init__(self):
        for name in ("beta_1", "beta_3", "beta_ie"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be positive")
        if any(b <= 0 for b in self.beta_i) or any(b <= 0 for b in self.beta_2):
            raise InvalidParameterError("per-user path losses must be positive")

    @classmethod
    def uniform(cls, k: int, beta_1=1.0, beta_i=1.0, beta_2=1.0, beta_3=1.0, beta_ie=1.0):
        """Identical gains for every user; handy for normalized test setups."""
        return cls(beta_1=beta_1, beta_i=(beta_i,) * k, beta_2=(beta_2,) * k,
                   beta_3=beta_3, beta_ie=beta_ie)


# --------------------------------------------------------------------------
# deterministic builders
# --------------------------------------------------------------------------

def path_loss(distance: float, exponent: float, j0: float = 0.01, j1: float = 1.0) -> float:
    """Power-law gain j0 * (d/j1)^-exponent."""
    if distance <= 0:
        raise InvalidParameterError("distance must be positive")
    return float(j0 * (distance / j1) ** (-exponent))


def build_bs_correlation(m: int, l: float) -> np.ndarray:
    """Exponential BS correlation, [R_B]_ij = l^|i-j| (unit trace density)."""
    if not 0.0 <= l < 1.0:
        raise InvalidParameterError("correlation index must lie in [0, 1)")
    idx = np.arange(m)
    return l ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def ris_element_positions(dims: SystemDimensions, spec: CorrelationSpec) -> np.ndarray:
    """(N, 3) element coordinates on the RIS panel, row-major over n_h."""
    x = np.arange(dims.n)
    pos = np.zeros((dims.n, 3))
    pos[:, 1] = (x % dims.n_h) * spec.spacing_h
    pos[:, 2] = (x // dims.n_h) * spec.spacing_v
    return pos


def build_ris_correlation(dims: SystemDimensions, spec: CorrelationSpec) -> np.ndarray:
    """Isotropic-scattering RIS correlation, sinc(2 ||c_x - c_y|| / wavelength)."""
    if spec.spacing_h <= 0 or spec.spacing_v <= 0:
        raise InvalidParameterError("RIS spacings must be positive")
    pos = ris_element_positions(dims, spec)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    return np.sinc(2.0 * dist / spec.wavelength)


def build_los_channel(dims: SystemDimensions, spec: CorrelationSpec,
                      beta_1: float, rng: np.random.Generator) -> np.ndarray:
    """Deterministic LoS BS-RIS bridge with random per-element bearings.

    Every entry has modulus sqrt(beta_1). One arrival bearing pair
    (elevation U[0, pi], azimuth U[0, 2 pi]) is drawn per RIS element and
    one departure pair per BS antenna; the departure laws are the
    reflected ones (pi - elevation, pi + azimuth), which leave the
    distributions unchanged. Independent per-row draws make the row
    gram concentrate on beta_1 N I, the property the large-RIS limits
    build on; angles are frozen per rng, so the matrix is deterministic
    for a given seed.
    """
    theta1 = rng.uniform(0.0, np.pi, dims.n)
    phi1 = rng.uniform(0.0, 2.0 * np.pi, dims.n)
    theta2 = np.pi - rng.uniform(0.0, np.pi, dims.m)
    phi2 = np.pi + rng.uniform(0.0, 2.0 * np.pi, dims.m)
    u = np.sin(theta1) * np.sin(phi1)           # per element
    v = np.sin(theta2) * np.sin(phi2)           # per antenna
    a = np.arange(dims.m)[:, None]
    b = np.arange(dims.n)[None, :]
    phase = (2.0 * np.pi / spec.wavelength) * (
        a * spec.spacing_bs * u[None, :] + b * spec.spacing_ris * v[:, None])
    return np.sqrt(beta_1) * np.exp(1j * phase)


def effective_ris_correlation(r_i: np.ndarray | None, beta_i: float, rho: float,
                              n: int) -> np.ndarray:
    """Phase-noise-averaged RIS correlation rho^2 R + beta (1 - rho^2) I.

    ``r_i`` is the unit-diagonal N x N correlation (None means identity);
    ``beta_i`` is the link gain. The blend preserves the trace beta_i * N.
    """
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError("deviation factor must lie in [0, 1]")
    base = np.eye(n) if r_i is None else r_i
    return beta_i * (rho ** 2 * base + (1.0 - rho ** 2) * np.eye(n))


def aggregate_covariance(r_bk: np.ndarray, h1: np.ndarray, phi: np.ndarray,
                         r_tilde: np.ndarray) -> np.ndarray:
    """BS-side covariance of one aggregate link: R_bk + (H1 Phi) Rt (H1 Phi)^H."""
    b = h1 * phi[None, :]
    return hermitize(r_bk + b @ r_tilde @ b.conj().T)


def eve_covariance(r_be: np.ndarray, h1: np.ndarray, phi: np.ndarray,
                   r_tilde_e: np.ndarray) -> np.ndarray:
    """Aggregate eavesdropper covariance; same congruence as the users."""
    return aggregate_covariance(r_be, h1, phi, r_tilde_e)


# --------------------------------------------------------------------------
# assembled statistics
# --------------------------------------------------------------------------

@dataclass
class ChannelStatistics:
    """Everything deterministic the estimator and rate formulas need.

    r_b and r_i are unit-diagonal correlation templates (None = identity).
    r_k[k] is the M x M aggregate covariance of user k; q_e is the
    eavesdropper's. The cascade congruences through H1 are shared across
    users, so they are computed once and scaled by the per-user gains.
    """

    dims: SystemDimensions
    fading: LargeScaleFading
    phase_model: PhaseNoiseModel
    phi: np.ndarray                      # (N,) unit-modulus RIS phases
    h1: np.ndarray                       # (M, N) LoS bridge
    r_b: np.ndarray | None               # (M, M) or None for identity
    r_i: np.ndarray | None               # (N, N) or None for identity
    r_k: list = field(default_factory=list)
    q_e: np.ndarray | None = None
    rho: float = 1.0
    cascade_corr: np.ndarray | None = None   # (H1 Phi) R_I (H1 Phi)^H, unit gain
    cascade_iden: np.ndarray | None = None   # (H1 Phi) (H1 Phi)^H

    @property
    def r_bk(self) -> list:
        """Per-user direct-link covariances beta_2[k] * R_B."""
        base = np.eye(self.dims.m) if self.r_b is None else self.r_b
        return [b2 * base for b2 in self.fading.beta_2]

    def r_tilde_ik(self, k: int) -> np.ndarray:
        return effective_ris_correlation(self.r_i, self.fading.beta_i[k], self.rho, self.dims.n)

    @property
    def r_tilde_ie(self) -> np.ndarray:
        return effective_ris_correlation(self.r_i, self.fading.beta_ie, self.rho, self.dims.n)

    @cached_property
    def sqrt_r_b(self) -> np.ndarray | None:
        return None if self.r_b is None else herm_sqrt(self.r_b)

    @cached_property
    def sqrt_r_i(self) -> np.ndarray | None:
        return None if self.r_i is None else herm_sqrt(self.r_i)


def build_channel_statistics(dims: SystemDimensions, fading: LargeScaleFading,
                             phase_model: PhaseNoiseModel, h1: np.ndarray,
                             phi: np.ndarray | float = np.pi / 4,
                             r_b: np.ndarray | None = None,
                             r_i: np.ndarray | None = None) -> ChannelStatistics:
    """Assemble aggregate covariances for all users and the eavesdropper.

    ``phi`` may be a scalar phase (applied to every element) or an (N,)
    vector of phases. ``r_b``/``r_i`` are unit-diagonal templates; pass
    None for spatially uncorrelated arrays.
    """
    if np.isscalar(phi):
        phi_vec = np.full(dims.n, np.exp(1j * float(phi)))
    else:
        phi_vec = np.exp(1j * np.asarray(phi, dtype=float))
    if len(fading.beta_i) != dims.k or len(fading.beta_2) != dims.k:
        raise InvalidParameterError("per-user gain lists must have length K")
    if h1.shape != (dims.m, dims.n):
        raise InvalidParameterError(f"H1 has shape {h1.shape}, expected {(dims.m, dims.n)}")

    rho = phase_deviation_factor(phase_model)
    b = h1 * phi_vec[None, :]
    cascade_iden = hermitize(b @ b.conj().T)
    if r_i is None:
        cascade_corr = cascade_iden
    else:
        cascade_corr = hermitize(b @ r_i @ b.conj().T)

    # beta_1 already lives in h1; the blend below only carries the RIS-user gain.
    blend = rho ** 2 * cascade_corr + (1.0 - rho ** 2) * cascade_iden
    base_b = np.eye(dims.m) if r_b is None else r_b

    stats = ChannelStatistics(
        dims=dims, fading=fading, phase_model=phase_model, phi=phi_vec, h1=h1,
        r_b=r_b, r_i=r_i, rho=rho,
        cascade_corr=cascade_corr, cascade_iden=cascade_iden,
    )
    stats.r_k = [hermitize(b2 * base_b + bi * blend)
                 for b2, bi in zip(fading.beta_2, fading.beta_i)]
    stats.q_e = hermitize(fading.beta_3 * base_b + fading.beta_ie * blend)
    return stats


# --------------------------------------------------------------------------
# random realizations
# --------------------------------------------------------------------------

@dataclass
class ChannelRealization:
    """One draw of every fading object plus the assembled aggregates."""

    h_i_users: np.ndarray   # (K, N) RIS-user small-scale channels
    h_b_users: np.ndarray   # (K, M) BS-user channels
    h_ie: np.ndarray        # (N, M_E) RIS-Eve
    h_be: np.ndarray        # (M, M_E) BS-Eve
    theta: np.ndarray       # (N,) phase-error angles
    h: np.ndarray           # (K, M) aggregate user channels
    h_e: np.ndarray         # (M, M_E) aggregate Eve channel


def sample_realizations(stats: ChannelStatistics, rng: np.random.Generator,
                        n_draws: int) -> dict:
    """Stacked channel draws; axis 0 is the block index.

    Returns a dict with keys theta (B, N), h (B, K, M), h_b (B, K, M),
    h_i (B, K, N), h_e (B, M, M_E). One phase-error vector is drawn per
    block and shared by users and the eavesdropper within that block.
    """
    dims = stats.dims
    theta = stats.phase_model.draw(rng, (n_draws, dims.n))

    g_i = complex_normal(rng, (n_draws, dims.k, dims.n))
    g_b = complex_normal(rng, (n_draws, dims.k, dims.m))
    g_ie = complex_normal(rng, (n_draws, dims.n, dims.m_e))
    g_be = complex_normal(rng, (n_draws, dims.m, dims.m_e))

    s_i, s_b = stats.sqrt_r_i, stats.sqrt_r_b
    h_i = g_i if s_i is None else g_i @ s_i.T          # rows ~ CN(0, R_I)
    h_b = g_b if s_b is None else g_b @ s_b.T
    h_ie = g_ie if s_i is None else np.einsum("xn,bne->bxe", s_i, g_ie)
    h_be = g_be if s_b is None else np.einsum("xm,bme->bxe", s_b, g_be)

    scale_i = np.sqrt(np.asarray(stats.fading.beta_i))[None, :, None]
    scale_2 = np.sqrt(np.asarray(stats.fading.beta_2))[None, :, None]
    h_i = h_i * scale_i
    h_b = h_b * scale_2
    h_ie = h_ie * np.sqrt(stats.fading.beta_ie)
    h_be = h_be * np.sqrt(stats.fading.beta_3)

    bridge = stats.h1 * stats.phi[None, :]             # (M, N)
    rot = np.exp(1j * theta)                           # (B, N)
    h = h_b + np.einsum("mn,bkn->bkm", bridge, rot[:, None, :] * h_i)
    h_e = h_be + np.einsum("mn,bne->bme", bridge, rot[:, :, None] * h_ie)

    return {"theta": theta, "h_i": h_i, "h_b": h_b, "h_ie": h_ie,
            "h_be": h_be, "h": h, "h_e": h_e}


def sample_realization(stats: ChannelStatistics, rng: np.random.Generator) -> ChannelRealization:
    """Single coherence-block draw as a ChannelRealization."""
    d = sample_realizations(stats, rng, 1)
    return ChannelRealization(
        h_i_users=d["h_i"][0], h_b_users=d["h_b"][0], h_ie=d["h_ie"][0],
        h_be=d["h_be"][0], theta=d["theta"][0], h=d["h"][0], h_e=d["h_e"][0],
    )
