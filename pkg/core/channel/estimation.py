"""
Pilot-based ML channel estimation and the posterior of the true channel.

With orthogonal pilots (S_T S_T^H = N P_T I) the estimation error has i.i.d.
CN(0, σ_E²) entries, σ_E² = σ_z²/(N P_T), and the true channel given the
estimate is CN(δ Ĥ_k, δ σ_E²) entrywise with δ = σ_h²/(σ_h² + σ_E²).
"""

from __future__ import annotations
import logging

import numpy as np

from core.channel.models import ChannelConfig, ChannelEstimate, ChannelRealization
from core.numerics.linalg import ComplexMatrix, hermitian
from core.numerics.random import RngStream, gaussian_complex
from utils.exceptions import ConfigurationError, PilotDesignError

logger = logging.getLogger(__name__)

_MAX_GRAM_CONDITION = 1e12


def make_orthogonal_pilots(cfg: ChannelConfig) -> ComplexMatrix:
    """Scaled DFT rows: S_T[i, n] = sqrt(P_T) exp(-2πj i n / N), shape (M_T, N)."""
    n, m_t = cfg.pilot_length, cfg.tx_antennas
    if n < m_t:
        raise ConfigurationError(
            "orthogonal pilots need at least as many pilot vectors as transmit antennas",
            context={"pilot_length": n, "tx_antennas": m_t},
        )
    rows = np.arange(m_t)[:, None]
    cols = np.arange(n)[None, :]
    return np.sqrt(cfg.pilot_power) * np.exp(-2j * np.pi * rows * cols / n)


def ml_estimate(h: ChannelRealization, pilots: ComplexMatrix, cfg: ChannelConfig, noise_stream: RngStream) -> ChannelEstimate:
    """Ĥ_k = Y_T S_T^H (S_T S_T^H)^{-1} with Y_T = H_k S_T + Z_T per subcarrier."""
    s = np.asarray(pilots, dtype=np.complex128)
    gram = s @ hermitian(s)
    if not np.all(np.isfinite(gram)) or np.linalg.cond(gram) > _MAX_GRAM_CONDITION:
        raise PilotDesignError("pilot Gram matrix is singular", context={"pilot_shape": s.shape})

    hk = h.per_subcarrier
    clean = hk @ s
    y_t = clean + gaussian_complex(noise_stream, clean.shape, cfg.noise_variance)
    estimate = y_t @ hermitian(s) @ np.linalg.inv(gram)

    logger.debug(
        "Estimated channel from pilots",
        extra={"pilot_length": s.shape[-1], "error_variance": cfg.error_variance, "shrinkage": cfg.shrinkage},
    )
    return ChannelEstimate(per_subcarrier=estimate, error_variance=cfg.error_variance, shrinkage=cfg.shrinkage)


def perturbed_estimate(h: ChannelRealization, error_variance: float, channel_gain_variance: float, stream: RngStream) -> ChannelEstimate:
    """
    Ĥ = H + E with E i.i.d. CN(0, σ_E²), the law of `ml_estimate` under
    orthogonal pilots, drawn without simulating the training block.
    """
    hk = h.per_subcarrier
    estimate = hk + gaussian_complex(stream, hk.shape, error_variance)
    if error_variance == 0.0:
        shrinkage = 1.0
    else:
        shrinkage = channel_gain_variance / (channel_gain_variance + error_variance)
    return ChannelEstimate(per_subcarrier=estimate, error_variance=error_variance, shrinkage=shrinkage)


def posterior_draw(est: ChannelEstimate, k: int, stream: RngStream) -> ComplexMatrix:
    """One sample of H_k given Ĥ_k."""
    mean = est.posterior_mean[..., k, :, :]
    return mean + gaussian_complex(stream, mean.shape, est.posterior_variance)


def posterior_draws(est: ChannelEstimate, count: int, stream: RngStream) -> ComplexMatrix:
    """`count` joint samples of all subcarriers, shape (count, M, M_R, M_T)."""
    mean = est.posterior_mean
    return mean[None, ...] + gaussian_complex(stream, (count, *mean.shape), est.posterior_variance)


__all__ = [
    "make_orthogonal_pilots",
    "ml_estimate",
    "perturbed_estimate",
    "posterior_draw",
    "posterior_draws",
]
