from __future__ import annotations
from dataclasses import dataclass
import logging

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, model_validator

from core.numerics.linalg import ComplexMatrix, as_complex_matrix
from core.numerics.random import RngStream, gaussian_complex
from utils.constants import CHANNEL_GAIN_VARIANCE, PILOT_POWER, RX_ANTENNAS, TX_ANTENNAS
from utils.exceptions import InvalidInputError
from utils.validators import NonNegativeFloat, PositiveFloat, PositiveInt

logger = logging.getLogger(__name__)


class ChannelConfig(BaseModel):
    """Block Rayleigh MIMO-OFDM channel with pilot training"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    num_subcarriers: PositiveInt
    tx_antennas: PositiveInt = TX_ANTENNAS
    rx_antennas: PositiveInt = RX_ANTENNAS
    channel_gain_variance: NonNegativeFloat = CHANNEL_GAIN_VARIANCE
    noise_variance: NonNegativeFloat
    pilot_length: PositiveInt
    pilot_power: PositiveFloat = PILOT_POWER

    @model_validator(mode="after")
    def rx_at_least_tx(self) -> ChannelConfig:
        if self.rx_antennas < self.tx_antennas:
            raise ValueError(f"rx_antennas ({self.rx_antennas}) must be >= tx_antennas ({self.tx_antennas})")
        if self.channel_gain_variance == 0.0 and self.error_variance > 0.0:
            raise ValueError("channel_gain_variance must be positive when the training is noisy")
        return self

    @property
    def error_variance(self) -> float:
        """σ_E² = σ_z² / (N P_T)"""
        return self.noise_variance / (self.pilot_length * self.pilot_power)

    @property
    def shrinkage(self) -> float:
        """δ = σ_h² / (σ_h² + σ_E²); a noiseless estimate gives δ = 1."""
        sigma_e2 = self.error_variance
        if sigma_e2 == 0.0:
            return 1.0
        return self.channel_gain_variance / (self.channel_gain_variance + sigma_e2)


@dataclass(frozen=True)
class ChannelRealization:
    """True per-subcarrier channels, shape (..., M, M_R, M_T)"""
    per_subcarrier: ComplexMatrix

    @property
    def num_subcarriers(self) -> int:
        return self.per_subcarrier.shape[-3]


@dataclass(frozen=True)
class ChannelEstimate:
    """ML estimates Ĥ_k with the error statistics of the training"""
    per_subcarrier: ComplexMatrix
    error_variance: float
    shrinkage: float

    @property
    def posterior_mean(self) -> ComplexMatrix:
        return self.shrinkage * self.per_subcarrier

    @property
    def posterior_variance(self) -> float:
        return self.shrinkage * self.error_variance


def draw_channel(cfg: ChannelConfig, stream: RngStream, *, batch: int | None = None) -> ChannelRealization:
    """M independent M_R x M_T matrices with i.i.d. CN(0, σ_h²) entries."""
    shape = (cfg.num_subcarriers, cfg.rx_antennas, cfg.tx_antennas)
    if batch is not None:
        shape = (batch, *shape)
    h = gaussian_complex(stream, shape, cfg.channel_gain_variance)
    return ChannelRealization(per_subcarrier=h)


def apply_channel(h: ChannelRealization, symbols, noise_stream: RngStream, noise_variance: float) -> npt.NDArray[np.complex128]:
    """y_k = H_k s_k + z_k for every subcarrier; symbols has shape (..., M, M_T)."""
    s = np.asarray(symbols, dtype=np.complex128)
    hk = h.per_subcarrier
    if s.shape[-2:] != (hk.shape[-3], hk.shape[-1]):
        raise InvalidInputError(
            "symbol block does not match the channel",
            context={"symbols": s.shape, "channel": hk.shape},
        )
    clean = np.matmul(hk, s[..., None])[..., 0]
    noise = gaussian_complex(noise_stream, clean.shape, noise_variance)
    return clean + noise


def realization_from(matrices) -> ChannelRealization:
    return ChannelRealization(per_subcarrier=as_complex_matrix(matrices, name="channel"))


__all__ = [
    "ChannelConfig",
    "ChannelEstimate",
    "ChannelRealization",
    "apply_channel",
    "draw_channel",
    "realization_from",
]
