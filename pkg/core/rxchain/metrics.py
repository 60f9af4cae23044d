"""
Decision metrics for the joint demapper.

All three receivers share one Gaussian kernel

    metric(s) = M_R ln(π v(s)) + ‖y - δ Ĥ s‖² / v(s),   v(s) = σ_z² + δ σ_E² ‖s‖²

with (Ĥ, δ, σ_E²) = (H, 1, 0) for perfect CSI and (Ĥ, 1, 0) for the
mismatched receiver, so σ_E² = 0 reproduces the mismatched metric bit for bit.
"""

from __future__ import annotations
from dataclasses import dataclass
import enum
import math

import numpy as np
import numpy.typing as npt

from core.channel.models import ChannelEstimate, ChannelRealization
from core.numerics.linalg import ComplexMatrix
from utils.exceptions import ConfigurationError, InvalidInputError


class MetricKind(str, enum.Enum):
    PERFECT_CSI = "perfect"
    MISMATCHED = "mismatched"
    IMPROVED = "improved"


@dataclass(frozen=True)
class ReceiverCsi:
    """Channel knowledge handed to the demapper, matrices shaped (..., M, M_R, M_T)"""
    matrices: ComplexMatrix
    noise_variance: float
    shrinkage: float = 1.0
    error_variance: float = 0.0

    @classmethod
    def for_metric(
        cls,
        kind: MetricKind,
        noise_variance: float,
        *,
        channel: ChannelRealization | None = None,
        estimate: ChannelEstimate | None = None,
    ) -> ReceiverCsi:
        kind = MetricKind(kind)
        if kind is MetricKind.PERFECT_CSI:
            if channel is None:
                raise ConfigurationError("perfect-CSI metric needs the true channel")
            return cls(channel.per_subcarrier, noise_variance)
        if estimate is None:
            raise ConfigurationError(f"{kind.value} metric needs a channel estimate")
        if kind is MetricKind.MISMATCHED:
            return cls(estimate.per_subcarrier, noise_variance)
        return cls(estimate.per_subcarrier, noise_variance, estimate.shrinkage, estimate.error_variance)


def _gaussian_metric(residual_sq, variance, rx_antennas: int):
    variance = np.asarray(variance, dtype=np.float64)
    if np.any(variance <= 0.0):
        raise InvalidInputError("effective noise variance must be positive", context={"min_variance": float(np.min(variance))})
    return rx_antennas * np.log(math.pi * variance) + residual_sq / variance


def metric_improved(s, y, h_hat, shrinkage: float, error_variance: float, noise_variance: float) -> float:
    """Negative log of the channel law averaged over the estimation error."""
    s = np.asarray(s, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    if h_hat.shape != (y.shape[-1], s.shape[-1]):
        raise InvalidInputError("metric dimensions disagree", context={"s": s.shape, "y": y.shape, "h": h_hat.shape})
    residual = y - shrinkage * (h_hat @ s)
    variance = noise_variance + shrinkage * error_variance * float(np.sum(np.abs(s) ** 2))
    return float(_gaussian_metric(np.sum(np.abs(residual) ** 2), variance, y.shape[-1]))


def metric_perfect(s, y, h, noise_variance: float) -> float:
    """‖y - Hs‖²/σ_z² + M_R ln(πσ_z²)"""
    return metric_improved(s, y, h, 1.0, 0.0, noise_variance)


def candidate_metrics(y, csi: ReceiverCsi, candidates: npt.NDArray[np.complex128]) -> npt.NDArray[np.float64]:
    """
    Metrics of every candidate vector, shape (..., K).

    y has shape (..., M_R) and csi.matrices (..., M_R, M_T) with matching
    leading axes; candidates is (K, M_T).
    """
    y = np.asarray(y, dtype=np.complex128)
    h = csi.matrices
    if h.shape[-2] != y.shape[-1] or h.shape[-1] != candidates.shape[-1]:
        raise InvalidInputError(
            "observation, channel and candidates disagree",
            context={"y": y.shape, "h": h.shape, "candidates": candidates.shape},
        )
    mean = csi.shrinkage * np.einsum("...rt,kt->...kr", h, candidates)
    residual_sq = np.sum(np.abs(y[..., None, :] - mean) ** 2, axis=-1)
    energy = np.sum(np.abs(candidates) ** 2, axis=-1)
    variance = csi.noise_variance + csi.shrinkage * csi.error_variance * energy
    return _gaussian_metric(residual_sq, variance, y.shape[-1])


__all__ = [
    "MetricKind",
    "ReceiverCsi",
    "candidate_metrics",
    "metric_improved",
    "metric_perfect",
]
