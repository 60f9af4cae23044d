"""
Achievable and outage rates of the improved, mismatched and perfect-CSI
decoders.

Per subcarrier, with H = U Λ V^H and h̃ = diag(V^H Ĥ^H U), the improved decoder
uses μ = (√b/‖h̃‖ - |a|) h̃ and the mismatched decoder μ = (Re Σ λ_i h̃_i / ‖h̃‖²) h̃,
both rated by Σ_i log2(1 + P̄|μ_i|²/σ²(μ)) with
σ²(μ) = (P̄/M_T)(‖Λ‖² - ‖μ‖²) + σ_z².
"""

from __future__ import annotations
from dataclasses import dataclass
import enum
import logging
import math
from typing import Iterable

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, model_validator

from core.channel.estimation import perturbed_estimate, posterior_draws
from core.channel.models import ChannelEstimate, ChannelRealization
from core.numerics.linalg import SvdResult, frobenius_norm_sq, svd
from core.numerics.random import RngStream, gaussian_complex
from core.numerics.special import decay_moment, lambda_coefficient
from utils.constants import (
    A_DENOMINATOR_EPS,
    CHANNEL_GAIN_VARIANCE,
    LAMBDA_PERTURBATION,
    LARGE_T_THRESHOLD,
    MIN_DRAWS,
    RX_ANTENNAS,
    SYMBOL_POWER,
    TX_ANTENNAS,
)
from utils.exceptions import ConfigurationError, SingularityError
from utils.validators import NonNegativeFloat, PositiveFloat, PositiveInt

logger = logging.getLogger(__name__)

ERGODIC = "ergodic"


class Decoder(str, enum.Enum):
    IMPROVED = "improved"
    MISMATCHED = "mismatched"
    THEORETICAL = "theoretical"


class RateConfig(BaseModel):
    """Equal-power transmission, Σ_s = P̄ I, over M subcarriers"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    symbol_power: PositiveFloat = SYMBOL_POWER
    noise_variance: PositiveFloat
    error_variance: NonNegativeFloat
    channel_gain_variance: PositiveFloat = CHANNEL_GAIN_VARIANCE
    num_subcarriers: PositiveInt
    tx_antennas: PositiveInt = TX_ANTENNAS
    rx_antennas: PositiveInt = RX_ANTENNAS

    @model_validator(mode="after")
    def rx_at_least_tx(self) -> RateConfig:
        if self.rx_antennas < self.tx_antennas:
            raise ValueError(f"rx_antennas ({self.rx_antennas}) must be >= tx_antennas ({self.tx_antennas})")
        return self

    @classmethod
    def from_snr(
        cls,
        snr_db: float,
        pilot_length: int,
        *,
        num_subcarriers: int,
        tx_antennas: int = TX_ANTENNAS,
        rx_antennas: int = RX_ANTENNAS,
        symbol_power: float = SYMBOL_POWER,
        pilot_power: float | None = None,
        channel_gain_variance: float = CHANNEL_GAIN_VARIANCE,
    ) -> RateConfig:
        """SNR = P̄ M_T / σ_z²; pilots carry the data symbol energy unless told otherwise."""
        noise = symbol_power * tx_antennas / 10.0 ** (snr_db / 10.0)
        pilot_power = symbol_power if pilot_power is None else pilot_power
        return cls(
            symbol_power=symbol_power,
            noise_variance=noise,
            error_variance=noise / (pilot_length * pilot_power),
            channel_gain_variance=channel_gain_variance,
            num_subcarriers=num_subcarriers,
            tx_antennas=tx_antennas,
            rx_antennas=rx_antennas,
        )

    @property
    def shrinkage(self) -> float:
        if self.error_variance == 0.0:
            return 1.0
        return self.channel_gain_variance / (self.channel_gain_variance + self.error_variance)

    @property
    def estimation_ratio(self) -> float:
        return estimation_ratio(self.shrinkage, self.error_variance, self.symbol_power, self.noise_variance)

    @property
    def lambda_order(self) -> int:
        return self.tx_antennas - 1


@dataclass(frozen=True)
class SubcarrierDecomposition:
    """Per-subcarrier quantities of the rate optimisation, batched over leading axes"""
    svd: SvdResult
    h_tilde: npt.NDArray[np.complex128]
    channel_norm_sq: npt.NDArray[np.float64]
    projection: npt.NDArray[np.float64]
    a: float
    b: npt.NDArray[np.float64]
    lambda_n: float

    @property
    def singular_values(self) -> npt.NDArray[np.float64]:
        return self.svd.singular_values

    @property
    def h_tilde_norm_sq(self) -> npt.NDArray[np.float64]:
        return np.sum(np.abs(self.h_tilde) ** 2, axis=-1)


@dataclass(frozen=True)
class RatePoint:
    """Rates in bits per channel use, averaged over subcarriers"""
    c_improved: float | npt.NDArray[np.float64]
    c_mismatched: float | npt.NDArray[np.float64]
    c_theoretical: float | npt.NDArray[np.float64]

    def for_decoder(self, decoder: Decoder):
        return {
            Decoder.IMPROVED: self.c_improved,
            Decoder.MISMATCHED: self.c_mismatched,
            Decoder.THEORETICAL: self.c_theoretical,
        }[Decoder(decoder)]


@dataclass(frozen=True)
class OutageEstimate:
    mean: float
    std_error: float
    draws: int


def estimation_ratio(shrinkage: float, error_variance: float, symbol_power: float, noise_variance: float) -> float:
    """t = σ_z² / (δ P̄ σ_E²), infinite for an error-free estimate."""
    if error_variance == 0.0:
        return math.inf
    return noise_variance / (shrinkage * symbol_power * error_variance)


def a_coefficient(shrinkage: float, error_variance: float, symbol_power: float, noise_variance: float, lambda_n: float, tx_antennas: int) -> float:
    """a = δ(δσ_E²P̄ - λ_n σ_z²) / (M_T δ σ_E² λ_n P̄ + λ_n σ_z² - δ σ_E² P̄)"""
    d = shrinkage
    scaled = d * error_variance * symbol_power
    numerator = d * (scaled - lambda_n * noise_variance)
    denominator = tx_antennas * scaled * lambda_n + lambda_n * noise_variance - scaled
    if abs(denominator) < A_DENOMINATOR_EPS:
        raise SingularityError(
            "a coefficient denominator vanishes",
            context={"denominator": denominator, "lambda_n": lambda_n, "error_variance": error_variance},
        )
    return numerator / denominator


def a_coefficient_stable(shrinkage: float, t: float, tx_antennas: int) -> float:
    """
    Same quantity as `a_coefficient`, written as δ t G(t)/K(t) with
    G = ∫ e^{-s}(1+s/t)^{-(M_T+1)} ds and K = ∫ s e^{-s}(1+s/t)^{-(M_T+1)} ds.
    Free of the cancellation the quotient suffers for large t.
    """
    if math.isinf(t):
        return math.inf
    g = decay_moment(t, 0, tx_antennas + 1)
    k = decay_moment(t, 1, tx_antennas + 1)
    return shrinkage * t * g / k


def _h_tilde(svd_result: SvdResult, h_hat) -> npt.NDArray[np.complex128]:
    """diag(V^H Ĥ^H U) over the leading min(M_R, M_T) entries"""
    return np.einsum("...ti,...rt,...ri->...i", svd_result.v.conj(), np.conj(h_hat), svd_result.u)


def b_threshold(h, h_hat, a: float, svd_result: SvdResult) -> npt.NDArray[np.float64]:
    """
    b = ‖H + aĤ‖² - a²(‖H̃‖² - ‖h̃‖²), evaluated via ‖H̃‖ = ‖Ĥ‖ as
    ‖H‖² + 2a Re Tr(H^H Ĥ) + a²‖h̃‖².
    """
    h_tilde = _h_tilde(svd_result, h_hat)
    projection = np.sum(svd_result.singular_values * h_tilde.real, axis=-1)
    return frobenius_norm_sq(h) + 2.0 * a * projection + a * a * np.sum(np.abs(h_tilde) ** 2, axis=-1)


def decompose(h, h_hat, a: float, lambda_n: float = math.nan) -> SubcarrierDecomposition:
    h = np.asarray(h, dtype=np.complex128)
    h_hat = np.asarray(h_hat, dtype=np.complex128)
    res = svd(h)
    h_tilde = _h_tilde(res, h_hat)
    projection = np.sum(res.singular_values * h_tilde.real, axis=-1)
    norm_sq = frobenius_norm_sq(h)
    if math.isinf(a):
        b = np.full(norm_sq.shape, math.inf)
    else:
        b = norm_sq + 2.0 * a * projection + a * a * np.sum(np.abs(h_tilde) ** 2, axis=-1)
    return SubcarrierDecomposition(
        svd=res,
        h_tilde=h_tilde,
        channel_norm_sq=norm_sq,
        projection=projection,
        a=a,
        b=b,
        lambda_n=lambda_n,
    )


def optimal_mu_mismatched(decomp: SubcarrierDecomposition) -> npt.NDArray[np.complex128]:
    norm_sq = decomp.h_tilde_norm_sq
    safe = np.where(norm_sq > 0.0, norm_sq, 1.0)
    coefficient = np.where(norm_sq > 0.0, decomp.projection / safe, 0.0)
    return coefficient[..., None] * decomp.h_tilde


def optimal_mu_improved(decomp: SubcarrierDecomposition, b=None) -> npt.NDArray[np.complex128]:
    """
    (√b/‖h̃‖ - |a|) h̃ for b ≥ 0, zero otherwise. The coefficient is computed as
    (b - a²‖h̃‖²) / (‖h̃‖(√b + |a|‖h̃‖)) with b - a²‖h̃‖² = ‖H‖² + 2a Re Tr(H^H Ĥ).
    An error-free estimate (a infinite) gives the mismatched solution.
    """
    if math.isinf(decomp.a):
        return optimal_mu_mismatched(decomp)
    a = decomp.a
    norm = np.sqrt(decomp.h_tilde_norm_sq)
    if b is None:
        b = decomp.b
        numerator = decomp.channel_norm_sq + 2.0 * a * decomp.projection
    else:
        b = np.asarray(b, dtype=np.float64)
        numerator = b - a * a * norm ** 2
    denominator = norm * (np.sqrt(np.maximum(b, 0.0)) + abs(a) * norm)
    valid = (b >= 0.0) & (denominator > 0.0)
    coefficient = np.where(valid, numerator / np.where(valid, denominator, 1.0), 0.0)
    return coefficient[..., None] * decomp.h_tilde


def rate_from_mu(mu, singular_values, symbol_power: float, noise_variance: float, tx_antennas: int) -> npt.NDArray[np.float64]:
    """Σ_i log2(1 + P̄|μ_i|²/σ²(μ)) per subcarrier"""
    mu_sq = np.abs(np.asarray(mu)) ** 2
    lam_sq = np.asarray(singular_values, dtype=np.float64) ** 2
    variance = symbol_power / tx_antennas * (np.sum(lam_sq, axis=-1) - np.sum(mu_sq, axis=-1)) + noise_variance
    if np.any(variance <= 0.0):
        raise SingularityError("effective noise variance is not positive", context={"min_variance": float(np.min(variance))})
    return np.sum(np.log2(1.0 + symbol_power * mu_sq / variance[..., None]), axis=-1)


def perfect_csi_rate(singular_values, symbol_power: float, noise_variance: float) -> npt.NDArray[np.float64]:
    """Σ_i log2(1 + P̄λ_i²/σ_z²) = log2 det(I + P̄ H H^H / σ_z²)"""
    lam_sq = np.asarray(singular_values, dtype=np.float64) ** 2
    return np.sum(np.log2(1.0 + symbol_power * lam_sq / noise_variance), axis=-1)


def constraint_constant(decomp: SubcarrierDecomposition, mu, cfg: RateConfig) -> npt.NDArray[np.float64]:
    """
    Diagnostic constant of the original norm constraint,
    M_T λ_n [‖H‖² - ‖μ‖² + (Tr Σ_z - Tr Σ(μ))/P̄] / [1 - t λ_n - M_T λ_n].
    Not used by the rates.
    """
    t = cfg.estimation_ratio
    if math.isinf(t):
        return np.full(decomp.channel_norm_sq.shape, math.nan)
    mu_sq = np.sum(np.abs(np.asarray(mu)) ** 2, axis=-1)
    lam_sq = np.sum(decomp.singular_values ** 2, axis=-1)
    variance = cfg.symbol_power / cfg.tx_antennas * (lam_sq - mu_sq) + cfg.noise_variance
    traces = cfg.rx_antennas * (cfg.noise_variance - variance) / cfg.symbol_power
    bracket = decomp.channel_norm_sq - mu_sq + traces
    lam = decomp.lambda_n
    return cfg.tx_antennas * lam * bracket / (1.0 - t * lam - cfg.tx_antennas * lam)


def empirical_quantile(samples, gamma: float, axis: int = -1):
    """Lower empirical quantile: the k-th order statistic, k = max(1, ⌊γ n⌋)."""
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError("outage probability must lie in (0, 1)", context={"gamma": gamma})
    arr = np.sort(np.asarray(samples, dtype=np.float64), axis=axis)
    n = arr.shape[axis]
    k = max(1, int(math.floor(gamma * n)))
    return np.take(arr, k - 1, axis=axis)


def _check_draws(count: int, label: str) -> None:
    if count < MIN_DRAWS:
        raise ConfigurationError(f"{label} must be at least {MIN_DRAWS}", context={label: count})


class RateCalculator:
    """Instantaneous and outage rates for one RateConfig"""

    def __init__(self, cfg: RateConfig) -> None:
        self.cfg = cfg
        self._a: float | None = None

    @property
    def lambda_n(self) -> float:
        t = self.cfg.estimation_ratio
        if math.isinf(t):
            return 0.0
        return lambda_coefficient(self.cfg.lambda_order, t)

    @property
    def a(self) -> float:
        if self._a is None:
            self._a = self._shrinkage_coefficient()
        return self._a

    def _shrinkage_coefficient(self) -> float:
        cfg = self.cfg
        t = cfg.estimation_ratio
        if math.isinf(t) or t > LARGE_T_THRESHOLD:
            return a_coefficient_stable(cfg.shrinkage, t, cfg.tx_antennas)
        lam = self.lambda_n
        args = (cfg.shrinkage, cfg.error_variance, cfg.symbol_power, cfg.noise_variance)
        try:
            return a_coefficient(*args, lam, cfg.tx_antennas)
        except SingularityError:
            logger.warning("Near-singular a coefficient, perturbing lambda", extra={"t": t, "lambda_n": lam})
            return a_coefficient(*args, lam * (1.0 + LAMBDA_PERTURBATION), cfg.tx_antennas)

    def decompose(self, h, h_hat) -> SubcarrierDecomposition:
        return decompose(h, h_hat, self.a, self.lambda_n)

    def per_subcarrier(self, h, h_hat) -> dict[Decoder, npt.NDArray[np.float64]]:
        """Rates of every decoder per subcarrier, shape (..., M)."""
        cfg = self.cfg
        decomp = self.decompose(h, h_hat)
        lam = decomp.singular_values
        improved = rate_from_mu(optimal_mu_improved(decomp), lam, cfg.symbol_power, cfg.noise_variance, cfg.tx_antennas)
        mismatched = rate_from_mu(optimal_mu_mismatched(decomp), lam, cfg.symbol_power, cfg.noise_variance, cfg.tx_antennas)
        theoretical = perfect_csi_rate(lam, cfg.symbol_power, cfg.noise_variance)
        return {Decoder.IMPROVED: improved, Decoder.MISMATCHED: mismatched, Decoder.THEORETICAL: theoretical}

    def calculate(self, h, h_hat) -> RatePoint:
        """Rates averaged over the subcarrier axis; leading axes are kept."""
        rates = {d: np.mean(r, axis=-1) for d, r in self.per_subcarrier(h, h_hat).items()}
        if np.ndim(rates[Decoder.IMPROVED]) == 0:
            rates = {d: float(r) for d, r in rates.items()}
        return RatePoint(
            c_improved=rates[Decoder.IMPROVED],
            c_mismatched=rates[Decoder.MISMATCHED],
            c_theoretical=rates[Decoder.THEORETICAL],
        )

    def outage(self, estimate: ChannelEstimate, gamma: float, n_posterior_draws: int, stream: RngStream,
               decoders: Iterable[Decoder] = tuple(Decoder)) -> dict[Decoder, float]:
        """Outage rate of each decoder at level γ, all on the same posterior draws."""
        _check_draws(n_posterior_draws, "n_posterior_draws")
        draws = posterior_draws(estimate, n_posterior_draws, stream)
        point = self.calculate(draws, estimate.per_subcarrier[None, ...])
        return {Decoder(d): float(empirical_quantile(point.for_decoder(d), gamma)) for d in decoders}

    def outage_samples(self, gamma: float, n_posterior_draws: int, stream: RngStream, indices: Iterable[int],
                       decoders: Iterable[Decoder] = tuple(Decoder)) -> dict[str, npt.NDArray[np.float64]]:
        """
        Per-estimate outage rates for the given outer draw indices, plus the
        ergodic perfect-CSI rate of the true channel. Draw i depends only on
        `stream.substream(i)`.
        """
        cfg = self.cfg
        decoders = [Decoder(d) for d in decoders]
        shape = (cfg.num_subcarriers, cfg.rx_antennas, cfg.tx_antennas)
        out: dict[str, list[float]] = {d.value: [] for d in decoders}
        out[ERGODIC] = []
        for i in indices:
            sub = stream.substream(i)
            h = ChannelRealization(per_subcarrier=gaussian_complex(sub.child(1), shape, cfg.channel_gain_variance))
            estimate = perturbed_estimate(h, cfg.error_variance, cfg.channel_gain_variance, sub.child(2))
            rates = self.outage(estimate, gamma, n_posterior_draws, sub.child(3), decoders)
            for d, value in rates.items():
                out[d.value].append(value)
            lam = svd(h.per_subcarrier).singular_values
            out[ERGODIC].append(float(np.mean(perfect_csi_rate(lam, cfg.symbol_power, cfg.noise_variance))))
        return {label: np.asarray(values) for label, values in out.items()}

    def expected_outage(self, gamma: float, n_estimate_draws: int, n_posterior_draws: int, stream: RngStream,
                        decoders: Iterable[Decoder] = tuple(Decoder)) -> dict[str, OutageEstimate]:
        _check_draws(n_estimate_draws, "n_estimate_draws")
        samples = self.outage_samples(gamma, n_posterior_draws, stream, range(n_estimate_draws), decoders)
        return {label: summarize(values) for label, values in samples.items()}


def summarize(values) -> OutageEstimate:
    """Mean and standard error of per-estimate rates."""
    arr = np.asarray(values, dtype=np.float64)
    n = arr.size
    std_error = float(np.std(arr, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return OutageEstimate(mean=float(np.mean(arr)), std_error=std_error, draws=n)


def instantaneous_rates(h, h_hat, cfg: RateConfig) -> RatePoint:
    return RateCalculator(cfg).calculate(h, h_hat)


def outage_rate(estimate: ChannelEstimate, cfg: RateConfig, gamma: float, decoder: Decoder,
                n_posterior_draws: int, stream: RngStream) -> float:
    decoder = Decoder(decoder)
    return RateCalculator(cfg).outage(estimate, gamma, n_posterior_draws, stream, (decoder,))[decoder]


def expected_outage_rate(cfg: RateConfig, gamma: float, decoder: Decoder, n_estimate_draws: int,
                         n_posterior_draws: int, stream: RngStream) -> OutageEstimate:
    decoder = Decoder(decoder)
    return RateCalculator(cfg).expected_outage(gamma, n_estimate_draws, n_posterior_draws, stream, (decoder,))[decoder.value]


__all__ = [
    "ERGODIC",
    "Decoder",
    "OutageEstimate",
    "RateCalculator",
    "RateConfig",
    "RatePoint",
    "SubcarrierDecomposition",
    "a_coefficient",
    "a_coefficient_stable",
    "b_threshold",
    "constraint_constant",
    "decompose",
    "empirical_quantile",
    "estimation_ratio",
    "expected_outage_rate",
    "instantaneous_rates",
    "optimal_mu_improved",
    "optimal_mu_mismatched",
    "outage_rate",
    "perfect_csi_rate",
    "rate_from_mu",
    "summarize",
]
