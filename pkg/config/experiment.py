"""
Experiment configuration: one TOML table per module plus top-level sweep keys.

    mode = "outage"
    snr_grid = [0.0, 5.0, 10.0]
    pilot_lengths = [2]

    [channel]
    tx_antennas = 2
    rx_antennas = 2

    [rates]
    outage_probability = 0.01

Everything is validated before a single frame is simulated.
"""

from __future__ import annotations
import enum
import logging
import math
from pathlib import Path
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Annotated, Any, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from core.calculators.rate_calculator import Decoder, RateConfig
from core.channel.models import ChannelConfig
from core.rxchain.metrics import MetricKind
from core.txchain.coding import CodeSpec
from core.txchain.frame import FrameSpec
from utils.constants import (
    BATCH_FRAMES,
    BER_SUBCARRIERS,
    BITS_PER_SYMBOL,
    CHANNEL_GAIN_VARIANCE,
    CONSTRAINT_LENGTH,
    DECODING_ITERATIONS,
    DEFAULT_EBN0_GRID_DB,
    DEFAULT_INTERLEAVER_SEED,
    DEFAULT_PILOT_LENGTHS,
    DEFAULT_SEED,
    DEFAULT_SNR_GRID_DB,
    ESTIMATE_DRAWS,
    GENERATORS_OCTAL,
    MAX_FRAMES,
    MIN_BIT_ERRORS,
    MIN_FRAMES,
    OUTAGE_BATCH_DRAWS,
    OUTAGE_PROBABILITY,
    OUTAGE_SUBCARRIERS,
    POSTERIOR_DRAWS,
    RX_ANTENNAS,
    SYMBOL_POWER,
    TX_ANTENNAS,
)
from utils.exceptions import ConfigurationError, LabError
from utils.validators import DrawCount, NonNegativeFloat, OutageProbability, PositiveFloat, PositiveInt, Seed

logger = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    BER = "ber"
    OUTAGE = "outage"
    RATES_POINT = "rates-point"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ChannelSection(_Section):
    tx_antennas: PositiveInt = TX_ANTENNAS
    rx_antennas: PositiveInt = RX_ANTENNAS
    channel_gain_variance: PositiveFloat = CHANNEL_GAIN_VARIANCE
    symbol_power: PositiveFloat = SYMBOL_POWER
    # None: pilots carry the data symbol energy
    pilot_power: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def rx_at_least_tx(self) -> ChannelSection:
        if self.rx_antennas < self.tx_antennas:
            raise ValueError(f"rx_antennas ({self.rx_antennas}) must be >= tx_antennas ({self.tx_antennas})")
        return self

    @property
    def training_power(self) -> float:
        return self.symbol_power if self.pilot_power is None else self.pilot_power


class FrameSection(_Section):
    # None: 50 subcarriers for BER sweeps, 16 for rate sweeps
    num_subcarriers: Optional[PositiveInt] = None
    interleaver_seed: Seed = DEFAULT_INTERLEAVER_SEED


class CodeSection(_Section):
    constraint_length: PositiveInt = CONSTRAINT_LENGTH
    generators_octal: tuple[PositiveInt, ...] = GENERATORS_OCTAL

    def to_spec(self) -> CodeSpec:
        return CodeSpec(constraint_length=self.constraint_length, generators_octal=tuple(self.generators_octal))


class RateSection(_Section):
    outage_probability: OutageProbability = OUTAGE_PROBABILITY
    estimate_draws: DrawCount = ESTIMATE_DRAWS
    posterior_draws: DrawCount = POSTERIOR_DRAWS
    batch_draws: PositiveInt = OUTAGE_BATCH_DRAWS


class BudgetSection(_Section):
    min_frames: PositiveInt = MIN_FRAMES
    min_bit_errors: PositiveInt = MIN_BIT_ERRORS
    max_frames: PositiveInt = MAX_FRAMES
    batch_frames: PositiveInt = BATCH_FRAMES
    wall_budget_s: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def cap_above_floor(self) -> BudgetSection:
        if self.max_frames < self.min_frames:
            raise ValueError(f"max_frames ({self.max_frames}) must be >= min_frames ({self.min_frames})")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Mode
    snr_grid: Annotated[list[float], Field(min_length=1)] = None  # type: ignore[assignment]
    pilot_lengths: Annotated[list[PositiveInt], Field(min_length=1)] = list(DEFAULT_PILOT_LENGTHS)
    metrics: Annotated[list[MetricKind], Field(min_length=1)] = list(MetricKind)
    decoders: Annotated[list[Decoder], Field(min_length=1)] = list(Decoder)
    iterations: PositiveInt = DECODING_ITERATIONS
    seed: Seed = DEFAULT_SEED
    output: Optional[Path] = None

    channel: ChannelSection = Field(default_factory=ChannelSection)
    frame: FrameSection = Field(default_factory=FrameSection)
    code: CodeSection = Field(default_factory=CodeSection)
    rates: RateSection = Field(default_factory=RateSection)
    budget: BudgetSection = Field(default_factory=BudgetSection)

    @model_validator(mode="before")
    @classmethod
    def default_grid(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("snr_grid") is None:
            grid = DEFAULT_EBN0_GRID_DB if data.get("mode") in (Mode.BER, Mode.BER.value) else DEFAULT_SNR_GRID_DB
            data = {**data, "snr_grid": list(grid)}
        return data

    @model_validator(mode="after")
    def check_modules(self) -> ExperimentConfig:
        if not all(math.isfinite(x) for x in self.snr_grid):
            raise ValueError("snr_grid entries must be finite")
        short = [n for n in self.pilot_lengths if n < self.channel.tx_antennas]
        if short:
            raise ValueError(f"pilot_lengths {short} are shorter than tx_antennas ({self.channel.tx_antennas})")
        if self.mode is Mode.BER:
            try:
                self.frame_spec.info_bits(self.code_spec)
            except LabError as e:
                raise ValueError(e.message) from e
        return self

    @property
    def num_subcarriers(self) -> int:
        if self.frame.num_subcarriers is not None:
            return self.frame.num_subcarriers
        return BER_SUBCARRIERS if self.mode is Mode.BER else OUTAGE_SUBCARRIERS

    @property
    def code_spec(self) -> CodeSpec:
        return self.code.to_spec()

    @property
    def frame_spec(self) -> FrameSpec:
        return FrameSpec(
            num_subcarriers=self.num_subcarriers,
            tx_antennas=self.channel.tx_antennas,
            bits_per_symbol=BITS_PER_SYMBOL,
            interleaver_seed=self.frame.interleaver_seed,
        )

    def noise_variance_for_ebn0(self, ebn0_db: float) -> float:
        """σ_z² from Eb/N0 = P̄ / (R_c B σ_z²)."""
        ebn0 = 10.0 ** (ebn0_db / 10.0)
        return self.channel.symbol_power / (self.code_spec.rate * BITS_PER_SYMBOL * ebn0)

    def channel_config(self, ebn0_db: float, pilot_length: int) -> ChannelConfig:
        ch = self.channel
        return ChannelConfig(
            num_subcarriers=self.num_subcarriers,
            tx_antennas=ch.tx_antennas,
            rx_antennas=ch.rx_antennas,
            channel_gain_variance=ch.channel_gain_variance,
            noise_variance=self.noise_variance_for_ebn0(ebn0_db),
            pilot_length=pilot_length,
            pilot_power=ch.training_power,
        )

    def rate_config(self, snr_db: float, pilot_length: int) -> RateConfig:
        ch = self.channel
        return RateConfig.from_snr(
            snr_db,
            pilot_length,
            num_subcarriers=self.num_subcarriers,
            tx_antennas=ch.tx_antennas,
            rx_antennas=ch.rx_antennas,
            symbol_power=ch.symbol_power,
            pilot_power=ch.training_power,
            channel_gain_variance=ch.channel_gain_variance,
        )

    def with_overrides(self, **updates: Any) -> ExperimentConfig:
        """Apply command-line values (None means 'not given') and re-validate."""
        updates = {k: v for k, v in updates.items() if v is not None}
        if not updates:
            return self
        merged = self.model_copy(update=updates).model_dump()
        return _validate(merged, source="command line")


def _validate(data: dict, *, source: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        fields = [".".join(str(p) for p in err["loc"]) for err in e.errors()]
        raise ConfigurationError(
            f"Invalid experiment configuration from {source}",
            context={"fields": fields, "errors": [err["msg"] for err in e.errors()]},
        ) from e


def load_experiment(path: Path | str | None, *, mode: Mode | str, seed: int | None = None) -> ExperimentConfig:
    """
    Read a TOML experiment file (or start from defaults when path is None).

    `mode` comes from the subcommand; a file naming a different mode is
    rejected. `seed` fills in a seed the file does not set.
    """
    mode = Mode(mode)
    data: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        try:
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        except OSError as e:
            raise ConfigurationError("Cannot read experiment file", context={"path": str(path)}, original_exception=e) from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError("Experiment file is not valid TOML", context={"path": str(path), "detail": str(e)}) from e

    file_mode = data.get("mode")
    if file_mode is not None and file_mode != mode.value:
        raise ConfigurationError(
            "Experiment file is for another mode",
            context={"path": str(path), "file_mode": file_mode, "command": mode.value},
        )
    data["mode"] = mode.value
    if seed is not None:
        data.setdefault("seed", seed)

    cfg = _validate(data, source=str(path) if path else "defaults")
    logger.debug("Loaded experiment configuration", extra={"mode": cfg.mode.value, "path": str(path)})
    return cfg


__all__ = [
    "BudgetSection",
    "ChannelSection",
    "CodeSection",
    "ExperimentConfig",
    "FrameSection",
    "Mode",
    "RateSection",
    "load_experiment",
]
