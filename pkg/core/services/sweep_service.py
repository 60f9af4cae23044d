"""
Sweep orchestration: BER over Eb/N0 and outage / instantaneous rates over
SNR, written out as a CSV plus its manifest.

Monte Carlo work is cut into fixed-size batches keyed by batch index; every
batch draws from its own counter-based substream and results are consumed in
index order, so the rows do not depend on the number of worker processes.
"""

from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence
import hashlib
import logging
import math
import time

import numpy as np
from pydantic import ValidationError
from scipy.stats import binomtest

from config.experiment import ExperimentConfig, Mode
from core.calculators.rate_calculator import Decoder, RateCalculator, RateConfig, summarize
from core.channel.estimation import make_orthogonal_pilots, ml_estimate, perturbed_estimate
from core.channel.models import ChannelRealization, apply_channel, draw_channel
from core.generators.csv_generator import ResultRow, emit_csv
from core.numerics.random import RngStream, gaussian_complex
from core.rxchain.metrics import ReceiverCsi
from core.rxchain.receiver import iterative_receive
from core.services.manifest_service import ManifestService
from core.txchain.frame import assemble_frame
from utils.constants import (
    BER_STREAM_ID,
    CONFIDENCE_LEVEL,
    OUTAGE_STREAM_ID,
    RATES_POINT_STREAM_ID,
    RESULT_FILENAME,
)
from utils.exceptions import ConfigurationError, LabError

logger = logging.getLogger(__name__)

Mapper = Callable[..., Iterator]


def point_key(*values) -> int:
    """Stable 64-bit key of a sweep point, independent of its position in the grid."""
    digest = hashlib.blake2b(repr(tuple(values)).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@contextmanager
def batch_runner(threads: int) -> Iterator[Mapper]:
    """An ordered map: the builtin for one thread, a process pool otherwise."""
    if threads <= 1:
        yield map
        return
    with ProcessPoolExecutor(max_workers=threads) as pool:
        yield pool.map


@dataclass(frozen=True)
class BerBatchTask:
    cfg: ExperimentConfig
    ebn0_db: float
    pilot_length: int
    batch_index: int


@dataclass(frozen=True)
class BatchCounts:
    frames: int
    bit_errors: dict[str, list[int]]
    frame_errors: dict[str, int]


@dataclass
class PointTally:
    """Running error counts of one (Eb/N0, N) point, per metric and per iteration"""
    metrics: list[str]
    iterations: int
    frames: int = 0
    batches: int = 0
    bit_errors: dict[str, list[int]] = field(default_factory=dict)
    frame_errors: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for m in self.metrics:
            self.bit_errors.setdefault(m, [0] * self.iterations)
            self.frame_errors.setdefault(m, 0)

    def merge(self, counts: BatchCounts) -> None:
        self.frames += counts.frames
        self.batches += 1
        for m in self.metrics:
            self.bit_errors[m] = [a + b for a, b in zip(self.bit_errors[m], counts.bit_errors[m])]
            self.frame_errors[m] += counts.frame_errors[m]

    def fewest_errors(self) -> int:
        return min(errors[-1] for errors in self.bit_errors.values())


def simulate_ber_batch(task: BerBatchTask) -> BatchCounts:
    """
    One batch of frames, each with a fresh channel and pilot estimate, decoded
    by every configured metric on the same received signals.
    """
    cfg = task.cfg
    channel_cfg = cfg.channel_config(task.ebn0_db, task.pilot_length)
    frame_spec, code_spec = cfg.frame_spec, cfg.code_spec
    frames = cfg.budget.batch_frames
    stream = RngStream(cfg.seed, BER_STREAM_ID, (point_key(task.ebn0_db, task.pilot_length),)).substream(task.batch_index)

    info = stream.child(1).generator().integers(0, 2, size=(frames, frame_spec.info_bits(code_spec)), dtype=np.int8)
    tx = assemble_frame(info, frame_spec, code_spec)
    h = draw_channel(channel_cfg, stream.child(2), batch=frames)
    estimate = ml_estimate(h, make_orthogonal_pilots(channel_cfg), channel_cfg, stream.child(3))
    y = apply_channel(h, tx.symbols, stream.child(4), channel_cfg.noise_variance)

    bit_errors: dict[str, list[int]] = {}
    frame_errors: dict[str, int] = {}
    for metric in cfg.metrics:
        csi = ReceiverCsi.for_metric(metric, channel_cfg.noise_variance, channel=h, estimate=estimate)
        result = iterative_receive(y, csi, frame_spec, code_spec, cfg.iterations)
        bit_errors[metric.value] = [int(np.count_nonzero(d != info)) for d in result.decisions]
        frame_errors[metric.value] = int(np.count_nonzero(np.any(result.info_bits != info, axis=-1)))
    return BatchCounts(frames=frames, bit_errors=bit_errors, frame_errors=frame_errors)


def _point_done(tally: PointTally, cfg: ExperimentConfig) -> bool:
    budget = cfg.budget
    if tally.frames >= budget.max_frames:
        return True
    return tally.frames >= budget.min_frames and tally.fewest_errors() >= budget.min_bit_errors


def _proportion_row(cfg: ExperimentConfig, quantity: str, x_db: float, pilot_length: int, curve: str,
                    iteration: int, errors: int, trials: int, censored: bool) -> ResultRow:
    p = errors / trials
    ci = binomtest(errors, trials).proportion_ci(confidence_level=CONFIDENCE_LEVEL, method="exact")
    return ResultRow(
        experiment=cfg.mode.value,
        quantity=quantity,
        snr_db=x_db,
        pilot_length=pilot_length,
        curve=curve,
        iteration=iteration,
        value=p,
        trials=trials,
        errors=errors,
        std_error=math.sqrt(p * (1.0 - p) / trials),
        ci_low=float(ci.low),
        ci_high=float(ci.high),
        censored=censored,
        seed=cfg.seed,
    )


def _ber_point(cfg: ExperimentConfig, ebn0_db: float, pilot_length: int, mapper: Mapper, threads: int) -> list[ResultRow]:
    budget = cfg.budget
    metrics = [m.value for m in cfg.metrics]
    tally = PointTally(metrics=metrics, iterations=cfg.iterations)
    start = time.monotonic()
    out_of_time = False
    next_batch = 0

    while not _point_done(tally, cfg):
        if budget.wall_budget_s is not None and tally.frames and time.monotonic() - start > budget.wall_budget_s:
            out_of_time = True
            logger.warning("Wall budget exhausted", extra={"ebn0_db": ebn0_db, "pilot_length": pilot_length, "frames": tally.frames})
            break
        tasks = [BerBatchTask(cfg, ebn0_db, pilot_length, next_batch + j) for j in range(threads)]
        next_batch += threads
        for counts in mapper(simulate_ber_batch, tasks):
            tally.merge(counts)
            logger.debug("Merged batch", extra={"batch": tally.batches, "frames": tally.frames})
            if _point_done(tally, cfg):
                break

    num_info = cfg.frame_spec.info_bits(cfg.code_spec)
    bits = tally.frames * num_info
    rows = []
    for m in metrics:
        censored = out_of_time or tally.bit_errors[m][-1] < budget.min_bit_errors
        if censored:
            logger.warning("Censored BER point", extra={"ebn0_db": ebn0_db, "pilot_length": pilot_length,
                                                         "metric": m, "bit_errors": tally.bit_errors[m][-1]})
        for it, errors in enumerate(tally.bit_errors[m], start=1):
            rows.append(_proportion_row(cfg, "ber", ebn0_db, pilot_length, m, it, errors, bits, censored))
        rows.append(_proportion_row(cfg, "fer", ebn0_db, pilot_length, m, cfg.iterations, tally.frame_errors[m], tally.frames, censored))

    logger.info(
        "BER point finished",
        extra={"ebn0_db": ebn0_db, "pilot_length": pilot_length, "frames": tally.frames,
               "bit_errors": {m: tally.bit_errors[m][-1] for m in metrics}},
    )
    return rows


def _require_mode(cfg: ExperimentConfig, mode: Mode) -> None:
    if cfg.mode is not mode:
        raise ConfigurationError("experiment mode does not match the sweep", context={"mode": cfg.mode.value, "expected": mode.value})


def _preflight_ber(cfg: ExperimentConfig) -> None:
    try:
        for x in cfg.snr_grid:
            for n in cfg.pilot_lengths:
                make_orthogonal_pilots(cfg.channel_config(x, n))
    except ValidationError as e:
        raise ConfigurationError("Invalid channel parameters", context={"errors": [err["msg"] for err in e.errors()]}) from e


def run_ber_sweep(cfg: ExperimentConfig, *, threads: int = 1) -> list[ResultRow]:
    """Rows ordered by Eb/N0, then pilot length, then metric; per-iteration BER rows precede the FER row."""
    _require_mode(cfg, Mode.BER)
    _preflight_ber(cfg)
    logger.info("Starting BER sweep", extra={"points": len(cfg.snr_grid) * len(cfg.pilot_lengths), "threads": threads})
    rows: list[ResultRow] = []
    with batch_runner(threads) as mapper:
        for x in cfg.snr_grid:
            for n in cfg.pilot_lengths:
                rows.extend(_ber_point(cfg, x, n, mapper, max(1, threads)))
    return rows


@dataclass(frozen=True)
class OutageBatchTask:
    rate_cfg: RateConfig
    gamma: float
    posterior_draws: int
    stream: RngStream
    decoders: tuple[Decoder, ...]
    start: int
    stop: int


def simulate_outage_batch(task: OutageBatchTask) -> dict[str, np.ndarray]:
    calc = RateCalculator(task.rate_cfg)
    return calc.outage_samples(task.gamma, task.posterior_draws, task.stream, range(task.start, task.stop), task.decoders)


def _rate_configs(cfg: ExperimentConfig) -> list[tuple[float, int, RateConfig]]:
    try:
        return [(x, n, cfg.rate_config(x, n)) for x in cfg.snr_grid for n in cfg.pilot_lengths]
    except ValidationError as e:
        raise ConfigurationError("Invalid rate parameters", context={"errors": [err["msg"] for err in e.errors()]}) from e


def _rate_row(cfg: ExperimentConfig, quantity: str, snr_db: float, pilot_length: int, curve: str, values) -> ResultRow:
    est = summarize(values)
    return ResultRow(
        experiment=cfg.mode.value,
        quantity=quantity,
        snr_db=snr_db,
        pilot_length=pilot_length,
        curve=curve,
        value=est.mean,
        trials=est.draws,
        std_error=est.std_error,
        seed=cfg.seed,
    )


def run_outage_sweep(cfg: ExperimentConfig, *, threads: int = 1) -> list[ResultRow]:
    """Expected outage rate of each decoder plus the ergodic perfect-CSI reference, per (SNR, N)."""
    _require_mode(cfg, Mode.OUTAGE)
    points = _rate_configs(cfg)
    rates = cfg.rates
    decoders = tuple(cfg.decoders)

    tasks: list[OutageBatchTask] = []
    spans: list[tuple[int, int]] = []
    for x, n, rate_cfg in points:
        stream = RngStream(cfg.seed, OUTAGE_STREAM_ID, (point_key(x, n),))
        first = len(tasks)
        for start in range(0, rates.estimate_draws, rates.batch_draws):
            stop = min(start + rates.batch_draws, rates.estimate_draws)
            tasks.append(OutageBatchTask(rate_cfg, rates.outage_probability, rates.posterior_draws, stream, decoders, start, stop))
        spans.append((first, len(tasks)))

    logger.info("Starting outage sweep", extra={"points": len(points), "batches": len(tasks), "threads": threads})
    with batch_runner(threads) as mapper:
        results = list(mapper(simulate_outage_batch, tasks))

    rows: list[ResultRow] = []
    for (x, n, _), (first, last) in zip(points, spans):
        chunk = results[first:last]
        for label in chunk[0]:
            values = np.concatenate([part[label] for part in chunk])
            rows.append(_rate_row(cfg, "outage_rate", x, n, label, values))
        logger.info("Outage point finished", extra={"snr_db": x, "pilot_length": n,
                                                   "means": {r.curve: r.value for r in rows[-len(chunk[0]):]}})
    return rows


def run_rates_point(cfg: ExperimentConfig) -> list[ResultRow]:
    """Mean instantaneous rate of each decoder over random (H, Ĥ) pairs, per (SNR, N)."""
    _require_mode(cfg, Mode.RATES_POINT)
    rows: list[ResultRow] = []
    for x, n, rate_cfg in _rate_configs(cfg):
        stream = RngStream(cfg.seed, RATES_POINT_STREAM_ID, (point_key(x, n),))
        shape = (cfg.rates.estimate_draws, rate_cfg.num_subcarriers, rate_cfg.rx_antennas, rate_cfg.tx_antennas)
        h = ChannelRealization(per_subcarrier=gaussian_complex(stream.child(1), shape, rate_cfg.channel_gain_variance))
        estimate = perturbed_estimate(h, rate_cfg.error_variance, rate_cfg.channel_gain_variance, stream.child(2))
        point = RateCalculator(rate_cfg).calculate(h.per_subcarrier, estimate.per_subcarrier)
        for d in cfg.decoders:
            rows.append(_rate_row(cfg, "rate", x, n, d.value, point.for_decoder(d)))
        logger.info("Rate point finished", extra={"snr_db": x, "pilot_length": n})
    return rows


@dataclass(frozen=True)
class SweepResult:
    csv_path: Path
    manifest_path: Path
    rows: Sequence[ResultRow]


class SweepService:
    """Run the sweep a configuration asks for and write the CSV and its manifest."""

    def __init__(self, *, output_dir: Optional[Path] = None, threads: int = 1) -> None:
        if threads < 1:
            raise ConfigurationError("threads must be at least 1", context={"threads": threads})
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.threads = threads
        self._manifest = ManifestService()
        logger.info(f"SweepService initialized with {threads} worker(s)")

    def output_path(self, cfg: ExperimentConfig) -> Path:
        if cfg.output is not None:
            return Path(cfg.output)
        if self.output_dir is None:
            raise ConfigurationError("no output path given and no output directory configured")
        return self.output_dir / RESULT_FILENAME.format(mode=cfg.mode.value, seed=cfg.seed)

    def rows_for(self, cfg: ExperimentConfig) -> list[ResultRow]:
        if cfg.mode is Mode.BER:
            return run_ber_sweep(cfg, threads=self.threads)
        if cfg.mode is Mode.OUTAGE:
            return run_outage_sweep(cfg, threads=self.threads)
        return run_rates_point(cfg)

    def run(self, cfg: ExperimentConfig) -> SweepResult:
        path = self.output_path(cfg)
        logger.info(f"Starting {cfg.mode.value} experiment", extra={"seed": cfg.seed, "output": str(path)})
        try:
            rows = self.rows_for(cfg)
        except LabError:
            raise
        except (ArithmeticError, ValueError) as e:
            raise LabError("Simulation failed", context={"mode": cfg.mode.value}, original_exception=e) from e

        csv_path = emit_csv(rows, path)
        manifest = self._manifest.write_manifest(csv_path, cfg, rows_count=len(rows))
        return SweepResult(csv_path=csv_path, manifest_path=manifest.manifest_path, rows=rows)


__all__ = [
    "BatchCounts",
    "BerBatchTask",
    "OutageBatchTask",
    "PointTally",
    "SweepResult",
    "SweepService",
    "batch_runner",
    "point_key",
    "run_ber_sweep",
    "run_outage_sweep",
    "run_rates_point",
    "simulate_ber_batch",
    "simulate_outage_batch",
]
