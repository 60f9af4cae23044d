"""
Command line: `python manage.py {ber,outage,rates-point,gaps} ...`.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations
import argparse
import logging
from pathlib import Path
from typing import Callable, Optional, Sequence

from config.experiment import Mode, load_experiment
from core.generators.csv_generator import read_csv
from core.rxchain.metrics import MetricKind
from core.services.curve_analysis import all_gaps
from core.services.sweep_service import SweepService
from utils.constants import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR
from utils.exceptions import ConfigurationError, LabError
from utils.validators import LOG_LEVELS

logger = logging.getLogger(__name__)


def _list_of(kind: Callable, label: str) -> Callable[[str], list]:
    def parse(text: str) -> list:
        try:
            return [kind(part) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise argparse.ArgumentTypeError(f"invalid {label} list: {text!r}") from e
    return parse


def _add_experiment_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="TOML experiment file")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit master seed")
    parser.add_argument("--out", type=Path, help="result CSV path; the manifest goes next to it")
    parser.add_argument("--threads", type=int, help="worker processes")
    parser.add_argument("--snr", type=_list_of(float, "SNR"), help="comma-separated grid in dB (Eb/N0 for ber)")
    parser.add_argument("--pilots", type=_list_of(int, "pilot length"), help="comma-separated pilot lengths")
    parser.add_argument("--metric", type=_list_of(MetricKind, "metric"),
                        help="comma-separated subset of perfect,mismatched,improved")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manage.py", description="MIMO-OFDM decoding under imperfect channel knowledge")
    parser.add_argument("--log-level", choices=LOG_LEVELS, type=str.upper)
    sub = parser.add_subparsers(dest="command", required=True)

    for mode, help_text in (
        (Mode.BER, "BER/FER of BICM-ID against Eb/N0"),
        (Mode.OUTAGE, "expected outage rates against SNR"),
        (Mode.RATES_POINT, "mean instantaneous achievable rates against SNR"),
    ):
        _add_experiment_flags(sub.add_parser(mode.value, help=help_text))

    gaps = sub.add_parser("gaps", help="SNR gaps between the curves of a result file")
    gaps.add_argument("--csv", type=Path, required=True)
    gaps.add_argument("--level", type=float, required=True, help="BER level or rate in bits per channel use")
    return parser


def run_experiment(args: argparse.Namespace) -> int:
    from config.config import settings

    cfg = load_experiment(args.config, mode=args.command, seed=settings.SEED)
    cfg = cfg.with_overrides(seed=args.seed, output=args.out, snr_grid=args.snr, pilot_lengths=args.pilots, metrics=args.metric)
    threads = args.threads if args.threads is not None else settings.THREADS
    result = SweepService(output_dir=settings.OUTPUT_DIR, threads=threads).run(cfg)
    print(f"{len(result.rows)} rows -> {result.csv_path}")
    return EXIT_OK


def run_gaps(args: argparse.Namespace) -> int:
    rows = read_csv(args.csv)
    for n, reference, other, gap in all_gaps(rows, args.level):
        shown = "n/a" if gap is None else f"{gap:+.2f} dB"
        print(f"N={n} {reference} -> {other}: {shown}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from config.settings import configure_logging

        configure_logging(args.log_level)
        if args.command == "gaps":
            return run_gaps(args)
        return run_experiment(args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e.message}", extra={"context": e.get_context()})
        return EXIT_CONFIG_ERROR
    except LabError as e:
        logger.error(f"Run failed: {e.message}", extra={"context": e.get_context()})
        return EXIT_RUNTIME_ERROR


__all__ = ["build_parser", "main"]
