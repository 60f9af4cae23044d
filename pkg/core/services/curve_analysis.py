"""SNR at which a measured curve crosses a level, and gaps between curves."""

from __future__ import annotations
from itertools import combinations
from typing import Iterable, Optional, Sequence
import logging
import math

from core.generators.csv_generator import PROBABILITY_QUANTITIES, ResultRow
from utils.exceptions import InvalidInputError

logger = logging.getLogger(__name__)


def curves(rows: Iterable[ResultRow], quantity: Optional[str] = None) -> dict[tuple[str, int], list[ResultRow]]:
    """
    Group rows by (curve, pilot length), sorted by SNR. BER rows keep only
    the last decoding iteration.
    """
    rows = list(rows)
    if quantity is None:
        quantity = _primary_quantity(rows)
    selected = [r for r in rows if r.quantity == quantity]
    last_iteration = max((r.iteration for r in selected), default=0)
    grouped: dict[tuple[str, int], list[ResultRow]] = {}
    for r in selected:
        if r.iteration != last_iteration:
            continue
        grouped.setdefault((r.curve, r.pilot_length), []).append(r)
    return {key: sorted(group, key=lambda r: r.snr_db) for key, group in sorted(grouped.items())}


def _primary_quantity(rows: Sequence[ResultRow]) -> str:
    quantities = {r.quantity for r in rows}
    for q in ("ber", "outage_rate", "rate", "fer"):
        if q in quantities:
            return q
    raise InvalidInputError("no rows to analyse")


def snr_at_level(rows: Sequence[ResultRow], level: float) -> Optional[float]:
    """
    First SNR where the curve crosses `level`, by linear interpolation between
    neighbouring grid points; error probabilities are interpolated in log10.
    None when the curve never reaches the level.
    """
    points = sorted(rows, key=lambda r: r.snr_db)
    if not points:
        return None
    log_domain = points[0].quantity in PROBABILITY_QUANTITIES
    if log_domain and level <= 0.0:
        raise InvalidInputError("error-rate level must be positive", context={"level": level})

    def tr(v: float) -> float:
        if not log_domain:
            return v
        return math.log10(v) if v > 0.0 else -math.inf

    target = tr(level)
    for left, right in zip(points, points[1:]):
        a, b = tr(left.value), tr(right.value)
        if a == target:
            return left.snr_db
        if (a - target) * (b - target) < 0.0:
            if math.isinf(a):
                return left.snr_db
            if math.isinf(b):
                return right.snr_db
            frac = (target - a) / (b - a)
            return left.snr_db + frac * (right.snr_db - left.snr_db)
    if tr(points[-1].value) == target:
        return points[-1].snr_db
    return None


def snr_gap(rows: Iterable[ResultRow], level: float, reference: str, other: str, *, pilot_length: Optional[int] = None) -> Optional[float]:
    """
    SNR(other) - SNR(reference) at `level`: positive when `other` needs more
    SNR. None when either curve misses the level.
    """
    grouped = curves(rows)
    lengths = sorted({n for _, n in grouped}) if pilot_length is None else [pilot_length]
    if len(lengths) != 1:
        raise InvalidInputError("rows hold several pilot lengths, pick one", context={"pilot_lengths": lengths})
    n = lengths[0]
    try:
        ref_rows, other_rows = grouped[(reference, n)], grouped[(other, n)]
    except KeyError as e:
        raise InvalidInputError("unknown curve", context={"curve": e.args[0][0], "pilot_length": n}) from e
    x_ref, x_other = snr_at_level(ref_rows, level), snr_at_level(other_rows, level)
    if x_ref is None or x_other is None:
        logger.warning("Curve does not reach level", extra={"level": level, "reference": reference, "other": other})
        return None
    return x_other - x_ref


def all_gaps(rows: Iterable[ResultRow], level: float) -> list[tuple[int, str, str, Optional[float]]]:
    """(pilot length, reference, other, gap) for every pair of curves sharing a pilot length."""
    rows = list(rows)
    grouped = curves(rows)
    out = []
    for n in sorted({n for _, n in grouped}):
        names = [c for c, m in grouped if m == n]
        for reference, other in combinations(names, 2):
            out.append((n, reference, other, snr_gap(rows, level, reference, other, pilot_length=n)))
    return out


__all__ = ["all_gaps", "curves", "snr_at_level", "snr_gap"]
