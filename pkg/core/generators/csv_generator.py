import csv
import io
import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from utils.constants import CSV_SIGNIFICANT_DIGITS
from utils.exceptions import LabError

logger = logging.getLogger(__name__)

PROBABILITY_QUANTITIES = ("ber", "fer")


class CSVGenerationError(LabError):
    """I/O or format problem while writing or reading a result file"""
    def __init__(self, message: str, *, path: Optional[Path] = None, row: Optional[int] = None, original_exception: Optional[Exception] = None) -> None:
        context = {}
        if path is not None:
            context["path"] = str(path)
        if row is not None:
            context["row"] = row
        super().__init__(message, context=context, original_exception=original_exception)
        self.path = path


class ResultRow(BaseModel):
    """
    One measured point of a sweep.

    `quantity` is ber, fer, outage_rate or rate; `curve` names the metric
    (BER sweeps) or decoder (rate sweeps). `iteration` is the decoding pass a
    BER belongs to, 0 where not applicable.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: str
    quantity: str
    snr_db: float
    pilot_length: int = Field(ge=1)
    curve: str
    iteration: int = Field(default=0, ge=0)
    value: float
    trials: int = Field(ge=0)
    errors: Optional[int] = Field(default=None, ge=0)
    std_error: float = Field(ge=0.0)
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    censored: bool = False
    seed: int = Field(ge=0)

    @model_validator(mode="after")
    def probability_range(self) -> "ResultRow":
        if self.quantity in PROBABILITY_QUANTITIES and not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.quantity} must lie in [0, 1], got {self.value}")
        return self


FIELDNAMES: List[str] = list(ResultRow.model_fields)


def format_float(value: float) -> str:
    if math.isnan(value):
        return "nan"
    return f"{value:.{CSV_SIGNIFICANT_DIGITS}g}"


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _row_dict(row: ResultRow) -> Dict[str, str]:
    return {name: _format_cell(getattr(row, name)) for name in FIELDNAMES}


def _parse_row(raw: Dict[str, str]) -> ResultRow:
    data = {}
    for name in FIELDNAMES:
        cell = raw.get(name, "")
        if cell == "":
            continue
        data[name] = {"true": True, "false": False}.get(cell, cell) if name == "censored" else cell
    return ResultRow.model_validate(data)


def render_csv(rows: Iterable[ResultRow]) -> str:
    """Header plus one line per row, LF line endings."""
    output = io.StringIO()
    writer = csv.DictWriter(output, fieldnames=FIELDNAMES, lineterminator="\n")
    writer.writeheader()
    writer.writerows(_row_dict(r) for r in rows)
    return output.getvalue()


def emit_csv(rows: Iterable[ResultRow], path: Path) -> Path:
    """Write rows to path, creating parent directories. Output depends only on the rows."""
    path = Path(path)
    rows = list(rows)
    content = render_csv(rows)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as csvfile:
            csvfile.write(content)
    except OSError as e:
        raise CSVGenerationError(f"Failed to write CSV file: {e}", path=path, original_exception=e) from e
    logger.info(f"CSV file generated successfully: {path} ({len(rows)} rows)")
    return path


def read_csv(path: Path) -> List[ResultRow]:
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as csvfile:
            reader = csv.DictReader(csvfile)
            if reader.fieldnames is None:
                raise CSVGenerationError("Result file has no header", path=path)
            missing = [name for name in ("experiment", "quantity", "snr_db", "curve", "value") if name not in reader.fieldnames]
            if missing:
                raise CSVGenerationError(f"Result file lacks columns {missing}", path=path)
            rows = []
            for n, raw in enumerate(reader, start=1):
                try:
                    rows.append(_parse_row(raw))
                except ValueError as e:
                    raise CSVGenerationError(f"Malformed result row: {e}", path=path, row=n) from e
    except OSError as e:
        raise CSVGenerationError(f"Failed to read CSV file: {e}", path=path, original_exception=e) from e
    logger.debug(f"Read {len(rows)} rows from {path}")
    return rows


__all__ = [
    "CSVGenerationError",
    "FIELDNAMES",
    "ResultRow",
    "emit_csv",
    "format_float",
    "read_csv",
    "render_csv",
]
