from typing import Annotated

from pydantic import Field

PositiveInt = Annotated[int, Field(ge=1)]
PositiveFloat = Annotated[float, Field(gt=0.0)]
NonNegativeFloat = Annotated[float, Field(ge=0.0)]

probability_validator = Field(gt=0.0, lt=1.0)
OutageProbability = Annotated[float, probability_validator]

draw_count_validator = Field(ge=100)
DrawCount = Annotated[int, draw_count_validator]

seed_validator = Field(ge=0, lt=2**64)
Seed = Annotated[int, seed_validator]

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def validate_log_level(v: str) -> str:
    v_upper = v.upper()
    if v_upper not in LOG_LEVELS:
        raise ValueError(f"LOG_LEVEL must be one of {list(LOG_LEVELS)}, got {v}")
    return v_upper
