from __future__ import annotations
import logging
from typing import Optional

logger = logging.getLogger(__name__)


class LabError(Exception):
    """Base error for the lab, carrying a context dict for logs and manifests"""
    def __init__(self, message: str, *, context: Optional[dict] = None, original_exception: Optional[Exception] = None) -> None:
        self.message = message
        self.context = context or {}
        self.original_exception = original_exception

        details = [f"{k}={v}" for k, v in self.context.items()]
        if original_exception:
            details.append(f"Original error: {original_exception}")
        full_message = f"{message} | {' | '.join(details)}" if details else message

        if original_exception:
            logger.error(full_message, exc_info=original_exception)

        super().__init__(full_message)

    def __str__(self):
        return self.message

    def get_context(self) -> dict:
        ctx = {"message": self.message, **self.context}
        if self.original_exception:
            ctx["original_error"] = str(self.original_exception)
        return ctx


class InvalidInputError(LabError):
    """Non-finite entries or mismatched dimensions"""


class DomainError(LabError):
    """Special function evaluated outside its domain"""


class ConfigurationError(LabError):
    """Invalid channel, frame or experiment configuration"""


class PilotDesignError(ConfigurationError):
    """Training matrix with singular Gram matrix"""


class DegeneratePriorError(LabError):
    pass


class SingularityError(LabError):
    """Rate expression with a vanishing or negative effective variance"""


__all__ = [
    "LabError",
    "InvalidInputError",
    "DomainError",
    "ConfigurationError",
    "PilotDesignError",
    "DegeneratePriorError",
    "SingularityError",
]
