from __future__ import annotations
from dataclasses import dataclass
from functools import cached_property, lru_cache
import logging

import numpy as np
import numpy.typing as npt

from core.numerics.random import RngStream
from utils.constants import CONSTRAINT_LENGTH, GENERATORS_OCTAL
from utils.exceptions import ConfigurationError, InvalidInputError

logger = logging.getLogger(__name__)

Bits = npt.NDArray[np.int8]


@dataclass(frozen=True)
class CodeSpec:
    """Feedforward non-systematic convolutional code, e.g. (5, 7) with K = 3"""
    constraint_length: int = CONSTRAINT_LENGTH
    generators_octal: tuple[int, ...] = GENERATORS_OCTAL

    def __post_init__(self) -> None:
        if self.constraint_length < 1:
            raise ConfigurationError("constraint length must be positive", context={"constraint_length": self.constraint_length})
        limit = 1 << self.constraint_length
        for g in self.generators_octal:
            if not 0 < g < limit:
                raise ConfigurationError(
                    "generator must be nonzero and fit in the constraint length",
                    context={"generator": oct(g), "constraint_length": self.constraint_length},
                )

    @property
    def num_outputs(self) -> int:
        return len(self.generators_octal)

    @property
    def rate(self) -> float:
        return 1.0 / self.num_outputs

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @cached_property
    def taps(self) -> npt.NDArray[np.int8]:
        """taps[j, d] multiplies the input delayed by d for output j; MSB is delay 0."""
        k = self.constraint_length
        return np.array([[(g >> (k - 1 - d)) & 1 for d in range(k)] for g in self.generators_octal], dtype=np.int8)


def _as_bits(bits, *, name: str = "bits") -> Bits:
    arr = np.asarray(bits)
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise InvalidInputError(f"{name} must contain only 0 and 1", context={"shape": arr.shape})
    return arr.astype(np.int8)


def convolutional_encode(info_bits, spec: CodeSpec, *, terminate: bool = True) -> Bits:
    """
    Encode along the last axis; outputs are interleaved per step as (g0, g1, ...).

    With `terminate` the encoder appends `memory` zero bits so the trellis
    ends in state 0.
    """
    u = _as_bits(info_bits, name="info_bits")
    if terminate and spec.memory:
        tail = np.zeros((*u.shape[:-1], spec.memory), dtype=np.int8)
        u = np.concatenate([u, tail], axis=-1)

    steps = u.shape[-1]
    padded = np.concatenate([np.zeros((*u.shape[:-1], spec.memory), dtype=np.int8), u], axis=-1)
    out = np.zeros((*u.shape[:-1], steps, spec.num_outputs), dtype=np.int8)
    for j, taps in enumerate(spec.taps):
        for d, tap in enumerate(taps):
            if tap:
                out[..., j] ^= padded[..., spec.memory - d: spec.memory - d + steps]
    return out.reshape(*u.shape[:-1], steps * spec.num_outputs)


@lru_cache(maxsize=64)
def _permutation(length: int, seed: int) -> npt.NDArray[np.intp]:
    perm = RngStream(seed, stream_id=0x1EAF).generator().permutation(length)
    perm.setflags(write=False)
    return perm


def interleaver_permutation(length: int, seed: int) -> npt.NDArray[np.intp]:
    """Seeded uniform permutation; interleaved[j] = bits[perm[j]]."""
    if length < 1:
        raise InvalidInputError("interleaver length must be positive", context={"length": length})
    return _permutation(int(length), int(seed))


def _check_length(values: np.ndarray, expected_length: int | None) -> int:
    length = values.shape[-1]
    if expected_length is not None and length != expected_length:
        raise InvalidInputError(
            "frame length does not match the interleaver",
            context={"length": length, "expected": expected_length},
        )
    return length


def interleave(values, seed: int, *, expected_length: int | None = None) -> np.ndarray:
    """Permute along the last axis; works for bits, LLRs and probabilities alike."""
    arr = np.asarray(values)
    perm = interleaver_permutation(_check_length(arr, expected_length), seed)
    return arr[..., perm]


def deinterleave(values, seed: int, *, expected_length: int | None = None) -> np.ndarray:
    arr = np.asarray(values)
    perm = interleaver_permutation(_check_length(arr, expected_length), seed)
    out = np.empty_like(arr)
    out[..., perm] = arr
    return out


__all__ = [
    "Bits",
    "CodeSpec",
    "convolutional_encode",
    "deinterleave",
    "interleave",
    "interleaver_permutation",
]
