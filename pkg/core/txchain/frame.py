from __future__ import annotations
from dataclasses import dataclass
import logging

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict

from core.txchain.coding import Bits, CodeSpec, convolutional_encode, interleave
from core.txchain.modulation import map_bits
from utils.constants import BITS_PER_SYMBOL, DEFAULT_INTERLEAVER_SEED, TX_ANTENNAS
from utils.exceptions import ConfigurationError, InvalidInputError
from utils.validators import PositiveInt, Seed

logger = logging.getLogger(__name__)


class FrameSpec(BaseModel):
    """One coded frame spread over M subcarriers and M_T antennas"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    num_subcarriers: PositiveInt
    tx_antennas: PositiveInt = TX_ANTENNAS
    bits_per_symbol: PositiveInt = BITS_PER_SYMBOL
    interleaver_seed: Seed = DEFAULT_INTERLEAVER_SEED

    @property
    def coded_bits(self) -> int:
        return self.num_subcarriers * self.tx_antennas * self.bits_per_symbol

    @property
    def bits_per_subcarrier(self) -> int:
        return self.tx_antennas * self.bits_per_symbol

    def info_bits(self, code: CodeSpec) -> int:
        """Information bits per frame, tail excluded."""
        if self.coded_bits % code.num_outputs:
            raise ConfigurationError(
                "coded frame length is not a multiple of the code's output count",
                context={"coded_bits": self.coded_bits, "outputs": code.num_outputs},
            )
        count = self.coded_bits // code.num_outputs - code.memory
        if count < 1:
            raise ConfigurationError("frame too short for the code tail", context={"coded_bits": self.coded_bits})
        return count

    def bit_index(self, k: int, i: int, m: int) -> int:
        """Interleaved-bit index of bit m on antenna i of subcarrier k."""
        return k * self.bits_per_subcarrier + i * self.bits_per_symbol + m


@dataclass(frozen=True)
class CodedFrame:
    """Transmitter products of one frame, or a stack of frames along axis 0"""
    info_bits: Bits
    coded_bits: Bits
    interleaved_bits: Bits
    symbols: npt.NDArray[np.complex128]


def assemble_frame(info_bits, frame_spec: FrameSpec, code_spec: CodeSpec) -> CodedFrame:
    """
    Encode, interleave and map. The last axis of `info_bits` is one frame;
    leading axes are kept, so a (frames, bits) array builds a whole batch.
    Symbols come out with shape (..., M, M_T).
    """
    if frame_spec.bits_per_symbol != BITS_PER_SYMBOL:
        raise ConfigurationError("only 16-QAM is supported", context={"bits_per_symbol": frame_spec.bits_per_symbol})
    u = np.asarray(info_bits, dtype=np.int8)
    expected = frame_spec.info_bits(code_spec)
    if u.shape[-1] != expected:
        raise InvalidInputError("info bit count does not match the frame", context={"length": u.shape[-1], "expected": expected})

    coded = convolutional_encode(u, code_spec)
    d = interleave(coded, frame_spec.interleaver_seed, expected_length=frame_spec.coded_bits)
    symbols = map_bits(d).reshape(*d.shape[:-1], frame_spec.num_subcarriers, frame_spec.tx_antennas)
    return CodedFrame(info_bits=u, coded_bits=coded, interleaved_bits=d, symbols=symbols)


__all__ = ["CodedFrame", "FrameSpec", "assemble_frame"]
