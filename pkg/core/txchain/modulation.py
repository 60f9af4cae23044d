"""Gray-labelled 16-QAM: bits (b0 b1) pick the in-phase level, (b2 b3) the quadrature level."""

from functools import lru_cache

import numpy as np
import numpy.typing as npt

from utils.constants import BITS_PER_SYMBOL, GRAY_PAM4_LEVELS, QAM16_SCALE
from utils.exceptions import InvalidInputError

_PAM4 = np.array([GRAY_PAM4_LEVELS[(b0, b1)] for b0 in (0, 1) for b1 in (0, 1)])


def qam16_gray_map(bits) -> complex:
    """Map exactly four bits to one unit-average-energy symbol."""
    arr = np.asarray(bits)
    if arr.shape != (BITS_PER_SYMBOL,):
        raise InvalidInputError("16-QAM symbols take exactly four bits", context={"shape": arr.shape})
    return complex(map_bits(arr)[0])


def map_bits(bits) -> npt.NDArray[np.complex128]:
    """Map the last axis in groups of four bits; output length shrinks by four."""
    arr = np.asarray(bits, dtype=np.int64)
    if arr.shape[-1] % BITS_PER_SYMBOL:
        raise InvalidInputError("bit count must be a multiple of four", context={"length": arr.shape[-1]})
    groups = arr.reshape(*arr.shape[:-1], -1, BITS_PER_SYMBOL)
    in_phase = _PAM4[2 * groups[..., 0] + groups[..., 1]]
    quadrature = _PAM4[2 * groups[..., 2] + groups[..., 3]]
    return QAM16_SCALE * (in_phase + 1j * quadrature)


@lru_cache(maxsize=1)
def constellation() -> npt.NDArray[np.complex128]:
    """All 16 points; entry i carries the label given by i in binary, MSB first."""
    labels = (np.arange(16)[:, None] >> np.arange(BITS_PER_SYMBOL - 1, -1, -1)) & 1
    points = map_bits(labels.reshape(-1))
    points.setflags(write=False)
    return points


__all__ = ["constellation", "map_bits", "qam16_gray_map"]
