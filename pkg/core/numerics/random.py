from __future__ import annotations
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from utils.exceptions import InvalidInputError

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """
    Immutable descriptor of a counter-based random stream.

    The Philox generator is keyed by (seed, stream_id, *path); `substream(i)`
    appends a trial index, so draws for trial i never depend on how trials
    are spread over workers.
    """
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for label, value in (("seed", self.seed), ("stream_id", self.stream_id), *(("path", p) for p in self.path)):
            if not 0 <= int(value) < _U64:
                raise InvalidInputError(f"{label} must fit in an unsigned 64-bit integer", context={label: value})

    def substream(self, index: int) -> RngStream:
        return RngStream(seed=self.seed, stream_id=self.stream_id, path=(*self.path, int(index)))

    def child(self, stream_id: int) -> RngStream:
        """Independent stream sharing the seed and trial path."""
        return RngStream(seed=self.seed, stream_id=int(stream_id), path=self.path)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(seq))


def gaussian_complex(stream: RngStream, count, variance: float) -> npt.NDArray[np.complex128]:
    """
    Circularly symmetric complex Gaussian samples, CN(0, variance).

    `count` may be an int or a shape tuple. Real and imaginary parts are each
    N(0, variance/2).
    """
    if variance < 0 or not np.isfinite(variance):
        raise InvalidInputError("variance must be nonnegative and finite", context={"variance": variance})
    shape = (count,) if np.isscalar(count) else tuple(count)
    rng = stream.generator()
    parts = rng.standard_normal((*shape, 2))
    scale = np.sqrt(variance / 2.0)
    return scale * (parts[..., 0] + 1j * parts[..., 1])


__all__ = ["RngStream", "gaussian_complex"]
