from __future__ import annotations
from dataclasses import dataclass, field
import logging

import numpy as np
import numpy.typing as npt

from core.rxchain.bcjr import TrellisSpec, bcjr_decode
from core.rxchain.demapper import demap_llrs
from core.rxchain.metrics import ReceiverCsi
from core.txchain.coding import CodeSpec, deinterleave, interleave
from core.txchain.frame import FrameSpec
from utils.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LlrFrame:
    """Deinterleaved coded-bit LLRs and the decoder's extrinsic pairs (P0, P1)"""
    coded_llrs: npt.NDArray[np.float64]
    extrinsic_priors: npt.NDArray[np.float64]


@dataclass(frozen=True)
class ReceiveResult:
    decisions: list[npt.NDArray[np.int8]] = field(default_factory=list)
    last_frame: LlrFrame | None = None

    @property
    def info_bits(self) -> npt.NDArray[np.int8]:
        return self.decisions[-1]


def iterative_receive(y, csi: ReceiverCsi, frame_spec: FrameSpec, code_spec: CodeSpec, iterations: int) -> ReceiveResult:
    """
    BICM-ID loop: demap, deinterleave, BCJR, interleave extrinsics, repeat.

    y is (..., M, M_R); leading axes are independent frames. Hard decisions
    are kept after every BCJR pass.
    """
    if iterations < 1:
        raise ConfigurationError("at least one decoding iteration is required", context={"iterations": iterations})
    y = np.asarray(y, dtype=np.complex128)
    trellis = TrellisSpec.from_code(code_spec)
    num_info = frame_spec.info_bits(code_spec)
    lead = y.shape[:-2]
    seed = frame_spec.interleaver_seed
    length = frame_spec.coded_bits

    priors = None
    decisions = []
    frame = None
    for it in range(iterations):
        llrs = demap_llrs(y, csi, priors).reshape(*lead, length)
        coded_llrs = deinterleave(llrs, seed, expected_length=length)
        info_llrs, extrinsic = bcjr_decode(coded_llrs, trellis, num_info)
        decisions.append((info_llrs > 0).astype(np.int8))
        frame = LlrFrame(coded_llrs=coded_llrs, extrinsic_priors=extrinsic)

        p0 = interleave(extrinsic[..., 0], seed)
        p1 = interleave(extrinsic[..., 1], seed)
        priors = np.stack([p0, p1], axis=-1).reshape(*lead, frame_spec.num_subcarriers, frame_spec.bits_per_subcarrier, 2)
        logger.debug("Finished decoding iteration", extra={"iteration": it + 1, "frames": int(np.prod(lead, dtype=int))})

    return ReceiveResult(decisions=decisions, last_frame=frame)


__all__ = ["LlrFrame", "ReceiveResult", "iterative_receive"]
