from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
import logging

import numpy as np
import numpy.typing as npt
from scipy.special import logsumexp

from core.rxchain.metrics import ReceiverCsi, candidate_metrics
from core.txchain.modulation import constellation
from utils.constants import BITS_PER_SYMBOL, LLR_CLAMP, PRIOR_FLOOR
from utils.exceptions import DegeneratePriorError, InvalidInputError

logger = logging.getLogger(__name__)

# complex entries of the (..., K, M_R) candidate means per demapping chunk
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class CandidateSet:
    """
    All M_c^{M_T} transmit vectors. Candidate c carries the label given by c in
    binary, MSB first, antenna 0 taking the leading B bits.
    """
    vectors: npt.NDArray[np.complex128]
    labels: npt.NDArray[np.int8]
    ones: npt.NDArray[np.intp]
    zeros: npt.NDArray[np.intp]

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    @property
    def bits(self) -> int:
        return self.labels.shape[1]


@lru_cache(maxsize=4)
def candidate_set(tx_antennas: int) -> CandidateSet:
    nbits = tx_antennas * BITS_PER_SYMBOL
    index = np.arange(1 << nbits)
    labels = ((index[:, None] >> np.arange(nbits - 1, -1, -1)) & 1).astype(np.int8)
    points = constellation()
    symbol_index = np.zeros((index.size, tx_antennas), dtype=np.intp)
    for i in range(tx_antennas):
        shift = (tx_antennas - 1 - i) * BITS_PER_SYMBOL
        symbol_index[:, i] = (index >> shift) & (len(points) - 1)
    vectors = points[symbol_index]

    ones = np.stack([np.flatnonzero(labels[:, j]) for j in range(nbits)])
    zeros = np.stack([np.flatnonzero(labels[:, j] == 0) for j in range(nbits)])
    for arr in (vectors, labels, ones, zeros):
        arr.setflags(write=False)
    return CandidateSet(vectors=vectors, labels=labels, ones=ones, zeros=zeros)


def normalize_priors(priors, shape: tuple[int, ...]) -> npt.NDArray[np.float64]:
    """Probability pairs (P0, P1) per bit, renormalized; None means uniform."""
    if priors is None:
        return np.full((*shape, 2), 0.5)
    p = np.asarray(priors, dtype=np.float64)
    if p.shape != (*shape, 2):
        raise InvalidInputError("prior shape does not match the bits", context={"priors": p.shape, "expected": (*shape, 2)})
    if not np.all(np.isfinite(p)) or np.any(p < 0.0):
        raise DegeneratePriorError("priors must be finite and nonnegative")
    total = p.sum(axis=-1, keepdims=True)
    if np.any(total <= 0.0):
        raise DegeneratePriorError("prior pair sums to zero", context={"count": int(np.sum(total <= 0.0))})
    return p / total


def _extrinsic_llrs(log_likelihood, log_p0, log_p1, cands: CandidateSet):
    """L_j = ln Σ_{c_j=1} W̃ Π_{n≠j} P - ln Σ_{c_j=0} W̃ Π_{n≠j} P"""
    labels = cands.labels.astype(np.float64)
    log_prior = log_p1 @ labels.T + log_p0 @ (1.0 - labels).T
    z = log_likelihood + log_prior
    num = logsumexp(z[..., cands.ones], axis=-1) - log_p1
    den = logsumexp(z[..., cands.zeros], axis=-1) - log_p0
    return np.clip(num - den, -LLR_CLAMP, LLR_CLAMP)


def demap_llrs(y, csi: ReceiverCsi, priors=None) -> npt.NDArray[np.float64]:
    """
    Extrinsic LLRs of the B*M_T bits on each subcarrier.

    y is (..., M_R) with csi.matrices (..., M_R, M_T); priors, when given,
    are (..., B*M_T, 2) probability pairs from the decoder.
    """
    y = np.asarray(y, dtype=np.complex128)
    tx_antennas = csi.matrices.shape[-1]
    cands = candidate_set(tx_antennas)
    lead = y.shape[:-1]
    if csi.matrices.shape[:-2] != lead:
        raise InvalidInputError("observation and channel disagree", context={"y": y.shape, "h": csi.matrices.shape})

    p = normalize_priors(priors, (*lead, cands.bits))
    log_p = np.log(np.maximum(p, PRIOR_FLOOR))

    flat_y = y.reshape(-1, y.shape[-1])
    flat_h = csi.matrices.reshape(-1, *csi.matrices.shape[-2:])
    flat_p = log_p.reshape(-1, cands.bits, 2)
    out = np.empty((flat_y.shape[0], cands.bits))
    chunk = max(1, _CHUNK_ELEMENTS // (cands.size * y.shape[-1]))
    for start in range(0, flat_y.shape[0], chunk):
        sl = slice(start, start + chunk)
        part = ReceiverCsi(flat_h[sl], csi.noise_variance, csi.shrinkage, csi.error_variance)
        metrics = candidate_metrics(flat_y[sl], part, cands.vectors)
        out[sl] = _extrinsic_llrs(-metrics, flat_p[sl, :, 0], flat_p[sl, :, 1], cands)
    return out.reshape(*lead, cands.bits)


__all__ = ["CandidateSet", "candidate_set", "demap_llrs", "normalize_priors"]
