"""
Log-domain forward-backward (BCJR) decoder for terminated feedforward codes.

Coded-bit LLRs follow L = ln P(c=1) - ln P(c=0). A transition emitting
outputs c gets branch metric Σ_j c_j L_j, the uniform info prior adds nothing
and tail steps only allow the zero input.
"""

from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
import logging

import numpy as np
import numpy.typing as npt
from scipy.special import expit, logsumexp

from core.txchain.coding import CodeSpec
from utils.constants import LLR_CLAMP
from utils.exceptions import InvalidInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrellisSpec:
    """State s packs (u_{t-1}, ..., u_{t-memory}) with u_{t-1} as the MSB"""
    num_states: int
    memory: int
    num_outputs: int
    next_state: npt.NDArray[np.intp]
    outputs: npt.NDArray[np.int8]
    prev_state: npt.NDArray[np.intp]
    prev_input: npt.NDArray[np.intp]

    @classmethod
    def from_code(cls, code: CodeSpec) -> TrellisSpec:
        return _build_trellis(code)


@lru_cache(maxsize=8)
def _build_trellis(code: CodeSpec) -> TrellisSpec:
    memory = code.memory
    num_states = 1 << memory
    next_state = np.zeros((num_states, 2), dtype=np.intp)
    outputs = np.zeros((num_states, 2, code.num_outputs), dtype=np.int8)
    for s in range(num_states):
        history = [(s >> (memory - d)) & 1 for d in range(1, memory + 1)]
        for u in (0, 1):
            next_state[s, u] = (u << (memory - 1)) | (s >> 1) if memory else 0
            register = [u, *history]
            for j, taps in enumerate(code.taps):
                outputs[s, u, j] = int(np.dot(taps, register)) & 1

    prev_state = np.zeros((num_states, 2), dtype=np.intp)
    prev_input = np.zeros((num_states, 2), dtype=np.intp)
    fill = np.zeros(num_states, dtype=np.intp)
    for s in range(num_states):
        for u in (0, 1):
            target = next_state[s, u]
            prev_state[target, fill[target]] = s
            prev_input[target, fill[target]] = u
            fill[target] += 1
    return TrellisSpec(
        num_states=num_states,
        memory=memory,
        num_outputs=code.num_outputs,
        next_state=next_state,
        outputs=outputs,
        prev_state=prev_state,
        prev_input=prev_input,
    )


def bcjr_decode(coded_llrs, trellis: TrellisSpec, num_info_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """
    MAP decoding over the last axis of `coded_llrs`, batched over leading axes.

    Returns (info_llrs, extrinsic) where extrinsic[..., j, :] holds the
    probability pair (P0, P1) of coded bit j with its own channel LLR removed.
    """
    llr = np.asarray(coded_llrs, dtype=np.float64)
    steps = num_info_bits + trellis.memory
    if llr.shape[-1] != steps * trellis.num_outputs:
        raise InvalidInputError(
            "coded LLR count does not match the terminated trellis",
            context={"length": llr.shape[-1], "expected": steps * trellis.num_outputs},
        )
    batch = llr.shape[:-1]
    per_step = llr.reshape(*batch, steps, trellis.num_outputs)

    # gamma[..., t, s, u]
    gamma = np.einsum("...tj,suj->...tsu", per_step, trellis.outputs.astype(np.float64))
    gamma[..., num_info_bits:, :, 1] = -np.inf

    alpha = np.full((*batch, steps + 1, trellis.num_states), -np.inf)
    beta = np.full_like(alpha, -np.inf)
    alpha[..., 0, 0] = 0.0
    beta[..., steps, 0] = 0.0

    for t in range(steps):
        branch = alpha[..., t, :, None] + gamma[..., t, :, :]
        nxt = logsumexp(branch[..., trellis.prev_state, trellis.prev_input], axis=-1)
        alpha[..., t + 1, :] = nxt - np.max(nxt, axis=-1, keepdims=True)

    for t in range(steps - 1, -1, -1):
        ahead = gamma[..., t, :, :] + beta[..., t + 1, trellis.next_state]
        prev = logsumexp(ahead, axis=-1)
        beta[..., t, :] = prev - np.max(prev, axis=-1, keepdims=True)

    # joint[..., t, s, u] = log P(s_t = s, u_t = u, all observations)
    joint = alpha[..., :-1, :, None] + gamma + beta[..., 1:, :][..., trellis.next_state]

    info = joint[..., :num_info_bits, :, :]
    info_llrs = logsumexp(info[..., 1], axis=-1) - logsumexp(info[..., 0], axis=-1)

    ones = trellis.outputs.astype(bool)
    app = np.empty((*batch, steps, trellis.num_outputs))
    for j in range(trellis.num_outputs):
        flat = joint.reshape(*batch, steps, -1)
        mask = ones[..., j].reshape(-1)
        app[..., j] = logsumexp(flat[..., mask], axis=-1) - logsumexp(flat[..., ~mask], axis=-1)

    extrinsic_llr = np.clip(app - per_step, -LLR_CLAMP, LLR_CLAMP).reshape(*batch, -1)
    extrinsic = np.stack([expit(-extrinsic_llr), expit(extrinsic_llr)], axis=-1)
    return np.clip(info_llrs, -LLR_CLAMP, LLR_CLAMP), extrinsic


__all__ = ["TrellisSpec", "bcjr_decode"]
