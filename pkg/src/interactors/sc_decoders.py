"""Successive-cancellation and SC-list reference decoders.

The recursion follows x = [(v_a xor v_b), v_b] with v_a = u_a·G', v_b = u_b·G' for the
halves of u, i.e. G_N = F^{⊗n} without bit reversal. LLRs are unclipped float64.
"""
from typing import Tuple, Union

import numpy as np

from entities.channel import LlrFrame
from entities.code import PolarCodeSpec
from entities.decoder import PATH_METRIC_EXACT, SclConfig
from interactors.bp_decoder import boxplus_exact, check_codeword


def _llrs(frame: Union[LlrFrame, np.ndarray]) -> np.ndarray:
    values = frame.values if isinstance(frame, LlrFrame) else frame
    return np.asarray(values, dtype=np.float64)


def _f(top: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    return boxplus_exact(top, bottom)


def _g(top: np.ndarray, bottom: np.ndarray, x_left: np.ndarray) -> np.ndarray:
    return bottom + (1.0 - 2.0 * x_left) * top


def sc_decode(spec: PolarCodeSpec, frame: Union[LlrFrame, np.ndarray]) -> np.ndarray:
    """Depth-first SC; returns the information bits in information-set order."""
    frozen = spec.frozen_mask
    u = np.zeros(spec.N, dtype=np.uint8)

    def descend(llr: np.ndarray, offset: int) -> np.ndarray:
        if llr.size == 1:
            bit = 0 if frozen[offset] else int(llr[0] < 0)
            u[offset] = bit
            return np.array([bit], dtype=np.uint8)
        h = llr.size // 2
        x_a = descend(_f(llr[:h], llr[h:]), offset)
        x_b = descend(_g(llr[:h], llr[h:], x_a), offset + h)
        return np.concatenate([x_a ^ x_b, x_b])

    descend(_llrs(frame), 0)
    return u[spec.info_indices]


def _penalty(llr: np.ndarray, bit: int, mode: str) -> np.ndarray:
    """Metric increment for deciding ``bit`` against an LLR."""
    signed = (1.0 - 2.0 * bit) * llr
    if mode == PATH_METRIC_EXACT:
        return np.logaddexp(0.0, -signed)
    return np.where(signed < 0, np.abs(llr), 0.0)


class _ListState:
    def __init__(self, N: int, list_size: int, mode: str):
        self.u = np.zeros((1, N), dtype=np.uint8)
        self.metrics = np.zeros(1)
        self.list_size = list_size
        self.mode = mode

    def frozen_leaf(self, llr: np.ndarray, offset: int) -> Tuple[np.ndarray, np.ndarray]:
        self.metrics = self.metrics + _penalty(llr, 0, self.mode)
        paths = llr.shape[0]
        return np.zeros((paths, 1), dtype=np.uint8), np.arange(paths)

    def info_leaf(self, llr: np.ndarray, offset: int) -> Tuple[np.ndarray, np.ndarray]:
        forks = np.stack(
            [self.metrics + _penalty(llr, 0, self.mode), self.metrics + _penalty(llr, 1, self.mode)],
            axis=1,
        ).ravel()
        # stable sort: equal metrics keep the lower path index, bit 0 before bit 1
        survivors = np.argsort(forks, kind="stable")[: self.list_size]
        parents = survivors // 2
        bits = (survivors % 2).astype(np.uint8)
        self.u = self.u[parents]
        self.u[:, offset] = bits
        self.metrics = forks[survivors]
        return bits[:, np.newaxis], parents


def scl_paths(
    spec: PolarCodeSpec, frame: Union[LlrFrame, np.ndarray], cfg: SclConfig
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Surviving paths after the last leaf: (u (P, N), x (P, N), metrics (P,))."""
    frozen = spec.frozen_mask
    state = _ListState(spec.N, cfg.list_size, cfg.path_metric)

    def descend(llr: np.ndarray, offset: int) -> Tuple[np.ndarray, np.ndarray]:
        if llr.shape[1] == 1:
            leaf = state.frozen_leaf if frozen[offset] else state.info_leaf
            return leaf(llr[:, 0], offset)
        h = llr.shape[1] // 2
        top, bottom = llr[:, :h], llr[:, h:]
        x_a, parents_a = descend(_f(top, bottom), offset)
        x_b, parents_b = descend(_g(top[parents_a], bottom[parents_a], x_a), offset + h)
        x = np.concatenate([x_a[parents_b] ^ x_b, x_b], axis=1)
        return x, parents_a[parents_b]

    x, _ = descend(_llrs(frame)[np.newaxis, :], 0)
    return state.u, x, state.metrics


def scl_decode(spec: PolarCodeSpec, frame: Union[LlrFrame, np.ndarray], cfg: SclConfig) -> np.ndarray:
    """Lowest-metric G-matrix-valid path; information bits in information-set order."""
    u, x, metrics = scl_paths(spec, frame, cfg)
    ranked = np.argsort(metrics, kind="stable")
    valid = check_codeword(u[ranked], x[ranked], spec)
    best = ranked[int(np.argmax(valid))] if np.any(valid) else ranked[0]
    return u[best, spec.info_indices]
