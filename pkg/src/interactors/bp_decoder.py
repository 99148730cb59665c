"""Belief-propagation decoding over the polar factor graph.

Messages follow L = ln(P(0)/P(1)). One iteration is a full L-pass from the channel
side to the u side followed by a full R-pass back. Every message written is clipped
to +-llr_max; the two-term sums feeding the boxplus are formed unclipped.
"""
import itertools
from typing import Callable, Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from entities.channel import LlrFrame
from entities.code import PolarCodeSpec
from entities.decoder import (
    BOXPLUS_EXACT,
    STOP_GMATRIX,
    BatchDecodeResult,
    DecodeResult,
    DecoderConfig,
    MessageGraph,
)
from entities.errors import ParameterError
from interactors.polar_core import encode_full

Boxplus = Callable[[np.ndarray, np.ndarray], np.ndarray]


def boxplus_exact(a, b):
    """ln((1 + e^(a+b)) / (e^a + e^b)) in the overflow-free min + correction form."""
    a = np.asarray(a)
    b = np.asarray(b)
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def boxplus_min(a, b):
    """Min-sum approximation: sign(a)sign(b)min(|a|, |b|)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def boxplus_for(mode: str) -> Boxplus:
    """Boxplus function for a DecoderConfig mode."""
    return boxplus_exact if mode == BOXPLUS_EXACT else boxplus_min


def _clip(values, llr_max):
    if isinstance(values, np.ndarray):
        return np.clip(values, -llr_max, llr_max, out=values)
    return np.clip(values, -llr_max, llr_max)


def _scaled(values: np.ndarray, alpha) -> np.ndarray:
    if alpha != 1:
        values *= alpha
    return values


def _left_outputs(L_in1, L_in2, R_in1, R_in2, f: Boxplus, alpha, llr_max):
    L_out1 = _clip(_scaled(f(L_in1, L_in2 + R_in2), alpha), llr_max)
    L_out2 = _clip(_scaled(f(R_in1, L_in1), alpha) + L_in2, llr_max)
    return L_out1, L_out2


def _right_outputs(L_in1, L_in2, R_in1, R_in2, f: Boxplus, alpha, llr_max):
    R_out1 = _clip(_scaled(f(R_in1, L_in2 + R_in2), alpha), llr_max)
    R_out2 = _clip(_scaled(f(R_in1, L_in1), alpha) + R_in2, llr_max)
    return R_out1, R_out2


def pe_update(L_in1, L_in2, R_in1, R_in2, f: Boxplus = boxplus_min, alpha: float = 1.0, llr_max: float = np.inf):
    """All four outputs of one processing element: (R_out1, R_out2, L_out1, L_out2)."""
    args = [np.array(v, dtype=np.float64) for v in (L_in1, L_in2, R_in1, R_in2)]
    R_out1, R_out2 = _right_outputs(*args, f, alpha, llr_max)
    L_out1, L_out2 = _left_outputs(*args, f, alpha, llr_max)
    return R_out1, R_out2, L_out1, L_out2


def layer_orders(n: int, count: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Layer orders for multi-trellis decoding.

    Identity first, then the n-1 cyclic left rotations, then the remaining
    permutations in lexicographic order. The kernel layers act on distinct index
    bits and commute, so every order realises the same G_N.
    """
    identity = tuple(range(n))
    seen = set()
    rotations = (tuple((i + r) % n for i in range(n)) for r in range(n))
    for order in itertools.chain(rotations, itertools.permutations(identity)):
        if order in seen:
            continue
        if count is not None and len(seen) >= count:
            return
        seen.add(order)
        yield order


def _check_order(n: int, layer_order: Optional[Sequence[int]]) -> Tuple[int, ...]:
    if layer_order is None:
        return tuple(range(n))
    order = tuple(int(b) for b in layer_order)
    if sorted(order) != list(range(n)):
        raise ParameterError(f"Layer order must be a permutation of 0..{n - 1}, got {order}")
    return order


def default_priors(spec: PolarCodeSpec, cfg: DecoderConfig) -> np.ndarray:
    """Stage-1 R-messages: +llr_max on frozen positions, 0 on information positions."""
    priors = np.zeros(spec.N, dtype=cfg.dtype)
    priors[spec.frozen_mask] = cfg.llr_max
    return priors


def init_messages(
    spec: PolarCodeSpec,
    frame: Union[LlrFrame, np.ndarray],
    cfg: DecoderConfig,
    priors: Optional[np.ndarray] = None,
    layer_order: Optional[Sequence[int]] = None,
) -> MessageGraph:
    """Fresh message graph for one frame (1-D) or a batch of frames (2-D)."""
    llrs = frame.values if isinstance(frame, LlrFrame) else np.asarray(frame)
    llrs = np.atleast_2d(llrs)
    if llrs.shape[-1] != spec.N:
        raise ParameterError(f"Frame length {llrs.shape[-1]} does not match N={spec.N}")
    dtype = cfg.dtype
    llr_max = dtype(cfg.llr_max)
    batch = llrs.shape[0]
    L = np.zeros((spec.n + 1, batch, spec.N), dtype=dtype)
    R = np.zeros_like(L)
    L[spec.n] = llrs.astype(dtype)
    _clip(L[spec.n], llr_max)
    R[0] = default_priors(spec, cfg) if priors is None else np.asarray(priors, dtype=dtype)
    return MessageGraph(L=L, R=R, layer_order=_check_order(spec.n, layer_order), llr_max=float(llr_max))


def _butterfly(stage: np.ndarray, h: int) -> Tuple[np.ndarray, np.ndarray]:
    """Top (index bit clear) and bottom halves of every PE in one stage."""
    view = stage.reshape(stage.shape[0], -1, 2, h)
    return view[:, :, 0, :], view[:, :, 1, :]


def run_iteration(graph: MessageGraph, cfg: DecoderConfig) -> MessageGraph:
    """One L-pass followed by one R-pass, updating the graph in place."""
    f = boxplus_for(cfg.boxplus_mode)
    dtype = graph.L.dtype.type
    alpha = dtype(cfg.alpha)
    llr_max = dtype(graph.llr_max)
    L, R = graph.L, graph.R
    n = graph.n
    for layer in reversed(range(n)):
        h = 1 << graph.layer_order[layer]
        L_in1, L_in2 = _butterfly(L[layer + 1], h)
        R_in1, R_in2 = _butterfly(R[layer], h)
        out1, out2 = _butterfly(L[layer], h)
        out1[...], out2[...] = _left_outputs(L_in1, L_in2, R_in1, R_in2, f, alpha, llr_max)
    if cfg.debug_checks:
        assert graph.max_abs() <= graph.llr_max, "L-pass wrote a message beyond llr_max"
    for layer in range(n):
        h = 1 << graph.layer_order[layer]
        L_in1, L_in2 = _butterfly(L[layer + 1], h)
        R_in1, R_in2 = _butterfly(R[layer], h)
        out1, out2 = _butterfly(R[layer + 1], h)
        out1[...], out2[...] = _right_outputs(L_in1, L_in2, R_in1, R_in2, f, alpha, llr_max)
    if cfg.debug_checks:
        assert graph.max_abs() <= graph.llr_max, "R-pass wrote a message beyond llr_max"
    return graph


def hard_decision(graph: MessageGraph) -> Tuple[np.ndarray, np.ndarray]:
    """(u_hat, x_hat) for every frame in the batch; a zero LLR decides 0."""
    n = graph.n
    u_hat = ((graph.L[0] + graph.R[0]) < 0).astype(np.uint8)
    x_hat = ((graph.L[n] + graph.R[n]) < 0).astype(np.uint8)
    return u_hat, x_hat


def check_codeword(u_hat: np.ndarray, x_hat: np.ndarray, spec: PolarCodeSpec):
    """x_hat == u_hat·G_N and u_hat is zero on every frozen position."""
    u_hat = np.asarray(u_hat, dtype=np.uint8)
    x_hat = np.asarray(x_hat, dtype=np.uint8)
    consistent = np.all(encode_full(u_hat) == x_hat, axis=-1)
    frozen_ok = ~np.any(u_hat[..., spec.frozen_mask] != 0, axis=-1)
    result = consistent & frozen_ok
    return bool(result) if result.ndim == 0 else result


def decode_batch(
    spec: PolarCodeSpec,
    llrs: np.ndarray,
    cfg: DecoderConfig,
    priors: Optional[np.ndarray] = None,
    layer_order: Optional[Sequence[int]] = None,
) -> BatchDecodeResult:
    """Decode a (B, N) block of channel LLRs.

    Frames that pass the G-matrix check leave the working set, so each row is
    bit-identical to decoding that frame on its own.
    """
    graph = init_messages(spec, llrs, cfg, priors, layer_order)
    batch, N = graph.batch, spec.N
    window = cfg.flip_window

    u_out = np.zeros((batch, N), dtype=np.uint8)
    x_out = np.zeros((batch, N), dtype=np.uint8)
    llr_out = np.zeros((batch, N), dtype=graph.L.dtype)
    flips_out = np.zeros((batch, N), dtype=np.int32)
    iters_out = np.zeros(batch, dtype=np.int64)
    conv_out = np.zeros(batch, dtype=bool)

    active = np.arange(batch)
    flips = np.zeros((window, batch, N), dtype=bool)
    previous = None
    for iteration in range(1, cfg.max_iters + 1):
        run_iteration(graph, cfg)
        u_llr = graph.L[0] + graph.R[0]
        signs = u_llr < 0
        if previous is not None:
            flips[iteration % window] = signs != previous
        previous = signs
        u_hat, x_hat = hard_decision(graph)
        last = iteration == cfg.max_iters
        if cfg.stopping != STOP_GMATRIX and not last:
            continue
        valid = check_codeword(u_hat, x_hat, spec)
        done = valid | last
        if not done.any():
            continue
        ids = active[done]
        u_out[ids] = u_hat[done]
        x_out[ids] = x_hat[done]
        llr_out[ids] = u_llr[done]
        flips_out[ids] = flips[:, done].sum(axis=0)
        iters_out[ids] = iteration
        conv_out[ids] = valid[done]
        keep = ~done
        if not keep.any():
            break
        active = active[keep]
        graph.L = graph.L[:, keep]
        graph.R = graph.R[:, keep]
        flips = flips[:, keep]
        previous = previous[keep]

    return BatchDecodeResult(
        u_hat=u_out,
        x_hat=x_out,
        iterations_used=iters_out,
        converged=conv_out,
        sign_flip_counts=flips_out,
        u_llr=llr_out,
    )


def decode(
    spec: PolarCodeSpec,
    frame: Union[LlrFrame, np.ndarray],
    cfg: DecoderConfig,
    priors: Optional[np.ndarray] = None,
    layer_order: Optional[Sequence[int]] = None,
) -> DecodeResult:
    """Decode a single frame."""
    llrs = frame.values if isinstance(frame, LlrFrame) else np.asarray(frame)
    return decode_batch(spec, llrs[np.newaxis, :], cfg, priors, layer_order).frame(0)
