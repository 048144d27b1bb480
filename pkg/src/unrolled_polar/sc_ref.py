"""Reference successive-cancellation decoder.

All functions operate on the last axis and accept a leading batch axis.
With ``q=None`` arithmetic is floating point; with a ``QuantSpec`` the LLRs
are raw integers and every addition saturates to the internal range.
"""
from __future__ import annotations

import numpy as np

from .codespec import CodeSpec
from .quant import QuantSpec, hard_bit, sat_add


def f_op(alpha, q: QuantSpec | None = None):
    """Min-sum check-node update; sign(0) counts as positive."""
    alpha = np.asarray(alpha)
    m = alpha.shape[-1] // 2
    a, b = alpha[..., :m], alpha[..., m:]
    mag = np.minimum(np.abs(a), np.abs(b))
    return np.where((a < 0) ^ (b < 0), -mag, mag)


def g_op(alpha, beta_l, q: QuantSpec | None = None):
    alpha = np.asarray(alpha)
    m = alpha.shape[-1] // 2
    a, b = alpha[..., :m], alpha[..., m:]
    signed = np.where(np.asarray(beta_l) != 0, -a, a)
    if q is None:
        return b + signed
    return sat_add(b, signed, q)


def g0r_op(alpha, q: QuantSpec | None = None):
    """``g_op`` with an all-zero left estimate."""
    alpha = np.asarray(alpha)
    m = alpha.shape[-1] // 2
    if q is None:
        return alpha[..., m:] + alpha[..., :m]
    return sat_add(alpha[..., m:], alpha[..., :m], q)


def combine_op(beta_l, beta_r):
    beta_l = np.asarray(beta_l, dtype=np.uint8)
    beta_r = np.asarray(beta_r, dtype=np.uint8)
    return np.concatenate([beta_l ^ beta_r, beta_r], axis=-1)


def prepare_llrs(channel, q: QuantSpec | None):
    channel = np.asarray(channel)
    if q is None:
        return channel.astype(float, copy=False)
    if not np.issubdtype(channel.dtype, np.integer):
        raise TypeError("fixed-point decoding expects raw integer LLRs; use quantize_channel")
    return channel.astype(q.dtype, copy=False)


def sc_decode(spec: CodeSpec, channel, q: QuantSpec | None = None):
    """Full-tree SC decoding; returns the codeword estimate (systematic view)."""
    alpha = prepare_llrs(channel, q)
    if alpha.shape[-1] != spec.n:
        raise ValueError(f"expected {spec.n} LLRs per frame, got {alpha.shape[-1]}")
    frozen = spec.frozen

    def rec(a, offset, length):
        if length == 1:
            if frozen[offset]:
                return np.zeros(a.shape, dtype=np.uint8)
            return hard_bit(a)
        half = length // 2
        bl = rec(f_op(a, q), offset, half)
        br = rec(g_op(a, bl, q), offset + half, half)
        return combine_op(bl, br)

    return rec(alpha, 0, spec.n)
