"""Polar encoding over GF(2), natural bit order."""
from __future__ import annotations

import numpy as np

from .codespec import CodeSpec, is_power_of_two


def polar_transform(u):
    """Apply ``x = u F^{(x)m}`` along the last axis.

    Works on a single vector or a batch of shape ``(..., n)``. The transform
    is its own inverse over GF(2).
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    if not is_power_of_two(n):
        raise ValueError(f"length must be a power of two, got {n}")
    step = 1
    while step < n:
        v = x.reshape(x.shape[:-1] + (n // (2 * step), 2, step))
        v[..., 0, :] ^= v[..., 1, :]
        step *= 2
    return x


def _check_info(spec: CodeSpec, info):
    info = np.asarray(info, dtype=np.uint8)
    if info.shape[-1] != spec.k:
        raise ValueError(f"expected {spec.k} information bits, got {info.shape[-1]}")
    return info


def encode_nonsystematic(spec: CodeSpec, info):
    info = _check_info(spec, info)
    u = np.zeros(info.shape[:-1] + (spec.n,), dtype=np.uint8)
    u[..., spec.info_indices] = info
    return polar_transform(u)


def encode_systematic(spec: CodeSpec, info):
    """Two-pass systematic encoder: transform, clear frozen positions,
    transform again.

    The result carries ``info`` verbatim on the information positions when
    the information set is closed under binary domination, which holds for
    constructed codes and for masters assembled from them.
    """
    info = _check_info(spec, info)
    v = np.zeros(info.shape[:-1] + (spec.n,), dtype=np.uint8)
    v[..., spec.info_indices] = info
    v = polar_transform(v)
    v[..., spec.frozen] = 0
    return polar_transform(v)


def is_codeword(spec: CodeSpec, x) -> np.ndarray:
    """True where the transform-domain vector is zero on every frozen position."""
    u = polar_transform(x)
    return ~np.any(u[..., spec.frozen], axis=-1)


def to_text(bits) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).reshape(-1))


def from_text(text: str) -> np.ndarray:
    text = text.strip()
    if set(text) - {"0", "1"}:
        raise ValueError("expected a string of 0/1 characters")
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def to_hex(bits) -> str:
    bits = np.asarray(bits, dtype=np.uint8).reshape(-1)
    return np.packbits(bits).tobytes().hex()


def from_hex(text: str, n: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(bytes.fromhex(text.strip()), dtype=np.uint8))[:n]
