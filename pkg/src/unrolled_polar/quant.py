"""Fixed-point LLRs in the Qi.Qc.Qf format.

Raw values are plain numpy integers with an implicit scale of ``2**-qf``.
Saturation is symmetric: the most negative two's-complement code is never
produced, so ``|x|`` is always representable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ROUNDING = ("nearest", "truncate")


@dataclass(frozen=True)
class QuantSpec:
    qi: int  # internal LLR bits, sign included
    qc: int  # channel LLR bits, sign included
    qf: int  # fractional bits shared by both

    def __post_init__(self):
        if not (self.qi >= self.qc >= 2):
            raise ValueError(f"need qi >= qc >= 2, got {self}")
        if not 0 <= self.qf < self.qc:
            raise ValueError(f"need 0 <= qf < qc, got {self}")

    @classmethod
    def parse(cls, text: str) -> "QuantSpec":
        try:
            qi, qc, qf = (int(p) for p in text.split("."))
        except ValueError:
            raise ValueError(f"expected 'Qi.Qc.Qf', got {text!r}") from None
        return cls(qi, qc, qf)

    def __str__(self):
        return f"{self.qi}.{self.qc}.{self.qf}"

    @property
    def max_internal(self) -> int:
        return (1 << (self.qi - 1)) - 1

    @property
    def max_channel(self) -> int:
        return (1 << (self.qc - 1)) - 1

    @property
    def dtype(self):
        return np.int16 if self.qi <= 15 else np.int32


def saturate(x, q: QuantSpec):
    m = q.max_internal
    return np.clip(x, -m, m).astype(q.dtype, copy=False)


def quantize_channel(llr, q: QuantSpec, scale: float = 1.0, rounding: str = "nearest"):
    """Map real channel LLRs to raw channel codes, widened to ``qi`` bits.

    ``rounding="nearest"`` rounds half away from zero; ``"truncate"`` drops
    the fraction toward zero.
    """
    v = np.asarray(llr, dtype=float) * scale * (1 << q.qf)
    if rounding == "nearest":
        r = np.sign(v) * np.floor(np.abs(v) + 0.5)
    elif rounding == "truncate":
        r = np.trunc(v)
    else:
        raise ValueError(f"rounding must be one of {ROUNDING}")
    m = q.max_channel
    return np.clip(r, -m, m).astype(q.dtype)


def dequantize(raw, q: QuantSpec):
    return np.asarray(raw, dtype=float) / (1 << q.qf)


def sat_add(a, b, q: QuantSpec):
    """Exact sum clamped to the internal range."""
    s = np.asarray(a, dtype=np.int64) + np.asarray(b, dtype=np.int64)
    return saturate(s, q)


def hard_bit(a):
    """0 where the LLR is non-negative, 1 otherwise (the sign bit)."""
    return (np.asarray(a) < 0).astype(np.uint8)
