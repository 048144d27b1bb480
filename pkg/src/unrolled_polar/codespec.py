"""Polar code definitions: frozen-set construction, master-code assembly and
code-spec files.

Indices are in natural order: position ``i`` of the mask is ``u_i`` of the
butterfly ``x = u F^{(x)m}`` with ``F = [[1, 0], [1, 1]]`` (no bit reversal).
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METHODS = ("bhattacharyya", "ga")


class CodeSpecError(ValueError):
    """Raised for invalid code parameters or malformed code-spec files."""


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """An (n, k) polar code.

    ``frozen`` is a read-only boolean mask of length ``n`` (True = frozen).
    ``provenance`` records where the mask came from, e.g.
    ``{"kind": "constructed", "method": "ga", "design_snr_db": 2.5}``.
    """

    n: int
    k: int
    frozen: np.ndarray
    provenance: dict = field(default_factory=lambda: {"kind": "imported"})

    def __post_init__(self):
        mask = np.array(self.frozen, dtype=bool).reshape(-1)
        mask.setflags(write=False)
        object.__setattr__(self, "frozen", mask)
        if not is_power_of_two(self.n):
            raise CodeSpecError(f"code length must be a power of two, got {self.n}")
        if mask.size != self.n:
            raise CodeSpecError(f"frozen mask has {mask.size} entries, expected {self.n}")
        if not 0 <= self.k <= self.n:
            raise CodeSpecError(f"k={self.k} out of range for n={self.n}")
        if int(np.count_nonzero(~mask)) != self.k:
            raise CodeSpecError(
                f"mask has {int(np.count_nonzero(~mask))} information positions, expected k={self.k}"
            )

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen)

    @property
    def frozen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.frozen)

    @property
    def label(self) -> str:
        return f"({self.n},{self.k})"

    def subcode(self, offset: int, length: int) -> "CodeSpec":
        """The constituent code rooted at span ``[offset, offset + length)``."""
        if not is_power_of_two(length) or offset % length or offset + length > self.n:
            raise CodeSpecError(f"span ({offset},{length}) is not a node of a length-{self.n} tree")
        mask = self.frozen[offset:offset + length]
        return CodeSpec(
            length,
            int(np.count_nonzero(~mask)),
            mask,
            {"kind": "constituent", "parent": self.label, "offset": offset},
        )

    def __eq__(self, other):
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return (
            self.n == other.n
            and self.k == other.k
            and np.array_equal(self.frozen, other.frozen)
            and self.provenance == other.provenance
        )

    def __hash__(self):
        return hash((self.n, self.k, self.frozen.tobytes()))

    def __repr__(self):
        return f"CodeSpec{self.label}"


def from_frozen_indices(n: int, frozen, provenance: dict | None = None) -> CodeSpec:
    mask = np.zeros(n, dtype=bool)
    idx = np.asarray(list(frozen), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise CodeSpecError("frozen index out of range")
    mask[idx] = True
    return CodeSpec(n, n - int(mask.sum()), mask, provenance or {"kind": "imported"})


# -- reliability ------------------------------------------------------------

def bhattacharyya_parameters(n: int, z0: float) -> np.ndarray:
    """Bhattacharyya parameter of every synthetic channel (lower is better).

    Uses the erasure-channel recursion z- = 2z - z^2, z+ = z^2. The first
    split is applied to the most significant index bit.
    """
    z = np.array([z0], dtype=float)
    for _ in range(int(math.log2(n))):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


# Chung's piecewise phi for the Gaussian approximation, in log domain so that
# long codes at high design SNR do not underflow.
_A, _B, _C = 0.4527, 0.86, 0.0218


def _log_phi(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    out = np.zeros_like(m)
    lo = (m > 0) & (m < 10)
    hi = m >= 10
    # the fit exceeds phi = 1 near m = 0; clamp so phi stays a probability
    out[lo] = np.minimum(-_A * m[lo] ** _B + _C, 0.0)
    mh = m[hi]
    out[hi] = 0.5 * np.log(np.pi / mh) - mh / 4.0 + np.log1p(-10.0 / (7.0 * mh))
    return out


_LOG_PHI_10 = float(-_A * 10**_B + _C)


def _inv_log_phi(lp: np.ndarray) -> np.ndarray:
    lp = np.asarray(lp, dtype=float)
    out = np.empty_like(lp)
    lo = lp > _LOG_PHI_10
    out[lo] = ((_C - np.minimum(lp[lo], _C)) / _A) ** (1.0 / _B)
    hi = ~lo
    if np.any(hi):
        target = lp[hi]
        a = np.full(target.shape, 10.0)
        b = 4.0 * (0.5 * np.log(np.pi / 10.0) - target) + 10.0
        for _ in range(200):
            mid = 0.5 * (a + b)
            val = 0.5 * np.log(np.pi / mid) - mid / 4.0 + np.log1p(-10.0 / (7.0 * mid))
            above = val > target
            a = np.where(above, mid, a)
            b = np.where(above, b, mid)
        out[hi] = 0.5 * (a + b)
    return out


def ga_means(n: int, mean0: float) -> np.ndarray:
    """Mean LLR of every synthetic channel under the Gaussian approximation."""
    m = np.array([mean0], dtype=float)
    for _ in range(int(math.log2(n))):
        lp = _log_phi(m)
        # 1 - (1 - p)^2 = p (2 - p), in log domain
        minus = _inv_log_phi(lp + np.log(2.0 - np.exp(lp)))
        # a check node never improves on its inputs; the fit can claim
        # otherwise for means near zero
        minus = np.minimum(minus, m)
        nxt = np.empty(2 * m.size)
        nxt[0::2] = minus
        nxt[1::2] = 2.0 * m
        m = nxt
    return m


def reliability_order(n: int, k: int, design_snr_db: float, method: str = "ga",
                      erasure_prob: float | None = None) -> np.ndarray:
    """Permutation of ``range(n)`` from least to most reliable channel.

    Ties are broken by ascending index, so the lower index counts as less
    reliable. ``design_snr_db`` is Eb/N0 at the code rate ``k/n``.
    """
    if method not in METHODS:
        raise CodeSpecError(f"unknown construction method {method!r}")
    rate = max(k, 1) / n
    ebn0 = 10.0 ** (design_snr_db / 10.0)
    if method == "bhattacharyya":
        z0 = erasure_prob if erasure_prob is not None else math.exp(-rate * ebn0)
        with np.errstate(divide="ignore"):
            log_good = -np.log(bhattacharyya_parameters(n, z0))
    else:
        sigma2 = 1.0 / (2.0 * rate * ebn0)
        with np.errstate(divide="ignore"):
            log_good = np.log(ga_means(n, 2.0 / sigma2))
    # Values equal up to rounding noise count as ties; otherwise saturated
    # channels get ordered by floating-point residue instead of by index.
    goodness = np.round(log_good, 10)
    # lexsort: last key is primary
    return np.lexsort((np.arange(n), goodness))


def construct(n: int, k: int, design_snr_db: float = 0.0, method: str = "ga",
              erasure_prob: float | None = None) -> CodeSpec:
    """Freeze the ``n - k`` least reliable positions.

    ``erasure_prob`` overrides the starting Bhattacharyya parameter (the
    erasure probability of a BEC proxy) for ``method="bhattacharyya"``.
    """
    if not is_power_of_two(n):
        raise CodeSpecError(f"code length must be a power of two, got {n}")
    if not 0 <= k <= n:
        raise CodeSpecError(f"k={k} out of range for n={n}")
    order = reliability_order(n, k, design_snr_db, method, erasure_prob)
    mask = np.zeros(n, dtype=bool)
    mask[order[: n - k]] = True
    prov = {"kind": "constructed", "method": method, "design_snr_db": float(design_snr_db)}
    if erasure_prob is not None:
        prov["erasure_prob"] = float(erasure_prob)
    return CodeSpec(n, k, mask, prov)


# -- master codes -----------------------------------------------------------

def assemble_master(left: CodeSpec, right: CodeSpec, left_id: str | None = None,
                    right_id: str | None = None) -> CodeSpec:
    """Concatenate two constituent codes of equal length into a master code."""
    if left.n != right.n:
        raise CodeSpecError(f"constituent lengths differ: {left.n} vs {right.n}")
    if left.rate > right.rate:
        warnings.warn(
            f"left constituent {left.label} has a higher rate than right {right.label}; "
            "put the lower-rate code on the left",
            stacklevel=2,
        )
    return CodeSpec(
        2 * left.n,
        left.k + right.k,
        np.concatenate([left.frozen, right.frozen]),
        {
            "kind": "assembled",
            "left_id": left_id or left.label,
            "right_id": right_id or right.label,
        },
    )


def check_sibling_rates(spec: CodeSpec) -> list[tuple[int, int, int, int]]:
    """Nodes of the full span tree whose left half carries more information
    bits than the right half.

    Returns ``(offset, length, k_left, k_right)`` per violation.
    """
    info = (~spec.frozen).astype(np.int64)
    out = []
    length = spec.n
    while length >= 2:
        counts = info.reshape(-1, length // 2).sum(axis=1)
        kl, kr = counts[0::2], counts[1::2]
        for j in np.flatnonzero(kl > kr):
            out.append((int(j) * length, length, int(kl[j]), int(kr[j])))
        length //= 2
    return sorted(out)


# -- files ------------------------------------------------------------------

def to_dict(spec: CodeSpec) -> dict:
    return {
        "n": spec.n,
        "k": spec.k,
        "frozen": spec.frozen_indices.tolist(),
        "provenance": spec.provenance,
    }


def from_dict(d: dict) -> CodeSpec:
    try:
        n, k, frozen = int(d["n"]), int(d["k"]), list(d["frozen"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CodeSpecError(f"malformed code spec: {exc}") from exc
    if not is_power_of_two(n):
        raise CodeSpecError(f"code length must be a power of two, got {n}")
    if any(int(i) != i for i in frozen) or len(set(frozen)) != len(frozen):
        raise CodeSpecError("frozen indices must be distinct integers")
    if frozen != sorted(frozen):
        raise CodeSpecError("frozen indices must be ascending")
    mask = np.zeros(n, dtype=bool)
    if frozen:
        idx = np.asarray(frozen, dtype=int)
        if idx.min() < 0 or idx.max() >= n:
            raise CodeSpecError("frozen index out of range")
        mask[idx] = True
    return CodeSpec(n, k, mask, dict(d.get("provenance", {"kind": "imported"})))


def save_spec(spec: CodeSpec, path) -> None:
    Path(path).write_text(json.dumps(to_dict(spec), indent=1) + "\n")


def load_spec(path) -> CodeSpec:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CodeSpecError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise CodeSpecError(f"{path}: expected a JSON object")
    if "provenance" not in d:
        d = {**d, "provenance": {"kind": "imported", "path": str(path)}}
    return from_dict(d)
