"""Fast-SSC decoder trees and constituent-code kernels.

Two tie rules are available for the leaf kernels:

``"sc"`` (default)
    Rows whose decision is not unique (a zero LLR, or several inputs tied
    for the least reliable one) are resolved in successive-cancellation
    order, and repetition sums go through the saturating adder tree in the
    order the reference decoder pairs them. The decoder is then bit-exact
    with :func:`unrolled_polar.sc_ref.sc_decode` in fixed point.

``"direct"``
    The plain one-shot rules: hard decisions (a zero LLR maps to bit 0),
    single flip at the lowest-index minimum, and a full-precision sum.
    Every output is still a maximum-likelihood word of the node's code,
    but fixed-point ties can disagree with SC.

Rows without ties are decoded identically under both rules.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .codespec import CodeSpec, is_power_of_two
from .quant import QuantSpec, hard_bit
from .sc_ref import combine_op, f_op, g0r_op, g_op, prepare_llrs

RATE0, RATE1, REP, SPC, REPSPC, RATE_R = "RATE0", "RATE1", "REP", "SPC", "REPSPC", "RATE_R"
LEAF_KINDS = (RATE0, RATE1, REP, SPC, REPSPC)
TIE_RULES = ("sc", "direct")


@dataclass(frozen=True)
class NodeConstraints:
    max_rep: int = 8
    max_spc: int = 4
    enable_repspc: bool = False

    def __post_init__(self):
        for name in ("max_rep", "max_spc"):
            v = getattr(self, name)
            if not is_power_of_two(v) or v < 2:
                raise ValueError(f"{name} must be a power of two >= 2, got {v}")


@dataclass(frozen=True, eq=False)
class Node:
    kind: str
    offset: int
    length: int
    left: "Node | None" = None
    right: "Node | None" = None

    @property
    def span(self) -> tuple[int, int]:
        return (self.offset, self.length)

    @property
    def is_leaf(self) -> bool:
        return self.kind != RATE_R

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal."""
        yield self
        if not self.is_leaf:
            yield from self.left.walk()
            yield from self.right.walk()

    def leaves(self) -> list["Node"]:
        return [n for n in self.walk() if n.is_leaf]

    def find(self, offset: int, length: int) -> "Node | None":
        node = self
        while node is not None:
            if node.span == (offset, length):
                return node
            if node.is_leaf or length > node.length or not (
                node.offset <= offset < node.offset + node.length
            ):
                return None
            half = node.length // 2
            node = node.left if offset < node.offset + half else node.right
        return None

    def __repr__(self):
        return f"{self.kind}({self.offset}..{self.offset + self.length - 1})"


@dataclass(frozen=True, eq=False)
class DecoderTree:
    spec: CodeSpec
    constraints: NodeConstraints
    root: Node

    def leaves(self) -> list[Node]:
        return self.root.leaves()

    def find(self, offset: int, length: int) -> Node | None:
        return self.root.find(offset, length)

    def subtree(self, node: Node) -> "DecoderTree":
        """Tree of the constituent code at ``node``, re-based to offset 0."""

        def rebase(nd: Node) -> Node:
            if nd.is_leaf:
                return Node(nd.kind, nd.offset - node.offset, nd.length)
            return Node(nd.kind, nd.offset - node.offset, nd.length, rebase(nd.left), rebase(nd.right))

        return DecoderTree(self.spec.subcode(node.offset, node.length), self.constraints, rebase(node))


def _is_rep_pattern(mask) -> bool:
    return bool(mask[:-1].all() and not mask[-1])


def _is_spc_pattern(mask) -> bool:
    return bool(mask[0] and not mask[1:].any())


def classify(mask, c: NodeConstraints) -> str:
    """Leaf kind of a span with frozen mask ``mask``, or RATE_R."""
    n = len(mask)
    if mask.all():
        return RATE0
    if not mask.any():
        return RATE1
    if n <= c.max_rep and _is_rep_pattern(mask):
        return REP
    if n <= c.max_spc and _is_spc_pattern(mask):
        return SPC
    if c.enable_repspc and n == 8 and _is_rep_pattern(mask[:4]) and _is_spc_pattern(mask[4:]):
        return REPSPC
    return RATE_R


def build_tree(spec: CodeSpec, c: NodeConstraints = NodeConstraints()) -> DecoderTree:
    mask = spec.frozen

    def build(offset, length):
        kind = classify(mask[offset:offset + length], c)
        if kind != RATE_R:
            return Node(kind, offset, length)
        half = length // 2
        return Node(RATE_R, offset, length, build(offset, half), build(offset + half, half))

    return DecoderTree(spec, c, build(0, spec.n))


# -- kernels ----------------------------------------------------------------

def decode_rate0(length: int, batch_shape=()):
    return np.zeros(tuple(batch_shape) + (length,), dtype=np.uint8)


def _rate1_from_signs(s):
    """SC decision of a rate-1 code from ternary signs (-1, 0, +1)."""
    n = s.shape[-1]
    if n == 1:
        return (s < 0).astype(np.uint8)
    m = n // 2
    sl, sr = s[..., :m], s[..., m:]
    bl = _rate1_from_signs(sl * sr)
    br = _rate1_from_signs(np.sign(sr + np.where(bl != 0, -sl, sl)))
    return np.concatenate([bl ^ br, br], axis=-1)


def decode_rate1(alpha, ties: str = "sc"):
    """Hard decisions. Under the ``"sc"`` rule a zero LLR takes the value
    successive cancellation would give it instead of a plain 0."""
    alpha = np.asarray(alpha)
    out = hard_bit(alpha)
    if ties == "direct" or alpha.shape[-1] == 1 or not is_power_of_two(alpha.shape[-1]):
        return out
    rows = np.any(alpha == 0, axis=-1)
    if np.any(rows):
        out[rows] = _rate1_from_signs(np.sign(alpha[rows]).astype(np.int8))
    return out


def _adder_tree(alpha, q: QuantSpec | None):
    s = alpha
    while s.shape[-1] > 1:
        s = g0r_op(s, q)
    return s[..., 0]


def decode_rep(alpha, q: QuantSpec | None = None, ties: str = "sc"):
    """Threshold the LLR sum (``>= 0`` gives 0) and repeat the bit."""
    alpha = np.asarray(alpha)
    if ties == "direct":
        total = np.sum(alpha.astype(np.int64 if q is not None else float), axis=-1)
    else:
        total = _adder_tree(alpha, q)
    bit = (total < 0).astype(np.uint8)
    return np.repeat(bit[..., None], alpha.shape[-1], axis=-1)


def _spc_successive(alpha, q):
    n = alpha.shape[-1]
    if n == 2:
        return decode_rep(alpha, q, "sc")
    bl = _spc_successive(f_op(alpha, q), q)
    br = decode_rate1(g_op(alpha, bl, q), "sc")
    return combine_op(bl, br)


def decode_spc(alpha, q: QuantSpec | None = None, ties: str = "sc"):
    """Hard decisions; on odd parity flip the least reliable bit."""
    alpha = np.asarray(alpha)
    hard = hard_bit(alpha)
    mag = np.abs(alpha)
    parity = np.bitwise_xor.reduce(hard, axis=-1)
    pos = np.argmin(mag, axis=-1)
    flip = np.zeros_like(hard)
    np.put_along_axis(flip, pos[..., None], parity[..., None], axis=-1)
    out = hard ^ flip
    if ties == "direct":
        return out
    least = np.take_along_axis(mag, pos[..., None], axis=-1)
    n_least = np.count_nonzero(mag == least, axis=-1)
    rows = np.any(alpha == 0, axis=-1) | ((parity == 1) & (n_least > 1))
    if np.any(rows):
        out[rows] = _spc_successive(alpha[rows], q)
    return out


def decode_repspc(alpha, q: QuantSpec | None = None, ties: str = "sc"):
    """Repetition(4) followed by SPC(4) on an 8-LLR node."""
    alpha = np.asarray(alpha)
    bl = decode_rep(f_op(alpha, q), q, ties)
    br = decode_spc(g_op(alpha, bl, q), q, ties)
    return combine_op(bl, br)


def decode_leaf(node: Node, alpha, q: QuantSpec | None = None, ties: str = "sc"):
    if node.kind == RATE0:
        return decode_rate0(node.length, np.shape(alpha)[:-1])
    if node.kind == RATE1:
        return decode_rate1(alpha, ties)
    if node.kind == REP:
        return decode_rep(alpha, q, ties)
    if node.kind == SPC:
        return decode_spc(alpha, q, ties)
    if node.kind == REPSPC:
        return decode_repspc(alpha, q, ties)
    raise ValueError(f"not a leaf: {node}")


def fastssc_decode(tree: DecoderTree, channel, q: QuantSpec | None = None, ties: str = "sc"):
    """Decode one frame or a batch of frames; returns codeword estimates."""
    if ties not in TIE_RULES:
        raise ValueError(f"ties must be one of {TIE_RULES}")
    alpha = prepare_llrs(channel, q)
    if alpha.shape[-1] != tree.spec.n:
        raise ValueError(f"expected {tree.spec.n} LLRs per frame, got {alpha.shape[-1]}")

    def rec(node, a):
        if node.is_leaf:
            return decode_leaf(node, a, q, ties)
        if node.left.kind == RATE0:
            br = rec(node.right, g0r_op(a, q))
            return np.concatenate([br, br], axis=-1)
        bl = rec(node.left, f_op(a, q))
        if node.right.kind == RATE0:
            return np.concatenate([bl, np.zeros_like(bl)], axis=-1)
        br = rec(node.right, g_op(a, bl, q))
        return combine_op(bl, br)

    return rec(tree.root, alpha)


# -- export -----------------------------------------------------------------

_DOT_STYLE = {
    RATE0: 'fillcolor="white"',
    RATE1: 'fillcolor="black", fontcolor="white"',
    REP: 'fillcolor="palegreen"',
    SPC: 'fillcolor="orange"',
    REPSPC: 'fillcolor="khaki"',
    RATE_R: 'fillcolor="gray80"',
}


def tree_to_dot(tree: DecoderTree) -> str:
    lines = ["digraph decoder_tree {", '  node [style=filled, shape=box, fontname="monospace"];']
    ids = {}
    for i, node in enumerate(tree.root.walk()):
        ids[id(node)] = f"n{i}"
        label = f"{node.kind}\\n[{node.offset},{node.offset + node.length})"
        lines.append(f'  n{i} [label="{label}", {_DOT_STYLE[node.kind]}];')
    for node in tree.root.walk():
        if not node.is_leaf:
            lines.append(f'  {ids[id(node)]} -> {ids[id(node.left)]} [color="blue"];')
            lines.append(f'  {ids[id(node)]} -> {ids[id(node.right)]} [color="red"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
