"""Compile a decoder tree into an unrolled, stage-assigned schedule.

Timing model
------------
The channel LLRs are latched at stage 0. Operations are emitted in the
decoder's in-order traversal and each one finishes ``cost`` stages after the
previous one, so an op's ``stage`` is the stage whose register holds its
result. A zero-cost op (a rate-1 leaf fused into the G that feeds it) shares
its producer's stage; when its input is the channel register there is no
producer logic to fuse with and it costs one stage.

A value produced at stage ``p`` and last read at stage ``c`` occupies
``L = c - p`` pipeline registers. With initiation interval ``I`` the chain
is clocked only every ``I`` cycles and ``ceil(L / I)`` registers suffice.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .fastssc import RATE0, RATE1, REP, REPSPC, SPC, DecoderTree, Node
from .quant import QuantSpec

OP_KINDS = ("F", "G", "G0R", "COMBINE", "C0R", REP, SPC, RATE1, REPSPC)

LOGIC_AREA_C = 1.0 / 17000.0
MEMORY_FIT = (0.249, 2.466e-3, 8.912e-6)


@dataclass(frozen=True)
class CostModel:
    F: int = 1
    G: int = 1
    G0R: int = 1
    COMBINE: int = 1
    C0R: int = 1
    REP: int = 1
    SPC: int = 1
    RATE1: int = 0
    REPSPC: int = 2
    load: int = 1
    offload: int = 1

    def __post_init__(self):
        for k, v in self.__dict__.items():
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"cost {k} must be a non-negative integer, got {v!r}")

    def cost(self, kind: str) -> int:
        return getattr(self, kind)


@dataclass
class Value:
    vid: int
    kind: str  # "llr" or "bits"
    span: tuple[int, int]  # codeword coordinates covered by the value
    stage: int  # producer stage
    channel: bool = False
    consumers: list[int] = field(default_factory=list)  # consumer stages

    @property
    def last_use(self) -> int:
        return max(self.consumers, default=self.stage)

    @property
    def lifetime(self) -> int:
        return self.last_use - self.stage


@dataclass(frozen=True)
class Op:
    index: int
    kind: str
    span: tuple[int, int]  # node the op belongs to
    inputs: tuple[int, ...]
    output: int
    stage: int
    cost: int


@dataclass
class Schedule:
    tree: DecoderTree
    cost_model: CostModel
    ops: list[Op]
    values: dict[int, Value]
    node_io: dict[tuple[int, int], tuple[int, int | None]]  # span -> (alpha vid, beta vid)

    @property
    def n(self) -> int:
        return self.tree.spec.n

    @property
    def depth(self) -> int:
        """Decode-only cycles: the stage of the last op."""
        return max((op.stage for op in self.ops), default=0)

    @property
    def latency(self) -> int:
        return self.cost_model.load + self.depth + self.cost_model.offload

    @property
    def channel(self) -> Value:
        return self.values[0]

    def lifetimes(self) -> dict[int, int]:
        return {vid: v.lifetime for vid, v in self.values.items()}

    def ops_in(self, node: Node) -> list[Op]:
        lo, hi = node.offset, node.offset + node.length
        return [op for op in self.ops if lo <= op.span[0] and op.span[0] + op.span[1] <= hi]


def unroll(tree: DecoderTree, cm: CostModel = CostModel()) -> Schedule:
    ops: list[Op] = []
    values: dict[int, Value] = {0: Value(0, "llr", (0, tree.spec.n), 0, channel=True)}
    node_io: dict[tuple[int, int], tuple[int, int | None]] = {}
    stage = 0

    def emit(kind, node, inputs, out_kind, out_span):
        nonlocal stage
        cost = cm.cost(kind)
        if cost == 0 and any(values[i].channel for i in inputs):
            cost = 1
        stage += cost
        vid = len(values)
        values[vid] = Value(vid, out_kind, out_span, stage)
        for i in inputs:
            values[i].consumers.append(stage)
        ops.append(Op(len(ops), kind, node.span, tuple(inputs), vid, stage, cost))
        return vid

    def rec(node: Node, alpha: int) -> int | None:
        if node.kind == RATE0:
            node_io[node.span] = (alpha, None)
            return None
        if node.is_leaf:
            beta = emit(node.kind, node, [alpha], "bits", node.span)
            node_io[node.span] = (alpha, beta)
            return beta
        half = node.length // 2
        lspan, rspan = (node.offset, half), (node.offset + half, half)
        if node.left.kind == RATE0:
            node_io[node.left.span] = (None, None)
            a = emit("G0R", node, [alpha], "llr", rspan)
            br = rec(node.right, a)
            beta = emit("C0R", node, [br], "bits", node.span)
        else:
            bl = rec(node.left, emit("F", node, [alpha], "llr", lspan))
            if node.right.kind == RATE0:
                node_io[node.right.span] = (None, None)
                beta = emit("COMBINE", node, [bl], "bits", node.span)
            else:
                br = rec(node.right, emit("G", node, [alpha, bl], "llr", rspan))
                beta = emit("COMBINE", node, [bl, br], "bits", node.span)
        node_io[node.span] = (alpha, beta)
        return beta

    rec(tree.root, 0)
    return Schedule(tree, cm, ops, values, node_io)


def compute_imax(s: Schedule) -> int:
    """Largest useful initiation interval: how long the channel LLRs must
    stay available (the stage of the root-level G)."""
    return max(1, s.channel.lifetime)


# -- initiation interval and storage ------------------------------------------

@dataclass(frozen=True)
class Chain:
    vid: int
    length: int  # L at I = 1
    effective: int  # ceil(L / I)
    width: int  # bits per register
    storage: str = "registers"  # or "sram"
    sram_depth: int = 0

    @property
    def register_count(self) -> int:
        return 1 if self.storage == "sram" else self.effective

    @property
    def register_bits(self) -> int:
        return self.register_count * self.width

    @property
    def sram_bits(self) -> int:
        return self.sram_depth * self.width


@dataclass(frozen=True)
class PipelinePlan:
    schedule: Schedule
    interval: int
    quant: QuantSpec
    chains: tuple[Chain, ...]

    @property
    def chain_map(self) -> dict[int, Chain]:
        return {c.vid: c for c in self.chains}

    @property
    def register_bits(self) -> int:
        return sum(c.register_bits for c in self.chains)

    @property
    def sram_bits(self) -> int:
        return sum(c.sram_bits for c in self.chains)


def value_width(v: Value, q: QuantSpec) -> int:
    length = v.span[1]
    if v.kind == "bits":
        return length
    return length * (q.qc if v.channel else q.qi)


def apply_interval(s: Schedule, interval: int, q: QuantSpec = QuantSpec(5, 4, 0),
                   strict: bool = True) -> PipelinePlan:
    """Clock every chain once per ``interval`` cycles.

    Intervals above ``compute_imax(s)`` save nothing but still work; they
    are rejected unless ``strict=False`` (a constituent code running inside
    a larger pipeline inherits the master's interval, for instance).
    """
    imax = compute_imax(s)
    if interval < 1 or (strict and interval > imax):
        raise ValueError(f"initiation interval must be in [1, {imax}], got {interval}")
    chains = tuple(
        Chain(v.vid, v.lifetime, math.ceil(v.lifetime / interval), value_width(v, q))
        for v in s.values.values()
        if v.lifetime > 0
    )
    return PipelinePlan(s, interval, q, chains)


def sram_convert(p: PipelinePlan, min_chain: int) -> PipelinePlan:
    """Keep the first register of every chain of at least ``min_chain``
    registers and move the rest into a circular-buffer SRAM."""
    if min_chain < 2:
        raise ValueError("min_chain must be at least 2")
    chains = tuple(
        replace(c, storage="sram", sram_depth=c.effective - 1) if c.effective >= min_chain else c
        for c in p.chains
    )
    return replace(p, chains=chains)


# -- cost -------------------------------------------------------------------

def logic_area_mm2(n: int) -> float:
    return LOGIC_AREA_C * n * math.log2(n)


def memory_area_mm2(n: int) -> float:
    a, b, c = MEMORY_FIT
    return a + b * n + c * n * n


@dataclass(frozen=True)
class CostReport:
    code: str
    n: int
    k: int
    interval: int
    f_hz: float
    coded_tp_bps: float
    info_tp_bps: float
    latency_cycles: int
    latency_s: float
    bus_width: int
    logic_area_mm2: float
    memory_area_mm2: float
    register_bits: int
    sram_bits: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def summary(self) -> str:
        return (
            f"{self.code} I={self.interval} f={self.f_hz / 1e6:g} MHz: "
            f"T/P coded {self.coded_tp_bps / 1e9:.4g} Gbps, info {self.info_tp_bps / 1e9:.4g} Gbps, "
            f"latency {self.latency_cycles} CCs ({self.latency_s * 1e9:.4g} ns), "
            f"registers {self.register_bits} b, SRAM {self.sram_bits} b, "
            f"logic {self.logic_area_mm2:.3f} mm2, memory (I=1 fit) {self.memory_area_mm2:.3f} mm2"
        )


def throughput(n: int, k: int, f_hz: float, interval: int) -> tuple[float, float]:
    """Coded and information throughput of an ``(n, k)`` code in bit/s."""
    coded = n * f_hz / interval
    return coded, coded * k / n


def estimate_cost(p: PipelinePlan, f_hz: float) -> CostReport:
    spec = p.schedule.tree.spec
    coded, info = throughput(spec.n, spec.k, f_hz, p.interval)
    lat = p.schedule.latency
    return CostReport(
        code=spec.label,
        n=spec.n,
        k=spec.k,
        interval=p.interval,
        f_hz=f_hz,
        coded_tp_bps=coded,
        info_tp_bps=info,
        latency_cycles=lat,
        latency_s=lat / f_hz,
        bus_width=spec.n,
        logic_area_mm2=logic_area_mm2(spec.n),
        memory_area_mm2=memory_area_mm2(spec.n),
        register_bits=p.register_bits,
        sram_bits=p.sram_bits,
    )


def spc_chain_latency(nv: int, n_spc: int) -> int:
    """Decode cycles of a pure SPC-pattern subtree of length ``nv`` whose
    SPC leaves are limited to ``n_spc``."""
    if nv < n_spc:
        raise ValueError(f"nv={nv} is smaller than n_spc={n_spc}")
    return 3 * (int(math.log2(nv)) - int(math.log2(n_spc))) + 1


# -- export -----------------------------------------------------------------

def plan_to_dict(p: PipelinePlan) -> dict:
    s = p.schedule
    return {
        "code": s.tree.spec.label,
        "interval": p.interval,
        "quant": str(p.quant),
        "depth": s.depth,
        "latency": s.latency,
        "imax": compute_imax(s),
        "cost_model": dict(s.cost_model.__dict__),
        "ops": [
            {
                "index": op.index,
                "kind": op.kind,
                "span": list(op.span),
                "stage": op.stage,
                "inputs": list(op.inputs),
                "output": op.output,
            }
            for op in s.ops
        ],
        "chains": [
            {
                "value": c.vid,
                "kind": s.values[c.vid].kind,
                "producer_stage": s.values[c.vid].stage,
                "length": c.length,
                "effective": c.effective,
                "width": c.width,
                "storage": c.storage,
                "sram_depth": c.sram_depth,
            }
            for c in p.chains
        ],
        "register_bits": p.register_bits,
        "sram_bits": p.sram_bits,
    }


def plan_to_json(p: PipelinePlan) -> str:
    return json.dumps(plan_to_dict(p), indent=1) + "\n"


def schedule_to_dot(p: PipelinePlan) -> str:
    """Dataflow graph: one box per op, edges labelled with chain lengths."""
    s = p.schedule
    chains = p.chain_map
    producer = {op.output: op for op in s.ops}
    lines = [
        "digraph schedule {",
        "  rankdir=LR;",
        '  node [shape=box, fontname="monospace"];',
        '  in [label="load\\nstage 0", shape=oval];',
        '  out [label="offload", shape=oval];',
    ]
    for op in s.ops:
        lines.append(f'  op{op.index} [label="{op.kind}\\n[{op.span[0]},{op.span[0] + op.span[1]})\\nstage {op.stage}"];')
    for op in s.ops:
        for vid in op.inputs:
            src = f"op{producer[vid].index}" if vid in producer else "in"
            c = chains.get(vid)
            taps = math.ceil((op.stage - s.values[vid].stage) / p.interval)
            label = f"{taps}/{c.effective}{' sram' if c and c.storage == 'sram' else ''}" if c else "0"
            lines.append(f'  {src} -> op{op.index} [label="{label}"];')
    if s.ops:
        lines.append(f"  op{s.ops[-1].index} -> out;")
    lines.append("}")
    return "\n".join(lines) + "\n"
