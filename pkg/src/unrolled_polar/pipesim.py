"""Cycle-accurate model of an unrolled decoder pipeline.

The pipeline is built from a :class:`~unrolled_polar.unroll.PipelinePlan`.
Every value with a non-zero lifetime owns a storage chain sized by the plan
(``ceil(L / I)`` registers, or one register plus a circular-buffer SRAM).
An enable counter runs modulo ``I``; on each cycle only the operations whose
stage is congruent to the counter are evaluated, and only their chains
shift. A consumer ``c - p`` stages after the producer reads tap
``ceil((c - p) / I)`` (tap 0 is the producer's combinational output).

Multi-mode operation injects frames of a constituent code at the stage
where its subtree's input LLRs are produced and taps the estimate where the
subtree's root combine finishes. One mode is active at a time.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .fastssc import RATE0, Node, decode_leaf
from .quant import QuantSpec
from .sc_ref import combine_op, f_op, g0r_op, g_op, prepare_llrs
from .unroll import Chain, CostReport, PipelinePlan, logic_area_mm2, memory_area_mm2, throughput


@dataclass(frozen=True)
class Mode:
    index: int
    code: str
    span: tuple[int, int]
    k: int
    entry_stage: int  # stage whose register receives injected frames
    exit_stage: int  # stage of the subtree's last op
    latency: int  # cycles from injection to emission, both inclusive
    i_start: int

    @property
    def n(self) -> int:
        return self.span[1]


class ModeTable(list):
    """Modes in build order; mode 0 is the master code."""

    def latency_lut(self) -> dict[int, int]:
        return {m.index: m.latency for m in self}

    def istart_lut(self, interval: int) -> dict[int, int]:
        return {m.index: m.i_start % interval for m in self}

    def lookup(self, key) -> Mode:
        if isinstance(key, Mode):
            return key
        if isinstance(key, (int, np.integer)):
            return self[key]
        for m in self:
            if key in (m.code, m.span, f"{m.span[0]}:{m.span[1]}"):
                return m
        raise KeyError(f"no mode {key!r}")


class _Registers:
    def __init__(self, length):
        self.taps = deque([(None, -1)] * length, maxlen=length)

    def read(self, tap):
        return self.taps[tap - 1]

    def shift(self, item):
        self.taps.appendleft(item)


class _Sram:
    """First register plus a circular buffer of ``depth`` words.

    The buffer is written from the first register on every enabled edge and
    read at the same edge (read-during-write returns the new word) one
    address ahead of the write pointer, so its output is the oldest word.
    """

    def __init__(self, depth):
        self.depth = depth
        self.reg = (None, -1)
        self.mem = [(None, -1)] * depth
        self.q = (None, -1)
        self.waddr = 0
        self.raddr = 1 % depth

    def read(self, tap):
        if tap == 1:
            return self.reg
        if tap == self.depth + 1:
            return self.q
        raise ValueError(f"SRAM chain has no tap {tap}")

    def shift(self, item):
        self.mem[self.waddr] = self.reg
        self.q = self.mem[self.raddr]
        self.reg = item
        self.waddr = (self.waddr + 1) % self.depth
        self.raddr = (self.raddr + 1) % self.depth


def _storage(chain: Chain):
    if chain.storage == "sram":
        return _Sram(chain.sram_depth)
    return _Registers(chain.effective)


@dataclass
class StreamResult:
    estimates: np.ndarray  # (frames, ..., span) in injection order
    injected: list[int]  # cycle of each injection
    emitted: list[int]  # cycle of each emission
    cycles: int


class Pipeline:
    def __init__(self, plan: PipelinePlan, modes: ModeTable, quant: QuantSpec | None, ties: str):
        self.plan = plan
        self.modes = modes
        self.quant = quant
        self.ties = ties
        self.interval = plan.interval
        s = plan.schedule
        self._values = s.values
        self._leaf_nodes = {leaf.span: leaf for leaf in s.tree.leaves()}
        self._programs = {m.index: self._compile(m) for m in modes}
        self.mode = modes[0]
        self.reset()

    # -- build ----------------------------------------------------------------

    def _compile(self, mode: Mode):
        s = self.plan.schedule
        node = s.tree.find(*mode.span)
        alpha, beta = s.node_io[mode.span]
        ops = s.ops_in(node)
        I = self.interval
        by_phase = [[] for _ in range(I)]
        for op in ops:
            reads = []
            for vid in op.inputs:
                gap = op.stage - self._values[vid].stage
                reads.append((vid, 0 if gap == 0 else math.ceil(gap / I)))
            by_phase[op.stage % I].append((op, tuple(reads)))
        produced = {alpha} | {op.output for op in ops}
        return {"alpha": alpha, "beta": beta, "by_phase": by_phase, "produced": produced}

    def reset(self, mode=None):
        """Drain the pipeline and select ``mode``."""
        if mode is not None:
            self.mode = self.modes.lookup(mode)
        self.prog = self._programs[self.mode.index]
        chains = self.plan.chain_map
        self.storage = {vid: _storage(chains[vid]) for vid in self.prog["produced"] if vid in chains}
        self.cycle = 0
        self.phase = self.mode.i_start % self.interval
        self.out_reg = (None, -1)

    # -- simulation -------------------------------------------------------------

    def _eval(self, op, args):
        q = self.quant
        if op.kind == "F":
            return f_op(args[0], q)
        if op.kind == "G":
            return g_op(args[0], args[1], q)
        if op.kind == "G0R":
            return g0r_op(args[0], q)
        if op.kind == "C0R":
            return np.concatenate([args[0], args[0]], axis=-1)
        if op.kind == "COMBINE":
            if len(args) == 1:
                return np.concatenate([args[0], np.zeros_like(args[0])], axis=-1)
            return combine_op(args[0], args[1])
        return decode_leaf(self._leaf_nodes[op.span], args[0], q, self.ties)

    def can_inject(self) -> bool:
        return self.phase == self.mode.entry_stage % self.interval

    def step(self, frame=None, frame_id: int = -1):
        """Advance one clock cycle.

        ``frame`` is presented at the injection multiplexer; it must be
        ``None`` unless :meth:`can_inject`. Returns ``(estimate, frame_id)``
        from the output register, or ``(None, -1)`` when no frame completes
        in this cycle.
        """
        emitted, self.out_reg = self.out_reg, (None, -1)
        comb = {}
        alpha = self.prog["alpha"]
        if self.can_inject():
            comb[alpha] = (frame, frame_id if frame is not None else -1)
        elif frame is not None:
            raise RuntimeError(f"cycle {self.cycle}: injection only at phase {self.mode.entry_stage % self.interval}")
        for op, reads in self.prog["by_phase"][self.phase]:
            ins = [comb[vid] if tap == 0 else self.storage[vid].read(tap) for vid, tap in reads]
            tag = ins[0][1]
            if tag < 0 or any(d is None for d, _ in ins):
                comb[op.output] = (None, -1)
            else:
                comb[op.output] = (self._eval(op, [d for d, _ in ins]), tag)
        for vid, item in comb.items():
            if vid in self.storage:
                self.storage[vid].shift(item)
        beta = self.prog["beta"]
        if beta in comb:
            self.out_reg = comb[beta]
        self.cycle += 1
        self.phase = (self.phase + 1) % self.interval
        return emitted

    def run_stream(self, frames, mode=None, trace=None) -> StreamResult:
        """Inject ``frames`` back to back (one every ``I`` cycles) and
        collect the estimates.

        ``frames`` has shape ``(count, ..., span)``; extra axes are decoded
        as independent lanes. ``trace`` may be a path or an open text file
        for the per-cycle CSV trace.
        """
        self.reset(mode)
        m = self.mode
        frames = prepare_llrs(frames, self.quant)
        if frames.ndim < 2 or frames.shape[-1] != m.n:
            raise ValueError(f"expected frames of shape (count, ..., {m.n}), got {frames.shape}")
        count = frames.shape[0]
        out = np.zeros(frames.shape, dtype=np.uint8)
        injected, emitted = [-1] * count, [-1] * count
        rows = []
        nxt = done = 0
        while done < count:
            fid = -1
            if nxt < count and self.can_inject():
                fid = nxt
                injected[fid] = self.cycle
                nxt += 1
            cycle, phase = self.cycle, self.phase
            data, tag = self.step(frames[fid] if fid >= 0 else None, fid)
            if tag >= 0:
                out[tag] = data
                emitted[tag] = cycle
                done += 1
            if trace is not None:
                rows.append((cycle, phase, fid, tag))
            if self.cycle > (count + 2) * self.interval + m.latency + 2:
                raise RuntimeError("pipeline did not drain")
        if trace is not None:
            _write_trace(trace, rows)
        return StreamResult(out, injected, emitted, self.cycle)


def _write_trace(trace, rows):
    def dump(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "phase", "injected_frame", "emitted_frame"])
        w.writerows(rows)

    if hasattr(trace, "write"):
        dump(trace)
    else:
        with open(trace, "w", newline="") as fh:
            dump(fh)


def _as_span(m) -> tuple[int, int]:
    if isinstance(m, Node):
        return m.span
    return (int(m[0]), int(m[1]))


def build_pipeline(plan: PipelinePlan, modes=(), quant: QuantSpec | None | str = "plan",
                   ties: str = "sc") -> Pipeline:
    """Pipeline plus mode table.

    ``modes`` lists extra subtree roots (nodes or ``(offset, length)``
    spans); the master code is always mode 0. ``quant="plan"`` decodes in
    the plan's fixed-point format, ``None`` in floating point.
    """
    s = plan.schedule
    cm = s.cost_model
    q = plan.quant if quant == "plan" else quant
    spans = [(0, s.n)]
    for m in modes:
        sp = _as_span(m)
        if sp not in spans:
            spans.append(sp)
    table = ModeTable()
    for i, sp in enumerate(spans):
        node = s.tree.find(*sp)
        if node is None:
            raise ValueError(f"span {sp} is not a node of the decoder tree")
        if node.kind == RATE0:
            raise ValueError(f"span {sp} is a rate-0 node; there is nothing to decode")
        alpha, beta = s.node_io[sp]
        entry = s.values[alpha].stage
        exit_ = s.values[beta].stage
        sub = s.tree.spec.subcode(*sp)
        table.append(Mode(
            index=i,
            code=sub.label,
            span=sp,
            k=sub.k,
            entry_stage=entry,
            exit_stage=exit_,
            latency=cm.load + (exit_ - entry) + cm.offload,
            i_start=entry,
        ))
    return Pipeline(plan, table, q, ties)


def throughput_report(pipe: Pipeline, mode, f_hz: float) -> CostReport:
    m = pipe.modes.lookup(mode)
    coded, info = throughput(m.n, m.k, f_hz, pipe.interval)
    return CostReport(
        code=m.code,
        n=m.n,
        k=m.k,
        interval=pipe.interval,
        f_hz=f_hz,
        coded_tp_bps=coded,
        info_tp_bps=info,
        latency_cycles=m.latency,
        latency_s=m.latency / f_hz,
        bus_width=m.n,
        logic_area_mm2=logic_area_mm2(pipe.plan.schedule.n),
        memory_area_mm2=memory_area_mm2(pipe.plan.schedule.n),
        register_bits=pipe.plan.register_bits,
        sram_bits=pipe.plan.sram_bits,
    )
