"""Command-line entry point: ``python -m unrolled_polar <command> ...``.

Relative output paths are resolved against ``$UNROLLED_POLAR_OUTDIR`` when
it is set, otherwise against the working directory.
"""
from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .codespec import CodeSpecError, assemble_master, construct, load_spec, save_spec
from .encoder import encode_nonsystematic, encode_systematic, from_text, to_hex, to_text
from .fastssc import NodeConstraints, build_tree, fastssc_decode, tree_to_dot
from .harness import (DECODERS, DecoderOptions, equivalence_run, montecarlo, transmit,
                      ChannelConfig, batch_rng, write_csv)
from .pipesim import build_pipeline, throughput_report
from .quant import QuantSpec, quantize_channel
from .sc_ref import sc_decode
from .unroll import (CostModel, apply_interval, compute_imax, estimate_cost, plan_to_json,
                     schedule_to_dot, sram_convert, unroll)

OUTDIR_ENV = "UNROLLED_POLAR_OUTDIR"


def out_path(path: str) -> Path:
    p = Path(path)
    if not p.is_absolute() and os.environ.get(OUTDIR_ENV):
        p = Path(os.environ[OUTDIR_ENV]) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(32)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def parse_span(text: str) -> tuple[int, int]:
    off, ln = text.split(":")
    return int(off), int(ln)


# -- shared option groups ---------------------------------------------------------

def add_tree_opts(p):
    g = p.add_argument_group("decoder tree")
    g.add_argument("--max-rep", type=int, default=8, help="largest repetition node (default 8)")
    g.add_argument("--max-spc", type=int, default=4, help="largest SPC node (default 4)")
    g.add_argument("--repspc", action="store_true", help="enable the fused repetition+SPC node")


def constraints(args) -> NodeConstraints:
    return NodeConstraints(args.max_rep, args.max_spc, args.repspc)


def add_quant(p, default="5.4.0"):
    p.add_argument("--quant", default=default, help=f"Qi.Qc.Qf fixed-point format (default {default}); 'float' disables")
    p.add_argument("--llr-scale", type=float, default=1.0, help="channel LLR scale before quantization")


def quant(args) -> QuantSpec | None:
    return None if args.quant in (None, "float") else QuantSpec.parse(args.quant)


def add_plan_opts(p):
    add_tree_opts(p)
    p.add_argument("--interval", type=int, default=1, help="initiation interval I (default 1)")
    p.add_argument("--sram-min-chain", type=int, default=None,
                   help="move register chains of at least this many stages into SRAM")


def build_plan(spec, args):
    q = quant(args) or QuantSpec(5, 4, 0)
    plan = apply_interval(unroll(build_tree(spec, constraints(args)), CostModel()), args.interval, q)
    if args.sram_min_chain is not None:
        plan = sram_convert(plan, args.sram_min_chain)
    return plan


# -- commands ---------------------------------------------------------------

def cmd_construct(args):
    spec = construct(args.n, args.k, args.design_snr, args.method, args.erasure_prob)
    save_spec(spec, out_path(args.output))
    print(f"{spec.label} -> {args.output}")


def cmd_assemble(args):
    left, right = load_spec(args.left), load_spec(args.right)
    spec = assemble_master(left, right, args.left_id or args.left, args.right_id or args.right)
    save_spec(spec, out_path(args.output))
    print(f"{left.label} + {right.label} = {spec.label} -> {args.output}")


def cmd_encode(args):
    spec = load_spec(args.code)
    if args.info is not None:
        info = from_text(args.info)[None, :]
    else:
        rng = np.random.default_rng(resolve_seed(args))
        info = rng.integers(0, 2, size=(args.count, spec.k), dtype=np.uint8)
    enc = encode_nonsystematic if args.nonsystematic else encode_systematic
    for x in enc(spec, info):
        print(to_hex(x) if args.format == "hex" else to_text(x))


def read_llrs(args, n):
    if args.llr is not None:
        rows = [args.llr]
    else:
        fh = open(args.llr_file) if args.llr_file != "-" else sys.stdin
        with fh:
            rows = [ln for ln in fh if ln.strip()]
    arr = np.array([parse_floats(r) for r in rows], dtype=float)
    if arr.shape[-1] != n:
        raise ValueError(f"expected {n} LLRs per line, got {arr.shape[-1]}")
    return arr


def cmd_decode(args):
    spec = load_spec(args.code)
    llr = read_llrs(args, spec.n)
    q = quant(args)
    if q is not None:
        llr = llr.astype(q.dtype) if args.raw else quantize_channel(llr, q, args.llr_scale)
    if args.decoder == "sc":
        xh = sc_decode(spec, llr, q)
    else:
        xh = fastssc_decode(build_tree(spec, constraints(args)), llr, q, args.ties)
    for x in xh:
        print(to_text(x) if not args.info_only else to_text(x[spec.info_indices]))


def cmd_tree(args):
    tree = build_tree(load_spec(args.code), constraints(args))
    counts = {}
    for leaf in tree.leaves():
        counts[leaf.kind] = counts.get(leaf.kind, 0) + 1
    print(f"{tree.spec.label}: {len(tree.leaves())} leaves " + " ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if args.verbose:
        for leaf in tree.leaves():
            print(f"  {leaf.kind:7s} [{leaf.offset}, {leaf.offset + leaf.length})")
    if args.dot:
        out_path(args.dot).write_text(tree_to_dot(tree))


def cmd_unroll(args):
    spec = load_spec(args.code)
    plan = build_plan(spec, args)
    s = plan.schedule
    print(f"{spec.label}: {len(s.ops)} ops, depth {s.depth}, latency {s.latency} CCs, "
          f"I_max {compute_imax(s)}, I {plan.interval}, "
          f"registers {plan.register_bits} b, SRAM {plan.sram_bits} b")
    if args.report:
        print(estimate_cost(plan, args.freq_mhz * 1e6).summary())
    if args.json:
        out_path(args.json).write_text(plan_to_json(plan))
    if args.dot:
        out_path(args.dot).write_text(schedule_to_dot(plan))


def cmd_pipesim(args):
    spec = load_spec(args.code)
    plan = build_plan(spec, args)
    modes = [parse_span(m) for m in args.mode]
    pipe = build_pipeline(plan, modes, quant(args))
    seed = resolve_seed(args)
    mode = pipe.modes.lookup(modes[0]) if modes else pipe.modes[0]
    sub = spec.subcode(*mode.span)
    rng = batch_rng(seed, 0, 0)
    info = rng.integers(0, 2, size=(args.frames, sub.k), dtype=np.uint8)
    llr = transmit(encode_systematic(sub, info), ChannelConfig(args.ebn0, sub.rate if sub.k else 1.0, seed), rng)
    q = pipe.quant
    frames = quantize_channel(llr, q, args.llr_scale) if q is not None else llr
    res = pipe.run_stream(frames, mode, trace=str(out_path(args.trace)) if args.trace else None)
    ref = fastssc_decode(pipe.plan.schedule.tree.subtree(pipe.plan.schedule.tree.find(*mode.span)), frames, q)
    bad = int(np.any(res.estimates != ref, axis=1).sum())
    print(f"mode {mode.index} {mode.code} span {mode.span}: entry stage {mode.entry_stage}, "
          f"i_start mod I = {mode.i_start % pipe.interval}, latency {mode.latency} CCs")
    print(f"{args.frames} frames in {res.cycles} cycles, {bad} mismatches vs one-shot decoding")
    print(throughput_report(pipe, mode, args.freq_mhz * 1e6).summary())
    return 1 if bad else 0


def cmd_montecarlo(args):
    spec = load_spec(args.code)
    seed = resolve_seed(args)
    opts = DecoderOptions(constraints(args), args.llr_scale, args.interval)
    rows = montecarlo(spec, args.decoder or ["fastssc-fixed"], quant(args), parse_floats(args.ebn0), seed,
                      args.min_frame_errors, args.max_frames, args.batch_size, args.workers, opts)
    write_csv(rows, sys.stdout)
    if args.output:
        write_csv(rows, out_path(args.output))


def cmd_equivalence(args):
    spec = load_spec(args.code)
    q = quant(args)
    if q is None:
        raise ValueError("equivalence needs a fixed-point format")
    rep = equivalence_run(spec, q, args.trials, resolve_seed(args), constraints(args), args.ebn0, args.llr_scale)
    print(f"{rep.mismatches} mismatches ({rep.trials} trials, {rep.code}, {rep.quant})")
    return 1 if rep.mismatches else 0


def cmd_report(args):
    rows = []
    for cfg in (catalog.nmax_1024(), catalog.nmax_2048()):
        pipe = catalog.config_pipeline(cfg)
        col = 0 if cfg.n_max == 1024 else 1
        for label, span in cfg.modes.items():
            r = throughput_report(pipe, span, cfg.f_hz)
            ref_tp, ref_lat = catalog.REFERENCE["benchmark"][label][col]
            rows.append({
                "decoder": cfg.name, "code": label, "info_tp_gbps": round(r.info_tp_bps / 1e9, 4),
                "ref_info_tp_gbps": ref_tp, "latency_cc": r.latency_cycles, "ref_latency_cc": ref_lat,
                "delta_cc": None if ref_lat is None else r.latency_cycles - ref_lat,
                "latency_ns": round(r.latency_s * 1e9, 1),
                "i_start_mod_I": pipe.modes.lookup(span).i_start % cfg.interval,
            })
    print(f"{'decoder':9s} {'code':12s} {'T/P':>8s} {'ref':>6s} {'lat':>5s} {'ref':>5s} {'delta':>6s} {'ns':>8s}")
    for r in rows:
        print(f"{r['decoder']:9s} {r['code']:12s} {r['info_tp_gbps']:8.3f} {r['ref_info_tp_gbps'] or '-':>6} "
              f"{r['latency_cc']:5d} {r['ref_latency_cc'] or '-':>5} {r['delta_cc'] if r['delta_cc'] is not None else '-':>6} "
              f"{r['latency_ns']:8.1f}")
    if args.json:
        out_path(args.json).write_text(json.dumps(rows, indent=1) + "\n")


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="unrolled-polar", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build a polar code and write its spec file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--method", choices=["ga", "bhattacharyya"], default="ga")
    p.add_argument("--design-snr", type=float, default=0.0, help="design Eb/N0 in dB")
    p.add_argument("--erasure-prob", type=float, default=None, help="Bhattacharyya start value (overrides --design-snr)")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("assemble", help="concatenate two equal-length codes into a master code")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--left-id")
    p.add_argument("--right-id")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("encode", help="encode information bits")
    p.add_argument("code")
    p.add_argument("--info", help="information bits as a 0/1 string")
    p.add_argument("--count", type=int, default=1, help="random words to encode when --info is absent")
    p.add_argument("--seed", type=int)
    p.add_argument("--nonsystematic", action="store_true")
    p.add_argument("--format", choices=["text", "hex"], default="text")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode channel LLRs (one frame per line)")
    p.add_argument("code")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--llr", help="one frame of comma or space separated LLRs")
    src.add_argument("--llr-file", help="file with one frame per line ('-' for stdin)")
    p.add_argument("--decoder", choices=["sc", "fastssc"], default="fastssc")
    add_quant(p, default="float")
    p.add_argument("--raw", action="store_true", help="LLRs are already raw fixed-point integers")
    p.add_argument("--ties", choices=["sc", "direct"], default="sc")
    p.add_argument("--info-only", action="store_true", help="print only the information bits")
    add_tree_opts(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("tree", help="show the pruned decoder tree")
    p.add_argument("code")
    add_tree_opts(p)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--dot", help="write the tree as Graphviz DOT")
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("unroll", help="schedule the unrolled decoder and report its cost")
    p.add_argument("code")
    add_plan_opts(p)
    add_quant(p)
    p.add_argument("--freq-mhz", type=float, default=500.0)
    p.add_argument("--report", action="store_true", help="print throughput, latency and area")
    p.add_argument("--json", help="write the plan as JSON")
    p.add_argument("--dot", help="write the dataflow graph as DOT")
    p.set_defaults(func=cmd_unroll)

    p = sub.add_parser("pipesim", help="stream random frames through the cycle-accurate pipeline")
    p.add_argument("code")
    add_plan_opts(p)
    add_quant(p)
    p.add_argument("--mode", action="append", default=[], metavar="OFFSET:LENGTH",
                   help="constituent-code mode; the first one given is simulated (default: master)")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--ebn0", type=float, default=2.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", help="write a per-cycle CSV trace")
    p.add_argument("--freq-mhz", type=float, default=500.0)
    p.set_defaults(func=cmd_pipesim)

    p = sub.add_parser("montecarlo", help="FER/BER sweep over Eb/N0")
    p.add_argument("code")
    p.add_argument("--ebn0", required=True, help="Eb/N0 points in dB, e.g. '1,1.5,2'")
    p.add_argument("--decoder", action="append", choices=DECODERS, help="repeatable (default fastssc-fixed)")
    add_quant(p)
    add_tree_opts(p)
    p.add_argument("--interval", type=int, default=1, help="initiation interval for the pipesim decoder")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--min-frame-errors", type=int, default=100)
    p.add_argument("--max-frames", type=int, default=100_000)
    p.add_argument("--batch-size", type=int, default=1000)
    p.add_argument("-o", "--output", help="CSV file (also printed to stdout)")
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("equivalence", help="count SC vs Fast-SSC mismatches on quantized noisy frames")
    p.add_argument("code")
    add_quant(p)
    add_tree_opts(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--ebn0", type=float, default=2.0)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_equivalence)

    p = sub.add_parser("report", help="latency/throughput of the two multi-mode decoders vs reference values")
    p.add_argument("--json", help="write the rows as JSON")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except (CodeSpecError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
