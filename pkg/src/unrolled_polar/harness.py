"""BPSK/AWGN Monte-Carlo simulation.

Random streams are derived from ``SeedSequence(seed, spawn_key=(point,
batch))``, so every batch of frames is reproducible on its own. Batches are
dealt to workers round-robin and merged in batch order; the stop rule is
applied in that order too, which makes results independent of both the
worker count and the scheduling.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .codespec import CodeSpec, from_dict, to_dict
from .encoder import encode_systematic
from .fastssc import NodeConstraints, build_tree, fastssc_decode
from .quant import QuantSpec, quantize_channel
from .sc_ref import sc_decode

DECODERS = ("sc-float", "sc-fixed", "fastssc-float", "fastssc-fixed", "pipesim")
CSV_FIELDS = ("ebn0_db", "frames", "bit_errors", "frame_errors", "ber", "fer", "decoder", "quant", "code")


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    rate: float
    seed: int = 0
    llr_scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.rate <= 1:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


def channel_llr(y, sigma2: float):
    """LLR ``ln P(y|0) / P(y|1)`` of a BPSK symbol observed in noise of variance ``sigma2``."""
    return 2.0 * np.asarray(y, dtype=float) / sigma2


def transmit(codeword, cfg: ChannelConfig, rng: np.random.Generator | None = None,
             sigma2: float | None = None):
    """BPSK (0 -> +1) over AWGN; returns channel LLRs ``2y / sigma^2``.

    ``sigma2`` overrides the noise variance derived from ``cfg``; pass 0 for
    a noiseless channel (LLRs become ``+-2 / tiny``, i.e. very large).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    s2 = cfg.sigma2 if sigma2 is None else sigma2
    x = 1.0 - 2.0 * np.asarray(codeword, dtype=float)
    if s2 == 0:
        return x * 1e9
    y = x + rng.normal(0.0, math.sqrt(s2), size=x.shape)
    return channel_llr(y, s2)


@dataclass(frozen=True)
class ResultRow:
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    decoder: str
    quant: str
    code: str
    segment_frame_errors: tuple = field(default=(), compare=True)

    def csv_row(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in CSV_FIELDS}


def write_csv(rows, path_or_file) -> None:
    def dump(fh):
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r.csv_row())

    if hasattr(path_or_file, "write"):
        dump(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            dump(fh)


# -- decoders -----------------------------------------------------------------

@dataclass(frozen=True)
class DecoderOptions:
    constraints: NodeConstraints = NodeConstraints()
    llr_scale: float = 1.0
    interval: int = 1  # pipesim only
    ties: str = "sc"


def make_decoder(spec: CodeSpec, name: str, quant: QuantSpec | None, opts: DecoderOptions = DecoderOptions()):
    """Callable mapping real channel LLRs (batch, n) to codeword estimates."""
    if name not in DECODERS:
        raise ValueError(f"unknown decoder {name!r}; choose from {DECODERS}")
    fixed = name.endswith("-fixed") or name == "pipesim"
    if fixed and quant is None:
        raise ValueError(f"decoder {name} needs a quantization format")

    def q_in(llr):
        return quantize_channel(llr, quant, opts.llr_scale) if fixed else llr

    if name.startswith("sc-"):
        q = quant if fixed else None
        return lambda llr: sc_decode(spec, q_in(llr), q)
    tree = build_tree(spec, opts.constraints)
    if name.startswith("fastssc-"):
        q = quant if fixed else None
        return lambda llr: fastssc_decode(tree, q_in(llr), q, opts.ties)

    from .pipesim import build_pipeline
    from .unroll import apply_interval, unroll

    pipe = build_pipeline(apply_interval(unroll(tree), opts.interval, quant), ties=opts.ties)
    return lambda llr: pipe.run_stream(q_in(llr)).estimates


# -- Monte-Carlo ----------------------------------------------------------------

def batch_rng(seed: int, point: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, batch)))


_WORKER_CACHE: dict = {}


def _run_batch(job):
    key, spec_d, names, quant_s, opts, ebn0, point, batch, frames, seed, zero_noise, segments = job
    cache = _WORKER_CACHE.get(key)
    if cache is None:
        spec = from_dict(spec_d)
        quant = QuantSpec.parse(quant_s) if quant_s else None
        cache = (spec, [make_decoder(spec, nm, quant, opts) for nm in names])
        _WORKER_CACHE.clear()
        _WORKER_CACHE[key] = cache
    spec, decoders = cache
    rng = batch_rng(seed, point, batch)
    info = rng.integers(0, 2, size=(frames, spec.k), dtype=np.uint8)
    x = encode_systematic(spec, info)
    cfg = ChannelConfig(ebn0, spec.rate if spec.k else 1.0, seed, opts.llr_scale)
    llr = transmit(x, cfg, rng, sigma2=0.0 if zero_noise else None)
    idx = spec.info_indices
    out = []
    for dec in decoders:
        err = dec(llr)[:, idx] != x[:, idx]
        seg = []
        for off, ln in segments:
            sel = (idx >= off) & (idx < off + ln)
            seg.append(int(np.count_nonzero(err[:, sel].any(axis=1))))
        out.append((int(err.sum()), int(np.count_nonzero(err.any(axis=1))), tuple(seg)))
    return out


def montecarlo(spec: CodeSpec, decoders, quant: QuantSpec | None, ebn0_points, seed: int,
               min_frame_errors: int = 100, max_frames: int = 100_000, batch_size: int = 1000,
               workers: int = 1, opts: DecoderOptions = DecoderOptions(), zero_noise: bool = False,
               segments=()) -> list[ResultRow]:
    """Simulate every decoder on the same frames at each Eb/N0 point.

    A point stops once every decoder has ``min_frame_errors`` frame errors
    or ``max_frames`` frames were sent. ``segments`` lists ``(offset,
    length)`` spans for which frame errors are also counted separately
    (info positions inside the span only).
    """
    if isinstance(decoders, str):
        decoders = [decoders]
    decoders = list(decoders)
    spec_d = to_dict(spec)
    quant_s = str(quant) if quant is not None else ""
    key = (repr(spec_d), tuple(decoders), quant_s, opts)
    rows = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for point, ebn0 in enumerate(ebn0_points):
            totals = [[0, 0, np.zeros(len(segments), dtype=np.int64)] for _ in decoders]
            frames = 0
            batch = 0
            done = False
            while not done:
                jobs = []
                for _ in range(max(1, workers)):
                    nf = min(batch_size, max_frames - frames - sum(j[8] for j in jobs))
                    if nf <= 0:
                        break
                    jobs.append((key, spec_d, decoders, quant_s, opts, float(ebn0), point, batch,
                                 nf, seed, zero_noise, tuple(segments)))
                    batch += 1
                if not jobs:
                    break
                results = pool.map(_run_batch, jobs) if pool else map(_run_batch, jobs)
                for job, res in zip(jobs, results):
                    frames += job[8]
                    for t, (be, fe, seg) in zip(totals, res):
                        t[0] += be
                        t[1] += fe
                        t[2] += np.asarray(seg, dtype=np.int64)
                    if all(t[1] >= min_frame_errors for t in totals) or frames >= max_frames:
                        done = True
                        break
            for name, (be, fe, seg) in zip(decoders, totals):
                rows.append(ResultRow(
                    ebn0_db=float(ebn0),
                    frames=frames,
                    bit_errors=be,
                    frame_errors=fe,
                    ber=be / (frames * spec.k) if frames and spec.k else 0.0,
                    fer=fe / frames if frames else 0.0,
                    decoder=name,
                    quant=quant_s if (name.endswith("-fixed") or name == "pipesim") else "float",
                    code=spec.label,
                    segment_frame_errors=tuple(int(v) for v in seg),
                ))
    finally:
        if pool:
            pool.shutdown()
    return rows


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))


# -- equivalence ----------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    code: str
    quant: str
    trials: int
    mismatches: int
    first_mismatch: int | None = None

    def __str__(self):
        return f"{self.code} {self.quant}: {self.trials} trials, {self.mismatches} mismatches"


def equivalence_run(spec: CodeSpec, quant: QuantSpec, trials: int, seed: int = 0,
                    constraints: NodeConstraints = NodeConstraints(), ebn0_db: float = 2.0,
                    llr_scale: float = 1.0, batch_size: int = 1000) -> EquivalenceReport:
    """Decode identical quantized noisy frames with SC and Fast-SSC and
    count frames whose codeword estimates differ."""
    tree = build_tree(spec, constraints)
    mismatches, first = 0, None
    done = 0
    batch = 0
    while done < trials:
        nf = min(batch_size, trials - done)
        rng = batch_rng(seed, 0, batch)
        info = rng.integers(0, 2, size=(nf, spec.k), dtype=np.uint8)
        x = encode_systematic(spec, info)
        cfg = ChannelConfig(ebn0_db, spec.rate if spec.k else 1.0, seed, llr_scale)
        raw = quantize_channel(transmit(x, cfg, rng), quant, llr_scale)
        diff = np.any(sc_decode(spec, raw, quant) != fastssc_decode(tree, raw, quant), axis=1)
        if first is None and diff.any():
            first = done + int(np.argmax(diff))
        mismatches += int(diff.sum())
        done += nf
        batch += 1
    return EquivalenceReport(spec.label, str(quant), trials, mismatches, first)
