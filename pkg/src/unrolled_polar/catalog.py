"""The ten benchmark codes and the two multi-mode decoder configurations.

Frozen sets are built with :func:`construct` from fixed profiles. The
(1024,853) code is chosen so that its left/right constituents have the
dimensions of the seven shorter benchmark codes.

``REFERENCE`` holds published cycle counts and throughputs used only as
calibration targets; computed values are reported next to them.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .codespec import CodeSpec, assemble_master, construct
from .fastssc import NodeConstraints, build_tree
from .pipesim import Pipeline, build_pipeline
from .quant import QuantSpec
from .unroll import apply_interval, unroll

PROFILES = {
    (1024, 853): dict(design_snr_db=5.75, method="bhattacharyya"),
    (1024, 512): dict(design_snr_db=2.5, method="ga"),
}

# label -> span inside the (1024,853) master
CONSTITUENTS_1024 = {
    "(512,363)": (0, 512),
    "(512,490)": (512, 512),
    "(256,135)": (0, 256),
    "(256,228)": (256, 256),
    "(128,39)": (0, 128),
    "(128,96)": (128, 128),
    "(128,108)": (512, 128),
}


@dataclass(frozen=True)
class DecoderConfig:
    name: str
    n_max: int
    constraints: NodeConstraints
    f_hz: float
    interval: int
    modes: dict  # label -> span in the master


@lru_cache(maxsize=None)
def code_1024_853() -> CodeSpec:
    return construct(1024, 853, **PROFILES[(1024, 853)])


@lru_cache(maxsize=None)
def code_1024_512() -> CodeSpec:
    return construct(1024, 512, **PROFILES[(1024, 512)])


@lru_cache(maxsize=None)
def code_2048_1365() -> CodeSpec:
    return assemble_master(code_1024_512(), code_1024_853(), "(1024,512)", "(1024,853)")


def nmax_1024() -> DecoderConfig:
    modes = {"(1024,853)": (0, 1024), **CONSTITUENTS_1024}
    return DecoderConfig("nmax1024", 1024, NodeConstraints(8, 4, False), 500e6, 20, modes)


def nmax_2048() -> DecoderConfig:
    modes = {"(2048,1365)": (0, 2048), "(1024,512)": (0, 1024), "(1024,853)": (1024, 1024)}
    modes.update({label: (1024 + off, ln) for label, (off, ln) in CONSTITUENTS_1024.items()})
    return DecoderConfig("nmax2048", 2048, NodeConstraints(16, 8, True), 250e6, 20, modes)


def config_pipeline(cfg: DecoderConfig, quant: QuantSpec | None | str = "plan",
                    q_plan: QuantSpec = QuantSpec(5, 4, 0)) -> Pipeline:
    """Multi-mode pipeline for ``cfg``; mode ``i`` follows ``cfg.modes`` order."""
    master = benchmark_codes()[next(iter(cfg.modes))]
    # constituents inherit the master's interval even above their own I_max
    plan = apply_interval(unroll(build_tree(master, cfg.constraints)), cfg.interval, q_plan, strict=False)
    return build_pipeline(plan, list(cfg.modes.values()), quant)


def benchmark_codes() -> dict[str, CodeSpec]:
    """All ten benchmark codes, longest first."""
    master = code_1024_853()
    codes = {
        "(2048,1365)": code_2048_1365(),
        "(1024,853)": master,
        "(1024,512)": code_1024_512(),
    }
    for label, (off, ln) in CONSTITUENTS_1024.items():
        codes[label] = master.subcode(off, ln)
    order = ["(2048,1365)", "(1024,853)", "(1024,512)", "(512,490)", "(512,363)", "(256,228)",
             "(256,135)", "(128,108)", "(128,96)", "(128,39)"]
    return {label: codes[label] for label in order}


def benchmark_constraints(label: str) -> NodeConstraints:
    """Node constraints under which a benchmark code is decoded: the
    N_max=1024 decoder where it is supported, the N_max=2048 one otherwise."""
    cfg = nmax_1024() if label in nmax_1024().modes else nmax_2048()
    return cfg.constraints


# Published calibration targets (not contracts).
REFERENCE = {
    # label: (info T/P Gbps, latency CCs) for N_max = 1024 and 2048
    "benchmark": {
        "(2048,1365)": ((None, None), (17.1, 503)),
        "(1024,853)": ((21.3, 323), (10.7, 236)),
        "(1024,512)": ((None, None), (6.4, 265)),
        "(512,490)": ((12.3, 95), (6.2, 75)),
        "(512,363)": ((9.1, 226), (4.5, 159)),
        "(256,228)": ((5.7, 86), (2.6, 61)),
        "(256,135)": ((3.4, 138), (1.7, 96)),
        "(128,108)": ((2.7, 54), (1.4, 40)),
        "(128,96)": ((2.4, 82), (1.2, 52)),
        "(128,39)": ((0.98, 54), (0.49, 42)),
    },
    # deep pipeline, rate 1/2: n -> (logic mm2, memory mm2, latency CCs at 500 MHz)
    "length_scaling": {
        128: (0.05, 0.29, 76),
        256: (0.12, 0.99, 134),
        512: (0.27, 3.14, 204),
        1024: (0.60, 11.75, 364),
        2048: (1.32, 42.16, 652),
    },
    "imax_1024_512": 167,
    "latency_1024_512": 364,
    "mode_128_96": {"i_start_mod_20": 17, "latency": 82},
}
